#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "backend.hpp"
#include "prompts.hpp"

namespace selfdc {

// One atomic fact. Dates are ISO yyyy-mm-dd strings, compared lexically.
struct Fact {
  std::string pattern;  // question substring that identifies the fact
  std::string answer;
  std::string date;          // effective date of the fact
  int confidence = 95;       // verbalized confidence when known
};

// A registered compositional question with its canonical decomposition.
struct CompositeEntry {
  std::string pattern;
  std::vector<std::string> sub_questions;
  std::string answer;
  int confidence = 40;  // mid-range by construction: uncertain
};

struct FactBase {
  std::string cutoff_date;
  std::vector<Fact> facts;
  std::vector<CompositeEntry> composites;

  static FactBase from_file(const std::string& path);

  const Fact* lookup(const std::string& question) const;
  const CompositeEntry* lookup_composite(const std::string& question) const;
};

// Synthetic knowledge-cutoff oracle. Recognizes the artifact's own prompt
// templates by their literal segments (no NLP) and answers from the fact
// base: facts effective before the cutoff date are "known" (high confidence,
// correct answer), facts after it are unknown (confidence 0), and registered
// compositional patterns score mid-range and decompose into their registered
// sub-questions. Read/combine prompts answer by exact lookup against the
// supplied passage or sub-answers.
class OracleBackend : public Backend {
 public:
  OracleBackend(FactBase kb, PromptRegistry prompts,
                std::string id = "oracle");

  Generation complete(const PromptRequest& request) override;
  std::string id() const override { return id_; }

  const FactBase& kb() const { return kb_; }

 private:
  Generation answer_confidence(const std::string& question) const;
  Generation answer_decompose(const std::string& question) const;
  Generation answer_read(const std::string& passage,
                         const std::string& question) const;
  Generation answer_generate_passage(const std::string& question) const;
  Generation answer_combine(const std::string& question,
                            const std::string& sub_qas) const;
  Generation answer_direct(const std::string& question,
                           bool want_probs) const;
  Generation answer_judge(const std::string& question,
                          const std::string& golds,
                          const std::string& prediction) const;

  int confidence_for(const std::string& question) const;

  FactBase kb_;
  PromptRegistry prompts_;
  std::string id_;
};

// Matches a prompt against a {slot} template by locating the template's
// literal segments in order; returns the slot values, or nullopt when the
// prompt does not fit the template.
std::optional<std::map<std::string, std::string>> match_template(
    const std::string& tmpl, const std::string& prompt);

}  // namespace selfdc
