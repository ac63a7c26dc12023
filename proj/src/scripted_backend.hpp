#pragma once

#include <optional>
#include <string>
#include <vector>

#include "backend.hpp"

namespace selfdc {

// One replay rule: first rule whose match string occurs in the prompt wins.
// An empty match string matches every prompt (catch-all).
struct ScriptedRule {
  std::string match;
  std::string response;
  std::optional<std::vector<double>> token_probs;
};

// Deterministic rule-table backend for tests and record/replay fixtures.
// Pure function of (rule table, request): repeated calls are byte-identical.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<ScriptedRule> rules,
                           std::string id = "scripted");

  // Rule file: JSON list of {match, response, token_probs?}.
  static ScriptedBackend from_file(const std::string& path);

  Generation complete(const PromptRequest& request) override;
  std::string id() const override { return id_; }

 private:
  std::vector<ScriptedRule> rules_;
  std::string id_;
};

}  // namespace selfdc
