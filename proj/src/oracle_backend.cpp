#include "oracle_backend.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace selfdc {

using nlohmann::json;

namespace {

std::string casefold(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
  return casefold(haystack).find(casefold(needle)) != std::string::npos;
}

}  // namespace

FactBase FactBase::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BackendUnavailable("cannot open fact base: " + path);
  json j = json::parse(in);
  FactBase kb;
  kb.cutoff_date = j.at("cutoff_date").get<std::string>();
  for (const auto& fj : j.value("facts", json::array())) {
    Fact f;
    f.pattern = fj.at("pattern").get<std::string>();
    f.answer = fj.at("answer").get<std::string>();
    f.date = fj.at("date").get<std::string>();
    f.confidence = fj.value("confidence", 95);
    kb.facts.push_back(std::move(f));
  }
  for (const auto& cj : j.value("composites", json::array())) {
    CompositeEntry c;
    c.pattern = cj.at("pattern").get<std::string>();
    c.sub_questions =
        cj.at("sub_questions").get<std::vector<std::string>>();
    c.answer = cj.at("answer").get<std::string>();
    c.confidence = cj.value("confidence", 40);
    kb.composites.push_back(std::move(c));
  }
  return kb;
}

const Fact* FactBase::lookup(const std::string& question) const {
  for (const auto& f : facts)
    if (contains_ci(question, f.pattern)) return &f;
  return nullptr;
}

const CompositeEntry* FactBase::lookup_composite(
    const std::string& question) const {
  for (const auto& c : composites)
    if (contains_ci(question, c.pattern)) return &c;
  return nullptr;
}

std::optional<std::map<std::string, std::string>> match_template(
    const std::string& tmpl, const std::string& prompt) {
  // Split template into literal/slot alternation.
  std::vector<std::pair<bool, std::string>> parts;  // {is_slot, text}
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t open = tmpl.find('{', pos);
    if (open == std::string::npos) {
      parts.emplace_back(false, tmpl.substr(pos));
      break;
    }
    std::size_t close = tmpl.find('}', open);
    if (close == std::string::npos) {
      parts.emplace_back(false, tmpl.substr(pos));
      break;
    }
    if (open > pos) parts.emplace_back(false, tmpl.substr(pos, open - pos));
    parts.emplace_back(true, tmpl.substr(open + 1, close - open - 1));
    pos = close + 1;
  }

  std::map<std::string, std::string> slots;
  std::size_t p = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& [is_slot, text] = parts[i];
    if (!is_slot) {
      if (prompt.compare(p, text.size(), text) != 0) return std::nullopt;
      p += text.size();
      continue;
    }
    // Slot value runs until the next literal segment (or end of prompt).
    if (i + 1 < parts.size()) {
      const std::string& next = parts[i + 1].second;
      std::size_t end = prompt.find(next, p);
      if (end == std::string::npos) return std::nullopt;
      slots[text] = prompt.substr(p, end - p);
      p = end;
    } else {
      slots[text] = prompt.substr(p);
      p = prompt.size();
    }
  }
  if (p != prompt.size()) return std::nullopt;
  return slots;
}

OracleBackend::OracleBackend(FactBase kb, PromptRegistry prompts,
                             std::string id)
    : kb_(std::move(kb)), prompts_(std::move(prompts)), id_(std::move(id)) {}

int OracleBackend::confidence_for(const std::string& question) const {
  if (const auto* c = kb_.lookup_composite(question)) return c->confidence;
  if (const auto* f = kb_.lookup(question))
    if (f->date < kb_.cutoff_date) return f->confidence;
  return 0;
}

Generation OracleBackend::answer_confidence(
    const std::string& question) const {
  std::ostringstream out;
  if (const auto* c = kb_.lookup_composite(question)) {
    out << "Answer: uncertain\nConfidence (0-100): " << c->confidence << "%";
  } else if (const auto* f = kb_.lookup(question);
             f && f->date < kb_.cutoff_date) {
    out << "Answer: " << f->answer << "\nConfidence (0-100): " << f->confidence
        << "%";
  } else {
    out << "Answer: unknown\nConfidence (0-100): 0%";
  }
  return Generation{out.str(), std::nullopt};
}

Generation OracleBackend::answer_decompose(const std::string& question) const {
  std::ostringstream out;
  if (const auto* c = kb_.lookup_composite(question)) {
    for (std::size_t i = 0; i < c->sub_questions.size(); ++i) {
      if (i) out << " ";
      out << "#" << (i + 1) << ": " << c->sub_questions[i];
    }
  } else {
    // Non-compositional by construction: single sub-question.
    out << "#1: " << question;
  }
  return Generation{out.str(), std::nullopt};
}

Generation OracleBackend::answer_read(const std::string& passage,
                                      const std::string& question) const {
  // Exact lookup: a fact is readable when its answer is stated in the
  // supplied passage, regardless of the cutoff date.
  if (const auto* f = kb_.lookup(question))
    if (contains_ci(passage, f->answer)) return Generation{f->answer};
  return Generation{"unknown"};
}

Generation OracleBackend::answer_generate_passage(
    const std::string& question) const {
  if (const auto* f = kb_.lookup(question); f && f->date < kb_.cutoff_date)
    return Generation{f->pattern + ": " + f->answer + "."};
  return Generation{""};
}

Generation OracleBackend::answer_combine(const std::string& question,
                                         const std::string& sub_qas) const {
  if (const auto* c = kb_.lookup_composite(question))
    return Generation{c->answer};
  // Fallback: if every sub-answer agrees, that value is the answer.
  std::regex answer_line(R"(A\d+:\s*([^\n]*))");
  auto begin = std::sregex_iterator(sub_qas.begin(), sub_qas.end(),
                                    answer_line);
  std::vector<std::string> answers;
  for (auto it = begin; it != std::sregex_iterator(); ++it)
    answers.push_back((*it)[1].str());
  if (!answers.empty() &&
      std::all_of(answers.begin(), answers.end(),
                  [&](const std::string& a) { return a == answers.front(); }))
    return Generation{answers.front()};
  return Generation{"unknown"};
}

Generation OracleBackend::answer_direct(const std::string& question,
                                        bool want_probs) const {
  Generation g;
  const Fact* f = kb_.lookup(question);
  bool known = f && f->date < kb_.cutoff_date &&
               kb_.lookup_composite(question) == nullptr;
  g.text = known ? f->answer : "unknown";
  if (want_probs) {
    double p = confidence_for(question) / 100.0;
    g.token_probs = std::vector<double>{p, p};
  }
  return g;
}

Generation OracleBackend::answer_judge(const std::string& question,
                                       const std::string& golds,
                                       const std::string& prediction) const {
  (void)question;
  std::string pred = casefold(prediction);
  std::istringstream in(golds);
  std::string gold;
  while (std::getline(in, gold, '|')) {
    // golds are rendered " | "-separated
    while (!gold.empty() && gold.front() == ' ') gold.erase(gold.begin());
    while (!gold.empty() && gold.back() == ' ') gold.pop_back();
    if (!gold.empty() && casefold(gold) == pred) return Generation{"Yes"};
  }
  return Generation{"No"};
}

Generation OracleBackend::complete(const PromptRequest& request) {
  const std::string& prompt = request.prompt;
  if (prompt.empty()) throw UnrecognizedPrompt("empty prompt");

  if (auto m = match_template(prompts_.get("confidence_verbalized"), prompt))
    return answer_confidence(m->at("question"));
  if (auto m = match_template(prompts_.get("decompose"), prompt))
    return answer_decompose(m->at("question"));
  if (auto m = match_template(prompts_.get("read_with_passage"), prompt))
    return answer_read(m->at("passage"), m->at("question"));
  if (auto m = match_template(prompts_.get("generate_passage"), prompt))
    return answer_generate_passage(m->at("question"));
  if (auto m = match_template(prompts_.get("combine"), prompt))
    return answer_combine(m->at("question"), m->at("sub_qas"));
  if (auto m = match_template(prompts_.get("judge"), prompt))
    return answer_judge(m->at("question"), m->at("golds"),
                        m->at("prediction"));
  if (auto m = match_template(prompts_.get("cot"), prompt))
    return answer_direct(m->at("question"), request.want_token_probs);
  if (auto m = match_template(prompts_.get("direct"), prompt))
    return answer_direct(m->at("question"), request.want_token_probs);

  throw UnrecognizedPrompt("prompt fits no known template family: " +
                           prompt.substr(0, 60));
}

}  // namespace selfdc
