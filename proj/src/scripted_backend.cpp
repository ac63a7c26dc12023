#include "scripted_backend.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace selfdc {

using nlohmann::json;

ScriptedBackend::ScriptedBackend(std::vector<ScriptedRule> rules,
                                 std::string id)
    : rules_(std::move(rules)), id_(std::move(id)) {}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BackendUnavailable("cannot open rule file: " + path);
  json j = json::parse(in);
  std::vector<ScriptedRule> rules;
  for (const auto& rj : j) {
    ScriptedRule r;
    r.match = rj.at("match").get<std::string>();
    r.response = rj.at("response").get<std::string>();
    if (rj.contains("token_probs")) {
      auto probs = rj.at("token_probs").get<std::vector<double>>();
      for (double p : probs)
        if (p < 0.0 || p > 1.0)
          throw InvalidField("token_probs entry outside [0,1] in rule file");
      r.token_probs = std::move(probs);
    }
    rules.push_back(std::move(r));
  }
  return ScriptedBackend(std::move(rules));
}

Generation ScriptedBackend::complete(const PromptRequest& request) {
  if (request.prompt.empty())
    throw UnrecognizedPrompt("empty prompt");
  for (const auto& r : rules_) {
    if (!r.match.empty() && request.prompt.find(r.match) == std::string::npos)
      continue;
    Generation g;
    g.text = r.response;
    if (request.want_token_probs) {
      if (!r.token_probs)
        throw ProbsUnsupported(
            "matched rule carries no token probabilities (match='" + r.match +
            "')");
      g.token_probs = r.token_probs;
    }
    return g;
  }
  throw UnrecognizedPrompt("no scripted rule matches prompt");
}

}  // namespace selfdc
