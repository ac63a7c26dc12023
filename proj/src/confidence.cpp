#include "confidence.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "errors.hpp"

namespace selfdc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Answer line of a "Answer: ... Confidence (0-100): ..." completion.
std::optional<std::string> parse_answer_draft(const std::string& text) {
  std::size_t end = text.find("Confidence");
  std::string head = end == std::string::npos ? text : text.substr(0, end);
  std::size_t marker = head.find("Answer:");
  if (marker != std::string::npos) head = head.substr(marker + 7);
  head = trim(head);
  if (head.empty()) return std::nullopt;
  // Keep the first line only.
  std::size_t nl = head.find('\n');
  if (nl != std::string::npos) head = trim(head.substr(0, nl));
  if (head.empty()) return std::nullopt;
  return head;
}

}  // namespace

int parse_confidence_percent(const std::string& text) {
  std::size_t marker = text.find("Confidence");
  if (marker == std::string::npos)
    throw ParseFailure("no 'Confidence' marker in completion");
  std::size_t pos = marker;
  while (pos < text.size() && !std::isdigit(static_cast<unsigned char>(
                                  text[pos])))
    ++pos;
  // Skip digits that belong to the "(0-100)" range annotation.
  if (text.compare(pos, 5, "0-100") == 0) {
    pos += 5;
    while (pos < text.size() &&
           !std::isdigit(static_cast<unsigned char>(text[pos])))
      ++pos;
  }
  if (pos >= text.size())
    throw ParseFailure("no integer after 'Confidence' marker");
  long value = 0;
  while (pos < text.size() &&
         std::isdigit(static_cast<unsigned char>(text[pos]))) {
    value = value * 10 + (text[pos] - '0');
    if (value > 1000000) break;  // avoid overflow on absurd outputs
    ++pos;
  }
  return static_cast<int>(std::clamp<long>(value, 0, 100));
}

ConfidenceScore score_verbalized(Backend& backend,
                                 const PromptRegistry& prompts,
                                 const std::string& question,
                                 const RunConfig& config) {
  PromptRequest req;
  req.prompt = prompts.render("confidence_verbalized", {{"question", question}});
  req.temperature = config.temperature;
  req.top_p = config.top_p;
  Generation g = backend.complete(req);

  ConfidenceScore score;
  score.mode = ConfidenceMode::Verbalized;
  try {
    score.value = parse_confidence_percent(g.text) / 100.0;
    score.answer_draft = parse_answer_draft(g.text);
  } catch (const ParseFailure&) {
    // Non-compliant completion: treat as not knowing.
    score.value = 0.0;
    score.answer_draft = std::nullopt;
  }
  return score;
}

ConfidenceScore score_probability(const Generation& generation) {
  if (!generation.token_probs || generation.token_probs->empty())
    throw NoTokenProbabilities("generation carries no token probabilities");
  const auto& probs = *generation.token_probs;
  double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  ConfidenceScore score;
  score.value = sum / static_cast<double>(probs.size());
  score.mode = ConfidenceMode::Probability;
  score.answer_draft = generation.text;
  return score;
}

Route classify(double conf, const Thresholds& t) {
  if (conf > t.alpha - t.beta && conf < t.alpha + t.beta)
    return Route::Decompose;
  if (conf >= t.alpha + t.beta) return Route::GenerateThenRead;
  return Route::RetrieveThenRead;
}

}  // namespace selfdc
