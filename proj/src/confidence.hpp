#pragma once

#include <optional>
#include <string>

#include "backend.hpp"
#include "prompts.hpp"
#include "types.hpp"

namespace selfdc {

struct ConfidenceScore {
  double value = 0.0;  // in [0,1]
  ConfidenceMode mode = ConfidenceMode::Verbalized;
  std::optional<std::string> answer_draft;
};

// Extracts the first integer after the literal "Confidence" marker, clamped
// to [0,100]. Throws ParseFailure when no integer follows the marker.
int parse_confidence_percent(const std::string& text);

// Issues the verbalized confidence prompt once and parses the 0-100 level.
// An unparsable completion maps to confidence 0 (treated as not knowing),
// with no answer draft.
ConfidenceScore score_verbalized(Backend& backend,
                                 const PromptRegistry& prompts,
                                 const std::string& question,
                                 const RunConfig& config);

// Mean token probability of the generation. Throws NoTokenProbabilities when
// the generation carries none.
ConfidenceScore score_probability(const Generation& generation);

// Three-range router over a validated (alpha, beta) pair. Boundaries follow
// the control-loop convention: conf >= alpha+beta generates, conf <=
// alpha-beta retrieves, strictly between decomposes.
Route classify(double conf, const Thresholds& thresholds);

}  // namespace selfdc
