#pragma once

#include <optional>
#include <string>
#include <vector>

namespace selfdc {

struct PromptRequest {
  std::string prompt;
  double temperature = 0.1;
  double top_p = 0.1;
  bool want_token_probs = false;
  int max_tokens = 256;
};

struct Generation {
  std::string text;
  // Per-token probabilities of the completion, each in [0,1].
  std::optional<std::vector<double>> token_probs;
};

// Uniform completion interface. Implementations must tolerate concurrent
// complete() calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Generation complete(const PromptRequest& request) = 0;
  // Identifier folded into cache keys.
  virtual std::string id() const = 0;
};

}  // namespace selfdc
