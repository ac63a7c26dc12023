#pragma once

#include <string>

#include "backend.hpp"

namespace selfdc {

// Remote chat-completion backend. Per-token log-probabilities are requested
// when want_token_probs is set and exponentiated to probabilities before
// storage in Generation. Credentials come from an environment variable only.
class HttpBackend : public Backend {
 public:
  HttpBackend(std::string base_url, std::string model,
              std::string api_key_env = "SELFDC_API_KEY");

  Generation complete(const PromptRequest& request) override;
  std::string id() const override { return "http:" + model_; }

 private:
  std::string base_url_;
  std::string model_;
  std::string api_key_;
};

}  // namespace selfdc
