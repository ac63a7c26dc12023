#include "http_backend.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace selfdc {

using nlohmann::json;

namespace {
constexpr int kMaxRetries = 3;
constexpr auto kInitialBackoff = std::chrono::milliseconds(200);
}  // namespace

HttpBackend::HttpBackend(std::string base_url, std::string model,
                         std::string api_key_env)
    : base_url_(std::move(base_url)), model_(std::move(model)) {
  if (const char* key = std::getenv(api_key_env.c_str())) api_key_ = key;
}

Generation HttpBackend::complete(const PromptRequest& request) {
  json body{{"model", model_},
            {"messages",
             json::array({{{"role", "user"}, {"content", request.prompt}}})},
            {"temperature", request.temperature},
            {"top_p", request.top_p},
            {"max_tokens", request.max_tokens}};
  if (request.want_token_probs) body["logprobs"] = true;

  httplib::Client client(base_url_);
  client.set_read_timeout(120, 0);
  httplib::Headers headers;
  if (!api_key_.empty())
    headers.emplace("Authorization", "Bearer " + api_key_);

  std::string last_error;
  auto backoff = kInitialBackoff;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post("/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500 || res->status == 429) {
      last_error = "server status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw BackendUnavailable("backend returned status " +
                               std::to_string(res->status) + ": " + res->body);

    json j = json::parse(res->body);
    const auto& choice = j.at("choices").at(0);
    Generation g;
    g.text = choice.at("message").at("content").get<std::string>();
    if (request.want_token_probs) {
      if (!choice.contains("logprobs") || choice.at("logprobs").is_null())
        throw ProbsUnsupported("backend did not return log-probabilities");
      std::vector<double> probs;
      for (const auto& tok : choice.at("logprobs").at("content"))
        probs.push_back(std::exp(tok.at("logprob").get<double>()));
      if (probs.empty())
        throw ProbsUnsupported("backend returned empty log-probabilities");
      g.token_probs = std::move(probs);
    }
    return g;
  }
  throw BackendUnavailable("remote backend unavailable after " +
                           std::to_string(kMaxRetries) +
                           " attempts: " + last_error);
}

}  // namespace selfdc
