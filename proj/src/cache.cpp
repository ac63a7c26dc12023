#include "cache.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "errors.hpp"

namespace selfdc {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

CachedBackend::CachedBackend(std::shared_ptr<Backend> inner,
                             std::optional<std::string> cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {
  if (cache_dir_) fs::create_directories(*cache_dir_);
}

std::string CachedBackend::key_for(const PromptRequest& request) const {
  json key{{"prompt", request.prompt},
           {"temperature", request.temperature},
           {"top_p", request.top_p},
           {"want_token_probs", request.want_token_probs},
           {"max_tokens", request.max_tokens},
           {"backend_id", inner_->id()}};
  return sha256_hex(key.dump());
}

std::optional<Generation> CachedBackend::load(const std::string& key) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = memory_.find(key);
    if (it != memory_.end()) return it->second;
  }
  if (!cache_dir_) return std::nullopt;
  fs::path path = fs::path(*cache_dir_) / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    json j = json::parse(in);
    Generation g;
    g.text = j.at("text").get<std::string>();
    if (j.contains("token_probs"))
      g.token_probs = j.at("token_probs").get<std::vector<double>>();
    return g;
  } catch (const std::exception& e) {
    // CacheInvalid: discard the entry and fall through to the backend.
    std::cerr << "cache entry invalid, refetching: " << path << " (" << e.what()
              << ")\n";
    std::error_code ec;
    fs::remove(path, ec);
    return std::nullopt;
  }
}

void CachedBackend::store(const std::string& key, const Generation& g) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    memory_[key] = g;
  }
  if (!cache_dir_) return;
  json j{{"text", g.text}};
  if (g.token_probs) j["token_probs"] = *g.token_probs;
  fs::path path = fs::path(*cache_dir_) / (key + ".json");
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    out << j.dump();
  }
  fs::rename(tmp, path);
}

Generation CachedBackend::complete(const PromptRequest& request) {
  std::string key = key_for(request);
  if (auto cached = load(key)) {
    ++hits_;
    return *cached;
  }
  ++misses_;
  Generation g = inner_->complete(request);
  store(key, g);
  return g;
}

}  // namespace selfdc
