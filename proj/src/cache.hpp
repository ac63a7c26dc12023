#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "backend.hpp"

namespace selfdc {

// Response cache wrapping an inner backend. Keys are a cryptographic hash of
// (prompt, temperature, top_p, want_token_probs, max_tokens, backend_id).
// With a cache_dir, entries are content-addressed files written atomically
// (temp file + rename); without one the cache is in-memory only. A corrupt
// on-disk entry is discarded and the call falls through to the backend.
class CachedBackend : public Backend {
 public:
  explicit CachedBackend(std::shared_ptr<Backend> inner,
                         std::optional<std::string> cache_dir = std::nullopt);

  Generation complete(const PromptRequest& request) override;
  std::string id() const override { return inner_->id(); }

  std::int64_t hits() const { return hits_; }
  std::int64_t misses() const { return misses_; }

 private:
  std::string key_for(const PromptRequest& request) const;
  std::optional<Generation> load(const std::string& key);
  void store(const std::string& key, const Generation& g);

  std::shared_ptr<Backend> inner_;
  std::optional<std::string> cache_dir_;
  std::map<std::string, Generation> memory_;
  std::mutex mutex_;
  std::int64_t hits_ = 0;
  std::int64_t misses_ = 0;
};

// Hex SHA-256 digest.
std::string sha256_hex(const std::string& data);

}  // namespace selfdc
