#pragma once

#include <optional>
#include <string>
#include <vector>

#include "types.hpp"

namespace selfdc {

// External-knowledge acquisition. Implementations must tolerate concurrent
// queries; the retrieval-call counter is owned by the run context, not here.
class Retriever {
 public:
  virtual ~Retriever() = default;
  // Returns at most k passages, rank-ordered from 1. Empty results are not
  // an error.
  virtual std::vector<Passage> search(const std::string& query, int k) = 0;
  virtual std::string id() const = 0;
};

struct CorpusDoc {
  std::string text;
  std::optional<std::string> url;
};

// Deterministic local stand-in for a web search engine. Scoring is the
// case-folded count of distinct query tokens present in the document; ties
// break by document insertion order.
class LocalCorpusRetriever : public Retriever {
 public:
  explicit LocalCorpusRetriever(std::vector<CorpusDoc> docs,
                                std::string id = "local");

  // Corpus file: one document per line, either plain text or a JSON object
  // {"text": ..., "url"?: ...}.
  static LocalCorpusRetriever from_file(const std::string& path);

  std::vector<Passage> search(const std::string& query, int k) override;
  std::string id() const override { return id_; }

 private:
  std::vector<CorpusDoc> docs_;
  std::string id_;
};

// Web-search client: POSTs {"query", "k"} to the provider endpoint and
// expects {"results": [{"text", "url"?}, ...]}.
class HttpSearchRetriever : public Retriever {
 public:
  explicit HttpSearchRetriever(std::string base_url,
                               std::string path = "/search");

  std::vector<Passage> search(const std::string& query, int k) override;
  std::string id() const override { return "http"; }

 private:
  std::string base_url_;
  std::string path_;
};

// Case-folded whitespace/punctuation tokenization shared by the retriever
// and the metrics.
std::vector<std::string> tokenize(const std::string& text);

// Concatenates passage texts in rank order separated by blank lines; an
// empty list yields the sentinel "No relevant passage found.".
std::string format_passages(const std::vector<Passage>& passages);

inline constexpr const char* kNoPassageSentinel = "No relevant passage found.";

}  // namespace selfdc
