#include "retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace selfdc {

using nlohmann::json;

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string format_passages(const std::vector<Passage>& passages) {
  if (passages.empty()) return kNoPassageSentinel;
  std::string out;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    if (i) out += "\n\n";
    out += passages[i].text;
  }
  return out;
}

LocalCorpusRetriever::LocalCorpusRetriever(std::vector<CorpusDoc> docs,
                                           std::string id)
    : docs_(std::move(docs)), id_(std::move(id)) {}

LocalCorpusRetriever LocalCorpusRetriever::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RetrieverUnavailable("cannot open corpus file: " + path);
  std::vector<CorpusDoc> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CorpusDoc doc;
    if (line.front() == '{') {
      json j = json::parse(line);
      doc.text = j.at("text").get<std::string>();
      if (j.contains("url")) doc.url = j.at("url").get<std::string>();
    } else {
      doc.text = line;
    }
    docs.push_back(std::move(doc));
  }
  return LocalCorpusRetriever(std::move(docs));
}

std::vector<Passage> LocalCorpusRetriever::search(const std::string& query,
                                                  int k) {
  if (k < 1) throw RetrieverUnavailable("k must be >= 1");
  std::vector<std::string> qtokens = tokenize(query);
  std::set<std::string> qset(qtokens.begin(), qtokens.end());

  // (score, insertion index)
  std::vector<std::pair<int, std::size_t>> scored;
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    std::vector<std::string> dtokens = tokenize(docs_[i].text);
    std::set<std::string> dset(dtokens.begin(), dtokens.end());
    int overlap = 0;
    for (const auto& t : qset) overlap += dset.count(t) ? 1 : 0;
    if (overlap > 0) scored.emplace_back(overlap, i);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) {
                     return a.first > b.first;  // stable: ties keep order
                   });

  std::vector<Passage> out;
  for (std::size_t i = 0; i < scored.size() && static_cast<int>(i) < k; ++i) {
    const auto& doc = docs_[scored[i].second];
    Passage p;
    p.text = doc.text;
    p.source_url = doc.url;
    p.rank = static_cast<int>(i) + 1;
    p.retriever_id = id_;
    out.push_back(std::move(p));
  }
  return out;
}

HttpSearchRetriever::HttpSearchRetriever(std::string base_url,
                                         std::string path)
    : base_url_(std::move(base_url)), path_(std::move(path)) {}

std::vector<Passage> HttpSearchRetriever::search(const std::string& query,
                                                 int k) {
  if (k < 1) throw RetrieverUnavailable("k must be >= 1");
  json body{{"query", query}, {"k", k}};
  httplib::Client client(base_url_);
  client.set_read_timeout(60, 0);

  std::string last_error;
  auto backoff = std::chrono::milliseconds(200);
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw RetrieverUnavailable("search provider returned status " +
                                 std::to_string(res->status));
    json j = json::parse(res->body);
    std::vector<Passage> out;
    int rank = 1;
    for (const auto& rj : j.at("results")) {
      if (rank > k) break;
      Passage p;
      p.text = rj.at("text").get<std::string>();
      if (rj.contains("url")) p.source_url = rj.at("url").get<std::string>();
      p.rank = rank++;
      p.retriever_id = id();
      out.push_back(std::move(p));
    }
    return out;
  }
  throw RetrieverUnavailable("search provider unavailable after 3 attempts: " +
                             last_error);
}

}  // namespace selfdc
