// Shared synthetic fixtures: a knowledge-cutoff fact base, a matching local
// corpus, and a 60-question dataset (20 known simple, 20 post-cutoff simple,
// 20 two-leaf compositional). The unknown leaves are the only questions that
// need retrieval, so exact retrieval-call totals can be enumerated by hand.
#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracle_backend.hpp"
#include "retrieval.hpp"
#include "types.hpp"

namespace fixtures {

inline constexpr const char* kCutoff = "2023-01-01";
inline constexpr int kGroupSize = 20;

inline std::string two(int i) {
  char buf[3];
  std::snprintf(buf, sizeof buf, "%02d", i);
  return buf;
}

inline std::string known_question(int i) {
  return "What is the capital of Aland" + two(i) + "?";
}
inline std::string known_answer(int i) { return "Acity" + two(i); }

inline std::string unknown_question(int i) {
  return "Who won the 2024 B" + two(i) + " prize?";
}
inline std::string unknown_answer(int i) { return "Bwinner" + two(i); }

inline std::string composite_question(int i) {
  return "Tell me about fact pair C" + two(i) + "?";
}
inline std::string composite_answer(int i) { return "Pair" + two(i); }

inline selfdc::FactBase make_kb() {
  selfdc::FactBase kb;
  kb.cutoff_date = kCutoff;
  for (int i = 0; i < kGroupSize; ++i) {
    kb.facts.push_back({"capital of Aland" + two(i), known_answer(i),
                        "2010-01-01", 95});
    kb.facts.push_back({"the 2024 B" + two(i) + " prize", unknown_answer(i),
                        "2024-06-01", 95});
    kb.composites.push_back({"fact pair C" + two(i),
                             {known_question(i), unknown_question(i)},
                             composite_answer(i),
                             40});
  }
  return kb;
}

inline std::vector<selfdc::CorpusDoc> make_corpus() {
  std::vector<selfdc::CorpusDoc> docs;
  for (int i = 0; i < kGroupSize; ++i)
    docs.push_back({"The 2024 B" + two(i) + " prize was won by " +
                        unknown_answer(i) + ".",
                    std::nullopt});
  return docs;
}

inline std::vector<selfdc::DatasetRecord> make_dataset() {
  std::vector<selfdc::DatasetRecord> records;
  for (int i = 0; i < kGroupSize; ++i) {
    records.push_back({"known-" + two(i), known_question(i),
                       {known_answer(i)}, selfdc::QType::Easy, {}});
    records.push_back({"unknown-" + two(i), unknown_question(i),
                       {unknown_answer(i)}, selfdc::QType::Easy, {}});
    records.push_back({"composite-" + two(i), composite_question(i),
                       {composite_answer(i)}, selfdc::QType::Hard, {}});
  }
  return records;
}

// File forms of the same fixtures, for the C API and CLI paths.
inline void write_kb_file(const std::string& path) {
  nlohmann::json j;
  selfdc::FactBase kb = make_kb();
  j["cutoff_date"] = kb.cutoff_date;
  j["facts"] = nlohmann::json::array();
  for (const auto& f : kb.facts)
    j["facts"].push_back({{"pattern", f.pattern},
                          {"answer", f.answer},
                          {"date", f.date},
                          {"confidence", f.confidence}});
  j["composites"] = nlohmann::json::array();
  for (const auto& c : kb.composites)
    j["composites"].push_back({{"pattern", c.pattern},
                               {"sub_questions", c.sub_questions},
                               {"answer", c.answer},
                               {"confidence", c.confidence}});
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

inline void write_corpus_file(const std::string& path) {
  std::ofstream out(path);
  for (const auto& d : make_corpus()) out << d.text << "\n";
}

inline void write_dataset_file(const std::string& path) {
  selfdc::save_dataset(make_dataset(), path);
}

}  // namespace fixtures
