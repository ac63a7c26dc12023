#include "datagen.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace selfdc {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Generation complete_text(Backend& backend, const std::string& prompt) {
  PromptRequest req;
  req.prompt = prompt;
  req.temperature = 0.1;
  req.top_p = 0.1;
  return backend.complete(req);
}

std::string require_nonempty(const std::string& text, const char* what) {
  std::string t = trim(text);
  if (t.empty())
    throw GenerationFormatError(std::string(what) + " completion is empty");
  return t;
}

}  // namespace

EventRng::EventRng(std::int64_t seed, std::size_t event_index) {
  state_ = static_cast<std::uint64_t>(seed) * 0x2545f4914f6cdd1dULL ^
           (static_cast<std::uint64_t>(event_index) + 0x632be59bd9b4e019ULL);
  // Warm up so nearby (seed, index) pairs decorrelate.
  std::uint64_t s = state_;
  splitmix64(s);
  state_ = splitmix64(s);
}

int EventRng::uniform_int(int lo, int hi) {
  std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(splitmix64(state_) % span);
}

std::vector<UnknownEvent> load_events(const std::string& path,
                                      const std::string& cutoff_date) {
  std::ifstream in(path);
  if (!in) throw InvalidField("cannot open events file: " + path);
  std::vector<UnknownEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    UnknownEvent e;
    if (line.front() == '{') {
      json j = json::parse(line);
      e.text = j.at("text").get<std::string>();
      e.event_date = j.at("date").get<std::string>();
      e.source = j.value("source", "");
    } else {
      std::size_t tab = line.find('\t');
      if (tab == std::string::npos)
        throw InvalidField("events line needs 'DATE<TAB>text': " + line);
      e.event_date = line.substr(0, tab);
      e.text = line.substr(tab + 1);
    }
    if (!(e.event_date > cutoff_date))
      throw InvalidField("event date " + e.event_date +
                         " is not after cutoff " + cutoff_date);
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<std::string> get_entities(Backend& backend,
                                      const PromptRegistry& prompts,
                                      const std::string& event_text) {
  if (event_text.empty()) throw EmptyEntityList("empty event text");
  Generation g = complete_text(
      backend, prompts.render("get_entities", {{"text", event_text}}));
  // Comma- or newline-separated list.
  std::vector<std::string> entities;
  std::set<std::string> seen;
  std::string item;
  for (char c : g.text + ",") {
    if (c == ',' || c == '\n') {
      std::string e = trim(item);
      item.clear();
      if (e.empty()) continue;
      if (!e.empty() && e.back() == '.') e = trim(e.substr(0, e.size() - 1));
      if (!e.empty() && seen.insert(e).second) entities.push_back(e);
    } else {
      item.push_back(c);
    }
  }
  if (entities.empty())
    throw EmptyEntityList("no entities parsed from completion: " +
                          g.text.substr(0, 60));
  return entities;
}

GeneratedPair generate_pair(Backend& backend, const PromptRegistry& prompts,
                            const UnknownEvent& event, EventRng& rng) {
  GeneratedPair pair;
  pair.entities = get_entities(backend, prompts, event.text);

  const std::string cur_ent =
      pair.entities[rng.uniform_int(0, static_cast<int>(pair.entities.size()) - 1)];
  pair.intermediates["cur_ent"] = cur_ent;

  pair.unknown_question = require_nonempty(
      complete_text(backend,
                    prompts.render("unknown_question_gen",
                                   {{"unknown_event", event.text},
                                    {"unknown_entity", cur_ent}}))
          .text,
      "unknown question");

  const std::string known_events = require_nonempty(
      complete_text(backend,
                    prompts.render("known_events_gen", {{"entity", cur_ent}}))
          .text,
      "known events");
  pair.intermediates["known_events"] = known_events;

  const int draw = rng.uniform_int(1, 9);
  pair.intermediates["branch_draw"] = std::to_string(draw);

  if (draw < 5) {
    pair.branch = PairBranch::AAB;
    pair.known_question = require_nonempty(
        complete_text(backend, prompts.render("known_question_gen",
                                              {{"known_event", known_events},
                                               {"entity", cur_ent}}))
            .text,
        "known question");
    // Both sub-questions have cur_ent as their answer, so the merged
    // question does too.
    pair.answer = cur_ent;
  } else {
    pair.branch = PairBranch::ABC;
    auto known_entities = get_entities(backend, prompts, known_events);
    const std::string k_ent = known_entities[rng.uniform_int(
        0, static_cast<int>(known_entities.size()) - 1)];
    pair.intermediates["known_entity"] = k_ent;
    pair.known_question = require_nonempty(
        complete_text(backend,
                      prompts.render("known_question_gen2",
                                     {{"known_passage", known_events},
                                      {"unknown_entity", cur_ent},
                                      {"known_entity", k_ent}}))
            .text,
        "known question");
    // The dependent question's answer entity is the merged answer.
    pair.answer = k_ent;
  }
  pair.intermediates["candidate_answer_cur_ent"] = cur_ent;
  pair.intermediates["candidate_answer_unknown_q"] = pair.unknown_question;

  pair.merged_question = require_nonempty(
      complete_text(backend,
                    prompts.render("merge_questions",
                                   {{"unknown_question", pair.unknown_question},
                                    {"known_question", pair.known_question}}))
          .text,
      "merged question");
  return pair;
}

std::vector<std::string> validate_record(const GeneratedPair& pair) {
  std::vector<std::string> violations;
  if (trim(pair.merged_question).empty())
    violations.push_back("merged_question is empty");
  if (trim(pair.answer).empty()) violations.push_back("answer is empty");
  if (trim(pair.unknown_question).empty())
    violations.push_back("unknown_question is empty");
  if (trim(pair.known_question).empty())
    violations.push_back("known_question is empty");
  if (!pair.merged_question.empty() && pair.merged_question.back() != '?')
    violations.push_back("merged_question does not end with '?'");
  for (const std::string* field :
       {&pair.merged_question, &pair.answer, &pair.unknown_question,
        &pair.known_question}) {
    if (field->find('{') != std::string::npos &&
        field->find('}') != std::string::npos) {
      violations.push_back("template slot residue in: " + *field);
      break;
    }
  }
  if (pair.branch == PairBranch::AAB) {
    auto it = pair.intermediates.find("cur_ent");
    if (it == pair.intermediates.end() || pair.answer != it->second)
      violations.push_back("AAB answer must be the sampled unknown entity");
  } else {
    auto it = pair.intermediates.find("known_entity");
    if (it == pair.intermediates.end() || pair.answer != it->second)
      violations.push_back("ABC answer must be the sampled known entity");
  }
  return violations;
}

DatasetRecord to_dataset_record(const GeneratedPair& pair,
                                const UnknownEvent& event,
                                std::size_t index) {
  DatasetRecord r;
  r.id = "gen-" + std::to_string(index);
  r.question = pair.merged_question;
  r.gold_answers = {pair.answer};
  r.qtype = QType::Easy;
  r.meta["branch"] = to_string(pair.branch);
  r.meta["unknown_question"] = pair.unknown_question;
  r.meta["known_question"] = pair.known_question;
  r.meta["source_event"] = event.text;
  r.meta["event_date"] = event.event_date;
  r.meta["effective_year"] = event.event_date.substr(0, 4);
  for (const auto& [k, v] : pair.intermediates) r.meta["gen_" + k] = v;
  return r;
}

std::vector<DatasetRecord> generate_dataset(
    Backend& backend, const PromptRegistry& prompts,
    const std::vector<UnknownEvent>& events, std::int64_t seed) {
  std::vector<DatasetRecord> out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    EventRng rng(seed, i);
    try {
      GeneratedPair pair = generate_pair(backend, prompts, events[i], rng);
      if (!validate_record(pair).empty()) continue;
      out.push_back(to_dataset_record(pair, events[i], i));
    } catch (const EmptyEntityList&) {
      continue;  // event skipped
    } catch (const GenerationFormatError&) {
      continue;
    }
  }
  return out;
}

DatasetRecord merge_hard(Backend& backend, const PromptRegistry& prompts,
                         const DatasetRecord& first,
                         const DatasetRecord& second, std::size_t index) {
  DatasetRecord r;
  r.id = "hard-" + std::to_string(index);
  r.question = require_nonempty(
      complete_text(backend,
                    prompts.render("merge_questions",
                                   {{"unknown_question", first.question},
                                    {"known_question", second.question}}))
          .text,
      "hard merged question");
  r.gold_answers = second.gold_answers;
  r.qtype = QType::Hard;
  r.meta["source_pair_1_question"] = first.question;
  r.meta["source_pair_1_answer"] = first.gold_answers.front();
  r.meta["source_pair_2_question"] = second.question;
  r.meta["source_pair_2_answer"] = second.gold_answers.front();
  r.meta["source_pair_1_id"] = first.id;
  r.meta["source_pair_2_id"] = second.id;
  return r;
}

void export_review(const std::vector<DatasetRecord>& records,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidField("cannot write review file: " + path);
  out << "id\taccept\tquestion\tanswer\n";
  for (const auto& r : records)
    out << r.id << "\tyes\t" << r.question << "\t" << r.gold_answers.front()
        << "\n";
}

std::vector<DatasetRecord> apply_review(
    const std::vector<DatasetRecord>& records,
    const std::string& review_path) {
  std::ifstream in(review_path);
  if (!in) throw InvalidField("cannot open review file: " + review_path);
  std::map<std::string, std::pair<std::string, std::string>> edits;  // id -> (q, a)
  std::set<std::string> rejected;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::istringstream row(line);
    std::string col;
    while (std::getline(row, col, '\t')) cols.push_back(col);
    if (cols.size() < 2) continue;
    if (cols[1] == "no" || cols[1] == "reject") {
      rejected.insert(cols[0]);
    } else if (cols.size() >= 4) {
      edits[cols[0]] = {cols[2], cols[3]};
    }
  }
  std::vector<DatasetRecord> out;
  for (auto r : records) {
    if (rejected.count(r.id)) continue;
    if (auto it = edits.find(r.id); it != edits.end()) {
      r.question = it->second.first;
      r.gold_answers = {it->second.second};
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_string(PairBranch b) {
  return b == PairBranch::AAB ? "AAB" : "ABC";
}

}  // namespace selfdc
