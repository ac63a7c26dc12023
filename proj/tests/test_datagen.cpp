#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "datagen.hpp"
#include "errors.hpp"
#include "prompts.hpp"
#include "scripted_backend.hpp"

using namespace selfdc;
namespace fs = std::filesystem;

namespace {

// Rule table walking the full synthesis pipeline deterministically. The
// known-passage entity listing matches on "Text: <passage prefix>" so it
// cannot shadow the question-generation prompts, which embed the same
// passage under a different label.
ScriptedBackend datagen_backend() {
  return ScriptedBackend(
      {{"Text: Background about the entity", "Kone, Ktwo", std::nullopt},
       {"Please list the named entities", "Alice, Bob, Carol.", std::nullopt},
       {"According to the unknown event", "Who did the unknown thing?",
        std::nullopt},
       {"Generate a detailed passage about",
        "Background about the entity: Kone, Ktwo.", std::nullopt},
       {"According to known events", "Who did the known thing?", std::nullopt},
       {"Generate a question that meets the following conditions",
        "Which known entity relates to the unknown one?", std::nullopt},
       {"Generate a more natural combined question",
        "Who is the combined answer entity?", std::nullopt}});
}

UnknownEvent sample_event(int i = 0) {
  return {"Event " + std::to_string(i) + " happened involving Alice and Bob.",
          "2024-03-0" + std::to_string(1 + i % 9), "unit test"};
}

}  // namespace

TEST_CASE("EventRng streams are deterministic per (seed, index)") {
  EventRng a(42, 7);
  EventRng b(42, 7);
  for (int i = 0; i < 100; ++i) {
    int lo = -3, hi = 11;
    int va = a.uniform_int(lo, hi);
    CHECK(va == b.uniform_int(lo, hi));
    CHECK(va >= lo);
    CHECK(va <= hi);
  }
  // Different indexes decorrelate.
  EventRng c(42, 8);
  bool any_differ = false;
  EventRng a2(42, 7);
  for (int i = 0; i < 20; ++i)
    if (a2.uniform_int(0, 1 << 20) != c.uniform_int(0, 1 << 20))
      any_differ = true;
  CHECK(any_differ);
}

TEST_CASE("load_events accepts tab and JSON lines, rejects stale dates") {
  fs::path dir = fs::temp_directory_path() / "selfdc_events_test";
  fs::create_directories(dir);
  fs::path path = dir / "events.txt";
  {
    std::ofstream out(path);
    out << "2024-02-01\tA tab-separated event.\n";
    out << R"({"text":"A JSON event.","date":"2024-03-05","source":"feed"})"
        << "\n";
  }
  auto events = load_events(path.string(), "2023-01-01");
  REQUIRE(events.size() == 2);
  CHECK(events[0].text == "A tab-separated event.");
  CHECK(events[1].source == "feed");

  {
    std::ofstream out(path);
    out << "2020-01-01\tPre-cutoff event.\n";
  }
  CHECK_THROWS_AS(load_events(path.string(), "2023-01-01"), InvalidField);
  fs::remove_all(dir);
}

TEST_CASE("get_entities parses, strips, and deduplicates") {
  PromptRegistry prompts = PromptRegistry::defaults();
  ScriptedBackend b(
      {{"", "New Zealand, South Africa, New Zealand, France.", std::nullopt}});
  auto entities = get_entities(b, prompts, "some event text");
  CHECK(entities ==
        std::vector<std::string>{"New Zealand", "South Africa", "France"});
}

TEST_CASE("get_entities fails on unparseable lists") {
  PromptRegistry prompts = PromptRegistry::defaults();
  ScriptedBackend b({{"", " , ,, ", std::nullopt}});
  CHECK_THROWS_AS(get_entities(b, prompts, "text"), EmptyEntityList);
}

TEST_CASE("generate_pair records intermediates and respects the branch rule") {
  PromptRegistry prompts = PromptRegistry::defaults();
  auto backend = datagen_backend();
  bool saw_aab = false, saw_abc = false;
  for (int i = 0; i < 40 && !(saw_aab && saw_abc); ++i) {
    EventRng rng(7, static_cast<std::size_t>(i));
    GeneratedPair pair = generate_pair(backend, prompts, sample_event(i), rng);
    CHECK(validate_record(pair).empty());
    CHECK(pair.unknown_question == "Who did the unknown thing?");
    CHECK(pair.merged_question == "Who is the combined answer entity?");
    CHECK(pair.intermediates.count("cur_ent") == 1);
    CHECK(pair.intermediates.count("branch_draw") == 1);
    if (pair.branch == PairBranch::AAB) {
      saw_aab = true;
      CHECK(pair.known_question == "Who did the known thing?");
      CHECK(pair.answer == pair.intermediates.at("cur_ent"));
    } else {
      saw_abc = true;
      CHECK(pair.known_question ==
            "Which known entity relates to the unknown one?");
      CHECK(pair.answer == pair.intermediates.at("known_entity"));
    }
  }
  CHECK(saw_aab);
  CHECK(saw_abc);
}

TEST_CASE("generate_pair is byte-identical across runs at a fixed seed") {
  PromptRegistry prompts = PromptRegistry::defaults();
  auto backend = datagen_backend();
  for (int i = 0; i < 10; ++i) {
    EventRng r1(99, static_cast<std::size_t>(i));
    EventRng r2(99, static_cast<std::size_t>(i));
    GeneratedPair a = generate_pair(backend, prompts, sample_event(i), r1);
    GeneratedPair b = generate_pair(backend, prompts, sample_event(i), r2);
    CHECK(to_json(to_dataset_record(a, sample_event(i), i)).dump() ==
          to_json(to_dataset_record(b, sample_event(i), i)).dump());
  }
}

TEST_CASE("validate_record reports format violations") {
  GeneratedPair pair;
  pair.merged_question = "Well formed?";
  pair.answer = "Alice";
  pair.unknown_question = "u?";
  pair.known_question = "k?";
  pair.branch = PairBranch::AAB;
  pair.intermediates["cur_ent"] = "Alice";
  CHECK(validate_record(pair).empty());

  GeneratedPair no_mark = pair;
  no_mark.merged_question = "Missing the mark";
  CHECK(validate_record(no_mark).size() == 1);

  GeneratedPair empty_answer = pair;
  empty_answer.answer = "";
  CHECK(!validate_record(empty_answer).empty());

  GeneratedPair residue = pair;
  residue.merged_question = "Who is {entity}?";
  CHECK(!validate_record(residue).empty());

  GeneratedPair wrong_answer = pair;
  wrong_answer.answer = "Bob";
  CHECK(!validate_record(wrong_answer).empty());

  GeneratedPair abc = pair;
  abc.branch = PairBranch::ABC;
  abc.intermediates["known_entity"] = "Kone";
  abc.answer = "Kone";
  CHECK(validate_record(abc).empty());
  abc.answer = "Alice";
  CHECK(!validate_record(abc).empty());
}

TEST_CASE("to_dataset_record carries provenance metadata") {
  PromptRegistry prompts = PromptRegistry::defaults();
  auto backend = datagen_backend();
  EventRng rng(1, 0);
  UnknownEvent event = sample_event(0);
  DatasetRecord r =
      to_dataset_record(generate_pair(backend, prompts, event, rng), event, 4);
  CHECK(r.id == "gen-4");
  CHECK(r.qtype == QType::Easy);
  CHECK(r.question == "Who is the combined answer entity?");
  REQUIRE(r.gold_answers.size() == 1);
  CHECK(r.meta.at("source_event") == event.text);
  CHECK(r.meta.at("event_date") == event.event_date);
  CHECK(r.meta.at("effective_year") == "2024");
  CHECK((r.meta.at("branch") == "AAB" || r.meta.at("branch") == "ABC"));
  CHECK(r.meta.count("gen_cur_ent") == 1);
}

TEST_CASE("generate_dataset skips events whose synthesis fails") {
  PromptRegistry prompts = PromptRegistry::defaults();
  // Entity listing succeeds only for texts mentioning Alice.
  ScriptedBackend backend(
      {{"Text: skip me", " ", std::nullopt},
       {"Background about the entity", "Kone, Ktwo", std::nullopt},
       {"Please list the named entities", "Alice", std::nullopt},
       {"According to the unknown event", "Who did the unknown thing?",
        std::nullopt},
       {"Generate a detailed passage about",
        "Background about the entity: Kone, Ktwo.", std::nullopt},
       {"According to known events", "Who did the known thing?", std::nullopt},
       {"Generate a question that meets the following conditions",
        "Which known entity relates to the unknown one?", std::nullopt},
       {"Generate a more natural combined question",
        "Who is the combined answer entity?", std::nullopt}});
  std::vector<UnknownEvent> events{
      {"good event one", "2024-01-02", ""},
      {"skip me", "2024-01-03", ""},
      {"good event two", "2024-01-04", ""},
  };
  auto records = generate_dataset(backend, prompts, events, 5);
  REQUIRE(records.size() == 2);
  CHECK(records[0].id == "gen-0");
  CHECK(records[1].id == "gen-2");  // index preserved for provenance
}

TEST_CASE("merge_hard carries both source pairs in meta") {
  PromptRegistry prompts = PromptRegistry::defaults();
  ScriptedBackend backend({{"Generate a more natural combined question",
                            "What is the merged hard question?", std::nullopt}});
  DatasetRecord a{"gen-0", "First question?", {"ans-a"}, QType::Easy, {}};
  DatasetRecord b{"gen-1", "Second question?", {"ans-b"}, QType::Easy, {}};
  DatasetRecord hard = merge_hard(backend, prompts, a, b, 0);
  CHECK(hard.id == "hard-0");
  CHECK(hard.qtype == QType::Hard);
  CHECK(hard.question == "What is the merged hard question?");
  CHECK(hard.gold_answers == std::vector<std::string>{"ans-b"});
  CHECK(hard.meta.at("source_pair_1_question") == "First question?");
  CHECK(hard.meta.at("source_pair_2_answer") == "ans-b");
  CHECK(hard.meta.at("source_pair_1_id") == "gen-0");
}

TEST_CASE("review export/import filters and edits records") {
  fs::path dir = fs::temp_directory_path() / "selfdc_review_test";
  fs::create_directories(dir);
  fs::path path = dir / "review.tsv";
  std::vector<DatasetRecord> records{
      {"gen-0", "Keep me?", {"a"}, QType::Easy, {}},
      {"gen-1", "Reject me?", {"b"}, QType::Easy, {}},
      {"gen-2", "Edit me?", {"c"}, QType::Easy, {}},
  };
  export_review(records, path.string());
  {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "id\taccept\tquestion\tanswer");
  }
  {
    std::ofstream out(path);
    out << "id\taccept\tquestion\tanswer\n";
    out << "gen-0\tyes\tKeep me?\ta\n";
    out << "gen-1\tno\tReject me?\tb\n";
    out << "gen-2\tyes\tEdited question?\tedited answer\n";
  }
  auto reviewed = apply_review(records, path.string());
  REQUIRE(reviewed.size() == 2);
  CHECK(reviewed[0].id == "gen-0");
  CHECK(reviewed[0].question == "Keep me?");
  CHECK(reviewed[1].id == "gen-2");
  CHECK(reviewed[1].question == "Edited question?");
  CHECK(reviewed[1].gold_answers == std::vector<std::string>{"edited answer"});
  fs::remove_all(dir);
}
