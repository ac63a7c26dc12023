#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cache.hpp"
#include "errors.hpp"
#include "fixtures.hpp"
#include "oracle_backend.hpp"
#include "prompts.hpp"
#include "scripted_backend.hpp"

using namespace selfdc;
namespace fs = std::filesystem;

namespace {

PromptRequest req(std::string prompt, bool want_probs = false) {
  PromptRequest r;
  r.prompt = std::move(prompt);
  r.want_token_probs = want_probs;
  return r;
}

}  // namespace

TEST_CASE("scripted backend: first matching rule wins") {
  ScriptedBackend b({{"capital of France", "Paris", std::nullopt},
                     {"capital", "somewhere", std::nullopt},
                     {"", "fallback", std::nullopt}});
  CHECK(b.complete(req("What is the capital of France?")).text == "Paris");
  CHECK(b.complete(req("What is the capital of Spain?")).text == "somewhere");
  CHECK(b.complete(req("anything else")).text == "fallback");
}

TEST_CASE("scripted backend: probability support is per rule") {
  ScriptedBackend b({{"probs", "ok", std::vector<double>{0.5, 0.7}},
                     {"plain", "ok", std::nullopt}});
  auto g = b.complete(req("give me probs", true));
  REQUIRE(g.token_probs.has_value());
  CHECK(*g.token_probs == std::vector<double>{0.5, 0.7});
  // Probabilities are attached only on request.
  CHECK(!b.complete(req("give me probs")).token_probs.has_value());
  CHECK_THROWS_AS(b.complete(req("plain question", true)), ProbsUnsupported);
}

TEST_CASE("scripted backend: unmatched or empty prompt is an error") {
  ScriptedBackend b({{"only this", "x", std::nullopt}});
  CHECK_THROWS_AS(b.complete(req("something else")), UnrecognizedPrompt);
  CHECK_THROWS_AS(b.complete(req("")), UnrecognizedPrompt);
}

TEST_CASE("scripted backend: repeated calls are byte-identical") {
  ScriptedBackend b({{"", "same answer", std::nullopt}});
  CHECK(b.complete(req("q")).text == b.complete(req("q")).text);
}

TEST_CASE("scripted backend rule file round trip") {
  fs::path dir = fs::temp_directory_path() / "selfdc_scripted_test";
  fs::create_directories(dir);
  fs::path path = dir / "rules.json";
  {
    std::ofstream out(path);
    out << R"([{"match":"hello","response":"world","token_probs":[0.9,0.8]},
               {"match":"","response":"default"}])";
  }
  auto b = ScriptedBackend::from_file(path.string());
  CHECK(b.complete(req("say hello")).text == "world");
  CHECK(b.complete(req("say hello", true)).token_probs ==
        std::vector<double>{0.9, 0.8});
  CHECK(b.complete(req("other")).text == "default");
  {
    std::ofstream out(path);
    out << R"([{"match":"","response":"x","token_probs":[1.5]}])";
  }
  CHECK_THROWS_AS(ScriptedBackend::from_file(path.string()), InvalidField);
  fs::remove_all(dir);
}

TEST_CASE("match_template recovers slot values from rendered prompts") {
  PromptRegistry r = PromptRegistry::defaults();
  std::string prompt = r.render(
      "read_with_passage",
      {{"passage", "Some context here."}, {"question", "What is it?"}});
  auto m = match_template(r.get("read_with_passage"), prompt);
  REQUIRE(m.has_value());
  CHECK(m->at("passage") == "Some context here.");
  CHECK(m->at("question") == "What is it?");
  CHECK(!match_template(r.get("decompose"), prompt).has_value());
  CHECK(!match_template(r.get("read_with_passage"), prompt + " trailing")
             .has_value());
}

TEST_CASE("oracle confidence: pre-cutoff facts are known, post-cutoff not") {
  OracleBackend oracle(fixtures::make_kb(), PromptRegistry::defaults());
  PromptRegistry r = PromptRegistry::defaults();

  auto known = oracle.complete(req(r.render(
      "confidence_verbalized", {{"question", fixtures::known_question(0)}})));
  CHECK(known.text.find("Answer: Acity00") != std::string::npos);
  CHECK(known.text.find("Confidence (0-100): 95%") != std::string::npos);

  auto unknown = oracle.complete(req(r.render(
      "confidence_verbalized", {{"question", fixtures::unknown_question(0)}})));
  CHECK(unknown.text.find("Confidence (0-100): 0%") != std::string::npos);

  auto composite = oracle.complete(req(r.render(
      "confidence_verbalized",
      {{"question", fixtures::composite_question(0)}})));
  CHECK(composite.text.find("Confidence (0-100): 40%") != std::string::npos);
}

TEST_CASE("oracle decompose emits registered sub-questions") {
  OracleBackend oracle(fixtures::make_kb(), PromptRegistry::defaults());
  PromptRegistry r = PromptRegistry::defaults();
  auto g = oracle.complete(req(
      r.render("decompose", {{"question", fixtures::composite_question(3)}})));
  CHECK(g.text == "#1: " + fixtures::known_question(3) +
                      " #2: " + fixtures::unknown_question(3));
  // Non-compositional questions degrade to a single self sub-question.
  auto single = oracle.complete(req(
      r.render("decompose", {{"question", fixtures::known_question(3)}})));
  CHECK(single.text == "#1: " + fixtures::known_question(3));
}

TEST_CASE("oracle read answers only when the passage states the answer") {
  OracleBackend oracle(fixtures::make_kb(), PromptRegistry::defaults());
  PromptRegistry r = PromptRegistry::defaults();
  auto hit = oracle.complete(req(r.render(
      "read_with_passage",
      {{"passage", "The 2024 B05 prize was won by Bwinner05."},
       {"question", fixtures::unknown_question(5)}})));
  CHECK(hit.text == "Bwinner05");
  auto miss = oracle.complete(req(r.render(
      "read_with_passage", {{"passage", "Nothing relevant."},
                            {"question", fixtures::unknown_question(5)}})));
  CHECK(miss.text == "unknown");
}

TEST_CASE("oracle generates passages only for pre-cutoff facts") {
  OracleBackend oracle(fixtures::make_kb(), PromptRegistry::defaults());
  PromptRegistry r = PromptRegistry::defaults();
  auto known = oracle.complete(req(r.render(
      "generate_passage", {{"question", fixtures::known_question(7)}})));
  CHECK(known.text == "capital of Aland07: Acity07.");
  auto unknown = oracle.complete(req(r.render(
      "generate_passage", {{"question", fixtures::unknown_question(7)}})));
  CHECK(unknown.text.empty());
}

TEST_CASE("oracle combine: composite lookup, else unanimous sub-answers") {
  OracleBackend oracle(fixtures::make_kb(), PromptRegistry::defaults());
  PromptRegistry r = PromptRegistry::defaults();
  auto composite = oracle.complete(req(r.render(
      "combine", {{"question", fixtures::composite_question(2)},
                  {"sub_qas", "Q1: a?\nA1: x\nQ2: b?\nA2: y"}})));
  CHECK(composite.text == "Pair02");

  auto unanimous = oracle.complete(req(
      r.render("combine", {{"question", "Unregistered conjunction?"},
                           {"sub_qas", "Q1: a?\nA1: X\nQ2: b?\nA2: X"}})));
  CHECK(unanimous.text == "X");

  auto split = oracle.complete(req(
      r.render("combine", {{"question", "Unregistered conjunction?"},
                           {"sub_qas", "Q1: a?\nA1: X\nQ2: b?\nA2: Y"}})));
  CHECK(split.text == "unknown");
}

TEST_CASE("oracle direct answers known facts and carries probabilities") {
  OracleBackend oracle(fixtures::make_kb(), PromptRegistry::defaults());
  PromptRegistry r = PromptRegistry::defaults();
  auto known = oracle.complete(
      req(r.render("direct", {{"question", fixtures::known_question(1)}})));
  CHECK(known.text == "Acity01");
  auto unknown = oracle.complete(
      req(r.render("direct", {{"question", fixtures::unknown_question(1)}})));
  CHECK(unknown.text == "unknown");

  auto probs = oracle.complete(req(
      r.render("direct", {{"question", fixtures::known_question(1)}}), true));
  REQUIRE(probs.token_probs.has_value());
  CHECK((*probs.token_probs)[0] == doctest::Approx(0.95));
}

TEST_CASE("oracle judge compares prediction against gold alternatives") {
  OracleBackend oracle(fixtures::make_kb(), PromptRegistry::defaults());
  PromptRegistry r = PromptRegistry::defaults();
  auto yes = oracle.complete(req(r.render(
      "judge", {{"question", "q?"}, {"golds", "Paris | France"},
                {"prediction", "paris"}})));
  CHECK(yes.text == "Yes");
  auto no = oracle.complete(req(r.render(
      "judge", {{"question", "q?"}, {"golds", "Paris"},
                {"prediction", "London"}})));
  CHECK(no.text == "No");
}

TEST_CASE("oracle rejects prompts outside its template families") {
  OracleBackend oracle(fixtures::make_kb(), PromptRegistry::defaults());
  CHECK_THROWS_AS(oracle.complete(req("free-form chit chat")),
                  UnrecognizedPrompt);
}

TEST_CASE("oracle is a pure function of the fact base and request") {
  OracleBackend oracle(fixtures::make_kb(), PromptRegistry::defaults());
  PromptRegistry r = PromptRegistry::defaults();
  std::string prompt = r.render("confidence_verbalized",
                                {{"question", fixtures::known_question(9)}});
  CHECK(oracle.complete(req(prompt)).text == oracle.complete(req(prompt)).text);
}

TEST_CASE("fact base file round trip") {
  fs::path dir = fs::temp_directory_path() / "selfdc_kb_test";
  fs::create_directories(dir);
  fs::path path = dir / "kb.json";
  fixtures::write_kb_file(path.string());
  FactBase kb = FactBase::from_file(path.string());
  CHECK(kb.cutoff_date == fixtures::kCutoff);
  CHECK(kb.facts.size() == 2 * fixtures::kGroupSize);
  CHECK(kb.composites.size() == fixtures::kGroupSize);
  REQUIRE(kb.lookup(fixtures::known_question(4)) != nullptr);
  CHECK(kb.lookup(fixtures::known_question(4))->answer == "Acity04");
  CHECK(kb.lookup_composite(fixtures::composite_question(4)) != nullptr);
  CHECK(kb.lookup("unrelated question") == nullptr);
  fs::remove_all(dir);
}

namespace {

// Counts completions so cache hit behavior is observable.
struct CountingBackend : Backend {
  int calls = 0;
  Generation complete(const PromptRequest& request) override {
    ++calls;
    Generation g;
    g.text = "reply to: " + request.prompt;
    if (request.want_token_probs) g.token_probs = std::vector<double>{0.5};
    return g;
  }
  std::string id() const override { return "counting"; }
};

}  // namespace

TEST_CASE("cache serves identical requests without re-invoking the backend") {
  auto inner = std::make_shared<CountingBackend>();
  CachedBackend cache(inner);
  CHECK(cache.complete(req("q1")).text == "reply to: q1");
  CHECK(cache.complete(req("q1")).text == "reply to: q1");
  CHECK(inner->calls == 1);
  CHECK(cache.hits() == 1);
  CHECK(cache.misses() == 1);
}

TEST_CASE("cache key includes sampling parameters") {
  auto inner = std::make_shared<CountingBackend>();
  CachedBackend cache(inner);
  PromptRequest a = req("same prompt");
  PromptRequest b = req("same prompt");
  b.temperature = 0.9;
  cache.complete(a);
  cache.complete(b);
  CHECK(inner->calls == 2);
  PromptRequest c = req("same prompt", true);
  cache.complete(c);
  CHECK(inner->calls == 3);
}

TEST_CASE("on-disk cache persists across instances") {
  fs::path dir = fs::temp_directory_path() / "selfdc_cache_test";
  fs::remove_all(dir);
  auto inner = std::make_shared<CountingBackend>();
  {
    CachedBackend cache(inner, dir.string());
    cache.complete(req("persisted"));
  }
  {
    CachedBackend cache(inner, dir.string());
    CHECK(cache.complete(req("persisted")).text == "reply to: persisted");
  }
  CHECK(inner->calls == 1);
  fs::remove_all(dir);
}

TEST_CASE("corrupt cache entry falls through to the backend") {
  fs::path dir = fs::temp_directory_path() / "selfdc_cache_corrupt";
  fs::remove_all(dir);
  auto inner = std::make_shared<CountingBackend>();
  {
    CachedBackend cache(inner, dir.string());
    cache.complete(req("damaged"));
  }
  // Corrupt the single on-disk entry.
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ofstream out(entry.path());
    out << "not json";
  }
  {
    CachedBackend cache(inner, dir.string());
    CHECK(cache.complete(req("damaged")).text == "reply to: damaged");
  }
  CHECK(inner->calls == 2);
  fs::remove_all(dir);
}

TEST_CASE("sha256_hex matches a known test vector") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
