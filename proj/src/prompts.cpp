#include "prompts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace selfdc {

namespace {

const char* kConfidenceVerbalized =
    R"(Please read the question, give the answer and indicate your level of confidence. Use the following format to provide your answer and confidence level:

Answer: [Your answer]
Confidence (0-100): [Your confidence level, please only include the numerical number, e.g. 80]%

Note: The confidence level indicates the degree of certainty you have about your answer and is represented as a percentage. For instance, if your confidence level is 80%, it means you are 80% certain that your answer is correct and there is a 20% chance that it may be incorrect. If you do not know the answer, simply output confidence as 0%.

Question: {question} Please answer this question and provide your confidence level. Note that the confidence level indicates the degree of certainty you have about your answer and is represented as a percentage.
Answer:)";

const char* kDecompose =
    R"(Please read the question, divide the question into smaller, independent parts. By solving these individual sub-questions and combining their answers, you can derive the solution to the main question. Use the following format to provide your answer: #1: [sub-question 1], #2: [sub-question 2], ...

Question: {question}
Answer:)";

const char* kReadWithPassage =
    R"(Refer to the passage below and answer the following question with just a few words. Passage: {passage}

Question: {question}
The answer is)";

const char* kGeneratePassage =
    R"(Generate a background document from Wikipedia to answer the given question. {question})";

const char* kCombine =
    R"(Question: {question}

Here are all related sub-questions and corresponding answers: {sub_qas}

According to answers of all related sub-quesions of the original question, please generate the final answer of the original question using a few words.)";

const char* kDirect =
    R"(Please answer the following question with just a few words.

Question: {question}
The answer is)";

const char* kCot =
    R"(Please answer the following question with just a few words. Let's think step by step.

Question: {question}
The answer is)";

const char* kJudge =
    R"(You are grading an answer to a question.

Question: {question}
Gold answers: {golds}
Prediction: {prediction}

Does the prediction convey the same answer as any of the gold answers? Reply with Yes or No.)";

const char* kGetEntities =
    R"(Please list the named entities mentioned in the following text, separated by commas.

Text: {text}
Entities:)";

const char* kUnknownQuestionGen =
    R"(Unknown: {unknown_event}

According to the unknown event, please generate a question to which the answer is the entity {unknown_entity}.)";

const char* kKnownEventsGen =
    R"(Generate a detailed passage about {entity})";

const char* kKnownQuestionGen =
    R"(Known: {known_event}

According to known events, please generate a question to which the answer is be the entity {entity}.)";

const char* kKnownQuestionGen2 =
    R"(Seen: {known_passage}

Generate a question that meets the following conditions: 1. contains the terms {unknown_entity} in question, 2. the answer is {known_entity}.)";

const char* kMergeQuestions =
    R"(Question One: {unknown_question}

Question Two: {known_question}

Generate a more natural combined question of question one and question two.)";

}  // namespace

PromptRegistry PromptRegistry::defaults() {
  PromptRegistry r;
  r.templates_ = {
      {"confidence_verbalized", kConfidenceVerbalized},
      {"decompose", kDecompose},
      {"read_with_passage", kReadWithPassage},
      {"generate_passage", kGeneratePassage},
      {"combine", kCombine},
      {"direct", kDirect},
      {"cot", kCot},
      {"answer_short", kDirect},  // short-answer prompt feeding Eq.-style
                                  // token-probability confidence
      {"judge", kJudge},
      {"get_entities", kGetEntities},
      {"unknown_question_gen", kUnknownQuestionGen},
      {"known_events_gen", kKnownEventsGen},
      {"known_question_gen", kKnownQuestionGen},
      {"known_question_gen2", kKnownQuestionGen2},
      {"merge_questions", kMergeQuestions},
  };
  return r;
}

PromptRegistry PromptRegistry::load(const std::string& dir) {
  PromptRegistry r = defaults();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt")
      continue;
    std::ifstream in(entry.path());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    // One trailing newline is file convention, not template content.
    if (!text.empty() && text.back() == '\n') text.pop_back();
    r.templates_[entry.path().stem().string()] = std::move(text);
  }
  return r;
}

const std::string& PromptRegistry::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw UnknownTemplate("no template: " + name);
  return it->second;
}

bool PromptRegistry::has(const std::string& name) const {
  return templates_.count(name) > 0;
}

void PromptRegistry::set(const std::string& name, std::string text) {
  templates_[name] = std::move(text);
}

std::string PromptRegistry::render(
    const std::string& name,
    const std::map<std::string, std::string>& slots) const {
  const std::string& tmpl = get(name);
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t open = tmpl.find('{', pos);
    if (open == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    std::size_t close = tmpl.find('}', open);
    if (close == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    out.append(tmpl, pos, open - pos);
    std::string key = tmpl.substr(open + 1, close - open - 1);
    auto it = slots.find(key);
    if (it == slots.end())
      throw UnfilledSlot("template '" + name + "' slot '{" + key +
                         "}' not filled");
    out.append(it->second);
    pos = close + 1;
  }
  return out;
}

}  // namespace selfdc
