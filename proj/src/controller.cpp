#include "controller.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "confidence.hpp"
#include "errors.hpp"

namespace selfdc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Case-folded, whitespace-normalized form for the parent-identity check.
std::string normalize_question(const std::string& s) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string render_sub_qas(const std::vector<SubQA>& subqas) {
  std::ostringstream out;
  for (std::size_t i = 0; i < subqas.size(); ++i) {
    if (i) out << "\n";
    out << "Q" << (i + 1) << ": " << subqas[i].question << "\n"
        << "A" << (i + 1) << ": " << subqas[i].answer;
  }
  return out.str();
}

ConfidenceScore score_question(RunContext& ctx, const std::string& question,
                               TraceNode& node) {
  node.llm_calls += 1;
  if (ctx.config.confidence_mode == ConfidenceMode::Verbalized)
    return score_verbalized(ctx.backend, ctx.prompts, question, ctx.config);
  // Probability mode: short-answer completion with token probabilities.
  std::string prompt =
      ctx.prompts.render("answer_short", {{"question", question}});
  Generation g = ctx.complete(prompt, /*want_probs=*/true);
  return score_probability(g);
}

}  // namespace

Generation RunContext::complete(const std::string& prompt, bool want_probs) {
  PromptRequest req;
  req.prompt = prompt;
  req.temperature = config.temperature;
  req.top_p = config.top_p;
  req.want_token_probs = want_probs;
  llm_calls.fetch_add(1, std::memory_order_relaxed);
  return backend.complete(req);
}

std::vector<Passage> RunContext::search(const std::string& query, int k) {
  if (!retriever) throw RetrieverUnavailable("no retriever configured");
  retrieval_calls.fetch_add(1, std::memory_order_relaxed);
  return retriever->search(query, k);
}

std::vector<std::string> parse_subquestions(const std::string& text) {
  // All "#k:" markers in text order.
  struct Marker {
    int number;
    std::size_t begin;  // position of '#'
    std::size_t end;    // position just past ':'
  };
  std::vector<Marker> markers;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] != '#' ||
        !std::isdigit(static_cast<unsigned char>(text[i + 1])))
      continue;
    std::size_t j = i + 1;
    int number = 0;
    while (j < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[j]))) {
      number = number * 10 + (text[j] - '0');
      ++j;
    }
    if (j < text.size() && text[j] == ':') {
      markers.push_back({number, i, j + 1});
      i = j;
    }
  }

  // Pieces run between successive markers; numbering must ascend from 1
  // without gaps, and parsing stops at the first gap.
  std::vector<std::string> out;
  int expected = 1;
  for (std::size_t m = 0; m < markers.size(); ++m) {
    if (markers[m].number != expected) break;
    std::size_t start = markers[m].end;
    std::size_t end =
        m + 1 < markers.size() ? markers[m + 1].begin : text.size();
    std::string piece = trim(text.substr(start, end - start));
    while (!piece.empty() && (piece.back() == ',' || piece.back() == ';'))
      piece = trim(piece.substr(0, piece.size() - 1));
    if (!piece.empty()) out.push_back(piece);
    ++expected;
  }
  return out;
}

std::vector<std::string> decompose(RunContext& ctx,
                                   const std::string& question) {
  std::string prompt = ctx.prompts.render("decompose", {{"question", question}});
  Generation g = ctx.complete(prompt);
  auto subs = parse_subquestions(g.text);
  if (subs.empty())
    throw DecompositionParseFailure("no '#k:' markers in completion: " +
                                    g.text.substr(0, 80));
  return subs;
}

std::string generate_then_read(RunContext& ctx, const std::string& question) {
  Generation passage = ctx.complete(
      ctx.prompts.render("generate_passage", {{"question", question}}));
  std::string passage_text = trim(passage.text);
  if (passage_text.empty()) passage_text = kNoPassageSentinel;
  Generation answer = ctx.complete(ctx.prompts.render(
      "read_with_passage",
      {{"passage", passage_text}, {"question", question}}));
  return trim(answer.text);
}

std::string retrieve_then_read(RunContext& ctx, const std::string& question,
                               TraceNode* node) {
  auto passages = ctx.search(question, ctx.config.num_retrieved);
  if (node) {
    node->retrieval_calls += 1;
    node->passages = passages;
  }
  Generation answer = ctx.complete(ctx.prompts.render(
      "read_with_passage",
      {{"passage", format_passages(passages)}, {"question", question}}));
  if (node) node->llm_calls += 1;
  return trim(answer.text);
}

std::string combine_sub_qas(RunContext& ctx, const std::string& question,
                            const std::vector<SubQA>& subqas) {
  if (subqas.size() < 2)
    throw Error("combine_sub_qas requires at least 2 sub-QAs");
  Generation answer = ctx.complete(ctx.prompts.render(
      "combine",
      {{"question", question}, {"sub_qas", render_sub_qas(subqas)}}));
  return trim(answer.text);
}

TraceNode self_dc(const std::string& question, int depth, RunContext& ctx) {
  TraceNode node;
  node.question = question;
  node.depth = depth;

  if (depth >= ctx.config.max_depth) {
    // Depth cap reached: treat as unknown, skip scoring.
    node.route = NodeRoute::DepthFallback;
    node.answer = retrieve_then_read(ctx, question, &node);
    return node;
  }

  ConfidenceScore conf = score_question(ctx, question, node);
  node.confidence = conf.value;

  switch (classify(conf.value, ctx.config.thresholds)) {
    case Route::GenerateThenRead:
      node.route = NodeRoute::GenerateThenRead;
      node.answer = generate_then_read(ctx, question);
      node.llm_calls += 2;
      return node;
    case Route::RetrieveThenRead:
      node.route = NodeRoute::RetrieveThenRead;
      node.answer = retrieve_then_read(ctx, question, &node);
      return node;
    case Route::Decompose:
      break;
  }

  std::vector<std::string> subs;
  try {
    subs = decompose(ctx, question);
  } catch (const DecompositionParseFailure&) {
    // Degenerate decomposition: regard as unknown, retrieve.
  }
  node.llm_calls += 1;

  const std::string parent_norm = normalize_question(question);
  const bool non_productive =
      std::any_of(subs.begin(), subs.end(), [&](const std::string& s) {
        return normalize_question(s) == parent_norm;
      });
  if (subs.size() < 2 || non_productive) {
    node.route = NodeRoute::SingleSubFallback;
    node.answer = retrieve_then_read(ctx, question, &node);
    return node;
  }

  node.route = NodeRoute::Decompose;
  std::vector<SubQA> subqas;
  for (const auto& sub : subs) {
    TraceNode child = self_dc(sub, depth + 1, ctx);
    subqas.push_back({sub, child.answer});
    node.llm_calls += child.llm_calls;
    node.retrieval_calls += child.retrieval_calls;
    node.sub_nodes.push_back(std::move(child));
  }
  node.answer = combine_sub_qas(ctx, question, subqas);
  node.llm_calls += 1;
  return node;
}

TraceNode run_baseline(Method method, RunContext& ctx,
                       const std::string& question) {
  TraceNode node;
  node.question = question;
  node.depth = 0;
  switch (method) {
    case Method::Direct: {
      node.route = NodeRoute::Direct;
      Generation g =
          ctx.complete(ctx.prompts.render("direct", {{"question", question}}));
      node.answer = trim(g.text);
      node.llm_calls = 1;
      return node;
    }
    case Method::CoT: {
      node.route = NodeRoute::CoT;
      Generation g =
          ctx.complete(ctx.prompts.render("cot", {{"question", question}}));
      node.answer = trim(g.text);
      node.llm_calls = 1;
      return node;
    }
    case Method::GenRead: {
      node.route = NodeRoute::GenerateThenRead;
      node.answer = generate_then_read(ctx, question);
      node.llm_calls = 2;
      return node;
    }
    case Method::RR: {
      node.route = NodeRoute::RetrieveThenRead;
      node.answer = retrieve_then_read(ctx, question, &node);
      return node;
    }
    case Method::SelfDC:
      break;
  }
  throw InvalidField("run_baseline requires a non-SelfDC method");
}

TraceNode answer_question(RunContext& ctx, const std::string& question) {
  if (ctx.config.method == Method::SelfDC) return self_dc(question, 0, ctx);
  return run_baseline(ctx.config.method, ctx, question);
}

}  // namespace selfdc
