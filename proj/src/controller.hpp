#pragma once

#include <atomic>
#include <string>
#include <vector>

#include "backend.hpp"
#include "prompts.hpp"
#include "retrieval.hpp"
#include "types.hpp"

namespace selfdc {

struct SubQA {
  std::string question;
  std::string answer;
};

// Shared services plus atomic call accounting for one experiment run.
// Backends and retrievers are shared read-only; distinct questions may be
// processed concurrently.
struct RunContext {
  Backend& backend;
  Retriever* retriever = nullptr;
  const PromptRegistry& prompts;
  RunConfig config;
  std::atomic<std::int64_t> retrieval_calls{0};
  std::atomic<std::int64_t> llm_calls{0};

  RunContext(Backend& b, Retriever* r, const PromptRegistry& p, RunConfig c)
      : backend(b), retriever(r), prompts(p), config(std::move(c)) {}

  Generation complete(const std::string& prompt, bool want_probs = false);
  // One counter tick per query, not per passage.
  std::vector<Passage> search(const std::string& query, int k);
};

// Extracts "#k:" numbered sub-questions in marker order, stopping at the
// first gap in numbering. Empty list when no markers are present.
std::vector<std::string> parse_subquestions(const std::string& text);

// Issues the decompose prompt once. Throws DecompositionParseFailure when
// the completion contains no "#k:" markers.
std::vector<std::string> decompose(RunContext& ctx, const std::string& question);

// Two prompts: generate a background passage, then read it. 2 LLM calls,
// 0 retrieval calls.
std::string generate_then_read(RunContext& ctx, const std::string& question);

// search + format + read prompt. 1 retrieval call, 1 LLM call. The node,
// when given, records the retrieved passages and its own counters.
std::string retrieve_then_read(RunContext& ctx, const std::string& question,
                               TraceNode* node = nullptr);

// Renders sub-QAs as numbered "Qi: ... Ai: ..." lines into the combine
// prompt. Requires at least 2 sub-QAs.
std::string combine_sub_qas(RunContext& ctx, const std::string& question,
                            const std::vector<SubQA>& subqas);

// The adaptive control loop: score confidence, route to generate / retrieve
// / decompose, recurse on sub-questions with depth capped at
// config.max_depth, then combine. Returns the full trace tree.
TraceNode self_dc(const std::string& question, int depth, RunContext& ctx);

// Non-iterative baselines as single-node traces.
TraceNode run_baseline(Method method, RunContext& ctx,
                       const std::string& question);

// Dispatches on ctx.config.method.
TraceNode answer_question(RunContext& ctx, const std::string& question);

}  // namespace selfdc
