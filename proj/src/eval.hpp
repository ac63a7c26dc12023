#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "backend.hpp"
#include "prompts.hpp"
#include "retrieval.hpp"
#include "types.hpp"

namespace selfdc {

// Conventional extractive-QA normalization: lowercase, strip punctuation,
// collapse whitespace, drop the articles a/an/the.
std::string normalize_answer(const std::string& text);

// 1 iff the normalized prediction equals any normalized gold.
int exact_match(const std::string& prediction,
                const std::vector<std::string>& golds);

// Token-multiset F1, max over golds.
double token_f1(const std::string& prediction,
                const std::vector<std::string>& golds);

// One judging call with a yes/no verdict prompt; parses the first
// case-insensitive yes/no token. Throws JudgeParseFailure when neither
// appears.
int judge_accuracy(Backend& backend, const PromptRegistry& prompts,
                   const std::string& question, const std::string& prediction,
                   const std::vector<std::string>& golds);

struct EvalRow {
  std::string id;
  std::string prediction;
  int em = 0;
  double f1 = 0.0;
  std::optional<int> judged;
  std::int64_t retrieval_calls = 0;
  std::int64_t llm_calls = 0;
  std::string route_of_root;
  std::optional<std::string> error;
};

struct EvalReport {
  std::vector<EvalRow> per_question;  // sorted by id
  double em_mean = 0.0;
  double f1_mean = 0.0;
  std::optional<double> judged_mean;
  int judged_excluded = 0;  // rows without a parsable verdict
  std::int64_t total_retrieval_calls = 0;
  std::int64_t total_llm_calls = 0;
  int n = 0;
};

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);

struct ExperimentResult {
  EvalReport report;
  // Trace trees in dataset order, one per record.
  std::vector<TraceNode> traces;
};

// Executes the configured method per record with a bounded worker pool,
// scores every prediction, and aggregates deterministically (rows sorted by
// id). A per-question failure becomes a zero-scored row with an error note;
// the batch never aborts. judge may be null (judged fields absent).
ExperimentResult run_experiment(const std::vector<DatasetRecord>& dataset,
                                const RunConfig& config, Backend& backend,
                                Retriever* retriever,
                                const PromptRegistry& prompts,
                                Backend* judge = nullptr, int workers = 1);

// Re-scores an existing report's judged column with a judging backend.
EvalReport judge_report(const EvalReport& report,
                        const std::vector<DatasetRecord>& dataset,
                        Backend& backend, const PromptRegistry& prompts);

struct SweepGrid {
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<int> max_depths;
  std::vector<int> ks;
};

struct SweepRow {
  double alpha = 0.0;
  double beta = 0.0;
  int max_depth = 0;
  int k = 0;
  bool skipped = false;
  std::string note;
  EvalReport report;
};

// One run_experiment per grid point (cartesian product; empty grid axes
// fall back to the base config's value). Invalid points become warning rows.
// Wrap the backend in a response cache to share completions across points.
std::vector<SweepRow> sweep(const std::vector<DatasetRecord>& dataset,
                            const RunConfig& base_config, Backend& backend,
                            Retriever* retriever, const PromptRegistry& prompts,
                            const SweepGrid& grid, int workers = 1);

// Tab-separated sweep summary: one row per grid point.
std::string sweep_summary_tsv(const std::vector<SweepRow>& rows);

// Per-axis chart data (CSV) for axes with more than one value.
void write_sweep_chart_data(const std::vector<SweepRow>& rows,
                            const std::string& out_dir);

// Run-directory artifacts: config snapshot, report, one JSON-lines trace
// record per question.
void write_run_outputs(const std::string& out_dir, const RunConfig& config,
                       const EvalReport& report,
                       const std::vector<TraceNode>& traces);

std::vector<TraceNode> load_traces(const std::string& path);

// Pretty tree rendering of one trace (route, confidence, call counts).
std::string render_trace(const TraceNode& node);

}  // namespace selfdc
