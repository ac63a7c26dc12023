#include "eval.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "confidence.hpp"
#include "controller.hpp"
#include "errors.hpp"

namespace selfdc {

namespace fs = std::filesystem;
using nlohmann::json;

std::string normalize_answer(const std::string& text) {
  std::string lowered;
  lowered.reserve(text.size());
  for (unsigned char c : text)
    lowered.push_back(std::ispunct(c) ? ' '
                                      : static_cast<char>(std::tolower(c)));
  std::istringstream in(lowered);
  std::string token;
  std::string out;
  while (in >> token) {
    if (token == "a" || token == "an" || token == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

int exact_match(const std::string& prediction,
                const std::vector<std::string>& golds) {
  std::string p = normalize_answer(prediction);
  for (const auto& g : golds)
    if (p == normalize_answer(g)) return 1;
  return 0;
}

namespace {

std::map<std::string, int> token_counts(const std::string& normalized) {
  std::map<std::string, int> counts;
  std::istringstream in(normalized);
  std::string token;
  while (in >> token) counts[token]++;
  return counts;
}

double f1_single(const std::string& prediction, const std::string& gold) {
  auto p = token_counts(normalize_answer(prediction));
  auto g = token_counts(normalize_answer(gold));
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  int overlap = 0;
  for (const auto& [tok, count] : p) {
    auto it = g.find(tok);
    if (it != g.end()) overlap += std::min(count, it->second);
  }
  if (overlap == 0) return 0.0;
  double p_total = 0, g_total = 0;
  for (const auto& [_, c] : p) p_total += c;
  for (const auto& [_, c] : g) g_total += c;
  double precision = overlap / p_total;
  double recall = overlap / g_total;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double token_f1(const std::string& prediction,
                const std::vector<std::string>& golds) {
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, f1_single(prediction, g));
  return best;
}

int judge_accuracy(Backend& backend, const PromptRegistry& prompts,
                   const std::string& question, const std::string& prediction,
                   const std::vector<std::string>& golds) {
  std::string joined;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (i) joined += " | ";
    joined += golds[i];
  }
  PromptRequest req;
  req.prompt = prompts.render("judge", {{"question", question},
                                        {"golds", joined},
                                        {"prediction", prediction}});
  Generation g = backend.complete(req);
  for (const auto& token : tokenize(g.text)) {
    if (token == "yes") return 1;
    if (token == "no") return 0;
  }
  throw JudgeParseFailure("verdict contains neither yes nor no: " +
                          g.text.substr(0, 60));
}

json to_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& r : report.per_question) {
    json rj{{"id", r.id},
            {"prediction", r.prediction},
            {"em", r.em},
            {"f1", r.f1},
            {"retrieval_calls", r.retrieval_calls},
            {"llm_calls", r.llm_calls},
            {"route_of_root", r.route_of_root}};
    if (r.judged) rj["judged"] = *r.judged;
    if (r.error) rj["error"] = *r.error;
    rows.push_back(std::move(rj));
  }
  json agg{{"em_mean", report.em_mean},
           {"f1_mean", report.f1_mean},
           {"judged_excluded", report.judged_excluded},
           {"total_retrieval_calls", report.total_retrieval_calls},
           {"total_llm_calls", report.total_llm_calls},
           {"n", report.n}};
  if (report.judged_mean) agg["judged_mean"] = *report.judged_mean;
  return json{{"per_question", rows}, {"aggregates", agg}};
}

EvalReport eval_report_from_json(const json& j) {
  EvalReport report;
  for (const auto& rj : j.at("per_question")) {
    EvalRow r;
    r.id = rj.at("id").get<std::string>();
    r.prediction = rj.at("prediction").get<std::string>();
    r.em = rj.at("em").get<int>();
    r.f1 = rj.at("f1").get<double>();
    r.retrieval_calls = rj.at("retrieval_calls").get<std::int64_t>();
    r.llm_calls = rj.at("llm_calls").get<std::int64_t>();
    r.route_of_root = rj.at("route_of_root").get<std::string>();
    if (rj.contains("judged")) r.judged = rj.at("judged").get<int>();
    if (rj.contains("error")) r.error = rj.at("error").get<std::string>();
    report.per_question.push_back(std::move(r));
  }
  const auto& agg = j.at("aggregates");
  report.em_mean = agg.at("em_mean").get<double>();
  report.f1_mean = agg.at("f1_mean").get<double>();
  report.judged_excluded = agg.at("judged_excluded").get<int>();
  report.total_retrieval_calls =
      agg.at("total_retrieval_calls").get<std::int64_t>();
  report.total_llm_calls = agg.at("total_llm_calls").get<std::int64_t>();
  report.n = agg.at("n").get<int>();
  if (agg.contains("judged_mean"))
    report.judged_mean = agg.at("judged_mean").get<double>();
  return report;
}

namespace {

// Deterministic fold over rows sorted by id.
void aggregate(EvalReport& report) {
  std::sort(report.per_question.begin(), report.per_question.end(),
            [](const EvalRow& a, const EvalRow& b) { return a.id < b.id; });
  report.n = static_cast<int>(report.per_question.size());
  double em_sum = 0, f1_sum = 0;
  std::int64_t retrievals = 0, llm = 0;
  int judged_sum = 0, judged_n = 0, judged_missing = 0;
  bool any_judge_attempted = false;
  for (const auto& r : report.per_question) {
    em_sum += r.em;
    f1_sum += r.f1;
    retrievals += r.retrieval_calls;
    llm += r.llm_calls;
    if (r.judged) {
      judged_sum += *r.judged;
      ++judged_n;
      any_judge_attempted = true;
    } else if (r.error && r.error->find("judge") != std::string::npos) {
      ++judged_missing;
      any_judge_attempted = true;
    }
  }
  report.em_mean = report.n ? em_sum / report.n : 0.0;
  report.f1_mean = report.n ? f1_sum / report.n : 0.0;
  report.total_retrieval_calls = retrievals;
  report.total_llm_calls = llm;
  report.judged_excluded = judged_missing;
  if (any_judge_attempted && judged_n > 0)
    report.judged_mean = static_cast<double>(judged_sum) / judged_n;
}

}  // namespace

ExperimentResult run_experiment(const std::vector<DatasetRecord>& dataset,
                                const RunConfig& config, Backend& backend,
                                Retriever* retriever,
                                const PromptRegistry& prompts, Backend* judge,
                                int workers) {
  if (dataset.empty()) throw InvalidField("dataset must be non-empty");
  RunConfig validated = validate_run_config(config);
  RunContext ctx(backend, retriever, prompts, validated);

  std::vector<EvalRow> rows(dataset.size());
  std::vector<TraceNode> traces(dataset.size());

  auto process = [&](std::size_t i) {
    const auto& record = dataset[i];
    EvalRow row;
    row.id = record.id;
    try {
      TraceNode trace = answer_question(ctx, record.question);
      row.prediction = trace.answer;
      row.em = exact_match(trace.answer, record.gold_answers);
      row.f1 = token_f1(trace.answer, record.gold_answers);
      row.retrieval_calls = trace.retrieval_calls;
      row.llm_calls = trace.llm_calls;
      row.route_of_root = to_string(trace.route);
      traces[i] = std::move(trace);
    } catch (const std::exception& e) {
      row.error = e.what();
      row.route_of_root = "error";
      traces[i].question = record.question;
    }
    if (judge && !row.error) {
      try {
        row.judged = judge_accuracy(*judge, prompts, record.question,
                                    row.prediction, record.gold_answers);
      } catch (const JudgeParseFailure& e) {
        row.error = std::string("judge: ") + e.what();
      }
    }
    rows[i] = std::move(row);
  };

  workers = std::max(1, workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < dataset.size(); ++i) process(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < dataset.size();
             i = next.fetch_add(1))
          process(i);
      });
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  result.report.per_question = std::move(rows);
  aggregate(result.report);
  result.traces = std::move(traces);
  return result;
}

EvalReport judge_report(const EvalReport& report,
                        const std::vector<DatasetRecord>& dataset,
                        Backend& backend, const PromptRegistry& prompts) {
  std::map<std::string, const DatasetRecord*> by_id;
  for (const auto& r : dataset) by_id[r.id] = &r;
  EvalReport out = report;
  for (auto& row : out.per_question) {
    auto it = by_id.find(row.id);
    if (it == by_id.end()) continue;
    try {
      row.judged = judge_accuracy(backend, prompts, it->second->question,
                                  row.prediction, it->second->gold_answers);
    } catch (const JudgeParseFailure& e) {
      row.judged.reset();
      row.error = std::string("judge: ") + e.what();
    }
  }
  aggregate(out);
  return out;
}

std::vector<SweepRow> sweep(const std::vector<DatasetRecord>& dataset,
                            const RunConfig& base_config, Backend& backend,
                            Retriever* retriever,
                            const PromptRegistry& prompts,
                            const SweepGrid& grid, int workers) {
  auto alphas = grid.alphas.empty()
                    ? std::vector<double>{base_config.thresholds.alpha}
                    : grid.alphas;
  auto betas = grid.betas.empty()
                   ? std::vector<double>{base_config.thresholds.beta}
                   : grid.betas;
  auto depths = grid.max_depths.empty()
                    ? std::vector<int>{base_config.max_depth}
                    : grid.max_depths;
  auto ks = grid.ks.empty() ? std::vector<int>{base_config.num_retrieved}
                            : grid.ks;

  std::vector<SweepRow> rows;
  for (double alpha : alphas)
    for (double beta : betas)
      for (int depth : depths)
        for (int k : ks) {
          SweepRow row;
          row.alpha = alpha;
          row.beta = beta;
          row.max_depth = depth;
          row.k = k;
          RunConfig config = base_config;
          config.thresholds = {alpha, beta};
          config.max_depth = depth;
          config.num_retrieved = k;
          try {
            validate_run_config(config);
          } catch (const std::exception& e) {
            row.skipped = true;
            row.note = e.what();
            rows.push_back(std::move(row));
            continue;
          }
          row.report = run_experiment(dataset, config, backend, retriever,
                                      prompts, nullptr, workers)
                           .report;
          rows.push_back(std::move(row));
        }
  return rows;
}

std::string sweep_summary_tsv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "alpha\tbeta\tmax_depth\tk\tem\tf1\tjudged\tretrieval_calls\tnote\n";
  for (const auto& r : rows) {
    out << r.alpha << "\t" << r.beta << "\t" << r.max_depth << "\t" << r.k
        << "\t";
    if (r.skipped) {
      out << "-\t-\t-\t-\t" << r.note << "\n";
      continue;
    }
    out << r.report.em_mean << "\t" << r.report.f1_mean << "\t";
    if (r.report.judged_mean)
      out << *r.report.judged_mean;
    else
      out << "-";
    out << "\t" << r.report.total_retrieval_calls << "\t" << r.note << "\n";
  }
  return out.str();
}

void write_sweep_chart_data(const std::vector<SweepRow>& rows,
                            const std::string& out_dir) {
  fs::create_directories(out_dir);
  struct Axis {
    const char* name;
    std::function<double(const SweepRow&)> value;
  };
  const std::vector<Axis> axes{
      {"alpha", [](const SweepRow& r) { return r.alpha; }},
      {"beta", [](const SweepRow& r) { return r.beta; }},
      {"max_depth", [](const SweepRow& r) { return double(r.max_depth); }},
      {"k", [](const SweepRow& r) { return double(r.k); }}};
  for (const auto& axis : axes) {
    std::vector<double> values;
    for (const auto& r : rows)
      if (!r.skipped) values.push_back(axis.value(r));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.size() < 2) continue;
    std::ofstream out(fs::path(out_dir) / ("chart_" + std::string(axis.name) +
                                           ".csv"));
    out << axis.name << ",em,f1,retrieval_calls\n";
    for (const auto& r : rows) {
      if (r.skipped) continue;
      out << axis.value(r) << "," << r.report.em_mean << ","
          << r.report.f1_mean << "," << r.report.total_retrieval_calls << "\n";
    }
  }
}

void write_run_outputs(const std::string& out_dir, const RunConfig& config,
                       const EvalReport& report,
                       const std::vector<TraceNode>& traces) {
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "config.json");
    out << to_json(config).dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << to_json(report).dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "traces.jsonl");
    for (const auto& t : traces) out << to_json(t).dump() << "\n";
  }
}

std::vector<TraceNode> load_traces(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidField("cannot open traces file: " + path);
  std::vector<TraceNode> traces;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    traces.push_back(trace_node_from_json(json::parse(line)));
  }
  return traces;
}

namespace {

void render_node(const TraceNode& node, int indent, std::ostringstream& out) {
  out << std::string(indent * 2, ' ') << "[" << to_string(node.route) << "]";
  if (node.confidence) out << " conf=" << *node.confidence;
  out << " llm=" << node.llm_calls << " ret=" << node.retrieval_calls;
  out << " q=\"" << node.question << "\" -> \"" << node.answer << "\"\n";
  for (const auto& child : node.sub_nodes) render_node(child, indent + 1, out);
}

}  // namespace

std::string render_trace(const TraceNode& node) {
  std::ostringstream out;
  render_node(node, 0, out);
  return out.str();
}

}  // namespace selfdc
