// Command-line front end. All orchestration goes through the shared
// library's C API; this tool only parses flags and shuttles files.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "selfdc/selfdc.h"

using nlohmann::json;

namespace {

struct ConfigFlags {
  std::string config_file;
  std::optional<double> alpha, beta, temperature, top_p;
  std::optional<int> max_depth, k;
  std::optional<std::string> confidence_mode, method;
  std::optional<std::int64_t> seed;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.config_file, "run configuration JSON file");
  cmd->add_option("--alpha", flags.alpha, "router threshold alpha");
  cmd->add_option("--beta", flags.beta, "router threshold beta");
  cmd->add_option("--max-depth", flags.max_depth, "max decomposition depth");
  cmd->add_option("--k", flags.k, "retrieved result count");
  cmd->add_option("--temperature", flags.temperature);
  cmd->add_option("--top-p", flags.top_p);
  cmd->add_option("--confidence-mode", flags.confidence_mode,
                  "verbalized | probability");
  cmd->add_option("--method", flags.method,
                  "self_dc | direct | cot | genread | rr");
  cmd->add_option("--seed", flags.seed);
}

std::string build_config_json(const ConfigFlags& flags) {
  json j = json::object();
  if (!flags.config_file.empty()) {
    std::ifstream in(flags.config_file);
    if (!in) throw CLI::ValidationError("--config",
                                        "cannot open " + flags.config_file);
    j = json::parse(in);
  }
  if (flags.alpha) j["alpha"] = *flags.alpha;
  if (flags.beta) j["beta"] = *flags.beta;
  if (flags.max_depth) j["max_depth"] = *flags.max_depth;
  if (flags.k) j["num_retrieved"] = *flags.k;
  if (flags.temperature) j["temperature"] = *flags.temperature;
  if (flags.top_p) j["top_p"] = *flags.top_p;
  if (flags.confidence_mode) j["confidence_mode"] = *flags.confidence_mode;
  if (flags.method) j["method"] = *flags.method;
  if (flags.seed) j["seed"] = *flags.seed;
  return j.dump();
}

struct ErrBuf {
  char data[1024] = {0};
};

int fail(const char* what, const ErrBuf& err) {
  std::cerr << what << ": " << err.data << "\n";
  return 1;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

// RAII wrappers around the C handles.
using ConfigPtr = std::unique_ptr<sdc_config, decltype(&sdc_config_free)>;
using BackendPtr = std::unique_ptr<sdc_backend, decltype(&sdc_backend_free)>;
using RetrieverPtr =
    std::unique_ptr<sdc_retriever, decltype(&sdc_retriever_free)>;
using DatasetPtr = std::unique_ptr<sdc_dataset, decltype(&sdc_dataset_free)>;
using ReportPtr = std::unique_ptr<sdc_report, decltype(&sdc_report_free)>;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive divide-and-conquer QA orchestrator"};
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "run one experiment");
  ConfigFlags run_flags;
  std::string run_dataset, run_out, run_backend, run_retriever, run_judge,
      run_prompts, run_cache;
  int run_workers = 1;
  add_config_flags(run, run_flags);
  run->add_option("--dataset", run_dataset)->required();
  run->add_option("--out", run_out)->required();
  run->add_option("--backend", run_backend, "oracle:F | scripted:F | http:URL|MODEL")
      ->required();
  run->add_option("--retriever", run_retriever, "local:F | http:URL");
  run->add_option("--judge", run_judge, "judging backend spec");
  run->add_option("--prompts", run_prompts, "prompt template directory");
  run->add_option("--cache", run_cache, "response cache directory");
  run->add_option("--workers", run_workers);

  // --- sweep ---
  auto* sw = app.add_subcommand("sweep", "hyperparameter sweep");
  ConfigFlags sw_flags;
  std::string sw_dataset, sw_out, sw_backend, sw_retriever, sw_prompts;
  std::string sw_alpha_grid, sw_beta_grid, sw_depth_grid, sw_k_grid;
  int sw_workers = 1;
  add_config_flags(sw, sw_flags);
  sw->add_option("--dataset", sw_dataset)->required();
  sw->add_option("--out", sw_out)->required();
  sw->add_option("--backend", sw_backend)->required();
  sw->add_option("--retriever", sw_retriever);
  sw->add_option("--prompts", sw_prompts);
  sw->add_option("--alpha-grid", sw_alpha_grid, "comma-separated alphas");
  sw->add_option("--beta-grid", sw_beta_grid, "comma-separated betas");
  sw->add_option("--depth-grid", sw_depth_grid, "comma-separated max depths");
  sw->add_option("--k-grid", sw_k_grid, "comma-separated k values");
  sw->add_option("--workers", sw_workers);

  // --- generate-data ---
  auto* gen = app.add_subcommand("generate-data", "synthesize a QA dataset");
  std::string gen_events, gen_out, gen_backend, gen_prompts, gen_review,
      gen_cutoff;
  std::int64_t gen_seed = 0;
  int gen_hard = 0;
  gen->add_option("--events", gen_events)->required();
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--backend", gen_backend)->required();
  gen->add_option("--cutoff", gen_cutoff, "cutoff date yyyy-mm-dd")->required();
  gen->add_option("--seed", gen_seed);
  gen->add_option("--hard-pairs", gen_hard,
                  "number of record pairs to merge into hard records");
  gen->add_option("--review-out", gen_review, "export review TSV");
  gen->add_option("--prompts", gen_prompts);

  // --- apply-review ---
  auto* rev = app.add_subcommand("apply-review",
                                 "filter/edit a dataset with a review file");
  std::string rev_dataset, rev_review, rev_out;
  rev->add_option("--dataset", rev_dataset)->required();
  rev->add_option("--review", rev_review)->required();
  rev->add_option("--out", rev_out)->required();

  // --- judge ---
  auto* jd = app.add_subcommand("judge", "re-judge an existing report");
  std::string jd_report, jd_dataset, jd_backend, jd_prompts, jd_out;
  jd->add_option("--report", jd_report)->required();
  jd->add_option("--dataset", jd_dataset)->required();
  jd->add_option("--backend", jd_backend)->required();
  jd->add_option("--out", jd_out)->required();
  jd->add_option("--prompts", jd_prompts);

  // --- validate-config ---
  auto* vc = app.add_subcommand("validate-config", "validate a config file");
  std::string vc_config;
  vc->add_option("--config", vc_config)->required();

  // --- show-trace ---
  auto* st = app.add_subcommand("show-trace", "pretty-print one trace tree");
  std::string st_traces;
  int st_index = -1;
  st->add_option("--traces", st_traces)->required();
  st->add_option("--index", st_index, "trace index (default: all)");

  CLI11_PARSE(app, argc, argv);
  ErrBuf err;

  if (run->parsed()) {
    ConfigPtr config(nullptr, sdc_config_free);
    {
      sdc_config* raw = nullptr;
      std::string cj = build_config_json(run_flags);
      if (sdc_config_from_json(cj.c_str(), &raw, err.data, sizeof err.data))
        return fail("invalid config", err);
      config.reset(raw);
    }
    sdc_backend* b = nullptr;
    if (sdc_backend_open(run_backend.c_str(), opt(run_prompts),
                         opt(run_cache), &b, err.data, sizeof err.data))
      return fail("backend", err);
    BackendPtr backend(b, sdc_backend_free);
    RetrieverPtr retriever(nullptr, sdc_retriever_free);
    if (!run_retriever.empty()) {
      sdc_retriever* r = nullptr;
      if (sdc_retriever_open(run_retriever.c_str(), &r, err.data,
                             sizeof err.data))
        return fail("retriever", err);
      retriever.reset(r);
    }
    BackendPtr judge(nullptr, sdc_backend_free);
    if (!run_judge.empty()) {
      sdc_backend* j = nullptr;
      if (sdc_backend_open(run_judge.c_str(), opt(run_prompts), nullptr, &j,
                           err.data, sizeof err.data))
        return fail("judge backend", err);
      judge.reset(j);
    }
    sdc_dataset* d = nullptr;
    if (sdc_dataset_load(run_dataset.c_str(), &d, err.data, sizeof err.data))
      return fail("dataset", err);
    DatasetPtr dataset(d, sdc_dataset_free);

    sdc_report* rep = nullptr;
    if (sdc_run_experiment(config.get(), dataset.get(), backend.get(),
                           retriever.get(), judge.get(), opt(run_prompts),
                           run_workers, run_out.c_str(), &rep, err.data,
                           sizeof err.data))
      return fail("run", err);
    ReportPtr report(rep, sdc_report_free);
    std::cout << "n=" << sdc_report_n(rep)
              << " em=" << sdc_report_em_mean(rep)
              << " f1=" << sdc_report_f1_mean(rep)
              << " retrieval_calls=" << sdc_report_total_retrieval_calls(rep)
              << "\nreport written to " << run_out << "/report.json\n";
    return 0;
  }

  if (sw->parsed()) {
    ConfigPtr config(nullptr, sdc_config_free);
    {
      sdc_config* raw = nullptr;
      std::string cj = build_config_json(sw_flags);
      if (sdc_config_from_json(cj.c_str(), &raw, err.data, sizeof err.data))
        return fail("invalid config", err);
      config.reset(raw);
    }
    sdc_backend* b = nullptr;
    if (sdc_backend_open(sw_backend.c_str(), opt(sw_prompts), nullptr, &b,
                         err.data, sizeof err.data))
      return fail("backend", err);
    BackendPtr backend(b, sdc_backend_free);
    RetrieverPtr retriever(nullptr, sdc_retriever_free);
    if (!sw_retriever.empty()) {
      sdc_retriever* r = nullptr;
      if (sdc_retriever_open(sw_retriever.c_str(), &r, err.data,
                             sizeof err.data))
        return fail("retriever", err);
      retriever.reset(r);
    }
    sdc_dataset* d = nullptr;
    if (sdc_dataset_load(sw_dataset.c_str(), &d, err.data, sizeof err.data))
      return fail("dataset", err);
    DatasetPtr dataset(d, sdc_dataset_free);

    json grid = json::object();
    auto parse_list = [](const std::string& csv, bool integer) {
      json arr = json::array();
      std::istringstream in(csv);
      std::string item;
      while (std::getline(in, item, ','))
        if (!item.empty())
          arr.push_back(integer ? json(std::stoi(item))
                                : json(std::stod(item)));
      return arr;
    };
    if (!sw_alpha_grid.empty()) grid["alpha"] = parse_list(sw_alpha_grid, false);
    if (!sw_beta_grid.empty()) grid["beta"] = parse_list(sw_beta_grid, false);
    if (!sw_depth_grid.empty())
      grid["max_depth"] = parse_list(sw_depth_grid, true);
    if (!sw_k_grid.empty()) grid["k"] = parse_list(sw_k_grid, true);

    char* summary = nullptr;
    if (sdc_sweep(config.get(), dataset.get(), backend.get(), retriever.get(),
                  grid.dump().c_str(), opt(sw_prompts), sw_workers,
                  sw_out.c_str(), &summary, err.data, sizeof err.data))
      return fail("sweep", err);
    std::cout << summary;
    sdc_string_free(summary);
    return 0;
  }

  if (gen->parsed()) {
    sdc_backend* b = nullptr;
    if (sdc_backend_open(gen_backend.c_str(), opt(gen_prompts), nullptr, &b,
                         err.data, sizeof err.data))
      return fail("backend", err);
    BackendPtr backend(b, sdc_backend_free);
    if (sdc_generate_data(gen_events.c_str(), backend.get(), opt(gen_prompts),
                          gen_cutoff.c_str(), gen_seed, gen_hard,
                          gen_out.c_str(), opt(gen_review), err.data,
                          sizeof err.data))
      return fail("generate-data", err);
    std::cout << "dataset written to " << gen_out << "\n";
    return 0;
  }

  if (rev->parsed()) {
    if (sdc_apply_review(rev_dataset.c_str(), rev_review.c_str(),
                         rev_out.c_str(), err.data, sizeof err.data))
      return fail("apply-review", err);
    std::cout << "reviewed dataset written to " << rev_out << "\n";
    return 0;
  }

  if (jd->parsed()) {
    sdc_backend* b = nullptr;
    if (sdc_backend_open(jd_backend.c_str(), opt(jd_prompts), nullptr, &b,
                         err.data, sizeof err.data))
      return fail("backend", err);
    BackendPtr backend(b, sdc_backend_free);
    if (sdc_judge_report(jd_report.c_str(), jd_dataset.c_str(), backend.get(),
                         opt(jd_prompts), jd_out.c_str(), err.data,
                         sizeof err.data))
      return fail("judge", err);
    std::cout << "judged report written to " << jd_out << "\n";
    return 0;
  }

  if (vc->parsed()) {
    std::ifstream in(vc_config);
    if (!in) {
      std::cerr << "cannot open " << vc_config << "\n";
      return 1;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (sdc_config_validate_json(buf.str().c_str(), err.data,
                                 sizeof err.data)) {
      std::cerr << "invalid config: " << err.data << "\n";
      return 1;
    }
    std::cout << "config ok\n";
    return 0;
  }

  if (st->parsed()) {
    char* rendered = nullptr;
    if (sdc_trace_render(st_traces.c_str(), st_index, &rendered, err.data,
                         sizeof err.data))
      return fail("show-trace", err);
    std::cout << rendered;
    sdc_string_free(rendered);
    return 0;
  }

  return 0;
}
