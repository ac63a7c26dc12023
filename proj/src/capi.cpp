#include "selfdc/selfdc.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "cache.hpp"
#include "controller.hpp"
#include "datagen.hpp"
#include "errors.hpp"
#include "eval.hpp"
#include "http_backend.hpp"
#include "oracle_backend.hpp"
#include "prompts.hpp"
#include "retrieval.hpp"
#include "scripted_backend.hpp"
#include "types.hpp"

using namespace selfdc;
using nlohmann::json;

struct sdc_config {
  RunConfig value;
};
struct sdc_backend {
  std::shared_ptr<Backend> value;
};
struct sdc_retriever {
  std::shared_ptr<Retriever> value;
};
struct sdc_dataset {
  std::vector<DatasetRecord> value;
};
struct sdc_report {
  EvalReport value;
};

namespace {

void write_error(char* errbuf, size_t errlen, const std::string& msg) {
  if (!errbuf || errlen == 0) return;
  std::size_t n = std::min(errlen - 1, msg.size());
  std::memcpy(errbuf, msg.data(), n);
  errbuf[n] = '\0';
}

sdc_status status_for(const std::exception& e) {
  if (dynamic_cast<const InvalidThresholds*>(&e) ||
      dynamic_cast<const InvalidField*>(&e))
    return SDC_ERR_INVALID_CONFIG;
  if (dynamic_cast<const BackendUnavailable*>(&e) ||
      dynamic_cast<const ProbsUnsupported*>(&e) ||
      dynamic_cast<const UnrecognizedPrompt*>(&e))
    return SDC_ERR_BACKEND;
  if (dynamic_cast<const RetrieverUnavailable*>(&e)) return SDC_ERR_RETRIEVER;
  return SDC_ERR_INTERNAL;
}

template <typename F>
sdc_status guarded(char* errbuf, size_t errlen, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    write_error(errbuf, errlen, e.what());
    return status_for(e);
  } catch (...) {
    write_error(errbuf, errlen, "unknown error");
    return SDC_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

PromptRegistry registry_for(const char* prompts_dir) {
  return prompts_dir ? PromptRegistry::load(prompts_dir)
                     : PromptRegistry::defaults();
}

std::shared_ptr<Backend> open_backend(const std::string& spec,
                                      const char* prompts_dir,
                                      const char* cache_dir) {
  std::size_t colon = spec.find(':');
  if (colon == std::string::npos)
    throw InvalidField("backend spec needs 'kind:...': " + spec);
  std::string kind = spec.substr(0, colon);
  std::string rest = spec.substr(colon + 1);

  std::shared_ptr<Backend> backend;
  if (kind == "oracle") {
    backend = std::make_shared<OracleBackend>(FactBase::from_file(rest),
                                              registry_for(prompts_dir));
  } else if (kind == "scripted") {
    backend = std::make_shared<ScriptedBackend>(ScriptedBackend::from_file(rest));
  } else if (kind == "http") {
    std::string url = rest, model = "default", env = "SELFDC_API_KEY";
    std::size_t p1 = rest.find('|');
    if (p1 != std::string::npos) {
      url = rest.substr(0, p1);
      std::string tail = rest.substr(p1 + 1);
      std::size_t p2 = tail.find('|');
      model = p2 == std::string::npos ? tail : tail.substr(0, p2);
      if (p2 != std::string::npos) env = tail.substr(p2 + 1);
    }
    backend = std::make_shared<HttpBackend>(url, model, env);
  } else {
    throw InvalidField("unknown backend kind: " + kind);
  }
  if (cache_dir)
    backend = std::make_shared<CachedBackend>(backend,
                                              std::string(cache_dir));
  return backend;
}

SweepGrid grid_from_json(const std::string& grid_json) {
  SweepGrid grid;
  if (grid_json.empty()) return grid;
  json j = json::parse(grid_json);
  if (j.contains("alpha")) grid.alphas = j.at("alpha").get<std::vector<double>>();
  if (j.contains("beta")) grid.betas = j.at("beta").get<std::vector<double>>();
  if (j.contains("max_depth"))
    grid.max_depths = j.at("max_depth").get<std::vector<int>>();
  if (j.contains("k")) grid.ks = j.at("k").get<std::vector<int>>();
  return grid;
}

}  // namespace

extern "C" {

const char* sdc_version(void) { return "0.1.0"; }

void sdc_string_free(char* s) { std::free(s); }

sdc_status sdc_config_from_json(const char* config_json, sdc_config** out,
                                char* errbuf, size_t errlen) {
  if (!config_json || !out) {
    write_error(errbuf, errlen, "null argument");
    return SDC_ERR_INVALID_ARGUMENT;
  }
  return guarded(errbuf, errlen, [&] {
    RunConfig c = validate_run_config(run_config_from_json(json::parse(config_json)));
    *out = new sdc_config{std::move(c)};
    return SDC_OK;
  });
}

sdc_status sdc_config_default(sdc_config** out) {
  if (!out) return SDC_ERR_INVALID_ARGUMENT;
  *out = new sdc_config{RunConfig{}};
  return SDC_OK;
}

sdc_status sdc_config_validate_json(const char* config_json, char* errbuf,
                                    size_t errlen) {
  if (!config_json) {
    write_error(errbuf, errlen, "null argument");
    return SDC_ERR_INVALID_ARGUMENT;
  }
  return guarded(errbuf, errlen, [&] {
    validate_run_config(run_config_from_json(json::parse(config_json)));
    return SDC_OK;
  });
}

char* sdc_config_to_json(const sdc_config* config) {
  if (!config) return nullptr;
  return dup_string(to_json(config->value).dump(2));
}

void sdc_config_free(sdc_config* config) { delete config; }

sdc_status sdc_backend_open(const char* spec, const char* prompts_dir,
                            const char* cache_dir, sdc_backend** out,
                            char* errbuf, size_t errlen) {
  if (!spec || !out) {
    write_error(errbuf, errlen, "null argument");
    return SDC_ERR_INVALID_ARGUMENT;
  }
  return guarded(errbuf, errlen, [&] {
    *out = new sdc_backend{open_backend(spec, prompts_dir, cache_dir)};
    return SDC_OK;
  });
}

void sdc_backend_free(sdc_backend* backend) { delete backend; }

sdc_status sdc_retriever_open(const char* spec, sdc_retriever** out,
                              char* errbuf, size_t errlen) {
  if (!spec || !out) {
    write_error(errbuf, errlen, "null argument");
    return SDC_ERR_INVALID_ARGUMENT;
  }
  return guarded(errbuf, errlen, [&] {
    std::string s(spec);
    std::size_t colon = s.find(':');
    if (colon == std::string::npos)
      throw InvalidField("retriever spec needs 'kind:...': " + s);
    std::string kind = s.substr(0, colon);
    std::string rest = s.substr(colon + 1);
    std::shared_ptr<Retriever> r;
    if (kind == "local")
      r = std::make_shared<LocalCorpusRetriever>(
          LocalCorpusRetriever::from_file(rest));
    else if (kind == "http")
      r = std::make_shared<HttpSearchRetriever>(rest);
    else
      throw InvalidField("unknown retriever kind: " + kind);
    *out = new sdc_retriever{std::move(r)};
    return SDC_OK;
  });
}

void sdc_retriever_free(sdc_retriever* retriever) { delete retriever; }

sdc_status sdc_dataset_load(const char* path, sdc_dataset** out, char* errbuf,
                            size_t errlen) {
  if (!path || !out) {
    write_error(errbuf, errlen, "null argument");
    return SDC_ERR_INVALID_ARGUMENT;
  }
  return guarded(errbuf, errlen, [&] {
    *out = new sdc_dataset{load_dataset(path)};
    return SDC_OK;
  });
}

int sdc_dataset_size(const sdc_dataset* dataset) {
  return dataset ? static_cast<int>(dataset->value.size()) : 0;
}

void sdc_dataset_free(sdc_dataset* dataset) { delete dataset; }

sdc_status sdc_run_experiment(const sdc_config* config,
                              const sdc_dataset* dataset, sdc_backend* backend,
                              sdc_retriever* retriever, sdc_backend* judge,
                              const char* prompts_dir, int workers,
                              const char* out_dir, sdc_report** out,
                              char* errbuf, size_t errlen) {
  if (!config || !dataset || !backend || !out) {
    write_error(errbuf, errlen, "null argument");
    return SDC_ERR_INVALID_ARGUMENT;
  }
  return guarded(errbuf, errlen, [&] {
    PromptRegistry prompts = registry_for(prompts_dir);
    ExperimentResult result = run_experiment(
        dataset->value, config->value, *backend->value,
        retriever ? retriever->value.get() : nullptr, prompts,
        judge ? judge->value.get() : nullptr, workers);
    if (out_dir)
      write_run_outputs(out_dir, config->value, result.report, result.traces);
    *out = new sdc_report{std::move(result.report)};
    return SDC_OK;
  });
}

double sdc_report_em_mean(const sdc_report* report) {
  return report ? report->value.em_mean : 0.0;
}

double sdc_report_f1_mean(const sdc_report* report) {
  return report ? report->value.f1_mean : 0.0;
}

double sdc_report_judged_mean(const sdc_report* report) {
  if (!report || !report->value.judged_mean) return -1.0;
  return *report->value.judged_mean;
}

int64_t sdc_report_total_retrieval_calls(const sdc_report* report) {
  return report ? report->value.total_retrieval_calls : 0;
}

int64_t sdc_report_total_llm_calls(const sdc_report* report) {
  return report ? report->value.total_llm_calls : 0;
}

int sdc_report_n(const sdc_report* report) {
  return report ? report->value.n : 0;
}

char* sdc_report_to_json(const sdc_report* report) {
  if (!report) return nullptr;
  return dup_string(to_json(report->value).dump(2));
}

void sdc_report_free(sdc_report* report) { delete report; }

sdc_status sdc_sweep(const sdc_config* base_config, const sdc_dataset* dataset,
                     sdc_backend* backend, sdc_retriever* retriever,
                     const char* grid_json, const char* prompts_dir,
                     int workers, const char* out_dir, char** summary_out,
                     char* errbuf, size_t errlen) {
  if (!base_config || !dataset || !backend) {
    write_error(errbuf, errlen, "null argument");
    return SDC_ERR_INVALID_ARGUMENT;
  }
  return guarded(errbuf, errlen, [&] {
    PromptRegistry prompts = registry_for(prompts_dir);
    SweepGrid grid = grid_from_json(grid_json ? grid_json : "");
    // Share one response cache across all grid points.
    auto cached = std::make_shared<CachedBackend>(backend->value);
    auto rows = sweep(dataset->value, base_config->value, *cached,
                      retriever ? retriever->value.get() : nullptr, prompts,
                      grid, workers);
    std::string summary = sweep_summary_tsv(rows);
    if (out_dir) {
      std::filesystem::create_directories(out_dir);
      std::ofstream out(std::filesystem::path(out_dir) / "sweep_summary.tsv");
      out << summary;
      write_sweep_chart_data(rows, out_dir);
    }
    if (summary_out) *summary_out = dup_string(summary);
    return SDC_OK;
  });
}

sdc_status sdc_generate_data(const char* events_path, sdc_backend* backend,
                             const char* prompts_dir, const char* cutoff_date,
                             int64_t seed, int hard_pairs,
                             const char* out_path, const char* review_out,
                             char* errbuf, size_t errlen) {
  if (!events_path || !backend || !cutoff_date || !out_path) {
    write_error(errbuf, errlen, "null argument");
    return SDC_ERR_INVALID_ARGUMENT;
  }
  return guarded(errbuf, errlen, [&] {
    PromptRegistry prompts = registry_for(prompts_dir);
    auto events = load_events(events_path, cutoff_date);
    auto records =
        generate_dataset(*backend->value, prompts, events, seed);
    for (int i = 0; i + 1 < static_cast<int>(records.size()) && i / 2 < hard_pairs;
         i += 2)
      records.push_back(merge_hard(*backend->value, prompts, records[i],
                                   records[i + 1], i / 2));
    save_dataset(records, out_path);
    if (review_out) export_review(records, review_out);
    return SDC_OK;
  });
}

sdc_status sdc_apply_review(const char* dataset_path, const char* review_path,
                            const char* out_path, char* errbuf,
                            size_t errlen) {
  if (!dataset_path || !review_path || !out_path) {
    write_error(errbuf, errlen, "null argument");
    return SDC_ERR_INVALID_ARGUMENT;
  }
  return guarded(errbuf, errlen, [&] {
    auto records = load_dataset(dataset_path);
    save_dataset(apply_review(records, review_path), out_path);
    return SDC_OK;
  });
}

sdc_status sdc_judge_report(const char* report_path, const char* dataset_path,
                            sdc_backend* backend, const char* prompts_dir,
                            const char* out_path, char* errbuf,
                            size_t errlen) {
  if (!report_path || !dataset_path || !backend || !out_path) {
    write_error(errbuf, errlen, "null argument");
    return SDC_ERR_INVALID_ARGUMENT;
  }
  return guarded(errbuf, errlen, [&] {
    std::ifstream in(report_path);
    if (!in) throw InvalidField(std::string("cannot open report: ") + report_path);
    EvalReport report = eval_report_from_json(json::parse(in));
    auto dataset = load_dataset(dataset_path);
    PromptRegistry prompts = registry_for(prompts_dir);
    EvalReport judged =
        judge_report(report, dataset, *backend->value, prompts);
    std::ofstream out(out_path);
    out << to_json(judged).dump(2) << "\n";
    return SDC_OK;
  });
}

sdc_status sdc_trace_render(const char* traces_path, int index, char** out,
                            char* errbuf, size_t errlen) {
  if (!traces_path || !out) {
    write_error(errbuf, errlen, "null argument");
    return SDC_ERR_INVALID_ARGUMENT;
  }
  return guarded(errbuf, errlen, [&] {
    auto traces = load_traces(traces_path);
    std::string rendered;
    if (index >= 0) {
      if (index >= static_cast<int>(traces.size()))
        throw InvalidField("trace index out of range");
      rendered = render_trace(traces[index]);
    } else {
      for (const auto& t : traces) rendered += render_trace(t) + "\n";
    }
    *out = dup_string(rendered);
    return SDC_OK;
  });
}

}  // extern "C"
