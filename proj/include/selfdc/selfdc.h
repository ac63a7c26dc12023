/* C API for the adaptive divide-and-conquer QA orchestrator.
 *
 * All objects are opaque handles created by sdc_*_open / sdc_*_load and
 * released with the matching sdc_*_free. Functions return SDC_OK on success;
 * on failure they return an error code and, when an errbuf is supplied,
 * write a diagnostic message into it (always NUL-terminated).
 *
 * Strings returned through char** out-parameters are owned by the caller
 * and must be released with sdc_string_free.
 */
#ifndef SELFDC_H
#define SELFDC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sdc_status {
  SDC_OK = 0,
  SDC_ERR_INVALID_ARGUMENT = 1,
  SDC_ERR_INVALID_CONFIG = 2,
  SDC_ERR_BACKEND = 3,
  SDC_ERR_RETRIEVER = 4,
  SDC_ERR_IO = 5,
  SDC_ERR_INTERNAL = 6
} sdc_status;

typedef struct sdc_config sdc_config;
typedef struct sdc_backend sdc_backend;
typedef struct sdc_retriever sdc_retriever;
typedef struct sdc_dataset sdc_dataset;
typedef struct sdc_report sdc_report;

const char* sdc_version(void);

void sdc_string_free(char* s);

/* --- configuration ------------------------------------------------- */

/* Parses and validates a JSON run configuration. Unset fields take the
 * documented defaults (temperature 0.1, top_p 0.1, num_retrieved 3,
 * max_depth 3). */
sdc_status sdc_config_from_json(const char* json, sdc_config** out,
                                char* errbuf, size_t errlen);
sdc_status sdc_config_default(sdc_config** out);
/* Validation only; no handle is created. */
sdc_status sdc_config_validate_json(const char* json, char* errbuf,
                                    size_t errlen);
char* sdc_config_to_json(const sdc_config* config);
void sdc_config_free(sdc_config* config);

/* --- backends and retrievers ---------------------------------------- */

/* Backend spec strings:
 *   "oracle:<factbase.json>"          synthetic knowledge-cutoff oracle
 *   "scripted:<rules.json>"           deterministic replay rules
 *   "http:<base_url>|<model>[|<env>]" remote chat-completion endpoint;
 *                                     env names the credential variable
 *                                     (default SELFDC_API_KEY)
 * prompts_dir (nullable) overrides the built-in prompt templates;
 * cache_dir (nullable) adds an on-disk response cache. */
sdc_status sdc_backend_open(const char* spec, const char* prompts_dir,
                            const char* cache_dir, sdc_backend** out,
                            char* errbuf, size_t errlen);
void sdc_backend_free(sdc_backend* backend);

/* Retriever spec strings:
 *   "local:<corpus file>"   deterministic local-corpus retriever
 *   "http:<base_url>"       web-search provider */
sdc_status sdc_retriever_open(const char* spec, sdc_retriever** out,
                              char* errbuf, size_t errlen);
void sdc_retriever_free(sdc_retriever* retriever);

/* --- datasets -------------------------------------------------------- */

sdc_status sdc_dataset_load(const char* path, sdc_dataset** out, char* errbuf,
                            size_t errlen);
int sdc_dataset_size(const sdc_dataset* dataset);
void sdc_dataset_free(sdc_dataset* dataset);

/* --- experiments ------------------------------------------------------ */

/* Runs the configured method over the dataset. judge may be NULL. When
 * out_dir is non-NULL the run directory (config snapshot, report, traces)
 * is written there. */
sdc_status sdc_run_experiment(const sdc_config* config,
                              const sdc_dataset* dataset, sdc_backend* backend,
                              sdc_retriever* retriever, sdc_backend* judge,
                              const char* prompts_dir, int workers,
                              const char* out_dir, sdc_report** out,
                              char* errbuf, size_t errlen);

double sdc_report_em_mean(const sdc_report* report);
double sdc_report_f1_mean(const sdc_report* report);
/* -1 when no judged rows exist. */
double sdc_report_judged_mean(const sdc_report* report);
int64_t sdc_report_total_retrieval_calls(const sdc_report* report);
int64_t sdc_report_total_llm_calls(const sdc_report* report);
int sdc_report_n(const sdc_report* report);
char* sdc_report_to_json(const sdc_report* report);
void sdc_report_free(sdc_report* report);

/* grid_json: {"alpha": [...], "beta": [...], "max_depth": [...], "k": [...]}
 * (all axes optional). Writes sweep_summary.tsv, chart data, and nested run
 * directories under out_dir; the summary TSV is also returned through
 * summary_out when non-NULL. */
sdc_status sdc_sweep(const sdc_config* base_config, const sdc_dataset* dataset,
                     sdc_backend* backend, sdc_retriever* retriever,
                     const char* grid_json, const char* prompts_dir,
                     int workers, const char* out_dir, char** summary_out,
                     char* errbuf, size_t errlen);

/* --- dataset generation ---------------------------------------------- */

/* Synthesizes a QA dataset from a post-cutoff events file (one event per
 * line: "ISO-DATE<TAB>text" or JSON {"text","date"}). hard_pairs consecutive
 * record pairs are additionally merged into hard records. review_out
 * (nullable) exports a tab-separated review file. */
sdc_status sdc_generate_data(const char* events_path, sdc_backend* backend,
                             const char* prompts_dir, const char* cutoff_date,
                             int64_t seed, int hard_pairs,
                             const char* out_path, const char* review_out,
                             char* errbuf, size_t errlen);

/* Applies a reviewed file (accept/reject/edit rows) to a dataset. */
sdc_status sdc_apply_review(const char* dataset_path, const char* review_path,
                            const char* out_path, char* errbuf, size_t errlen);

/* --- reports and traces ----------------------------------------------- */

/* Re-judges an existing report with a judging backend. */
sdc_status sdc_judge_report(const char* report_path, const char* dataset_path,
                            sdc_backend* backend, const char* prompts_dir,
                            const char* out_path, char* errbuf, size_t errlen);

/* Pretty-prints trace index (or all traces when index < 0) from a
 * traces.jsonl file. */
sdc_status sdc_trace_render(const char* traces_path, int index, char** out,
                            char* errbuf, size_t errlen);

#ifdef __cplusplus
}
#endif

#endif /* SELFDC_H */
