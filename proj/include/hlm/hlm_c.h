/* C API of the hlm shared library.
 *
 * All functions return HLM_OK on success; on failure they return an error
 * code and leave a message retrievable with hlm_last_error() (thread
 * local). Objects are opaque handles released with the matching _free
 * function. Strings returned through char** outputs are heap-allocated and
 * must be released with hlm_string_free().
 *
 * Structured inputs and outputs (configs, manifests, reports, completions)
 * are JSON strings; the schemas are documented in the project README.
 */
#ifndef HLM_C_H
#define HLM_C_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hlm_status {
  HLM_OK = 0,
  HLM_ERROR_INVALID_ARGUMENT = 1,
  HLM_ERROR_IO = 2,
  HLM_ERROR_PARSE = 3,
  HLM_ERROR_INVALID_TREE = 4,
  HLM_ERROR_UNSATISFIABLE = 5,
  HLM_ERROR_INTERNAL = 6
} hlm_status;

typedef struct hlm_corpus hlm_corpus;
typedef struct hlm_model hlm_model;

const char* hlm_version(void);

/* Message for the most recent failure on this thread; empty if none. */
const char* hlm_last_error(void);

void hlm_string_free(char* s);

/* ---- Corpora (JSONL AST files: {"tokens":[...],"parents":[...]}) ---- */

hlm_status hlm_corpus_open(const char* jsonl_path, hlm_corpus** out);
hlm_status hlm_corpus_save(const hlm_corpus* corpus, const char* jsonl_path);
void hlm_corpus_free(hlm_corpus* corpus);
size_t hlm_corpus_size(const hlm_corpus* corpus);

/* Grammar-driven synthetic corpus. config_json: {"count":N, optional
 * "seed","min_nodes","max_nodes","identifier_pool","number_pool",
 * "max_depth","rename_fraction","rules",...}; omitted fields use the
 * built-in Java-ish grammar. */
hlm_status hlm_corpus_synth(const char* config_json, hlm_corpus** out);

/* Keeps functions with min_nodes <= nodes <= max_nodes (inclusive). */
hlm_status hlm_corpus_filter(hlm_corpus* corpus, size_t min_nodes, size_t max_nodes);

/* {"functions":N,"nodes":N,"score":mean nodes per function} */
hlm_status hlm_corpus_stats(const hlm_corpus* corpus, char** stats_json);

/* Whole preparation pipeline. options_json:
 *   {"input":path,"out":base.jsonl,"min":100,"max":10000,
 *    "split":[0.60,0.15,0.25],"seed":1,"unk_k":3}
 * Writes base.jsonl plus base.{train,valid,test}.jsonl and
 * base.manifest.json; returns the manifest. */
hlm_status hlm_prepare(const char* options_json, char** manifest_json);

/* ---- Models ---- */

/* options_json: {"model":"hlm|lstm|rnn","d":128,"seed":1,"lr":1e-3,
 *   "max_epochs":20,"patience":1,"eval_every":1,"unk_k":3}
 * log_jsonl (optional out): one {"epoch","mean_train_loss","valid_top1"}
 * line per epoch. */
hlm_status hlm_train(const char* options_json, const hlm_corpus* train_corpus,
                     const hlm_corpus* valid_corpus, hlm_model** out_model,
                     char** log_jsonl);

hlm_status hlm_model_save(const hlm_model* model, const char* path);
hlm_status hlm_model_open(const char* path, hlm_model** out);
void hlm_model_free(hlm_model* model);

/* {"model":kind,"v":...,"d":...,"seed":...,"equations":...} */
hlm_status hlm_model_info(const hlm_model* model, char** info_json);

/* options_json (may be NULL): {"workers":1,"dataset":"name"}
 * report_json: single-report array entry per report_render's schema. */
hlm_status hlm_evaluate(const hlm_model* model, const hlm_corpus* test_corpus,
                        const char* options_json, char** report_json);

/* prefix_line: one JSONL tree whose last pre-order node is the completion
 * slot. completion_json: {"position":i,"candidates":[{"token","prob"},...]} */
hlm_status hlm_complete(const hlm_model* model, const char* prefix_line, int k,
                        char** completion_json);

/* reports_json: JSON array of report objects (concatenable from
 * hlm_evaluate outputs). Renders the fixed-width comparison table. */
hlm_status hlm_report_render(const char* reports_json, char** table_text);

#ifdef __cplusplus
}
#endif

#endif /* HLM_C_H */
