/* ptgen: platoon trajectory generation from a single leader trajectory.
 *
 * C interface over the trainer, generator and metrics. Every entry point
 * returns a ptgen_status; on failure ptgen_last_error() holds a message for
 * the calling thread until the next call on that thread.
 */
#ifndef PTGEN_H
#define PTGEN_H

#include <stddef.h>
#include <stdint.h>

#ifndef PTGEN_API
#define PTGEN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ptgen_status {
  PTGEN_OK = 0,
  PTGEN_E_USAGE = 2,   /* bad arguments, bad config, contract violations */
  PTGEN_E_DATA = 3,    /* unusable input data */
  PTGEN_E_NUMERIC = 4, /* divergence, non-finite results, failed gradcheck */
  PTGEN_E_IO = 5,      /* filesystem and format errors */
  PTGEN_E_INTERNAL = 6
} ptgen_status;

PTGEN_API const char* ptgen_version(void);

/* Message for the last failing call on this thread; empty after success. */
PTGEN_API const char* ptgen_last_error(void);

typedef struct ptgen_model ptgen_model;
typedef struct ptgen_dataset ptgen_dataset;
typedef struct ptgen_memory ptgen_memory;

/* ---- whole commands -----------------------------------------------------
 * Same bodies the CLI runs: read the JSON config, write outputs plus
 * resolved_config.json into out_dir.
 */
typedef struct ptgen_run_options {
  const char* config_path; /* NULL or "" = built-in defaults */
  const char* out_dir;     /* required */
  int64_t seed;            /* >= 0 overrides the config seed */
} ptgen_run_options;

PTGEN_API ptgen_status ptgen_cmd_synth(const ptgen_run_options* opt);
PTGEN_API ptgen_status ptgen_cmd_extract(const ptgen_run_options* opt);
PTGEN_API ptgen_status ptgen_cmd_train(const ptgen_run_options* opt);
PTGEN_API ptgen_status ptgen_cmd_generate(const ptgen_run_options* opt);
PTGEN_API ptgen_status ptgen_cmd_evaluate(const ptgen_run_options* opt);
/* PTGEN_E_NUMERIC when the analytic gradient misses the numeric one. */
PTGEN_API ptgen_status ptgen_cmd_gradcheck(const ptgen_run_options* opt);

/* Defaults overlaid with config_path (NULL = pure defaults), dumped as
 * canonical JSON. Free *out_json with ptgen_string_free. */
PTGEN_API ptgen_status ptgen_resolve_config(const char* config_path, char** out_json);
PTGEN_API void ptgen_string_free(char* s);

/* ---- models -------------------------------------------------------------- */
PTGEN_API ptgen_status ptgen_model_load(const char* path, ptgen_model** out);
/* LSTM models only; IDM has nothing to persist. */
PTGEN_API ptgen_status ptgen_model_save(const ptgen_model* model, const char* path);
PTGEN_API ptgen_status ptgen_model_init_lstm(const int32_t* layer_sizes, size_t n_layers,
                                             uint64_t seed, ptgen_model** out);
/* params6 = {a_max, b, v0, g_jam, t_headway, delta}; NULL = defaults. */
PTGEN_API ptgen_status ptgen_model_idm(const double* params6, ptgen_model** out);
PTGEN_API ptgen_status ptgen_model_n_params(const ptgen_model* model, uint64_t* out);
PTGEN_API void ptgen_model_free(ptgen_model* model);

/* ---- single decision step ------------------------------------------------
 * State arrays are {x, v, a} in SI units. The memory handle carries the
 * recurrent state between steps and is updated in place; IDM models accept
 * it too (it stays empty).
 */
PTGEN_API ptgen_status ptgen_memory_new(const ptgen_model* model, ptgen_memory** out);
PTGEN_API void ptgen_memory_free(ptgen_memory* mem);
PTGEN_API ptgen_status ptgen_decide(const ptgen_model* model, const double follower[3],
                                    const double leader[3], ptgen_memory* mem,
                                    double* accel_out);

/* ---- datasets ------------------------------------------------------------ */
PTGEN_API ptgen_status ptgen_dataset_load(const char* path, ptgen_dataset** out);
PTGEN_API ptgen_status ptgen_dataset_save(const ptgen_dataset* ds, const char* path);
PTGEN_API ptgen_status ptgen_dataset_platoon_count(const ptgen_dataset* ds, size_t* out);
PTGEN_API void ptgen_dataset_free(ptgen_dataset* ds);

/* Generate followers for every platoon from its leader trajectory. */
PTGEN_API ptgen_status ptgen_generate(const ptgen_model* model, const ptgen_dataset* actual,
                                      ptgen_dataset** out_generated);

/* ---- metrics ------------------------------------------------------------- */
typedef struct ptgen_metrics {
  double mae;
  double mmaae;
  uint64_t n_ae_samples;
  uint64_t n_pmaae_samples;
} ptgen_metrics;

PTGEN_API ptgen_status ptgen_evaluate(const ptgen_dataset* actual,
                                      const ptgen_dataset* generated, ptgen_metrics* out);

typedef enum ptgen_sample_kind {
  PTGEN_SAMPLES_AE = 0,    /* one per (platoon, follower, step) */
  PTGEN_SAMPLES_PMAAE = 1  /* one per platoon */
} ptgen_sample_kind;

/* Sorted ascending. *n_out is always set; up to buf_len values are copied
 * when buf is non-NULL, so call once with buf = NULL to size the buffer. */
PTGEN_API ptgen_status ptgen_error_samples(const ptgen_dataset* actual,
                                           const ptgen_dataset* generated,
                                           ptgen_sample_kind kind, double* buf, size_t buf_len,
                                           size_t* n_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PTGEN_H */
