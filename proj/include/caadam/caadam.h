/*
 * C interface to the caadam library.
 *
 * Objects are opaque handles created by the _create and _load functions and
 * released by the matching _destroy. Every fallible call returns a
 * caadam_status; on failure caadam_last_error() describes the problem. The
 * message lives in thread-local storage and stays valid until the next failing
 * call on the same thread.
 *
 * Strings returned through `char**` out-parameters are heap allocated and
 * must be released with caadam_string_free().
 */
#ifndef CAADAM_CAADAM_H
#define CAADAM_CAADAM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CAADAM_BUILDING_LIBRARY)
#    define CAADAM_API __declspec(dllexport)
#  else
#    define CAADAM_API __declspec(dllimport)
#  endif
#else
#  define CAADAM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum caadam_status {
    CAADAM_OK = 0,
    CAADAM_ERR_CONFIG = 1,        /* invalid hyperparameters or experiment config */
    CAADAM_ERR_DATA = 2,          /* dataset missing, malformed or unsplittable */
    CAADAM_ERR_ALL_DIVERGED = 3,  /* benchmark finished but every trial diverged */
    CAADAM_ERR_SHAPE = 4,
    CAADAM_ERR_NON_FINITE = 5,
    CAADAM_ERR_STRUCTURE = 6,
    CAADAM_ERR_IO = 7,
    CAADAM_ERR_INVALID_ARGUMENT = 8,
    CAADAM_ERR_INTERNAL = 9
} caadam_status;

typedef struct caadam_network caadam_network;
typedef struct caadam_optimizer caadam_optimizer;
typedef struct caadam_dataset caadam_dataset;

CAADAM_API const char* caadam_version(void);
CAADAM_API const char* caadam_status_name(caadam_status status);
CAADAM_API const char* caadam_last_error(void);
CAADAM_API void caadam_string_free(char* s);

/* Networks ----------------------------------------------------------------- */

/* Dense ReLU network. `classification` selects a softmax head (output_dim
 * classes) instead of a linear regression head. Weights are Glorot-uniform
 * from `seed`, biases zero. */
CAADAM_API caadam_status caadam_network_create(size_t input_dim, const size_t* hidden_sizes, size_t num_hidden,
                                               size_t output_dim, int classification, uint64_t seed,
                                               caadam_network** out);
CAADAM_API void caadam_network_destroy(caadam_network* net);
CAADAM_API caadam_status caadam_network_layer_count(const caadam_network* net, size_t* out);
/* Per-layer connection counts (fan_in * fan_out); `out` holds `len` >= layer count entries. */
CAADAM_API caadam_status caadam_network_connections(const caadam_network* net, size_t* out, size_t len);
/* Row-major input (rows x cols) to row-major output (rows x output_dim). */
CAADAM_API caadam_status caadam_network_predict(const caadam_network* net, const double* x, size_t rows, size_t cols,
                                                double* out, size_t out_len);

/* Scaling ------------------------------------------------------------------ */

/* Scale factors for a chain of layers with the given connection counts.
 * `strategy` is "additive", "multiplicative", "multiplicative-unsigned" or
 * "depth". `out` receives `num_layers` values. */
CAADAM_API caadam_status caadam_scale_table(const size_t* connections, size_t num_layers, const char* strategy,
                                            double gamma, double* out);

/* Datasets ----------------------------------------------------------------- */

CAADAM_API caadam_status caadam_dataset_load_csv(const char* path, const char* target_column, int classification,
                                                 caadam_dataset** out);
CAADAM_API caadam_status caadam_dataset_synth_regression(size_t n, size_t m, double noise_std, uint64_t seed,
                                                         caadam_dataset** out);
CAADAM_API caadam_status caadam_dataset_shape(const caadam_dataset* data, size_t* rows, size_t* features);
CAADAM_API void caadam_dataset_destroy(caadam_dataset* data);

/* Optimizers --------------------------------------------------------------- */

/* `config_json` is an optimizer object such as
 * {"algorithm":"caadam","scaling":"multiplicative","gamma":0.95}. */
CAADAM_API caadam_status caadam_optimizer_create(const char* config_json, const caadam_network* net,
                                                 caadam_optimizer** out);
CAADAM_API void caadam_optimizer_destroy(caadam_optimizer* opt);
CAADAM_API caadam_status caadam_optimizer_step_count(const caadam_optimizer* opt, uint64_t* out);
/* Per-layer scale factors (1.0 for every algorithm except caadam). */
CAADAM_API caadam_status caadam_optimizer_scales(const caadam_optimizer* opt, double* out, size_t len);
CAADAM_API caadam_status caadam_optimizer_save(const caadam_optimizer* opt, const char* path);
CAADAM_API caadam_status caadam_optimizer_load(const char* path, caadam_optimizer** out);

/* Training ----------------------------------------------------------------- */

/* Splits `data` (64/16/20) with `split_seed`, trains `net` in place with the
 * early-stopping / reduce-on-plateau protocol and reports the test-partition
 * metric (RMSE or accuracy). `train_json` may be NULL for defaults; its
 * initial_lr falls back to the optimizer learning rate. Pass NULL for
 * `log_csv_path` to skip the per-epoch log. A diverged run
 * returns CAADAM_ERR_NON_FINITE. */
CAADAM_API caadam_status caadam_train(caadam_network* net, caadam_optimizer* opt, const caadam_dataset* data,
                                      const char* train_json, uint64_t split_seed, const char* log_csv_path,
                                      double* test_metric, size_t* epochs_run);

/* Statistics --------------------------------------------------------------- */

CAADAM_API caadam_status caadam_welch_t_test(const double* a, size_t na, const double* b, size_t nb, double* t,
                                             double* p);

/* Commands (the CLI is a thin wrapper over these) -------------------------- */

CAADAM_API caadam_status caadam_cmd_train(const char* config_path, const char* out_dir, char** summary);
/* `trials_override` <= 0 keeps the config's trial count. */
CAADAM_API caadam_status caadam_cmd_benchmark(const char* config_path, const char* out_dir, long trials_override,
                                              size_t parallel, char** summary);
/* `out_dir` may be NULL to skip writing report files. */
CAADAM_API caadam_status caadam_cmd_report(const char* trials_path, const char* baseline, const char* out_dir,
                                           char** summary);
CAADAM_API caadam_status caadam_cmd_curves(const char* logs_dir, const char* out_csv, size_t* files_merged);

#ifdef __cplusplus
}
#endif

#endif /* CAADAM_CAADAM_H */
