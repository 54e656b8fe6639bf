/* harlstm — C API for the DeepConvLSTM activity-recognition engine.
 *
 * The library exposes opaque experiment handles plus a few stateless
 * helpers. All functions returning har_status report failure through the
 * status code; the detailed message is available via
 * har_experiment_last_error() on the handle the call was made on.
 */
#ifndef HARLSTM_H
#define HARLSTM_H

#include <stdint.h>

#if defined(_WIN32)
#  define HAR_API __declspec(dllexport)
#else
#  define HAR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum har_status {
    HAR_OK = 0,
    HAR_ERROR_CONFIG = 2,     /* invalid configuration value */
    HAR_ERROR_DATA = 3,       /* dataset/file problem */
    HAR_ERROR_DIVERGENCE = 4, /* training produced a non-finite loss */
    HAR_ERROR_INTERNAL = 5
} har_status;

typedef struct har_experiment_s har_experiment;

HAR_API const char* har_version(void);

/* Experiment lifecycle. A handle owns a configuration (defaults per the
 * standard recipe) and can run each command repeatedly. */
HAR_API har_experiment* har_experiment_create(void);
HAR_API void har_experiment_destroy(har_experiment* exp);

/* Load a JSON config file; merged over the built-in defaults. */
HAR_API har_status har_experiment_load_config(har_experiment* exp,
                                              const char* json_path);

/* Override one value by dotted path, e.g. ("train.epochs", "50") or
 * ("output.dir", "out/run1"). Applied on top of any loaded file. */
HAR_API har_status har_experiment_set(har_experiment* exp, const char* key,
                                      const char* value);

/* Resolved config as a JSON string (owned by the handle, valid until the
 * next call on it). Returns NULL if the configuration is invalid. */
HAR_API const char* har_experiment_config_json(har_experiment* exp);

/* Commands. Artifacts are written under the configured output directory. */
HAR_API har_status har_experiment_run_synth(har_experiment* exp);
HAR_API har_status har_experiment_run_train(har_experiment* exp);
HAR_API har_status har_experiment_run_loso_grid(har_experiment* exp);
HAR_API har_status har_experiment_run_bench(har_experiment* exp);

/* Last error message for this handle ("" when the last call succeeded). */
HAR_API const char* har_experiment_last_error(const har_experiment* exp);

/* Closed-form LSTM parameter count: layers must be 1 or 2. */
HAR_API int64_t har_lstm_param_count(int64_t input_extent, int64_t hidden_units,
                                     int layers);

/* Cost-model table over the (s, h) grid. Writes CSV when out_csv is
 * non-NULL; stores the grid mean reduction in *mean_reduction when
 * non-NULL. */
HAR_API har_status har_analyze_costs(const int64_t* s_values, int num_s,
                                     const int64_t* h_values, int num_h,
                                     const char* out_csv,
                                     double* mean_reduction);

#ifdef __cplusplus
}
#endif

#endif /* HARLSTM_H */
