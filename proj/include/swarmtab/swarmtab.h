/*
 * swarmtab C API: PSO/PCA feature selection + tree and attention classifiers
 * for binary tabular prediction, exposed from the shared library through
 * opaque handles and error codes.
 *
 * Every function that can fail returns a swarmtab_status; on failure a
 * human-readable message is available from swarmtab_last_error() on the same
 * thread.
 */
#ifndef SWARMTAB_H
#define SWARMTAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum swarmtab_status {
    SWARMTAB_OK = 0,
    SWARMTAB_PARTIAL_FAILURE = 1, /* some matrix experiments failed */
    SWARMTAB_CONFIG_ERROR = 2,
    SWARMTAB_DATA_ERROR = 3,
    SWARMTAB_RUNTIME_ERROR = 4,
    SWARMTAB_INVALID_ARGUMENT = 5,
    SWARMTAB_IO_ERROR = 6
} swarmtab_status;

const char* swarmtab_version(void);
const char* swarmtab_status_name(swarmtab_status status);

/* Message for the most recent failure on the calling thread ("" when none). */
const char* swarmtab_last_error(void);

/*
 * Runs one experiment from a JSON config file. out_dir overrides the config's
 * output_dir when non-NULL; seed_override overrides evaluation.seed when
 * non-NULL. Writes report.json, table5.csv, curves_fold<i>.csv, audit.json
 * and model.stab into the output directory.
 */
swarmtab_status swarmtab_run_experiment(const char* config_path, const char* out_dir,
                                        const int64_t* seed_override);

/*
 * Runs every config, continuing past individual failures; writes combined
 * matrix.csv and comparison.json plus per-experiment outputs under out_dir.
 * Returns SWARMTAB_PARTIAL_FAILURE when at least one experiment failed.
 */
swarmtab_status swarmtab_run_matrix(const char* const* config_paths, size_t n_configs,
                                    const char* out_dir);

/* Generates a synthetic dataset from a JSON spec file and writes it as CSV. */
swarmtab_status swarmtab_generate_synthetic(const char* spec_path, const char* out_csv);

/* ---- model artifacts ---------------------------------------------------- */

typedef struct swarmtab_model swarmtab_model;

swarmtab_status swarmtab_model_open(const char* path, swarmtab_model** out_model);
void swarmtab_model_close(swarmtab_model* model);

/* Returned strings stay owned by the handle and live until it is closed. */
const char* swarmtab_model_kind(const swarmtab_model* model);
const char* swarmtab_model_manifest(const swarmtab_model* model);
size_t swarmtab_model_n_features(const swarmtab_model* model);

/*
 * Scores rows through the stored front end and classifier. features is
 * row-major n_rows x n_features in the encoded dataset space: numerical
 * columns scaled to [0, 1], categorical columns as integer codes.
 * out_probabilities receives n_rows values.
 */
swarmtab_status swarmtab_model_predict(const swarmtab_model* model, const double* features,
                                       size_t n_rows, size_t n_features,
                                       double* out_probabilities);

#ifdef __cplusplus
}
#endif

#endif /* SWARMTAB_H */
