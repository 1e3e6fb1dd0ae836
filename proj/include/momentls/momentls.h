#ifndef MOMENTLS_MOMENTLS_H
#define MOMENTLS_MOMENTLS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define MLS_API __declspec(dllexport)
#else
#  define MLS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The numeric values double as CLI exit codes. */
typedef enum mls_status {
    MLS_OK = 0,
    MLS_ERR_INVALID_ARGUMENT = 1,
    MLS_ERR_DATA = 2,
    MLS_ERR_NUMERICAL = 3,
    MLS_ERR_INTERNAL = 4
} mls_status;

typedef struct mls_chain mls_chain;
typedef struct mls_model mls_model;
typedef struct mls_estimate mls_estimate;

/* Message of the last failed call on this thread ("" if none). */
MLS_API const char* mls_last_error(void);
MLS_API const char* mls_version(void);
/* Frees strings returned through char** out-parameters. */
MLS_API void mls_string_free(char* s);

/* ---- chains: M rows of d values, row-major ---- */

MLS_API mls_status mls_chain_from_rows(const double* values, size_t length, size_t dim, mls_chain** out);
MLS_API mls_status mls_chain_read_csv(const char* path, mls_chain** out);
MLS_API mls_status mls_chain_write_csv(const mls_chain* chain, const char* path);
MLS_API size_t mls_chain_length(const mls_chain* chain);
MLS_API size_t mls_chain_dim(const mls_chain* chain);
/* out must hold length*dim doubles. */
MLS_API mls_status mls_chain_copy_rows(const mls_chain* chain, double* out);
MLS_API void mls_chain_free(mls_chain* chain);

/* ---- models with closed-form truth ---- */

/* "1" / "mixed", "2" / "positive", "ar1". */
MLS_API mls_status mls_model_var1_preset(const char* preset, mls_model** out);
/* states, dim = 0 and rho < 0 select the defaults (100, 4, 0.5). */
MLS_API mls_status mls_model_mh(uint64_t seed, size_t states, size_t dim, double rho, mls_model** out);
MLS_API size_t mls_model_dim(const mls_model* model);
/* sigma: dim*dim row-major; mu: dim. Either may be NULL. */
MLS_API mls_status mls_model_truth(const mls_model* model, double* sigma, double* mu);
MLS_API mls_status mls_model_simulate(const mls_model* model, size_t length, uint64_t seed, mls_chain** out);
MLS_API mls_status mls_model_to_json(const mls_model* model, char** out);
MLS_API mls_status mls_model_truth_json(const mls_model* model, char** out);
/* Checks row sums and detailed balance of an MH kernel; VAR(1) models always pass. */
MLS_API mls_status mls_model_validate(const mls_model* model);
MLS_API void mls_model_free(mls_model* model);

/* ---- estimation ---- */

typedef enum mls_method {
    MLS_METHOD_SV_BARTLETT = 0,
    MLS_METHOD_BM = 1,
    MLS_METHOD_OBM = 2,
    MLS_METHOD_MTV_INIT = 3,
    MLS_METHOD_MTV_MLSE = 4
} mls_method;

MLS_API mls_status mls_method_parse(const char* name, mls_method* out);
MLS_API const char* mls_method_name(mls_method method);

typedef struct mls_estimate_options {
    mls_method method;
    size_t batch_size;   /* 0: floor(sqrt(M)) */
    size_t delta_splits; /* L */
    size_t grid_size;    /* s0 */
    double alpha;        /* only used for the JSON report */
} mls_estimate_options;

MLS_API mls_estimate_options mls_estimate_options_default(void);
MLS_API mls_status mls_estimate_run(const mls_chain* chain, const mls_estimate_options* options, mls_estimate** out);
MLS_API size_t mls_estimate_dim(const mls_estimate* estimate);
/* dim*dim row-major. */
MLS_API mls_status mls_estimate_sigma(const mls_estimate* estimate, double* out);
MLS_API int mls_estimate_refined(const mls_estimate* estimate);
/* 0 when the method has no batch size. */
MLS_API size_t mls_estimate_batch_size(const mls_estimate* estimate);
/* Writes up to dim tuned half-gaps and returns how many exist (0 for non-momentLS methods). */
MLS_API size_t mls_estimate_delta(const mls_estimate* estimate, double* out, size_t capacity);
MLS_API mls_status mls_estimate_to_json(const mls_estimate* estimate, const mls_chain* chain, char** out);
MLS_API void mls_estimate_free(mls_estimate* estimate);

/* ---- metrics ---- */

MLS_API mls_status mls_relative_error(const double* sigma_hat, const double* sigma, size_t dim, double* out);
MLS_API mls_status mls_region_contains(const double* mean_hat, const double* sigma_hat, const double* mean,
                                       size_t dim, size_t length, double alpha, int* out);
MLS_API mls_status mls_chi2_quantile(double p, int dof, double* out);

/* ---- benchmark ---- */

typedef void (*mls_progress_fn)(size_t done, size_t total, void* user);

/* workers = 0 keeps the value from the config. Relative chain paths resolve
   against the current directory. */
MLS_API mls_status mls_benchmark_run(const char* config_json, size_t workers, const char* out_csv_path,
                                     mls_progress_fn progress, void* user);

#ifdef __cplusplus
}
#endif

#endif
