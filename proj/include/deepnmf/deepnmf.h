/* deepnmf C API.
 *
 * Every function returning dnmf_status leaves a message retrievable through
 * dnmf_last_error() (per thread) when it fails. Handles are opaque; each
 * *_create / *_load / producer has a matching *_free. Matrices are
 * features x samples and exposed in row-major order.
 */
#ifndef DEEPNMF_H
#define DEEPNMF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DNMF_API __declspec(dllexport)
#else
#define DNMF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dnmf_status {
  DNMF_OK = 0,
  DNMF_E_INVALID = 1,     /* bad argument or configuration */
  DNMF_E_PARSE = 2,       /* malformed file contents */
  DNMF_E_IO = 3,          /* missing or unwritable file */
  DNMF_E_NUMERICAL = 4,   /* divergence, non-finite values */
  DNMF_E_CONVERGENCE = 5, /* iteration cap reached */
  DNMF_E_INTERNAL = 6
} dnmf_status;

typedef struct dnmf_matrix dnmf_matrix;
typedef struct dnmf_config dnmf_config;
typedef struct dnmf_model dnmf_model;
typedef struct dnmf_dataset dnmf_dataset;

DNMF_API const char* dnmf_last_error(void);
DNMF_API const char* dnmf_status_name(dnmf_status s);
DNMF_API void dnmf_string_free(char* s);

/* matrices; row_major may be NULL for a zero matrix */
DNMF_API dnmf_status dnmf_matrix_create(size_t rows, size_t cols, const double* row_major,
                                        dnmf_matrix** out);
/* format: "csv", "bin", or NULL to pick by extension */
DNMF_API dnmf_status dnmf_matrix_load(const char* path, const char* format, dnmf_matrix** out);
DNMF_API dnmf_status dnmf_matrix_save(const dnmf_matrix* m, const char* path, const char* format);
DNMF_API size_t dnmf_matrix_rows(const dnmf_matrix* m);
DNMF_API size_t dnmf_matrix_cols(const dnmf_matrix* m);
DNMF_API const double* dnmf_matrix_data(const dnmf_matrix* m);
DNMF_API void dnmf_matrix_free(dnmf_matrix* m);

/* label files; *out is released with dnmf_labels_free */
DNMF_API dnmf_status dnmf_labels_load(const char* path, int** out, size_t* n);
DNMF_API dnmf_status dnmf_labels_save(const char* path, const int* labels, size_t n);
DNMF_API void dnmf_labels_free(int* labels);

/* configuration (flat dotted keys, see README) */
DNMF_API dnmf_status dnmf_config_create(dnmf_config** out);
DNMF_API dnmf_status dnmf_config_load(const char* path, dnmf_config** out);
DNMF_API dnmf_status dnmf_config_set(dnmf_config* cfg, const char* key, const char* value);
DNMF_API void dnmf_config_free(dnmf_config* cfg);

/* datasets: data.* keys of cfg (a path, or a synthetic generator) */
DNMF_API dnmf_status dnmf_dataset_from_config(const dnmf_config* cfg, dnmf_dataset** out);
/* labels_path may be NULL: then "<stem>.labels" is used when present */
DNMF_API dnmf_status dnmf_dataset_load(const char* path, const char* labels_path,
                                       dnmf_dataset** out);
DNMF_API dnmf_status dnmf_dataset_save(const dnmf_dataset* ds, const char* path);
/* borrowed; valid while ds lives */
DNMF_API const dnmf_matrix* dnmf_dataset_matrix(const dnmf_dataset* ds);
/* *n = 0 when the dataset has no labels */
DNMF_API void dnmf_dataset_labels(const dnmf_dataset* ds, const int** labels, size_t* n);
DNMF_API void dnmf_dataset_free(dnmf_dataset* ds);

/* training: model.* and train.* keys of cfg */
DNMF_API dnmf_status dnmf_train(const dnmf_config* cfg, const dnmf_matrix* x, dnmf_model** out);
DNMF_API size_t dnmf_model_depth(const dnmf_model* m);
/* role 'W' or 'H', layer 1-based; the copy is released with dnmf_matrix_free */
DNMF_API dnmf_status dnmf_model_factor(const dnmf_model* m, char role, size_t layer,
                                       dnmf_matrix** out);
DNMF_API dnmf_status dnmf_model_representation(const dnmf_model* m, dnmf_matrix** out);
/* fine-tuning objective trace; borrowed, empty for loaded models */
DNMF_API void dnmf_model_trace(const dnmf_model* m, const double** values, size_t* n);
DNMF_API double dnmf_model_pretrain_objective(const dnmf_model* m);
DNMF_API double dnmf_model_final_objective(const dnmf_model* m);
DNMF_API int dnmf_model_sweeps(const dnmf_model* m);
/* labels may be NULL */
DNMF_API dnmf_status dnmf_model_save(const dnmf_model* m, const char* dir, const int* labels,
                                     size_t n);
DNMF_API dnmf_status dnmf_model_load(const char* dir, dnmf_model** out);
DNMF_API void dnmf_model_free(dnmf_model* m);

/* clustering and scores; labels_out holds cols(data) entries */
DNMF_API dnmf_status dnmf_kmeans(const dnmf_matrix* data, int k, int restarts, uint64_t seed,
                                 int* labels_out, double* wcss);
DNMF_API dnmf_status dnmf_nmi(const int* found, const int* truth, size_t n, double* out);
DNMF_API dnmf_status dnmf_error_rate(const int* found, const int* truth, size_t n, int literal,
                                     double* out);
DNMF_API dnmf_status dnmf_naive_precision(const int* found, const int* truth, size_t n,
                                          double* out);

/* sweep runner; writes result files to output.dir, *summary_json may be NULL */
DNMF_API dnmf_status dnmf_run_experiment(const dnmf_config* cfg, char** summary_json);

/* class_id < 0 skips the drill-down; labels_path may be NULL */
DNMF_API dnmf_status dnmf_inspect(const char* dir, const char* labels_path, int class_id,
                                  int top, char** report);

#ifdef __cplusplus
}
#endif

#endif /* DEEPNMF_H */
