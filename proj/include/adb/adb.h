/*
 * adb — adaptive decision boundaries for open-set classification.
 *
 * C interface to the shared library. All objects are opaque handles created
 * and destroyed through these functions; every fallible call returns an
 * adb_status and leaves a human-readable message in adb_last_error() (kept
 * per thread). Strings returned through char** out-parameters are owned by
 * the caller and must be released with adb_string_free().
 *
 * Configuration parameters travel as JSON text; pass NULL or "" for defaults.
 * Keys mirror the CLI flags, e.g.
 *   boundary: {"learning_rate":0.05,"batch_size":128,"max_epochs":100,
 *              "convergence_tol":1e-4,"patience":5,"seed":0}
 *   representation: {"learning_rate":1e-3,"batch_size":128,"max_epochs":100,
 *                    "seed":0,"early_stop_patience":10,"rep_dim":0}
 */

#ifndef ADB_ADB_H
#define ADB_ADB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ADB_API __declspec(dllexport)
#else
#define ADB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum adb_status {
  ADB_OK = 0,
  ADB_ERR_ARGUMENT = 1,          /* precondition or argument violation */
  ADB_ERR_PARSE = 2,             /* malformed input file */
  ADB_ERR_DIMENSION = 3,         /* vector dimension mismatch */
  ADB_ERR_EMPTY_DATASET = 4,     /* file or dataset with no records */
  ADB_ERR_INSUFFICIENT_DATA = 5, /* a class has too few records */
  ADB_ERR_MODEL_FORMAT = 6,      /* model file fails schema or invariants */
  ADB_ERR_IO = 7,                /* filesystem failure */
  ADB_ERR_INTERNAL = 8
} adb_status;

typedef struct adb_dataset adb_dataset;
typedef struct adb_split adb_split;
typedef struct adb_rep_model adb_rep_model;
typedef struct adb_model adb_model;

/* One classification outcome. label is the known-class index or -1 for
 * "open". For ADB, distance/margin refer to the nearest centroid and its
 * (possibly ratio-scaled) radius; for MSP, distance is the top softmax
 * probability and margin is threshold - distance. */
typedef struct adb_prediction {
  int32_t label;
  int32_t nearest;
  double distance;
  double margin;
} adb_prediction;

ADB_API const char* adb_version(void);

/* Message from the most recent failing call on this thread; never NULL. */
ADB_API const char* adb_last_error(void);

ADB_API void adb_string_free(char* s);

/* ------------------------------------------------------------------ */
/* datasets                                                            */

/* format: "csv", "jsonl", or NULL to infer from the file extension. */
ADB_API adb_status adb_dataset_load(const char* path, const char* format,
                                    adb_dataset** out);
ADB_API adb_status adb_dataset_save_csv(const adb_dataset* ds, const char* path);

/* Gaussian blobs around uniformly placed class centroids. */
ADB_API adb_status adb_dataset_synthetic(int32_t n_classes, int32_t per_class,
                                         int32_t dim, double centroid_scale,
                                         double noise_sigma, uint64_t seed,
                                         adb_dataset** out);

/* Per class keeps round(n * labeled_ratio) records, at least one. */
ADB_API adb_status adb_dataset_subsample(const adb_dataset* ds, double labeled_ratio,
                                         uint64_t seed, adb_dataset** out);

ADB_API int64_t adb_dataset_size(const adb_dataset* ds);
ADB_API int32_t adb_dataset_dim(const adb_dataset* ds);
ADB_API int32_t adb_dataset_num_classes(const adb_dataset* ds);
/* Known class name by index, or NULL when out of range. */
ADB_API const char* adb_dataset_label_name(const adb_dataset* ds, int32_t index);
/* Label of one record (may be "open"), or NULL when out of range. */
ADB_API const char* adb_dataset_record_label(const adb_dataset* ds, int64_t row);
ADB_API adb_status adb_dataset_record_vector(const adb_dataset* ds, int64_t row,
                                             double* out, int32_t dim);
ADB_API void adb_dataset_free(adb_dataset* ds);

/* ------------------------------------------------------------------ */
/* known/open splits                                                   */

/* Selects round(K * known_ratio) known classes under the seed; train and
 * validation keep only known classes, test also holds every record of the
 * excluded classes relabeled "open". */
ADB_API adb_status adb_split_make(const adb_dataset* ds, double known_ratio,
                                  double val_fraction, double test_fraction,
                                  uint64_t seed, adb_split** out);
/* Borrowed views; valid until adb_split_free. */
ADB_API const adb_dataset* adb_split_train(const adb_split* s);
ADB_API const adb_dataset* adb_split_validation(const adb_split* s);
ADB_API const adb_dataset* adb_split_test(const adb_split* s);
ADB_API adb_status adb_split_manifest_json(const adb_split* s, char** out_json);
ADB_API void adb_split_free(adb_split* s);

/* ------------------------------------------------------------------ */
/* representation (dense layer + softmax head)                         */

/* val may be NULL (then no early stopping / best-epoch selection). */
ADB_API adb_status adb_rep_train(const adb_dataset* train, const adb_dataset* val,
                                 const char* config_json, adb_rep_model** out);
ADB_API adb_status adb_rep_embed(const adb_rep_model* rep, const adb_dataset* ds,
                                 adb_dataset** out);
ADB_API adb_status adb_rep_save(const adb_rep_model* rep, const char* path);
ADB_API adb_status adb_rep_load(const char* path, adb_rep_model** out);
ADB_API int32_t adb_rep_num_classes(const adb_rep_model* rep);
ADB_API const char* adb_rep_label_name(const adb_rep_model* rep, int32_t index);
ADB_API void adb_rep_free(adb_rep_model* rep);

/* ------------------------------------------------------------------ */
/* boundary model                                                      */

/* Computes centroids, learns one radius per class, and (when val is not
 * NULL and "val_calibration" is not disabled in the config) expands radii to
 * cover the validation points of each class. */
ADB_API adb_status adb_model_train(const adb_dataset* train, const adb_dataset* val,
                                   const char* config_json, adb_model** out);
ADB_API adb_status adb_model_save(const adb_model* m, const char* path);
ADB_API adb_status adb_model_load(const char* path, adb_model** out);
ADB_API adb_status adb_model_classify(const adb_model* m, const double* vec,
                                      int32_t dim, adb_prediction* out);
/* out must hold adb_dataset_size(ds) entries; boundary_ratio scales every
 * radius (1.0 for plain evaluation). */
ADB_API adb_status adb_model_classify_dataset(const adb_model* m,
                                              const adb_dataset* ds,
                                              double boundary_ratio,
                                              adb_prediction* out);
/* Learning curve of the training run (epoch,mean_radius,loss CSV); empty for
 * loaded models. */
ADB_API adb_status adb_model_curve_csv(const adb_model* m, char** out_csv);
ADB_API int32_t adb_model_num_classes(const adb_model* m);
ADB_API int32_t adb_model_dim(const adb_model* m);
ADB_API const char* adb_model_label_name(const adb_model* m, int32_t index);
ADB_API adb_status adb_model_radius(const adb_model* m, int32_t index, double* out);
ADB_API void adb_model_free(adb_model* m);

/* ------------------------------------------------------------------ */
/* evaluation                                                          */

/* Classifies the test set and reports metrics; predictions_csv may be NULL
 * when only the metrics are wanted. */
ADB_API adb_status adb_evaluate(const adb_model* m, const adb_dataset* test,
                                double boundary_ratio, char** metrics_json,
                                char** predictions_csv);
ADB_API adb_status adb_evaluate_msp(const adb_rep_model* rep, const adb_dataset* test,
                                    double threshold, char** metrics_json,
                                    char** predictions_csv);

/* Full protocol (split / subsample / pre-train / boundaries / metrics),
 * n_runs times with seeds base_seed + r; see the experiment config keys in
 * the header comment. Either output may be NULL. */
ADB_API adb_status adb_experiment_run(const adb_dataset* ds, const char* config_json,
                                      char** report_json, char** report_csv);

ADB_API adb_status adb_sweep_boundary(const adb_model* m, const adb_dataset* test,
                                      const double* ratios, int32_t n_ratios,
                                      char** csv_out);
ADB_API adb_status adb_sweep_labeled(const adb_dataset* ds, const char* config_json,
                                     const double* ratios, int32_t n_ratios,
                                     char** csv_out);

/* Fills in defaults for a partial config; kind is "representation",
 * "boundary", or "experiment". Used for the CLI's resolved-config echo. */
ADB_API adb_status adb_config_resolve(const char* kind, const char* config_json,
                                      char** resolved_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ADB_ADB_H */
