#ifndef AIRDEMAND_H
#define AIRDEMAND_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum AdStatus {
  AD_STATUS_OK = 0,
  AD_STATUS_NULL_POINTER = 1,
  AD_STATUS_INVALID_ARGUMENT = 2,
  AD_STATUS_IO = 3,
  AD_STATUS_PARSE = 4,
  AD_STATUS_DOMAIN = 5,
  AD_STATUS_PANIC = 6,
} AdStatus;

// A loaded or generated dataset.
typedef struct AdDataset AdDataset;

// A trained model loaded from its JSON artifact.
typedef struct AdModel AdModel;

typedef struct AdMetrics {
  double rmse;
  double mse;
  double cc;
  double si;
} AdMetrics;

// Message for the most recent failure on this thread. Empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *ad_last_error(void);

// Aeration coefficient for Froude number `fr`.
//
// # Safety
// `out` must be null or point to writable memory for one `double`.
enum AdStatus ad_kalinske_beta(double fr, double *out);

// Reads a CSV dataset.
//
// # Safety
// `path` must be null or a NUL-terminated string; `out` must be null or
// writable. On success `*out` owns a handle for [`ad_dataset_free`].
enum AdStatus ad_dataset_load_csv(const char *path, struct AdDataset **out);

// Generates `n` synthetic samples for a named dam preset.
//
// # Safety
// As for [`ad_dataset_load_csv`], with `dam` in place of `path`.
enum AdStatus ad_dataset_synth(const char *dam,
                               uintptr_t n,
                               double noise_rel,
                               uint64_t seed,
                               struct AdDataset **out);

// # Safety
// `ds` must be null or a live handle; `out` null or writable.
enum AdStatus ad_dataset_len(const struct AdDataset *ds, uintptr_t *out);

// Reads sample `index` as (flow m³/s, opening %, air velocity m/s).
//
// # Safety
// `ds` must be null or a live handle; each out pointer null or writable.
enum AdStatus ad_dataset_get(const struct AdDataset *ds,
                             uintptr_t index,
                             double *flow,
                             double *opening,
                             double *air_velocity);

// # Safety
// `ds` must be null or a live handle; `path` null or NUL-terminated.
enum AdStatus ad_dataset_save_csv(const struct AdDataset *ds, const char *path);

// # Safety
// `ds` must be null or a handle not yet freed.
void ad_dataset_free(struct AdDataset *ds);

// Loads a model artifact written by `airdemand train` or `airdemand grid`.
//
// # Safety
// As for [`ad_dataset_load_csv`]; release with [`ad_model_free`].
enum AdStatus ad_model_load(const char *path, struct AdModel **out);

// Predicts air velocity (m/s) for one operating point.
//
// # Safety
// `model` must be null or a live handle; `out` null or writable.
enum AdStatus ad_model_predict(const struct AdModel *model,
                               double flow,
                               double opening,
                               double *out);

// Predicts `n` points; `flow`, `opening` and `out` each hold `n` doubles.
//
// # Safety
// Each array pointer must be valid for `n` elements (or null when `n` is 0).
enum AdStatus ad_model_predict_batch(const struct AdModel *model,
                                     const double *flow,
                                     const double *opening,
                                     uintptr_t n,
                                     double *out);

// # Safety
// `model` must be null or a handle not yet freed.
void ad_model_free(struct AdModel *model);

// RMSE, MSE, correlation coefficient and scatter index of `predicted`
// against `observed`.
//
// # Safety
// Both arrays must be valid for `n` elements; `out` null or writable.
enum AdStatus ad_metrics(const double *observed,
                         const double *predicted,
                         uintptr_t n,
                         struct AdMetrics *out);

#endif  /* AIRDEMAND_H */
