/* C interface to the segmentation library. All functions return a status;
 * on failure nalg_last_error() describes the problem for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * nalg_string_free(). */
#ifndef NEURONALG_H
#define NEURONALG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NALG_API __declspec(dllexport)
#else
#define NALG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nalg_status {
  NALG_OK = 0,
  NALG_E_INVALID_PARAMETER = 1,
  NALG_E_INVALID_POLICY = 2,
  NALG_E_SHAPE = 3,
  NALG_E_CALIBRATION = 4,
  NALG_E_DEGENERATE_HISTOGRAM = 5,
  NALG_E_EMPTY_FOREGROUND = 6,
  NALG_E_EMPTY_MARKERS = 7,
  NALG_E_EMPTY_LABEL_MAP = 8,
  NALG_E_UNKNOWN_LABEL = 9,
  NALG_E_EMPTY_REGION = 10,
  NALG_E_IO = 11,
  NALG_E_DECODE = 12,
  NALG_E_DATASET_FORMAT = 13,
  NALG_E_EMPTY_DATASET = 14,
  NALG_E_CONFIG = 15,
  NALG_E_NULL_ARGUMENT = 100,
  NALG_E_OUT_OF_RANGE = 101,
  NALG_E_INTERNAL = 102
} nalg_status;

typedef enum nalg_metric {
  NALG_METRIC_IOU = 0,
  NALG_METRIC_F1 = 1,
  NALG_METRIC_ACCURACY = 2,
  NALG_METRIC_SENSITIVITY = 3,
  NALG_METRIC_SPECIFICITY = 4
} nalg_metric;

typedef struct nalg_config nalg_config;
typedef struct nalg_image nalg_image;
typedef struct nalg_result nalg_result;
typedef struct nalg_batch nalg_batch;
typedef struct nalg_dataset nalg_dataset;
typedef struct nalg_report nalg_report;

typedef struct nalg_result_info {
  int width;
  int height;
  int32_t label_count;
  uint64_t foreground_pixels;
  int empty_foreground;
  int inverted;
  int non_converged_objects;
} nalg_result_info;

typedef struct nalg_metrics {
  uint64_t tp, tn, fp, fn;
  double iou, f1, accuracy, sensitivity, specificity;
} nalg_metrics;

NALG_API const char* nalg_version(void);
NALG_API const char* nalg_last_error(void);
NALG_API const char* nalg_status_name(nalg_status status);
NALG_API void nalg_string_free(char* s);

/* configuration */
NALG_API nalg_status nalg_config_create(nalg_config** out);
NALG_API nalg_status nalg_config_load(const char* path, nalg_config** out);
NALG_API nalg_status nalg_config_from_json(const char* text, nalg_config** out);
NALG_API nalg_status nalg_config_to_json(const nalg_config* cfg, char** out_json);
NALG_API nalg_status nalg_config_set_seed(nalg_config* cfg, uint64_t seed);
NALG_API nalg_status nalg_config_get_seed(const nalg_config* cfg, uint64_t* out);
NALG_API nalg_status nalg_config_set_jobs(nalg_config* cfg, int jobs);
NALG_API nalg_status nalg_config_set_snapshots(nalg_config* cfg, int keep);
NALG_API void nalg_config_free(nalg_config* cfg);

/* images */
NALG_API nalg_status nalg_image_load(const char* path, nalg_image** out);
/* Grayscale image from row-major samples in [0, 1]. */
NALG_API nalg_status nalg_image_from_gray(const double* data, int width, int height,
                                          nalg_image** out);
NALG_API nalg_status nalg_image_size(const nalg_image* img, int* width, int* height);
NALG_API void nalg_image_free(nalg_image* img);

/* segmentation */
NALG_API nalg_status nalg_segment(const nalg_image* img, const nalg_config* cfg,
                                  nalg_result** out);
NALG_API nalg_status nalg_result_get_info(const nalg_result* r, nalg_result_info* out);
/* Copies width*height labels (row-major) into buf; len is its capacity. */
NALG_API nalg_status nalg_result_copy_labels(const nalg_result* r, int32_t* buf, size_t len);
NALG_API nalg_status nalg_result_write_labels(const nalg_result* r, const char* path);
NALG_API nalg_status nalg_result_write_binary(const nalg_result* r, const char* path);
NALG_API nalg_status nalg_result_write_overlay(const nalg_result* r, const char* path);
/* Needs a config with snapshots enabled. Writes stage files into dir and
 * returns their paths, newline separated. */
NALG_API nalg_status nalg_result_write_snapshots(const nalg_result* r, const char* dir,
                                                 char** out_paths);
NALG_API void nalg_result_free(nalg_result* r);

/* Runs the pipeline and writes the intermediate output of stage 1..6. */
NALG_API nalg_status nalg_inspect_stage(const nalg_image* img, const nalg_config* cfg, int stage,
                                        const char* dir, char** out_paths);

/* batches: failing items are recorded, the rest still run */
NALG_API nalg_status nalg_segment_batch(const char* const* paths, size_t count,
                                        const nalg_config* cfg, nalg_batch** out);
NALG_API size_t nalg_batch_size(const nalg_batch* b);
/* result is borrowed from the batch and NULL when the item failed. */
NALG_API nalg_status nalg_batch_item(const nalg_batch* b, size_t index, nalg_status* item_status,
                                     const char** message, const nalg_result** result);
NALG_API void nalg_batch_free(nalg_batch* b);

/* datasets and noise sweeps; kind is neuroblastoma, nucleusseg or isbi2009 */
NALG_API nalg_status nalg_dataset_load(const char* root, const char* kind, nalg_dataset** out);
NALG_API size_t nalg_dataset_size(const nalg_dataset* ds);
NALG_API size_t nalg_dataset_issue_count(const nalg_dataset* ds);
NALG_API nalg_status nalg_dataset_issue(const nalg_dataset* ds, size_t index, const char** path,
                                        nalg_status* code, const char** message);
NALG_API size_t nalg_dataset_warning_count(const nalg_dataset* ds);
NALG_API const char* nalg_dataset_warning(const nalg_dataset* ds, size_t index);
NALG_API void nalg_dataset_free(nalg_dataset* ds);

/* overlay_dir may be NULL. */
NALG_API nalg_status nalg_sweep_run(const nalg_dataset* ds, const double* levels, size_t n_levels,
                                    const nalg_config* cfg, uint64_t seed,
                                    const char* overlay_dir, nalg_report** out);
NALG_API size_t nalg_report_level_count(const nalg_report* r);
NALG_API nalg_status nalg_report_mean(const nalg_report* r, size_t level_index,
                                      nalg_metric metric, double* out);
/* Five CSV tables and report.json; returns the written paths. */
NALG_API nalg_status nalg_report_write(const nalg_report* r, const char* dir, char** out_paths);
NALG_API void nalg_report_free(nalg_report* r);

/* Compares a predicted mask/label image with ground truth (image or .txt). */
NALG_API nalg_status nalg_evaluate_masks(const char* pred_path, const char* truth_path,
                                         nalg_metrics* out);

#ifdef __cplusplus
}
#endif

#endif
