#ifndef CESM_CAD_H
#define CESM_CAD_H

/* Generated by cbindgen from the cesm-cad-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CadFrocMetric {
  CAD_FROC_METRIC_ALL_LESIONS = 0,
  CAD_FROC_METRIC_BIOPSIED_LESIONS = 1,
  CAD_FROC_METRIC_MALIGNANT_LESIONS = 2,
} CadFrocMetric;

typedef enum CadStatus {
  CAD_STATUS_OK = 0,
  CAD_STATUS_NULL_POINTER = 1,
  CAD_STATUS_INVALID_UTF8 = 2,
  // Invalid argument or setting.
  CAD_STATUS_CONFIG = 3,
  // Malformed input value or file.
  CAD_STATUS_PARSE = 4,
  // Cross-record consistency violation.
  CAD_STATUS_INTEGRITY = 5,
  // Undefined result, e.g. a degenerate loss or unreachable target.
  CAD_STATUS_COMPUTATION = 6,
  CAD_STATUS_IO = 7,
  CAD_STATUS_OUT_OF_RANGE = 8,
  CAD_STATUS_PANIC = 9,
} CadStatus;

// Study index, annotations and detections loaded from disk.
typedef struct CadDataset CadDataset;

typedef struct CadFrocCurve CadFrocCurve;

typedef struct CadBox {
  double x_min;
  double y_min;
  double x_max;
  double y_max;
} CadBox;

typedef struct CadOverlap {
  double iou;
  double intersection_area;
  double union_area;
  double center_distance_sq;
  double enclosing_diagonal_sq;
  double enclosing_area;
} CadOverlap;

// A scored box of one image.
typedef struct CadDetection {
  struct CadBox bbox;
  double score;
} CadDetection;

typedef struct CadFrocPoint {
  double threshold;
  double sensitivity;
  double fp_per_image;
} CadFrocPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *cad_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *cad_version(void);

// Overlap statistics of two boxes.
//
// # Safety
// `a` and `b` must point to valid boxes; `out_report` to writable memory.
enum CadStatus cad_overlap(const struct CadBox *a,
                           const struct CadBox *b,
                           struct CadOverlap *out_report);

// Distance-IoU loss of `pred` against `gt`. When `grad` is not null it
// receives the four partial derivatives with respect to the corners of `pred`.
//
// # Safety
// Box pointers must be valid; `loss` writable; `grad` null or room for 4 doubles.
enum CadStatus cad_diou_loss(const struct CadBox *pred,
                             const struct CadBox *gt,
                             double *loss,
                             double *grad);

// Generalized-IoU loss; see [`cad_diou_loss`].
//
// # Safety
// As for [`cad_diou_loss`].
enum CadStatus cad_giou_loss(const struct CadBox *pred,
                             const struct CadBox *gt,
                             double *loss,
                             double *grad);

// Complete-IoU loss; see [`cad_diou_loss`].
//
// # Safety
// As for [`cad_diou_loss`].
enum CadStatus cad_ciou_loss(const struct CadBox *pred,
                             const struct CadBox *gt,
                             double *loss,
                             double *grad);

// Greedy NMS over `n` detections of one image. Writes the input indices of
// the survivors, best first, to `keep` (room for `n` entries) and their count
// to `n_kept`.
//
// # Safety
// `dets` must hold `n` detections and `keep` room for `n` indices.
enum CadStatus cad_nms(const struct CadDetection *dets,
                       size_t n,
                       double iou_threshold,
                       size_t *keep,
                       size_t *n_kept);

// Windows `n` raw 16-bit intensities into 8 bits over `[lo, hi]`.
//
// # Safety
// `src` and `dst` must each hold `n` elements.
enum CadStatus cad_window_u16(const uint16_t *src, size_t n, double lo, double hi, uint8_t *dst);

// ROC AUC of `n` scores; `labels[i]` non-zero marks a positive case.
//
// # Safety
// `scores` and `labels` must each hold `n` elements.
enum CadStatus cad_roc_auc(const double *scores, const uint8_t *labels, size_t n, double *auc);

// k-means anchors over `n` box shapes given as interleaved `(w, h)` pairs.
// Writes `k` pairs, sorted by area, to `anchors`.
//
// # Safety
// `shapes` must hold `2 * n` doubles and `anchors` room for `2 * k`.
enum CadStatus cad_kmeans_anchors(const double *shapes,
                                  size_t n,
                                  size_t k,
                                  uint64_t seed,
                                  size_t max_iter,
                                  double tol,
                                  double *anchors);

// Loads and cross-validates a study index, annotations (JSON Lines) and
// detections (CSV).
//
// # Safety
// Paths must be NUL-terminated strings; `out_dataset` must be writable.
enum CadStatus cad_dataset_load(const char *index_path,
                                const char *annotations_path,
                                const char *detections_path,
                                struct CadDataset **out_dataset);

// # Safety
// `dataset` must come from [`cad_dataset_load`] and not be used afterwards.
void cad_dataset_free(struct CadDataset *dataset);

// Number of images in the study index.
//
// # Safety
// `dataset` must be a live handle.
enum CadStatus cad_dataset_image_count(const struct CadDataset *dataset, size_t *count);

// FROC curve of `metric`; release with [`cad_froc_free`].
//
// # Safety
// `dataset` must be a live handle; `out_curve` writable.
enum CadStatus cad_dataset_froc(const struct CadDataset *dataset,
                                enum CadFrocMetric metric,
                                double iou_threshold,
                                struct CadFrocCurve **out_curve);

// Breast-level ROC AUC (benign and normal breasts are negatives).
//
// # Safety
// `dataset` must be a live handle; `auc` writable.
enum CadStatus cad_dataset_breast_auc(const struct CadDataset *dataset, double *auc);

// # Safety
// `curve` must be a live handle.
enum CadStatus cad_froc_len(const struct CadFrocCurve *curve, size_t *len);

// Point `i`, in descending threshold order.
//
// # Safety
// `curve` must be a live handle; `point` writable.
enum CadStatus cad_froc_point(const struct CadFrocCurve *curve,
                              size_t i,
                              struct CadFrocPoint *point);

// Highest-threshold point reaching `sensitivity`.
//
// # Safety
// `curve` must be a live handle; `point` writable.
enum CadStatus cad_froc_operating_point(const struct CadFrocCurve *curve,
                                        double sensitivity,
                                        struct CadFrocPoint *point);

// # Safety
// `curve` must come from [`cad_dataset_froc`] and not be used afterwards.
void cad_froc_free(struct CadFrocCurve *curve);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CESM_CAD_H */
