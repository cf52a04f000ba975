//! C ABI over `cesm-cad`.
//!
//! Every function returns a [`CadStatus`]. On failure a message is kept per
//! thread and can be read with [`cad_last_error_message`]. Objects created by
//! the library are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cesm_cad::anchors::{kmeans_anchors, KMeansConfig, Shape};
use cesm_cad::data::window::WindowingSpec;
use cesm_cad::froc::{
    froc_curve, operating_point_at_sensitivity, FrocCurve, FrocMetric, FrocPoint,
};
use cesm_cad::geometry::{
    ciou_loss_with_grad, diou_loss_with_grad, giou_loss_with_grad, LossWithGrad,
};
use cesm_cad::postprocess::nms_clusters;
use cesm_cad::roc::roc_curve;
use cesm_cad::{overlap, BoundingBox, Dataset, Detection, Error, ErrorCategory};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CadStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Invalid argument or setting.
    Config = 3,
    /// Malformed input value or file.
    Parse = 4,
    /// Cross-record consistency violation.
    Integrity = 5,
    /// Undefined result, e.g. a degenerate loss or unreachable target.
    Computation = 6,
    Io = 7,
    OutOfRange = 8,
    Panic = 9,
}

impl From<ErrorCategory> for CadStatus {
    fn from(c: ErrorCategory) -> Self {
        match c {
            ErrorCategory::Config => CadStatus::Config,
            ErrorCategory::Parse => CadStatus::Parse,
            ErrorCategory::Integrity => CadStatus::Integrity,
            ErrorCategory::Computation => CadStatus::Computation,
            ErrorCategory::Io => CadStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CadBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CadOverlap {
    pub iou: f64,
    pub intersection_area: f64,
    pub union_area: f64,
    pub center_distance_sq: f64,
    pub enclosing_diagonal_sq: f64,
    pub enclosing_area: f64,
}

/// A scored box of one image.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CadDetection {
    pub bbox: CadBox,
    pub score: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CadFrocMetric {
    AllLesions = 0,
    BiopsiedLesions = 1,
    MalignantLesions = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CadFrocPoint {
    pub threshold: f64,
    pub sensitivity: f64,
    pub fp_per_image: f64,
}

/// Study index, annotations and detections loaded from disk.
pub struct CadDataset {
    inner: Dataset,
}

pub struct CadFrocCurve {
    inner: FrocCurve,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|&b| b != 0);
        CString::new(bytes).expect("nul bytes removed")
    });
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(CadStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.category().into(), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CadStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CadStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CadStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            CadStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn path<'a>(p: *const c_char, what: &str) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| Failure(CadStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn to_box(b: &CadBox) -> Result<BoundingBox, Failure> {
    Ok(BoundingBox::new(b.x_min, b.y_min, b.x_max, b.y_max)?)
}

fn to_point(p: &FrocPoint) -> CadFrocPoint {
    CadFrocPoint {
        threshold: p.threshold,
        sensitivity: p.sensitivity,
        fp_per_image: p.fp_per_image,
    }
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cad_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cad_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Overlap statistics of two boxes.
///
/// # Safety
/// `a` and `b` must point to valid boxes; `out_report` to writable memory.
#[no_mangle]
pub unsafe extern "C" fn cad_overlap(
    a: *const CadBox,
    b: *const CadBox,
    out_report: *mut CadOverlap,
) -> CadStatus {
    guard(|| {
        let a = to_box(deref(a, "a")?)?;
        let b = to_box(deref(b, "b")?)?;
        let r = overlap(&a, &b);
        *out(out_report, "out_report")? = CadOverlap {
            iou: r.iou,
            intersection_area: r.intersection_area,
            union_area: r.union_area,
            center_distance_sq: r.center_distance_sq,
            enclosing_diagonal_sq: r.enclosing_diagonal_sq,
            enclosing_area: r.enclosing_area,
        };
        Ok(())
    })
}

unsafe fn loss_call(
    f: fn(&BoundingBox, &BoundingBox) -> cesm_cad::Result<LossWithGrad>,
    pred: *const CadBox,
    gt: *const CadBox,
    loss: *mut f64,
    grad: *mut f64,
) -> CadStatus {
    guard(|| {
        let r = f(&to_box(deref(pred, "pred")?)?, &to_box(deref(gt, "gt")?)?)?;
        *out(loss, "loss")? = r.loss;
        if !grad.is_null() {
            std::slice::from_raw_parts_mut(grad, 4).copy_from_slice(&r.grad.0);
        }
        Ok(())
    })
}

/// Distance-IoU loss of `pred` against `gt`. When `grad` is not null it
/// receives the four partial derivatives with respect to the corners of `pred`.
///
/// # Safety
/// Box pointers must be valid; `loss` writable; `grad` null or room for 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn cad_diou_loss(
    pred: *const CadBox,
    gt: *const CadBox,
    loss: *mut f64,
    grad: *mut f64,
) -> CadStatus {
    loss_call(diou_loss_with_grad, pred, gt, loss, grad)
}

/// Generalized-IoU loss; see [`cad_diou_loss`].
///
/// # Safety
/// As for [`cad_diou_loss`].
#[no_mangle]
pub unsafe extern "C" fn cad_giou_loss(
    pred: *const CadBox,
    gt: *const CadBox,
    loss: *mut f64,
    grad: *mut f64,
) -> CadStatus {
    loss_call(giou_loss_with_grad, pred, gt, loss, grad)
}

/// Complete-IoU loss; see [`cad_diou_loss`].
///
/// # Safety
/// As for [`cad_diou_loss`].
#[no_mangle]
pub unsafe extern "C" fn cad_ciou_loss(
    pred: *const CadBox,
    gt: *const CadBox,
    loss: *mut f64,
    grad: *mut f64,
) -> CadStatus {
    loss_call(ciou_loss_with_grad, pred, gt, loss, grad)
}

/// Greedy NMS over `n` detections of one image. Writes the input indices of
/// the survivors, best first, to `keep` (room for `n` entries) and their count
/// to `n_kept`.
///
/// # Safety
/// `dets` must hold `n` detections and `keep` room for `n` indices.
#[no_mangle]
pub unsafe extern "C" fn cad_nms(
    dets: *const CadDetection,
    n: usize,
    iou_threshold: f64,
    keep: *mut usize,
    n_kept: *mut usize,
) -> CadStatus {
    guard(|| {
        let input = slice(dets, n, "dets")?;
        let dets = input
            .iter()
            .map(|d| Ok(Detection::new("", to_box(&d.bbox)?, d.score)?))
            .collect::<Result<Vec<_>, Failure>>()?;
        let clusters = nms_clusters(&dets, iou_threshold)?;
        let keep = slice_mut(keep, n, "keep")?;
        for (slot, c) in keep.iter_mut().zip(&clusters) {
            *slot = c.keep;
        }
        *out(n_kept, "n_kept")? = clusters.len();
        Ok(())
    })
}

/// Windows `n` raw 16-bit intensities into 8 bits over `[lo, hi]`.
///
/// # Safety
/// `src` and `dst` must each hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn cad_window_u16(
    src: *const u16,
    n: usize,
    lo: f64,
    hi: f64,
    dst: *mut u8,
) -> CadStatus {
    guard(|| {
        let spec = WindowingSpec::new(lo, hi)?;
        let lut = spec.lut();
        let src = slice(src, n, "src")?;
        let dst = slice_mut(dst, n, "dst")?;
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = lut[usize::from(s)];
        }
        Ok(())
    })
}

/// ROC AUC of `n` scores; `labels[i]` non-zero marks a positive case.
///
/// # Safety
/// `scores` and `labels` must each hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn cad_roc_auc(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    auc: *mut f64,
) -> CadStatus {
    guard(|| {
        let scores = slice(scores, n, "scores")?;
        let labels = slice(labels, n, "labels")?;
        let pairs: Vec<(f64, bool)> = scores
            .iter()
            .zip(labels)
            .map(|(&s, &l)| (s, l != 0))
            .collect();
        *out(auc, "auc")? = roc_curve(&pairs)?.auc;
        Ok(())
    })
}

/// k-means anchors over `n` box shapes given as interleaved `(w, h)` pairs.
/// Writes `k` pairs, sorted by area, to `anchors`.
///
/// # Safety
/// `shapes` must hold `2 * n` doubles and `anchors` room for `2 * k`.
#[no_mangle]
pub unsafe extern "C" fn cad_kmeans_anchors(
    shapes: *const f64,
    n: usize,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
    anchors: *mut f64,
) -> CadStatus {
    guard(|| {
        let raw = slice(shapes, 2 * n, "shapes")?;
        let shapes = raw
            .chunks_exact(2)
            .map(|c| Ok(Shape::new(c[0], c[1])?))
            .collect::<Result<Vec<_>, Failure>>()?;
        let config = KMeansConfig {
            k,
            seed,
            max_iter,
            tol,
        };
        let set = kmeans_anchors(&shapes, &config)?;
        let dst = slice_mut(anchors, 2 * k, "anchors")?;
        for (pair, s) in dst.chunks_exact_mut(2).zip(set.anchors()) {
            pair[0] = s.width;
            pair[1] = s.height;
        }
        Ok(())
    })
}

/// Loads and cross-validates a study index, annotations (JSON Lines) and
/// detections (CSV).
///
/// # Safety
/// Paths must be NUL-terminated strings; `out_dataset` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cad_dataset_load(
    index_path: *const c_char,
    annotations_path: *const c_char,
    detections_path: *const c_char,
    out_dataset: *mut *mut CadDataset,
) -> CadStatus {
    guard(|| {
        let slot = out(out_dataset, "out_dataset")?;
        *slot = ptr::null_mut();
        let ds = Dataset::load(
            path(index_path, "index_path")?,
            path(annotations_path, "annotations_path")?,
            path(detections_path, "detections_path")?,
        )?;
        *slot = Box::into_raw(Box::new(CadDataset { inner: ds }));
        Ok(())
    })
}

/// # Safety
/// `dataset` must come from [`cad_dataset_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cad_dataset_free(dataset: *mut CadDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Number of images in the study index.
///
/// # Safety
/// `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cad_dataset_image_count(
    dataset: *const CadDataset,
    count: *mut usize,
) -> CadStatus {
    guard(|| {
        *out(count, "count")? = deref(dataset, "dataset")?.inner.index.images().len();
        Ok(())
    })
}

/// FROC curve of `metric`; release with [`cad_froc_free`].
///
/// # Safety
/// `dataset` must be a live handle; `out_curve` writable.
#[no_mangle]
pub unsafe extern "C" fn cad_dataset_froc(
    dataset: *const CadDataset,
    metric: CadFrocMetric,
    iou_threshold: f64,
    out_curve: *mut *mut CadFrocCurve,
) -> CadStatus {
    guard(|| {
        let slot = out(out_curve, "out_curve")?;
        *slot = ptr::null_mut();
        let metric = match metric {
            CadFrocMetric::AllLesions => FrocMetric::AllLesions,
            CadFrocMetric::BiopsiedLesions => FrocMetric::BiopsiedLesions,
            CadFrocMetric::MalignantLesions => FrocMetric::MalignantLesions,
        };
        let set = deref(dataset, "dataset")?.inner.evaluation_set()?;
        let curve = froc_curve(&set, metric, iou_threshold)?;
        *slot = Box::into_raw(Box::new(CadFrocCurve { inner: curve }));
        Ok(())
    })
}

/// Breast-level ROC AUC (benign and normal breasts are negatives).
///
/// # Safety
/// `dataset` must be a live handle; `auc` writable.
#[no_mangle]
pub unsafe extern "C" fn cad_dataset_breast_auc(
    dataset: *const CadDataset,
    auc: *mut f64,
) -> CadStatus {
    guard(|| {
        let scores = deref(dataset, "dataset")?.inner.breast_scores();
        *out(auc, "auc")? = roc_curve(&scores)?.auc;
        Ok(())
    })
}

/// # Safety
/// `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cad_froc_len(curve: *const CadFrocCurve, len: *mut usize) -> CadStatus {
    guard(|| {
        *out(len, "len")? = deref(curve, "curve")?.inner.points.len();
        Ok(())
    })
}

/// Point `i`, in descending threshold order.
///
/// # Safety
/// `curve` must be a live handle; `point` writable.
#[no_mangle]
pub unsafe extern "C" fn cad_froc_point(
    curve: *const CadFrocCurve,
    i: usize,
    point: *mut CadFrocPoint,
) -> CadStatus {
    guard(|| {
        let points = &deref(curve, "curve")?.inner.points;
        let p = points.get(i).ok_or_else(|| {
            Failure(
                CadStatus::OutOfRange,
                format!("point {i} of {}", points.len()),
            )
        })?;
        *out(point, "point")? = to_point(p);
        Ok(())
    })
}

/// Highest-threshold point reaching `sensitivity`.
///
/// # Safety
/// `curve` must be a live handle; `point` writable.
#[no_mangle]
pub unsafe extern "C" fn cad_froc_operating_point(
    curve: *const CadFrocCurve,
    sensitivity: f64,
    point: *mut CadFrocPoint,
) -> CadStatus {
    guard(|| {
        let p = operating_point_at_sensitivity(&deref(curve, "curve")?.inner, sensitivity)?;
        *out(point, "point")? = to_point(&p);
        Ok(())
    })
}

/// # Safety
/// `curve` must come from [`cad_dataset_froc`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cad_froc_free(curve: *mut CadFrocCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}
