//! Detection post-processing and clinical evaluation for lesion-detection CAD
//! on contrast-enhanced mammography.
//!
//! - [`geometry`]: boxes, IoU-family overlap and losses with gradients
//! - [`postprocess`]: test-time-augmentation back-mapping, fusion and NMS
//! - [`anchors`]: k-means anchor estimation
//! - [`froc`]: lesion matching, FROC curves and FP score distributions
//! - [`roc`]: breast-level suspicion scores, ROC/AUC, clinical comparison
//! - [`data`]: windowing, augmentation, stratified patient splits
//! - [`io`]: the on-disk formats
//! - [`cli`]: the `cesm-cad` command line

pub mod anchors;
pub mod cli;
pub mod data;
pub mod dataset;
pub mod error;
pub mod froc;
pub mod geometry;
pub mod io;
pub mod postprocess;
pub mod roc;

pub use dataset::Dataset;
pub use error::{Error, ErrorCategory, Result};
pub use geometry::{overlap, BoundingBox, OverlapReport};
pub use postprocess::Detection;
