//! Reduction of raw detector output to final detections: back-mapping of
//! test-time-augmented predictions, fusion, and non-maximum suppression.

mod nms;
mod tta;

pub use nms::{nms, nms_by_image, nms_clusters, NmsCluster, DEFAULT_NMS_IOU};
pub use tta::{invert_transform, tta_fuse, FusionMode, TransformKind, TransformSpec, TtaTransform};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

/// A scored box attached to an image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: String,
    pub bbox: BoundingBox,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_label: Option<String>,
}

impl Detection {
    pub fn new(image_id: impl Into<String>, bbox: BoundingBox, score: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidArgument(format!(
                "detection score must lie in [0, 1], got {score}"
            )));
        }
        Ok(Detection {
            image_id: image_id.into(),
            bbox,
            score,
            class_label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.class_label = Some(label.into());
        self
    }
}

/// Processing order shared by NMS and matching: descending score, then
/// smaller area, then lexicographic corner coordinates.
pub fn rank_order(a: &Detection, b: &Detection) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.bbox.area().total_cmp(&b.bbox.area()))
        .then_with(|| {
            let (ca, cb) = (a.bbox.corners(), b.bbox.corners());
            ca.iter()
                .zip(cb.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

pub(crate) fn check_single_image<'a>(
    ids: impl IntoIterator<Item = &'a str>,
) -> Result<Option<&'a str>> {
    let mut iter = ids.into_iter();
    let Some(first) = iter.next() else {
        return Ok(None);
    };
    for other in iter {
        if other != first {
            return Err(Error::MixedImages {
                first: first.to_string(),
                other: other.to_string(),
            });
        }
    }
    Ok(Some(first))
}
