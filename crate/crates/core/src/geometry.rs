//! Axis-aligned boxes and IoU-family overlap measures.
//!
//! Coordinates are continuous corner coordinates with `(x_min, y_min)` at the
//! top-left. Areas are exact real arithmetic, not pixel counts.

mod losses;

pub use losses::{
    ciou_loss, ciou_loss_with_grad, diou_loss, diou_loss_with_grad, giou_loss, giou_loss_with_grad,
    BoxGradient, LossWithGrad,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle in pixel coordinates.
///
/// Construction rejects non-finite coordinates and inverted extents. Zero-area
/// boxes are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox", into = "RawBox")]
pub struct BoundingBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

#[derive(Serialize, Deserialize)]
struct RawBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl TryFrom<RawBox> for BoundingBox {
    type Error = Error;

    fn try_from(r: RawBox) -> Result<Self> {
        BoundingBox::new(r.x_min, r.y_min, r.x_max, r.y_max)
    }
}

impl From<BoundingBox> for RawBox {
    fn from(b: BoundingBox) -> Self {
        RawBox {
            x_min: b.x_min,
            y_min: b.y_min,
            x_max: b.x_max,
            y_max: b.y_max,
        }
    }
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let invalid = |reason| Error::InvalidBox {
            x_min,
            y_min,
            x_max,
            y_max,
            reason,
        };
        if ![x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        if x_min > x_max || y_min > y_max {
            return Err(invalid("inverted extent"));
        }
        Ok(BoundingBox {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Box of the given size centred on `(cx, cy)`.
    pub fn from_center(cx: f64, cy: f64, width: f64, height: f64) -> Result<Self> {
        Self::new(
            cx - width / 2.0,
            cy - height / 2.0,
            cx + width / 2.0,
            cy + height / 2.0,
        )
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn corners(&self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }

    pub fn is_degenerate(&self) -> bool {
        self.width() == 0.0 || self.height() == 0.0
    }

    /// Smallest box containing both `self` and `other`.
    pub fn enclosing(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            x_min: self.x_min.min(other.x_min),
            y_min: self.y_min.min(other.y_min),
            x_max: self.x_max.max(other.x_max),
            y_max: self.y_max.max(other.y_max),
        }
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, factor: f64) -> Result<BoundingBox> {
        BoundingBox::new(
            self.x_min * factor,
            self.y_min * factor,
            self.x_max * factor,
            self.y_max * factor,
        )
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Result<BoundingBox> {
        BoundingBox::new(
            self.x_min + dx,
            self.y_min + dy,
            self.x_max + dx,
            self.y_max + dy,
        )
    }
}

/// Free-function form of [`BoundingBox::area`].
pub fn area(b: &BoundingBox) -> f64 {
    b.area()
}

/// Overlap statistics of two boxes.
///
/// `center_distance_sq` and `enclosing_diagonal_sq` are the squared centre
/// distance and squared diagonal of the smallest enclosing box, the two terms
/// of the distance-IoU penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapReport {
    pub iou: f64,
    pub intersection_area: f64,
    pub union_area: f64,
    pub center_distance_sq: f64,
    pub enclosing_diagonal_sq: f64,
    pub enclosing_area: f64,
}

pub fn overlap(a: &BoundingBox, b: &BoundingBox) -> OverlapReport {
    let iw = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let ih = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let intersection_area = iw * ih;
    let union_area = a.area() + b.area() - intersection_area;
    // Two degenerate boxes have zero union; IoU is pinned to 0 there.
    let iou = if union_area > 0.0 {
        intersection_area / union_area
    } else {
        0.0
    };

    let (acx, acy) = a.center();
    let (bcx, bcy) = b.center();
    let center_distance_sq = (acx - bcx).powi(2) + (acy - bcy).powi(2);

    let enc = a.enclosing(b);
    let enclosing_diagonal_sq = enc.width().powi(2) + enc.height().powi(2);

    OverlapReport {
        iou,
        intersection_area,
        union_area,
        center_distance_sq,
        enclosing_diagonal_sq,
        enclosing_area: enc.area(),
    }
}

/// Intersection over union; shorthand for `overlap(a, b).iou`.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    overlap(a, b).iou
}
