use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{nms, nms_clusters, Detection};
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Identity,
    HorizontalFlip,
    VerticalFlip,
    Scale,
}

/// One test-time view of an image. `image_width`/`image_height` are the
/// original image dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtaTransform {
    kind: TransformKind,
    scale_factor: f64,
    image_width: f64,
    image_height: f64,
}

impl TtaTransform {
    pub fn new(kind: TransformKind, scale_factor: f64, width: f64, height: f64) -> Result<Self> {
        if !(scale_factor.is_finite() && scale_factor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive, got {scale_factor}"
            )));
        }
        if kind != TransformKind::Scale && scale_factor != 1.0 {
            return Err(Error::InvalidArgument(
                "scale factor must be 1.0 unless the transform is a scale".into(),
            ));
        }
        if !(width.is_finite() && width > 0.0 && height.is_finite() && height > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(TtaTransform {
            kind,
            scale_factor,
            image_width: width,
            image_height: height,
        })
    }

    pub fn identity(width: f64, height: f64) -> Result<Self> {
        Self::new(TransformKind::Identity, 1.0, width, height)
    }

    pub fn horizontal_flip(width: f64, height: f64) -> Result<Self> {
        Self::new(TransformKind::HorizontalFlip, 1.0, width, height)
    }

    pub fn vertical_flip(width: f64, height: f64) -> Result<Self> {
        Self::new(TransformKind::VerticalFlip, 1.0, width, height)
    }

    pub fn scale(factor: f64, width: f64, height: f64) -> Result<Self> {
        Self::new(TransformKind::Scale, factor, width, height)
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale_factor
    }

    /// Size of the transformed canvas.
    pub fn canvas(&self) -> (f64, f64) {
        (
            self.image_width * self.scale_factor,
            self.image_height * self.scale_factor,
        )
    }

    /// Maps a box from original-image to transformed coordinates.
    pub fn forward(&self, b: &BoundingBox) -> Result<BoundingBox> {
        self.map(b, false)
    }

    /// Maps a box from transformed back to original-image coordinates.
    pub fn inverse(&self, b: &BoundingBox) -> Result<BoundingBox> {
        self.map(b, true)
    }

    fn map(&self, b: &BoundingBox, inverse: bool) -> Result<BoundingBox> {
        let [x0, y0, x1, y1] = b.corners();
        let (w, h) = (self.image_width, self.image_height);
        match self.kind {
            TransformKind::Identity => Ok(*b),
            TransformKind::HorizontalFlip => BoundingBox::new(w - x1, y0, w - x0, y1),
            TransformKind::VerticalFlip => BoundingBox::new(x0, h - y1, x1, h - y0),
            // Inverse divides rather than multiplying by the reciprocal so the
            // round trip stays within one rounding step.
            TransformKind::Scale if inverse => {
                let f = self.scale_factor;
                BoundingBox::new(x0 / f, y0 / f, x1 / f, y1 / f)
            }
            TransformKind::Scale => b.scaled(self.scale_factor),
        }
    }

    /// Clamps `b` to the transformed canvas. Fails when nothing of the box
    /// remains inside.
    fn clamp_to_canvas(&self, b: &BoundingBox) -> Result<BoundingBox> {
        let (cw, ch) = self.canvas();
        let outside = Error::OutsideCanvas {
            width: cw,
            height: ch,
        };
        let [x0, y0, x1, y1] = b.corners();
        let clamp_axis = |lo: f64, hi: f64, ext: f64| -> Option<(f64, f64)> {
            if lo > ext || hi < 0.0 {
                return None;
            }
            let (clo, chi) = (lo.clamp(0.0, ext), hi.clamp(0.0, ext));
            if hi > lo && chi <= clo {
                return None;
            }
            Some((clo, chi))
        };
        let (Some((nx0, nx1)), Some((ny0, ny1))) = (clamp_axis(x0, x1, cw), clamp_axis(y0, y1, ch))
        else {
            return Err(outside);
        };
        BoundingBox::new(nx0, ny0, nx1, ny1)
    }
}

impl fmt::Display for TtaTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TransformKind::Identity => f.write_str("identity"),
            TransformKind::HorizontalFlip => f.write_str("hflip"),
            TransformKind::VerticalFlip => f.write_str("vflip"),
            TransformKind::Scale => write!(f, "scale:{}", self.scale_factor),
        }
    }
}

/// A transform spec without image dimensions, as written in configuration:
/// `identity`, `hflip`, `vflip` or `scale:<factor>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSpec {
    pub kind: TransformKind,
    pub scale_factor: f64,
}

impl TransformSpec {
    pub fn bind(&self, width: f64, height: f64) -> Result<TtaTransform> {
        TtaTransform::new(self.kind, self.scale_factor, width, height)
    }
}

impl FromStr for TransformSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = |kind, scale_factor| Ok(TransformSpec { kind, scale_factor });
        match s.trim() {
            "identity" => spec(TransformKind::Identity, 1.0),
            "hflip" | "horizontal_flip" => spec(TransformKind::HorizontalFlip, 1.0),
            "vflip" | "vertical_flip" => spec(TransformKind::VerticalFlip, 1.0),
            other => {
                let factor = other
                    .strip_prefix("scale:")
                    .and_then(|f| f.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("unknown TTA transform '{other}'"))
                    })?;
                if !(factor.is_finite() && factor > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "scale factor must be positive, got {factor}"
                    )));
                }
                spec(TransformKind::Scale, factor)
            }
        }
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TransformKind::Identity => f.write_str("identity"),
            TransformKind::HorizontalFlip => f.write_str("hflip"),
            TransformKind::VerticalFlip => f.write_str("vflip"),
            TransformKind::Scale => write!(f, "scale:{}", self.scale_factor),
        }
    }
}

/// Expresses a detection made on a transformed view in original-image
/// coordinates. Boxes spilling over the transformed canvas are clamped first.
pub fn invert_transform(d: &Detection, t: &TtaTransform) -> Result<Detection> {
    let clamped = t.clamp_to_canvas(&d.bbox)?;
    Ok(Detection {
        bbox: t.inverse(&clamped)?,
        ..d.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMode {
    /// Concatenate back-mapped detections and keep NMS winners unchanged.
    #[default]
    Nms,
    /// Same clusters as `Nms`, but each survivor's box becomes the
    /// score-weighted mean of its cluster; the score stays the maximum.
    WeightedAverage,
}

impl FromStr for FusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nms" => Ok(FusionMode::Nms),
            "average" | "weighted_average" => Ok(FusionMode::WeightedAverage),
            other => Err(Error::InvalidArgument(format!(
                "unknown fusion mode '{other}'"
            ))),
        }
    }
}

/// Fuses the detections of several test-time views of one image.
pub fn tta_fuse(
    per_transform: &[(TtaTransform, Vec<Detection>)],
    iou_threshold: f64,
    mode: FusionMode,
) -> Result<Vec<Detection>> {
    let mut all = Vec::new();
    for (t, dets) in per_transform {
        for d in dets {
            all.push(invert_transform(d, t)?);
        }
    }
    match mode {
        FusionMode::Nms => nms(&all, iou_threshold),
        FusionMode::WeightedAverage => {
            let clusters = nms_clusters(&all, iou_threshold)?;
            clusters
                .into_iter()
                .map(|c| {
                    let total: f64 = c.members.iter().map(|&i| all[i].score).sum();
                    let keep = &all[c.keep];
                    if total <= 0.0 {
                        return Ok(keep.clone());
                    }
                    let mut acc = [0.0; 4];
                    for &i in &c.members {
                        let w = all[i].score / total;
                        for (a, v) in acc.iter_mut().zip(all[i].bbox.corners()) {
                            *a += w * v;
                        }
                    }
                    Ok(Detection {
                        bbox: BoundingBox::new(acc[0], acc[1], acc[2], acc[3])?,
                        ..keep.clone()
                    })
                })
                .collect()
        }
    }
}
