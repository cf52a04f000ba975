use image::GrayImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::BoundingBox;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentOp {
    HorizontalFlip,
    VerticalFlip,
    /// Multiply intensities by a gain.
    IntensityScale(f64),
    /// Add an offset to intensities.
    IntensityShift(f64),
}

/// Applies one augmentation to an 8-bit image and its boxes. Flips move the
/// boxes with the pixels; intensity ops clamp to `0..=255` and leave boxes
/// untouched.
pub fn augment(
    image: &GrayImage,
    boxes: &[BoundingBox],
    op: AugmentOp,
) -> Result<(GrayImage, Vec<BoundingBox>)> {
    let (w, h) = (f64::from(image.width()), f64::from(image.height()));
    match op {
        AugmentOp::HorizontalFlip => {
            let boxes = boxes
                .iter()
                .map(|b| BoundingBox::new(w - b.x_max(), b.y_min(), w - b.x_min(), b.y_max()))
                .collect::<Result<_>>()?;
            Ok((image::imageops::flip_horizontal(image), boxes))
        }
        AugmentOp::VerticalFlip => {
            let boxes = boxes
                .iter()
                .map(|b| BoundingBox::new(b.x_min(), h - b.y_max(), b.x_max(), h - b.y_min()))
                .collect::<Result<_>>()?;
            Ok((image::imageops::flip_vertical(image), boxes))
        }
        AugmentOp::IntensityScale(gain) => Ok((map_intensity(image, |v| v * gain), boxes.to_vec())),
        AugmentOp::IntensityShift(offset) => {
            Ok((map_intensity(image, |v| v + offset), boxes.to_vec()))
        }
    }
}

fn map_intensity(image: &GrayImage, f: impl Fn(f64) -> f64) -> GrayImage {
    let mut out = image.clone();
    for p in out.pixels_mut() {
        p.0[0] = f(f64::from(p.0[0])).round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Random augmentation recipe; each op fires independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentPolicy {
    pub horizontal_flip_prob: f64,
    pub vertical_flip_prob: f64,
    pub intensity_scale_range: (f64, f64),
    pub intensity_shift_range: (f64, f64),
}

impl Default for AugmentPolicy {
    fn default() -> Self {
        AugmentPolicy {
            horizontal_flip_prob: 0.5,
            vertical_flip_prob: 0.5,
            intensity_scale_range: (0.9, 1.1),
            intensity_shift_range: (-10.0, 10.0),
        }
    }
}

impl AugmentPolicy {
    /// The ops drawn for `seed`, in application order.
    pub fn sample(&self, seed: u64) -> Vec<AugmentOp> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ops = Vec::new();
        if rng.gen_bool(self.horizontal_flip_prob.clamp(0.0, 1.0)) {
            ops.push(AugmentOp::HorizontalFlip);
        }
        if rng.gen_bool(self.vertical_flip_prob.clamp(0.0, 1.0)) {
            ops.push(AugmentOp::VerticalFlip);
        }
        let (lo, hi) = self.intensity_scale_range;
        if lo < hi {
            ops.push(AugmentOp::IntensityScale(rng.gen_range(lo..hi)));
        }
        let (lo, hi) = self.intensity_shift_range;
        if lo < hi {
            ops.push(AugmentOp::IntensityShift(rng.gen_range(lo..hi)));
        }
        ops
    }
}

pub fn random_augment(
    image: &GrayImage,
    boxes: &[BoundingBox],
    policy: &AugmentPolicy,
    seed: u64,
) -> Result<(GrayImage, Vec<BoundingBox>)> {
    let mut state = (image.clone(), boxes.to_vec());
    for op in policy.sample(seed) {
        state = augment(&state.0, &state.1, op)?;
    }
    Ok(state)
}
