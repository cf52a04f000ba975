use image::{GrayImage, ImageBuffer, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Gray16Image = ImageBuffer<Luma<u16>, Vec<u16>>;

pub const DEFAULT_WINDOW_LO: f64 = 1950.0;
pub const DEFAULT_WINDOW_HI: f64 = 2205.0;

/// Raw-intensity window mapped linearly onto `0..=255`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowingSpec {
    lo: f64,
    hi: f64,
}

impl Default for WindowingSpec {
    fn default() -> Self {
        WindowingSpec {
            lo: DEFAULT_WINDOW_LO,
            hi: DEFAULT_WINDOW_HI,
        }
    }
}

impl WindowingSpec {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "window bounds must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(WindowingSpec { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// `round(255 · (clamp(v, lo, hi) − lo) / (hi − lo))`
    pub fn apply(&self, v: f64) -> u8 {
        // Multiplying first keeps integer inputs exact up to the one division.
        (255.0 * (v.clamp(self.lo, self.hi) - self.lo) / (self.hi - self.lo)).round() as u8
    }

    /// Inverse on the 8-bit grid: the raw intensity that maps to `v`.
    pub fn to_raw(&self, v: u8) -> f64 {
        self.lo + f64::from(v) * (self.hi - self.lo) / 255.0
    }

    /// Lookup table over the full 16-bit raw range.
    pub fn lut(&self) -> Vec<u8> {
        (0..=u16::MAX).map(|v| self.apply(f64::from(v))).collect()
    }
}

pub fn window_to_8bit(pixels: &Gray16Image, spec: &WindowingSpec) -> GrayImage {
    let lut = spec.lut();
    let data = pixels.as_raw().iter().map(|&v| lut[v as usize]).collect();
    GrayImage::from_raw(pixels.width(), pixels.height(), data)
        .expect("buffer length matches dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_window_examples() {
        let w = WindowingSpec::default();
        assert_eq!(w.apply(1950.0), 0);
        assert_eq!(w.apply(2205.0), 255);
        assert_eq!(w.apply(2300.0), 255);
        assert_eq!(w.apply(0.0), 0);
        assert_eq!(w.apply(2000.0), 50);
    }

    #[test]
    fn rejects_empty_window() {
        assert!(WindowingSpec::new(10.0, 10.0).is_err());
        assert!(WindowingSpec::new(f64::NAN, 10.0).is_err());
    }

    #[test]
    fn image_is_mapped_per_pixel() {
        let raw = Gray16Image::from_raw(2, 2, vec![0, 1950, 2000, 65535]).unwrap();
        let out = window_to_8bit(&raw, &WindowingSpec::default());
        assert_eq!(out.dimensions(), (2, 2));
        assert_eq!(out.as_raw(), &vec![0, 0, 50, 255]);
    }

    proptest! {
        #[test]
        fn monotone(lo in 0.0..30000.0f64, span in 1.0..30000.0f64, a in 0u16.., b in 0u16..) {
            let w = WindowingSpec::new(lo, lo + span).unwrap();
            let (a, b) = (a.min(b), a.max(b));
            prop_assert!(w.apply(f64::from(a)) <= w.apply(f64::from(b)));
        }

        #[test]
        fn idempotent_on_reexpressed_values(lo in 0.0..30000.0f64, span in 1.0..30000.0f64, v in 0u8..) {
            let w = WindowingSpec::new(lo, lo + span).unwrap();
            prop_assert_eq!(w.apply(w.to_raw(v)), v);
        }
    }
}
