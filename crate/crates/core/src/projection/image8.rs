use image::GrayImage;

use super::{DepthMap, ProjectionError};
use crate::scalar::Real;

const FLOOR: f64 = 64.0;
const CEIL: f64 = 255.0;

/// Encodes a depth map as 8-bit grayscale: background stays 0 and nonzero intensities
/// are min-max scaled onto `64..=255`, rounding half up. A map whose nonzero pixels all
/// share one value maps them to 255.
pub fn to_image8<T: Real>(map: &DepthMap<T>) -> Result<GrayImage, ProjectionError> {
    let nonzero = map.data().iter().filter(|&&v| v > T::zero()).map(|v| v.as_f64());
    let (lo, hi) = nonzero.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo > hi {
        return Err(ProjectionError::EmptyMap);
    }
    let range = hi - lo;
    let pixels = map
        .data()
        .iter()
        .map(|&v| {
            if !(v > T::zero()) {
                0
            } else if range == 0.0 {
                CEIL as u8
            } else {
                let scaled = FLOOR + (CEIL - FLOOR) * (v.as_f64() - lo) / range;
                (scaled + 0.5).floor().clamp(FLOOR, CEIL) as u8
            }
        })
        .collect();
    Ok(GrayImage::from_raw(map.width() as u32, map.height() as u32, pixels)
        .expect("buffer length matches dimensions"))
}
