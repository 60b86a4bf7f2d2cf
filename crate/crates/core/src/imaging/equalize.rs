use super::{BinaryMask, GrayImage};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rounds every pixel to the nearest integer level and clamps it into `0..levels`.
pub fn quantize<T: Real>(img: &GrayImage<T>, levels: usize) -> GrayImage<T> {
    let top = T::count(levels.saturating_sub(1));
    img.map(|v| v.round().max(T::zero()).min(top))
}

/// Histogram equalization computed over the unmasked pixels only.
///
/// An unmasked pixel at level `v` maps to `floor(cdf(v) * (levels - 1))`, where `cdf(v)` is
/// the fraction of unmasked pixels at levels `<= v`. Masked pixels come out as 0. Input
/// values at unmasked pixels must already be integers in `0..levels` (see [`quantize`]).
pub fn histogram_equalize<T: Real>(
    img: &GrayImage<T>,
    mask: &BinaryMask,
    levels: usize,
) -> Result<GrayImage<T>> {
    if levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 levels, got {levels}"
        )));
    }
    if !img.same_shape(mask) {
        return Err(Error::DimensionMismatch(format!(
            "mask {}x{} vs image {}x{}",
            mask.width(),
            mask.height(),
            img.width(),
            img.height()
        )));
    }
    let mut histogram = vec![0usize; levels];
    let mut level_of = vec![0usize; img.pixels().len()];
    for (idx, (&v, &keep)) in img.pixels().iter().zip(mask.bits()).enumerate() {
        if !keep {
            continue;
        }
        let level = v.as_f64();
        if level.fract() != 0.0 || level < 0.0 || level >= levels as f64 {
            return Err(Error::InvalidArgument(format!(
                "pixel value {level} is not a level in 0..{levels}"
            )));
        }
        histogram[level as usize] += 1;
        level_of[idx] = level as usize;
    }
    let total: usize = histogram.iter().sum();
    if total == 0 {
        return Err(Error::Degenerate("every pixel is masked".into()));
    }
    let mut mapping = Vec::with_capacity(levels);
    let mut cumulative = 0usize;
    for &count in &histogram {
        cumulative += count;
        mapping.push(T::count(cumulative * (levels - 1) / total));
    }
    let pixels = level_of
        .iter()
        .zip(mask.bits())
        .map(|(&level, &keep)| if keep { mapping[level] } else { T::zero() })
        .collect();
    GrayImage::new(img.width(), img.height(), pixels)
}
