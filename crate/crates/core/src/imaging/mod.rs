//! Grayscale rasters, masks and landmark-driven face normalization.

mod equalize;
mod mask;
mod normalize;
pub mod pgm;
mod resample;
mod smooth;

pub use equalize::{histogram_equalize, quantize};
pub use mask::{
    elliptical_mask, resize_mask, three_point_mask, two_point_crop_mask, two_point_mask,
    EllipseSpec,
};
pub use normalize::{
    normalize, normalize_three_point, normalize_two_point, three_point_alignment,
    two_point_alignment, Alignment, NormalizationMethod, NormalizeParams, NormalizedFace,
    FACE_SIZE,
};
pub use resample::{
    bicubic_weight, resize_bicubic, rotate_about, sample_bicubic, warp_bicubic, Affine,
};
pub use smooth::{gaussian_denoise, gaussian_kernel};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major grayscale raster. Values are 0..=255 on disk and arbitrary reals in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T> {
    width: usize,
    height: usize,
    pixels: Vec<T>,
}

impl<T: Real> GrayImage<T> {
    pub fn new(width: usize, height: usize, pixels: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "empty image {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width > 0 && height > 0, "empty image");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "empty image");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<T> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.pixels[y * self.width + x] = value;
    }

    /// Pixel at `(x, y)` with coordinates clamped into the raster (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[cy * self.width + cx]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn cast<U: Real>(&self) -> GrayImage<U> {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| U::lit(v.as_f64())).collect(),
        }
    }

    pub fn same_shape(&self, mask: &BinaryMask) -> bool {
        self.width == mask.width() && self.height == mask.height()
    }
}

/// Row-major boolean raster; `true` marks an unmasked (inside-the-face) pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} mask needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn is_unmasked(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn unmasked_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Zeroes every masked-out pixel of `image`.
    pub fn apply<T: Real>(&self, image: &GrayImage<T>) -> Result<GrayImage<T>> {
        if !image.same_shape(self) {
            return Err(Error::DimensionMismatch(format!(
                "mask {}x{} vs image {}x{}",
                self.width,
                self.height,
                image.width(),
                image.height()
            )));
        }
        let pixels = image
            .pixels()
            .iter()
            .zip(&self.bits)
            .map(|(&v, &keep)| if keep { v } else { T::zero() })
            .collect();
        GrayImage::new(self.width, self.height, pixels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(&self, other: &Self) -> Self {
        let half = T::lit(0.5);
        Self::new((self.x + other.x) * half, (self.y + other.y) * half)
    }

    pub fn offset(&self, dx: T, dy: T) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

/// Manually located facial landmarks in input-image coordinates.
///
/// Coordinates put the origin on the center of the top-left pixel, x to the right and y
/// down. `left_eye` is the eye on the image's left-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Landmarks<T> {
    pub left_eye: Point<T>,
    pub right_eye: Point<T>,
    pub chin: Option<Point<T>>,
}

impl<T: Real> Landmarks<T> {
    pub fn two_point(left_eye: Point<T>, right_eye: Point<T>) -> Self {
        Self {
            left_eye,
            right_eye,
            chin: None,
        }
    }

    pub fn three_point(left_eye: Point<T>, right_eye: Point<T>, chin: Point<T>) -> Self {
        Self {
            left_eye,
            right_eye,
            chin: Some(chin),
        }
    }

    pub fn interocular_distance(&self) -> T {
        self.left_eye.distance(&self.right_eye)
    }

    /// Checks distinct eyes and that every point lies inside a `width`x`height` raster.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if !(self.interocular_distance() > T::zero()) {
            return Err(Error::InvalidArgument(
                "eye landmarks coincide (zero interocular distance)".into(),
            ));
        }
        let inside = |p: &Point<T>| {
            p.x.is_finite()
                && p.y.is_finite()
                && p.x >= T::zero()
                && p.y >= T::zero()
                && p.x <= T::count(width - 1)
                && p.y <= T::count(height - 1)
        };
        let named = [
            ("left eye", Some(self.left_eye)),
            ("right eye", Some(self.right_eye)),
            ("chin", self.chin),
        ];
        for (name, p) in named {
            if let Some(p) = p {
                if !inside(&p) {
                    return Err(Error::InvalidArgument(format!(
                        "{name} ({}, {}) outside {width}x{height} image",
                        p.x, p.y
                    )));
                }
            }
        }
        Ok(())
    }
}
