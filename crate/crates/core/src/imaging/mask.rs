use std::sync::OnceLock;

use super::BinaryMask;
use crate::error::{Error, Result};

/// Axis-aligned ellipse given by its center and FULL axis lengths, in face-raster coordinates.
///
/// Face-raster coordinates are one-based: the pixel at column `i`, row `j` has its center at
/// `(i + 1, j + 1)`. Under this convention the 3-point ellipse centered at `(64.5, 45.5)` is
/// symmetric about the middle of a 128-pixel row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseSpec {
    pub cx: f64,
    pub cy: f64,
    pub h_axis: f64,
    pub v_axis: f64,
}

impl EllipseSpec {
    pub const THREE_POINT: EllipseSpec = EllipseSpec {
        cx: 64.5,
        cy: 45.5,
        h_axis: 120.0,
        v_axis: 160.0,
    };

    pub const TWO_POINT: EllipseSpec = EllipseSpec {
        cx: 65.5,
        cy: 50.5,
        h_axis: 128.0,
        v_axis: 236.0,
    };

    #[inline]
    fn contains(&self, x: f64, y: f64) -> bool {
        let u = (x - self.cx) / (self.h_axis / 2.0);
        let v = (y - self.cy) / (self.v_axis / 2.0);
        u * u + v * v <= 1.0
    }
}

/// Rasterizes `ellipse` by pixel-center inclusion; the ellipse is clipped by the raster.
pub fn elliptical_mask(width: usize, height: usize, ellipse: &EllipseSpec) -> Result<BinaryMask> {
    if !(ellipse.h_axis > 0.0 && ellipse.v_axis > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ellipse axes must be positive, got {} x {}",
            ellipse.h_axis, ellipse.v_axis
        )));
    }
    Ok(BinaryMask::from_fn(width, height, |i, j| {
        ellipse.contains(i as f64 + 1.0, j as f64 + 1.0)
    }))
}

/// Resizes a mask with corner-aligned bilinear interpolation and keeps pixels whose
/// interpolated value is at least 0.5.
pub fn resize_mask(mask: &BinaryMask, width: usize, height: usize) -> BinaryMask {
    let (sw, sh) = (mask.width(), mask.height());
    let ratio = |from: usize, to: usize| {
        if to > 1 {
            (from - 1) as f64 / (to - 1) as f64
        } else {
            0.0
        }
    };
    let (rx, ry) = (ratio(sw, width), ratio(sh, height));
    let value = |x: usize, y: usize| if mask.is_unmasked(x, y) { 1.0 } else { 0.0 };
    BinaryMask::from_fn(width, height, |i, j| {
        let sx = (i as f64 * rx).min((sw - 1) as f64);
        let sy = (j as f64 * ry).min((sh - 1) as f64);
        let (x0, y0) = (sx.floor() as usize, sy.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(sw - 1), (y0 + 1).min(sh - 1));
        let (fx, fy) = (sx - x0 as f64, sy - y0 as f64);
        let top = value(x0, y0) * (1.0 - fx) + value(x1, y0) * fx;
        let bottom = value(x0, y1) * (1.0 - fx) + value(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy >= 0.5
    })
}

/// The 128x128 mask of the 3-point normalization.
pub fn three_point_mask() -> &'static BinaryMask {
    static MASK: OnceLock<BinaryMask> = OnceLock::new();
    MASK.get_or_init(|| {
        elliptical_mask(128, 128, &EllipseSpec::THREE_POINT).expect("positive axes")
    })
}

/// The 130x150 mask applied to the 2-point crop before resizing.
pub fn two_point_crop_mask() -> &'static BinaryMask {
    static MASK: OnceLock<BinaryMask> = OnceLock::new();
    MASK.get_or_init(|| elliptical_mask(130, 150, &EllipseSpec::TWO_POINT).expect("positive axes"))
}

/// The 2-point crop mask resized to 128x128.
pub fn two_point_mask() -> &'static BinaryMask {
    static MASK: OnceLock<BinaryMask> = OnceLock::new();
    MASK.get_or_init(|| resize_mask(two_point_crop_mask(), 128, 128))
}
