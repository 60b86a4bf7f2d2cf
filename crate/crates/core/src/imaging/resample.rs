use num_traits::Float;

use super::{GrayImage, Point};
use crate::scalar::Real;

/// Cubic convolution weight (Keys kernel, a = -0.5).
#[inline]
pub fn bicubic_weight<T: Real>(t: T) -> T {
    let a = T::lit(-0.5);
    let t = Float::abs(t);
    let (one, two) = (T::one(), T::lit(2.0));
    if t <= one {
        ((a + two) * t - (a + T::lit(3.0))) * t * t + one
    } else if t < two {
        ((a * t - T::lit(5.0) * a) * t + T::lit(8.0) * a) * t - T::lit(4.0) * a
    } else {
        T::zero()
    }
}

/// Bicubic sample at real coordinates `(x, y)` (pixel centers at integers), replicating edges.
pub fn sample_bicubic<T: Real>(img: &GrayImage<T>, x: T, y: T) -> T {
    let x0 = x.floor();
    let y0 = y.floor();
    let (fx, fy) = (x - x0, y - y0);
    let (ix, iy) = (x0.to_isize().unwrap_or(0), y0.to_isize().unwrap_or(0));
    let wx = [
        bicubic_weight(fx + T::one()),
        bicubic_weight(fx),
        bicubic_weight(T::one() - fx),
        bicubic_weight(T::lit(2.0) - fx),
    ];
    let wy = [
        bicubic_weight(fy + T::one()),
        bicubic_weight(fy),
        bicubic_weight(T::one() - fy),
        bicubic_weight(T::lit(2.0) - fy),
    ];
    let mut acc = T::zero();
    for (n, &wyn) in wy.iter().enumerate() {
        let yy = iy + n as isize - 1;
        let mut row = T::zero();
        for (m, &wxm) in wx.iter().enumerate() {
            row = row + wxm * img.get_clamped(ix + m as isize - 1, yy);
        }
        acc = acc + wyn * row;
    }
    acc
}

/// Affine map `p -> A p + t` on 2-D points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub tx: T,
    pub ty: T,
}

impl<T: Real> Affine<T> {
    pub fn identity() -> Self {
        Self::linear(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn linear(a: T, b: T, c: T, d: T) -> Self {
        Self {
            a,
            b,
            c,
            d,
            tx: T::zero(),
            ty: T::zero(),
        }
    }

    pub fn translation(tx: T, ty: T) -> Self {
        Self {
            tx,
            ty,
            ..Self::identity()
        }
    }

    /// Counter-clockwise rotation by `angle` in a y-down frame (i.e. clockwise on screen).
    pub fn rotation(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::linear(c, -s, s, c)
    }

    pub fn scaling(sx: T, sy: T) -> Self {
        Self::linear(sx, T::zero(), T::zero(), sy)
    }

    pub fn apply(&self, p: Point<T>) -> Point<T> {
        Point::new(
            self.a * p.x + self.b * p.y + self.tx,
            self.c * p.x + self.d * p.y + self.ty,
        )
    }

    /// `self ∘ first`: applies `first`, then `self`.
    pub fn after(&self, first: &Self) -> Self {
        Self {
            a: self.a * first.a + self.b * first.c,
            b: self.a * first.b + self.b * first.d,
            c: self.c * first.a + self.d * first.c,
            d: self.c * first.b + self.d * first.d,
            tx: self.a * first.tx + self.b * first.ty + self.tx,
            ty: self.c * first.tx + self.d * first.ty + self.ty,
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.a * self.d - self.b * self.c;
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let (a, b, c, d) = (self.d / det, -self.b / det, -self.c / det, self.a / det);
        Some(Self {
            a,
            b,
            c,
            d,
            tx: -(a * self.tx + b * self.ty),
            ty: -(c * self.tx + d * self.ty),
        })
    }
}

/// Resamples `img` onto a `width`x`height` grid; output pixel `(i, j)` reads the source at
/// `out_to_in(i, j)`.
pub fn warp_bicubic<T: Real>(
    img: &GrayImage<T>,
    width: usize,
    height: usize,
    out_to_in: &Affine<T>,
) -> GrayImage<T> {
    GrayImage::from_fn(width, height, |i, j| {
        let p = out_to_in.apply(Point::new(T::count(i), T::count(j)));
        sample_bicubic(img, p.x, p.y)
    })
}

/// Bicubic resize with corner-aligned grids: the first and last pixel centers of both rasters
/// coincide.
pub fn resize_bicubic<T: Real>(img: &GrayImage<T>, width: usize, height: usize) -> GrayImage<T> {
    let ratio = |from: usize, to: usize| {
        if to > 1 {
            T::count(from - 1) / T::count(to - 1)
        } else {
            T::zero()
        }
    };
    let map = Affine::scaling(ratio(img.width(), width), ratio(img.height(), height));
    warp_bicubic(img, width, height, &map)
}

/// Rotates image content by `angle` about `center`, keeping the raster size.
pub fn rotate_about<T: Real>(img: &GrayImage<T>, angle: T, center: Point<T>) -> GrayImage<T> {
    let out_to_in = Affine::translation(center.x, center.y)
        .after(&Affine::rotation(-angle))
        .after(&Affine::translation(-center.x, -center.y));
    warp_bicubic(img, img.width(), img.height(), &out_to_in)
}
