use std::fmt;
use std::str::FromStr;

use super::mask::{three_point_mask, two_point_crop_mask, two_point_mask};
use super::{
    gaussian_denoise, histogram_equalize, quantize, resize_bicubic, warp_bicubic, Affine,
    BinaryMask, GrayImage, Landmarks, Point,
};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Side length of every normalized face raster.
pub const FACE_SIZE: usize = 128;

// 2-point crop: 130x150 window, eyes 70 px apart on the line y = 45, centered horizontally.
const CROP_WIDTH: usize = 130;
const CROP_HEIGHT: usize = 150;
const TWO_POINT_EYE_DISTANCE: f64 = 70.0;
const TWO_POINT_EYE_MID: (f64, f64) = (65.5, 45.0);

// 3-point placement in one-based face coordinates.
const THREE_POINT_EYE_MID: (f64, f64) = (64.5, 45.5);
const THREE_POINT_CHIN_Y: f64 = 127.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormalizationMethod {
    /// Eye centers plus chin tip.
    ThreePoint,
    /// Eye centers only.
    TwoPoint,
}

impl NormalizationMethod {
    /// The fixed 128x128 mask every face of this method carries.
    pub fn mask(self) -> &'static BinaryMask {
        match self {
            NormalizationMethod::ThreePoint => three_point_mask(),
            NormalizationMethod::TwoPoint => two_point_mask(),
        }
    }

    pub fn expected_unmasked(self) -> usize {
        self.mask().unmasked_count()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NormalizationMethod::ThreePoint => "3pt",
            NormalizationMethod::TwoPoint => "2pt",
        }
    }
}

impl fmt::Display for NormalizationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormalizationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "3pt" | "3" | "three" | "three-point" | "threepoint" => Ok(Self::ThreePoint),
            "2pt" | "2" | "two" | "two-point" | "twopoint" => Ok(Self::TwoPoint),
            other => Err(Error::Config(format!("unknown normalization '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizeParams {
    pub denoise_sigma: f64,
    pub denoise_window: usize,
    pub levels: usize,
}

impl Default for NormalizeParams {
    fn default() -> Self {
        Self {
            denoise_sigma: 0.5,
            denoise_window: 5,
            levels: 256,
        }
    }
}

/// A masked, equalized 128x128 face.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFace<T> {
    image: GrayImage<T>,
    mask: BinaryMask,
    method: NormalizationMethod,
}

impl<T: Real> NormalizedFace<T> {
    /// Wraps an already normalized raster, checking the method's mask invariants.
    pub fn new(image: GrayImage<T>, mask: BinaryMask, method: NormalizationMethod) -> Result<Self> {
        if image.width() != FACE_SIZE || image.height() != FACE_SIZE || !image.same_shape(&mask) {
            return Err(Error::DimensionMismatch(format!(
                "normalized face must be {FACE_SIZE}x{FACE_SIZE}, got image {}x{} and mask {}x{}",
                image.width(),
                image.height(),
                mask.width(),
                mask.height()
            )));
        }
        let unmasked = mask.unmasked_count();
        if unmasked == 0 || unmasked != method.expected_unmasked() {
            return Err(Error::Invariant(format!(
                "{method} face has {unmasked} unmasked pixels, expected {}",
                method.expected_unmasked()
            )));
        }
        let leaked = image
            .pixels()
            .iter()
            .zip(mask.bits())
            .any(|(&v, &keep)| !keep && v != T::zero());
        if leaked {
            return Err(Error::Invariant("masked-out pixel is not zero".into()));
        }
        Ok(Self {
            image,
            mask,
            method,
        })
    }

    pub fn image(&self) -> &GrayImage<T> {
        &self.image
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn method(&self) -> NormalizationMethod {
        self.method
    }
}

/// Geometric part of a normalization: derotation angle, scale and the map from output pixel
/// indices back to input coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment<T> {
    /// Angle of the eye line in the input (radians, y down).
    pub angle: T,
    /// Output pixels per input pixel.
    pub scale: T,
    pub out_to_in: Affine<T>,
}

fn align<T: Real>(eye_mid: Point<T>, angle: T, scale: T, target: (f64, f64)) -> Alignment<T> {
    // index -> one-based coordinate -> offset from target -> unscale -> rotate -> input
    let out_to_in = Affine::translation(eye_mid.x, eye_mid.y)
        .after(&Affine::rotation(angle))
        .after(&Affine::scaling(scale.recip(), scale.recip()))
        .after(&Affine::translation(
            T::lit(1.0 - target.0),
            T::lit(1.0 - target.1),
        ));
    Alignment {
        angle,
        scale,
        out_to_in,
    }
}

fn eye_line<T: Real>(lm: &Landmarks<T>) -> Result<(Point<T>, T, T)> {
    let iod = lm.interocular_distance();
    if !(iod > T::zero()) {
        return Err(Error::InvalidArgument("zero interocular distance".into()));
    }
    let angle = (lm.right_eye.y - lm.left_eye.y).atan2(lm.right_eye.x - lm.left_eye.x);
    Ok((lm.left_eye.midpoint(&lm.right_eye), angle, iod))
}

/// Eye midpoint goes to (64.5, 45.5); the midpoint-to-chin distance becomes 82 px.
pub fn three_point_alignment<T: Real>(lm: &Landmarks<T>) -> Result<Alignment<T>> {
    let chin = lm.chin.ok_or_else(|| {
        Error::InvalidArgument("3-point normalization needs a chin landmark".into())
    })?;
    let (mid, angle, _) = eye_line(lm)?;
    let reach = mid.distance(&chin);
    if !(reach > T::zero()) {
        return Err(Error::InvalidArgument(
            "chin coincides with the eye midpoint".into(),
        ));
    }
    let scale = T::lit(THREE_POINT_CHIN_Y - THREE_POINT_EYE_MID.1) / reach;
    Ok(align(mid, angle, scale, THREE_POINT_EYE_MID))
}

/// Interocular distance becomes 70 px, eye midpoint goes to (65.5, 45) of the 130x150 crop.
pub fn two_point_alignment<T: Real>(lm: &Landmarks<T>) -> Result<Alignment<T>> {
    let (mid, angle, iod) = eye_line(lm)?;
    let scale = T::lit(TWO_POINT_EYE_DISTANCE) / iod;
    Ok(align(mid, angle, scale, TWO_POINT_EYE_MID))
}

fn finish<T: Real>(
    raster: &GrayImage<T>,
    method: NormalizationMethod,
    params: &NormalizeParams,
) -> Result<NormalizedFace<T>> {
    let mask = method.mask();
    let masked = mask.apply(&quantize(raster, params.levels))?;
    let equalized = histogram_equalize(&masked, mask, params.levels)?;
    NormalizedFace::new(equalized, mask.clone(), method)
}

/// Denoise, derotate, crop and resize in one bicubic warp, then mask and equalize.
pub fn normalize_three_point<T: Real>(
    img: &GrayImage<T>,
    lm: &Landmarks<T>,
    params: &NormalizeParams,
) -> Result<NormalizedFace<T>> {
    let alignment = three_point_alignment(lm)?;
    lm.validate(img.width(), img.height())?;
    let smooth = gaussian_denoise(img, T::lit(params.denoise_sigma), params.denoise_window)?;
    let face = warp_bicubic(&smooth, FACE_SIZE, FACE_SIZE, &alignment.out_to_in);
    finish(&face, NormalizationMethod::ThreePoint, params)
}

/// Denoise, derotate and scale into the 130x150 crop, mask it, resize to 128x128, then
/// re-mask with the resized mask and equalize.
pub fn normalize_two_point<T: Real>(
    img: &GrayImage<T>,
    lm: &Landmarks<T>,
    params: &NormalizeParams,
) -> Result<NormalizedFace<T>> {
    let alignment = two_point_alignment(lm)?;
    lm.validate(img.width(), img.height())?;
    let smooth = gaussian_denoise(img, T::lit(params.denoise_sigma), params.denoise_window)?;
    let crop = warp_bicubic(&smooth, CROP_WIDTH, CROP_HEIGHT, &alignment.out_to_in);
    let crop = two_point_crop_mask().apply(&crop)?;
    let face = resize_bicubic(&crop, FACE_SIZE, FACE_SIZE);
    finish(&face, NormalizationMethod::TwoPoint, params)
}

pub fn normalize<T: Real>(
    img: &GrayImage<T>,
    lm: &Landmarks<T>,
    method: NormalizationMethod,
    params: &NormalizeParams,
) -> Result<NormalizedFace<T>> {
    match method {
        NormalizationMethod::ThreePoint => normalize_three_point(img, lm, params),
        NormalizationMethod::TwoPoint => normalize_two_point(img, lm, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::rotate_about;

    fn texture(width: usize, height: usize) -> GrayImage<f64> {
        GrayImage::from_fn(width, height, |x, y| {
            let (x, y) = (x as f64, y as f64);
            128.0
                + 45.0 * (x / 9.0).sin() * (y / 13.0).cos()
                + 30.0 * ((x + 2.0 * y) / 17.0).sin()
                + 20.0 * ((x - y) / 23.0).cos()
        })
    }

    fn landmarks() -> Landmarks<f64> {
        Landmarks::three_point(
            Point::new(120.0, 120.0),
            Point::new(180.0, 120.0),
            Point::new(150.0, 195.0),
        )
    }

    fn mean_abs_diff(a: &NormalizedFace<f64>, b: &NormalizedFace<f64>) -> f64 {
        let mask = a.mask();
        let (mut sum, mut n) = (0.0, 0usize);
        for (i, &keep) in mask.bits().iter().enumerate() {
            if keep {
                sum += (a.image().pixels()[i] - b.image().pixels()[i]).abs();
                n += 1;
            }
        }
        sum / n as f64
    }

    fn rotate_landmarks(lm: &Landmarks<f64>, angle: f64, c: Point<f64>) -> Landmarks<f64> {
        let m = Affine::translation(c.x, c.y)
            .after(&Affine::rotation(angle))
            .after(&Affine::translation(-c.x, -c.y));
        Landmarks {
            left_eye: m.apply(lm.left_eye),
            right_eye: m.apply(lm.right_eye),
            chin: lm.chin.map(|p| m.apply(p)),
        }
    }

    #[test]
    fn two_point_scale_factor() {
        let lm = Landmarks::two_point(Point::new(100.0, 120.0), Point::new(240.0, 120.0));
        let a = two_point_alignment(&lm).unwrap();
        assert_eq!(a.scale, 0.5);
        assert_eq!(a.angle, 0.0);
    }

    #[test]
    fn three_point_geometry_places_landmarks() {
        let lm = landmarks();
        let a = three_point_alignment(&lm).unwrap();
        let to_out = a.out_to_in.inverse().unwrap();
        let mid = to_out.apply(lm.left_eye.midpoint(&lm.right_eye));
        let chin = to_out.apply(lm.chin.unwrap());
        // Output indices are one less than the one-based face coordinates.
        assert!((mid.x - 63.5).abs() < 1e-9 && (mid.y - 44.5).abs() < 1e-9);
        assert!((chin.x - 63.5).abs() < 1e-9 && (chin.y - 126.5).abs() < 1e-9);
    }

    #[test]
    fn axis_aligned_eyes_need_no_rotation() {
        let img = texture(300, 300);
        let lm = landmarks();
        let a = three_point_alignment(&lm).unwrap();
        assert_eq!(a.angle, 0.0);
        let face = normalize_three_point(&img, &lm, &NormalizeParams::default()).unwrap();

        // Same pipeline with the rotation factor left out of the warp.
        let mid = lm.left_eye.midpoint(&lm.right_eye);
        let no_rotation = Affine::translation(mid.x, mid.y)
            .after(&Affine::scaling(1.0 / a.scale, 1.0 / a.scale))
            .after(&Affine::translation(1.0 - 64.5, 1.0 - 45.5));
        let smooth = gaussian_denoise(&img, 0.5, 5).unwrap();
        let warped = warp_bicubic(&smooth, 128, 128, &no_rotation);
        let reference = finish(
            &warped,
            NormalizationMethod::ThreePoint,
            &NormalizeParams::default(),
        )
        .unwrap();
        for (a, b) in face.image().pixels().iter().zip(reference.image().pixels()) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn faces_carry_the_method_mask() {
        let img = texture(300, 300);
        let lm = landmarks();
        let three = normalize_three_point(&img, &lm, &NormalizeParams::default()).unwrap();
        assert_eq!(
            three.mask().unmasked_count(),
            NormalizationMethod::ThreePoint.expected_unmasked()
        );
        let two = normalize_two_point(&img, &lm, &NormalizeParams::default()).unwrap();
        assert_eq!(
            two.mask().unmasked_count(),
            NormalizationMethod::TwoPoint.expected_unmasked()
        );
        for face in [&three, &two] {
            let max = face.image().pixels().iter().cloned().fold(0.0, f64::max);
            assert_eq!(max, 255.0);
        }
    }

    #[test]
    fn three_point_is_rotation_equivariant() {
        let img = texture(300, 300);
        let lm = landmarks();
        let c = Point::new(150.0, 150.0);
        let base = normalize_three_point(&img, &lm, &NormalizeParams::default()).unwrap();
        let angle = 10f64.to_radians();
        let rotated = normalize_three_point(
            &rotate_about(&img, angle, c),
            &rotate_landmarks(&lm, angle, c),
            &NormalizeParams::default(),
        )
        .unwrap();
        let diff = mean_abs_diff(&base, &rotated);
        assert!(diff <= 2.0, "mean abs difference {diff}");
    }

    #[test]
    fn two_point_is_rotation_equivariant() {
        let img = texture(300, 300);
        let lm = landmarks();
        let c = Point::new(150.0, 150.0);
        let base = normalize_two_point(&img, &lm, &NormalizeParams::default()).unwrap();
        for deg in [-15.0f64, -7.0, 4.0, 15.0] {
            let angle = deg.to_radians();
            let rotated = normalize_two_point(
                &rotate_about(&img, angle, c),
                &rotate_landmarks(&lm, angle, c),
                &NormalizeParams::default(),
            )
            .unwrap();
            let diff = mean_abs_diff(&base, &rotated);
            assert!(diff <= 2.0, "{deg} deg: mean abs difference {diff}");
        }
    }

    #[test]
    fn error_paths() {
        let img = texture(300, 300);
        let two = Landmarks::two_point(Point::new(120.0, 120.0), Point::new(180.0, 120.0));
        assert!(normalize_three_point(&img, &two, &NormalizeParams::default()).is_err());
        let same = Landmarks::two_point(Point::new(120.0, 120.0), Point::new(120.0, 120.0));
        assert!(normalize_two_point(&img, &same, &NormalizeParams::default()).is_err());
        let outside = Landmarks::two_point(Point::new(120.0, 120.0), Point::new(400.0, 120.0));
        assert!(normalize_two_point(&img, &outside, &NormalizeParams::default()).is_err());
        assert!("4pt".parse::<NormalizationMethod>().is_err());
        assert_eq!(
            "2pt".parse::<NormalizationMethod>().unwrap(),
            NormalizationMethod::TwoPoint
        );
    }

    #[test]
    fn works_in_single_precision() {
        let img: GrayImage<f32> = texture(300, 300).cast();
        let lm = Landmarks::two_point(Point::new(120.0f32, 120.0), Point::new(180.0, 121.0));
        let face = normalize_two_point(&img, &lm, &NormalizeParams::default()).unwrap();
        assert_eq!(
            face.mask().unmasked_count(),
            NormalizationMethod::TwoPoint.expected_unmasked()
        );
    }
}
