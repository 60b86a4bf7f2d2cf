//! Log-Gabor filter bank in the frequency domain and magnitude filtering.
//!
//! A filter's transfer function at polar frequency `(f, θ)` is
//!
//! ```text
//! G(f, θ) = exp(-(ln(f / f0))² / (2 ln(σ_f)²)) · exp(-d(θ, θ0)² / (2 σ_θ²))
//! ```
//!
//! with `f0 = 1 / λ`, `λ = λ0 · s_λ^(n_s - 1)`, `θ0 = π (n_o - 1) / N_o`,
//! `σ_θ = (π / N_o) / s_θ` and `d` the wrapped angular difference in `(-π, π]`.
//! Frequencies are in cycles per pixel: DFT bin `(u, v)` of a `W`x`H` raster sits at
//! `(u / W, v / H)` wrapped into `(-0.5, 0.5]`, with `θ = atan2(f_y, f_x)`.

mod fft2;

use std::f64::consts::PI;

use num_complex::Complex;

pub use fft2::Fft2;

use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, GrayImage, NormalizedFace};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    /// Wavelength of the finest scale, in pixels.
    pub lambda0: f64,
    /// Ratio between wavelengths of successive scales.
    pub scale_factor: f64,
    /// Radial bandwidth ratio `k / f0`.
    pub sigma_on_f: f64,
    pub num_scales: usize,
    pub num_orients: usize,
    /// Ratio of orientation spacing to the angular Gaussian's standard deviation.
    pub theta_scale: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            lambda0: 5.0,
            scale_factor: 1.6,
            sigma_on_f: 0.75,
            num_scales: 4,
            num_orients: 6,
            theta_scale: 1.5,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda0", self.lambda0),
            ("scale_factor", self.scale_factor),
            ("sigma_on_f", self.sigma_on_f),
            ("theta_scale", self.theta_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.sigma_on_f == 1.0 {
            return Err(Error::InvalidArgument(
                "sigma_on_f = 1 gives a zero radial bandwidth".into(),
            ));
        }
        if self.num_scales == 0 || self.num_orients == 0 {
            return Err(Error::InvalidArgument(
                "need at least one scale and one orientation".into(),
            ));
        }
        Ok(())
    }

    /// Wavelength in pixels of scale `n_s` (one-based).
    pub fn wavelength(&self, n_s: usize) -> f64 {
        self.lambda0 * self.scale_factor.powi(n_s as i32 - 1)
    }

    pub fn center_frequency(&self, n_s: usize) -> f64 {
        1.0 / self.wavelength(n_s)
    }

    /// Orientation angle of orientation `n_o` (one-based).
    pub fn orientation(&self, n_o: usize) -> f64 {
        PI * (n_o as f64 - 1.0) / self.num_orients as f64
    }

    pub fn sigma_theta(&self) -> f64 {
        PI / self.num_orients as f64 / self.theta_scale
    }

    pub fn filter_count(&self) -> usize {
        self.num_scales * self.num_orients
    }
}

/// Normalized frequency of DFT bin `k` on an axis of length `n`, wrapped into `(-0.5, 0.5]`.
#[inline]
pub fn bin_frequency(k: usize, n: usize) -> f64 {
    if 2 * k <= n {
        k as f64 / n as f64
    } else {
        (k as f64 - n as f64) / n as f64
    }
}

/// Transfer value at frequency `(fx, fy)` for scale `n_s`, orientation `n_o`.
pub fn transfer_value(fx: f64, fy: f64, n_s: usize, n_o: usize, p: &FilterParams) -> f64 {
    let f = fx.hypot(fy);
    if f == 0.0 {
        return 0.0;
    }
    let log_ratio = (f / p.center_frequency(n_s)).ln();
    let log_sigma = p.sigma_on_f.ln();
    let radial = (-(log_ratio * log_ratio) / (2.0 * log_sigma * log_sigma)).exp();
    let delta = fy.atan2(fx) - p.orientation(n_o);
    let d = delta.sin().atan2(delta.cos());
    let sigma_theta = p.sigma_theta();
    radial * (-(d * d) / (2.0 * sigma_theta * sigma_theta)).exp()
}

/// One Log-Gabor transfer function sampled on the DFT grid of a `width`x`height` raster.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyFilter<T> {
    width: usize,
    height: usize,
    scale_index: usize,
    orient_index: usize,
    transfer: Vec<T>,
}

impl<T: Real> FrequencyFilter<T> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// One-based scale index `n_s`.
    pub fn scale_index(&self) -> usize {
        self.scale_index
    }

    /// One-based orientation index `n_o`.
    pub fn orient_index(&self) -> usize {
        self.orient_index
    }

    /// Transfer values in DFT order (row `v`, column `u`).
    pub fn transfer(&self) -> &[T] {
        &self.transfer
    }

    pub fn at(&self, u: usize, v: usize) -> T {
        self.transfer[v * self.width + u]
    }

    /// Transfer function with DC moved to the raster center, for display.
    pub fn centered(&self) -> GrayImage<T> {
        let (w, h) = (self.width, self.height);
        GrayImage::from_fn(w, h, |x, y| {
            self.at((x + w - w / 2) % w, (y + h - h / 2) % h)
        })
    }
}

pub fn build_filter<T: Real>(
    width: usize,
    height: usize,
    n_s: usize,
    n_o: usize,
    p: &FilterParams,
) -> Result<FrequencyFilter<T>> {
    p.validate()?;
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "empty filter grid {width}x{height}"
        )));
    }
    if !(1..=p.num_scales).contains(&n_s) || !(1..=p.num_orients).contains(&n_o) {
        return Err(Error::InvalidArgument(format!(
            "filter index (n_s={n_s}, n_o={n_o}) outside 1..={} x 1..={}",
            p.num_scales, p.num_orients
        )));
    }
    let mut transfer = Vec::with_capacity(width * height);
    for v in 0..height {
        let fy = bin_frequency(v, height);
        for u in 0..width {
            transfer.push(T::lit(transfer_value(
                bin_frequency(u, width),
                fy,
                n_s,
                n_o,
                p,
            )));
        }
    }
    Ok(FrequencyFilter {
        width,
        height,
        scale_index: n_s,
        orient_index: n_o,
        transfer,
    })
}

/// All `N_o · N_s` filters for one raster size, ordered orientation-major, scale-minor.
#[derive(Debug, Clone)]
pub struct FilterBank<T: Real> {
    params: FilterParams,
    filters: Vec<FrequencyFilter<T>>,
    fft: Fft2<T>,
}

impl<T: Real> FilterBank<T> {
    pub fn new(width: usize, height: usize, params: &FilterParams) -> Result<Self> {
        let mut filters = Vec::with_capacity(params.filter_count());
        for n_o in 1..=params.num_orients {
            for n_s in 1..=params.num_scales {
                filters.push(build_filter(width, height, n_s, n_o, params)?);
            }
        }
        Ok(Self {
            params: *params,
            filters,
            fft: Fft2::new(width, height),
        })
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    pub fn width(&self) -> usize {
        self.fft.width()
    }

    pub fn height(&self) -> usize {
        self.fft.height()
    }

    pub fn filters(&self) -> &[FrequencyFilter<T>] {
        &self.filters
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    /// Filter for zero-based orientation `orient` and scale `scale`.
    pub fn get(&self, orient: usize, scale: usize) -> &FrequencyFilter<T> {
        &self.filters[orient * self.params.num_scales + scale]
    }

    pub fn fft(&self) -> &Fft2<T> {
        &self.fft
    }
}

pub fn build_bank<T: Real>(
    width: usize,
    height: usize,
    params: &FilterParams,
) -> Result<FilterBank<T>> {
    FilterBank::new(width, height, params)
}

/// Masked Log-Gabor magnitude rasters, one per filter, in bank order.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeStack<T> {
    width: usize,
    height: usize,
    num_orients: usize,
    num_scales: usize,
    rasters: Vec<Vec<T>>,
    mask: BinaryMask,
}

impl<T: Real> MagnitudeStack<T> {
    /// Assembles a stack from rasters in orientation-major order, zeroing masked-out entries.
    pub fn new(
        width: usize,
        height: usize,
        num_orients: usize,
        num_scales: usize,
        mut rasters: Vec<Vec<T>>,
        mask: BinaryMask,
    ) -> Result<Self> {
        if num_orients == 0 || num_scales == 0 || rasters.len() != num_orients * num_scales {
            return Err(Error::DimensionMismatch(format!(
                "{} rasters for {num_orients} orientations x {num_scales} scales",
                rasters.len()
            )));
        }
        if mask.width() != width || mask.height() != height {
            return Err(Error::DimensionMismatch(
                "mask does not match the rasters".into(),
            ));
        }
        for raster in &mut rasters {
            if raster.len() != width * height {
                return Err(Error::DimensionMismatch(format!(
                    "raster of {} values for {width}x{height}",
                    raster.len()
                )));
            }
            for (v, &keep) in raster.iter_mut().zip(mask.bits()) {
                if !keep {
                    *v = T::zero();
                }
            }
        }
        Ok(Self {
            width,
            height,
            num_orients,
            num_scales,
            rasters,
            mask,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_orients(&self) -> usize {
        self.num_orients
    }

    pub fn num_scales(&self) -> usize {
        self.num_scales
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    /// Raster for zero-based orientation and scale.
    pub fn raster(&self, orient: usize, scale: usize) -> &[T] {
        &self.rasters[orient * self.num_scales + scale]
    }

    pub fn rasters(&self) -> &[Vec<T>] {
        &self.rasters
    }
}

/// `|IFFT2(G · FFT2(I))| · mask` for every filter `G` of the bank.
///
/// Masked-out pixels of `image` are zeroed before the forward transform.
pub fn filter_image<T: Real>(
    image: &GrayImage<T>,
    mask: &BinaryMask,
    bank: &FilterBank<T>,
) -> Result<MagnitudeStack<T>> {
    let (w, h) = (image.width(), image.height());
    if w != bank.width() || h != bank.height() {
        return Err(Error::DimensionMismatch(format!(
            "image {w}x{h} vs filter bank {}x{}",
            bank.width(),
            bank.height()
        )));
    }
    let masked = mask.apply(image)?;
    let mut spectrum: Vec<Complex<T>> = masked
        .pixels()
        .iter()
        .map(|&v| Complex::new(v, T::zero()))
        .collect();
    bank.fft().forward(&mut spectrum);

    let rasters = bank
        .filters()
        .iter()
        .map(|filter| {
            let mut response: Vec<Complex<T>> = spectrum
                .iter()
                .zip(filter.transfer())
                .map(|(&s, &g)| s * g)
                .collect();
            bank.fft().inverse(&mut response);
            response.iter().map(|c| c.norm()).collect()
        })
        .collect();
    let p = bank.params();
    MagnitudeStack::new(w, h, p.num_orients, p.num_scales, rasters, mask.clone())
}

pub fn filter_face<T: Real>(
    face: &NormalizedFace<T>,
    bank: &FilterBank<T>,
) -> Result<MagnitudeStack<T>> {
    filter_image(face.image(), face.mask(), bank)
}
