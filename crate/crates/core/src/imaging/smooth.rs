use super::GrayImage;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sampled one-dimensional Gaussian of odd length `window`, normalized to unit sum.
pub fn gaussian_kernel<T: Real>(sigma: T, window: usize) -> Result<Vec<T>> {
    if window.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "Gaussian window must be odd, got {window}"
        )));
    }
    if !(sigma > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "Gaussian sigma must be positive, got {sigma}"
        )));
    }
    let half = (window / 2) as isize;
    let two_var = T::lit(2.0) * sigma * sigma;
    let raw: Vec<T> = (-half..=half)
        .map(|d| {
            let d = T::lit(d as f64);
            (-(d * d) / two_var).exp()
        })
        .collect();
    let sum = raw.iter().fold(T::zero(), |acc, &v| acc + v);
    Ok(raw.into_iter().map(|v| v / sum).collect())
}

/// Separable Gaussian smoothing with edge replication at the borders.
pub fn gaussian_denoise<T: Real>(
    img: &GrayImage<T>,
    sigma: T,
    window: usize,
) -> Result<GrayImage<T>> {
    let kernel = gaussian_kernel(sigma, window)?;
    let half = (window / 2) as isize;
    let (w, h) = (img.width(), img.height());

    let mut rows = GrayImage::filled(w, h, T::zero());
    for y in 0..h {
        for x in 0..w {
            let acc = kernel
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (k, &weight)| {
                    acc + weight * img.get_clamped(x as isize + k as isize - half, y as isize)
                });
            rows.set(x, y, acc);
        }
    }
    let mut out = GrayImage::filled(w, h, T::zero());
    for y in 0..h {
        for x in 0..w {
            let acc = kernel
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (k, &weight)| {
                    acc + weight * rows.get_clamped(x as isize, y as isize + k as isize - half)
                });
            out.set(x, y, acc);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_is_unchanged() {
        let img = GrayImage::<f64>::filled(9, 7, 100.0);
        let out = gaussian_denoise(&img, 0.5, 5).unwrap();
        for &v in out.pixels() {
            assert!((v - 100.0).abs() < 1e-12);
        }
    }

    #[test]
    fn impulse_reproduces_the_normalized_2d_kernel() {
        let mut img = GrayImage::<f64>::filled(11, 11, 0.0);
        img.set(5, 5, 1.0);
        let out = gaussian_denoise(&img, 0.5, 5).unwrap();

        // Direct 2-D evaluation, independent of the separable path.
        let mut direct = [[0.0f64; 5]; 5];
        let mut sum = 0.0;
        for (j, row) in direct.iter_mut().enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                let (dx, dy) = (i as f64 - 2.0, j as f64 - 2.0);
                *v = (-(dx * dx + dy * dy) / (2.0 * 0.25)).exp();
                sum += *v;
            }
        }
        for y in 0..11 {
            for x in 0..11 {
                let (dx, dy) = (x as isize - 5, y as isize - 5);
                let expected = if dx.abs() <= 2 && dy.abs() <= 2 {
                    direct[(dy + 2) as usize][(dx + 2) as usize] / sum
                } else {
                    0.0
                };
                assert!((out.get(x, y) - expected).abs() < 1e-15, "({x},{y})");
            }
        }
    }

    #[test]
    fn corner_to_center_ratio() {
        let k = gaussian_kernel(0.5f64, 5).unwrap();
        let ratio = (k[0] * k[0]) / (k[2] * k[2]);
        assert!((ratio / (-16.0f64).exp() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_windows() {
        assert!(gaussian_kernel(0.5f64, 4).is_err());
        assert!(gaussian_kernel(0.0f64, 5).is_err());
    }
}
