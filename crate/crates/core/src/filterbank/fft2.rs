use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

/// Row-major 2-D FFT built from 1-D plans along rows and columns.
#[derive(Clone)]
pub struct Fft2<T: Real> {
    width: usize,
    height: usize,
    row_forward: Arc<dyn Fft<T>>,
    col_forward: Arc<dyn Fft<T>>,
    row_inverse: Arc<dyn Fft<T>>,
    col_inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Fft2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Fft2<T> {
    pub fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row_forward: planner.plan_fft_forward(width),
            col_forward: planner.plan_fft_forward(height),
            row_inverse: planner.plan_fft_inverse(width),
            col_inverse: planner.plan_fft_inverse(height),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.row_forward, &self.col_forward);
    }

    /// Inverse transform in place, scaled by `1 / (width * height)`.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.row_inverse, &self.col_inverse);
        let scale = T::one() / T::count(self.width * self.height);
        for v in data.iter_mut() {
            *v = *v * scale;
        }
    }

    fn run(&self, data: &mut [Complex<T>], rows: &Arc<dyn Fft<T>>, cols: &Arc<dyn Fft<T>>) {
        let (w, h) = (self.width, self.height);
        assert_eq!(data.len(), w * h, "buffer does not match the {w}x{h} plan");
        rows.process(data);
        let mut transposed = vec![Complex::new(T::zero(), T::zero()); w * h];
        for y in 0..h {
            for x in 0..w {
                transposed[x * h + y] = data[y * w + x];
            }
        }
        cols.process(&mut transposed);
        for x in 0..w {
            for y in 0..h {
                data[y * w + x] = transposed[x * h + y];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_recovers_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(w, h) in &[(32, 32), (17, 12), (128, 128)] {
            let fft = Fft2::<f64>::new(w, h);
            let input: Vec<Complex<f64>> = (0..w * h)
                .map(|_| Complex::new(rng.random_range(-100.0..100.0), 0.0))
                .collect();
            let mut data = input.clone();
            fft.forward(&mut data);
            fft.inverse(&mut data);
            let norm = input.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let err = input
                .iter()
                .zip(&data)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err / norm < 1e-10, "{w}x{h}: relative error {}", err / norm);
        }
    }

    #[test]
    fn matches_direct_dft_on_a_small_grid() {
        let (w, h) = (6, 4);
        let input: Vec<Complex<f64>> = (0..w * h)
            .map(|i| Complex::new((i * 7 % 11) as f64, 0.0))
            .collect();
        let mut data = input.clone();
        Fft2::new(w, h).forward(&mut data);
        for v in 0..h {
            for u in 0..w {
                let mut acc = Complex::new(0.0, 0.0);
                for y in 0..h {
                    for x in 0..w {
                        let phase = -2.0
                            * std::f64::consts::PI
                            * (u as f64 * x as f64 / w as f64 + v as f64 * y as f64 / h as f64);
                        acc += input[y * w + x] * Complex::from_polar(1.0, phase);
                    }
                }
                assert!((acc - data[v * w + u]).norm() < 1e-9);
            }
        }
    }
}
