//! Synthetic face-like dataset: one band-limited texture per identity under a shared
//! face-shaped shading, with noisy, landmark-jittered probe copies.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::manifest::{Manifest, ManifestEntry};
use super::pipeline::Sample;
use crate::error::{Error, Result};
use crate::imaging::{pgm, GrayImage, Landmarks, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub identities: usize,
    pub width: usize,
    pub height: usize,
    /// Plane waves summed per texture.
    pub waves: usize,
    /// Radial frequency band in cycles per pixel.
    pub band: (f64, f64),
    pub noise_sigma: f64,
    /// Maximum landmark displacement of probes along each axis, in pixels.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            identities: 40,
            width: 200,
            height: 240,
            waves: 16,
            band: (1.0 / 20.0, 1.0 / 7.0),
            noise_sigma: 6.0,
            jitter: 2.0,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub gallery: Vec<Sample>,
    pub probes: Vec<Sample>,
}

struct Wave {
    amplitude: f64,
    fx: f64,
    fy: f64,
    phase: f64,
}

fn texture(p: &SynthParams, rng: &mut ChaCha8Rng) -> GrayImage<f64> {
    let waves: Vec<Wave> = (0..p.waves)
        .map(|_| {
            let radius = rng.random_range(p.band.0..p.band.1);
            let angle = rng.random_range(0.0..PI);
            Wave {
                amplitude: rng.random_range(0.5..1.0),
                fx: radius * angle.cos(),
                fy: radius * angle.sin(),
                phase: rng.random_range(0.0..2.0 * PI),
            }
        })
        .collect();
    let norm = (waves.iter().map(|w| w.amplitude * w.amplitude).sum::<f64>() / 2.0).sqrt();
    let (cx, cy) = (p.width as f64 / 2.0, p.height as f64 * 0.55);
    let (ax, ay) = (p.width as f64 * 0.42, p.height as f64 * 0.5);
    GrayImage::from_fn(p.width, p.height, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let t: f64 = waves
            .iter()
            .map(|w| w.amplitude * (2.0 * PI * (w.fx * xf + w.fy * yf) + w.phase).sin())
            .sum::<f64>()
            / norm;
        let r2 = ((xf - cx) / ax).powi(2) + ((yf - cy) / ay).powi(2);
        let shading = 60.0 * (-r2).exp();
        (90.0 + shading + 35.0 * t).round().clamp(0.0, 255.0)
    })
}

fn add_noise(img: &GrayImage<f64>, sigma: f64, rng: &mut ChaCha8Rng) -> Result<GrayImage<f64>> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let pixels = img
        .pixels()
        .iter()
        .map(|&v| (v + normal.sample(rng)).round().clamp(0.0, 255.0))
        .collect();
    GrayImage::new(img.width(), img.height(), pixels)
}

pub fn generate(p: &SynthParams) -> Result<SynthData> {
    if p.identities < 2 || p.width < 160 || p.height < 200 {
        return Err(Error::InvalidArgument(
            "synthetic data needs at least 2 identities and 160x200 images".into(),
        ));
    }
    if !(p.band.0 > 0.0 && p.band.0 < p.band.1 && p.band.1 <= 0.5) || p.waves == 0 {
        return Err(Error::InvalidArgument(
            "bad texture band or wave count".into(),
        ));
    }
    if !(p.noise_sigma >= 0.0 && p.jitter >= 0.0) {
        return Err(Error::InvalidArgument(
            "noise and jitter must be non-negative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (w, h) = (p.width as f64, p.height as f64);
    let mut gallery = Vec::with_capacity(p.identities);
    let mut probes = Vec::with_capacity(p.identities);
    for i in 0..p.identities {
        let label = format!("id{i:03}");
        let image = texture(p, &mut rng);
        let eye_y = 0.42 * h + rng.random_range(-3.0..3.0);
        let half = 0.15 * w + rng.random_range(-2.0..2.0);
        let mid_x = w / 2.0 + rng.random_range(-3.0..3.0);
        let landmarks = Landmarks::three_point(
            Point::new(mid_x - half, eye_y),
            Point::new(mid_x + half, eye_y),
            Point::new(mid_x, eye_y + 0.42 * h),
        );
        let noisy = if p.noise_sigma > 0.0 {
            add_noise(&image, p.noise_sigma, &mut rng)?
        } else {
            image.clone()
        };
        let mut jitter = || {
            if p.jitter > 0.0 {
                rng.random_range(-p.jitter..=p.jitter)
            } else {
                0.0
            }
        };
        let mut jittered = landmarks;
        jittered.left_eye = jittered.left_eye.offset(jitter(), jitter());
        jittered.right_eye = jittered.right_eye.offset(jitter(), jitter());
        jittered.chin = jittered.chin.map(|c| c.offset(jitter(), jitter()));
        gallery.push(Sample {
            label: label.clone(),
            image,
            landmarks,
        });
        probes.push(Sample {
            label,
            image: noisy,
            landmarks: jittered,
        });
    }
    Ok(SynthData { gallery, probes })
}

/// Writes every image as PGM under `dir` with a `manifest.csv` tagging sets `gallery` and `probe`.
pub fn write_dataset(data: &SynthData, dir: impl AsRef<Path>) -> Result<Manifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = Manifest::default();
    for (set, samples) in [("gallery", &data.gallery), ("probe", &data.probes)] {
        for s in samples {
            let name = format!("{}_{set}.pgm", s.label);
            let resolved = dir.join(&name);
            pgm::write(&resolved, &s.image)?;
            manifest.entries.push(ManifestEntry {
                path: name,
                resolved,
                label: s.label.clone(),
                set: set.into(),
                landmarks: s.landmarks,
            });
        }
    }
    manifest.write(dir.join("manifest.csv"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_well_formed() {
        let p = SynthParams {
            identities: 3,
            ..SynthParams::default()
        };
        let a = generate(&p).unwrap();
        assert_eq!(a, generate(&p).unwrap());
        assert_eq!(a.gallery.len(), 3);
        for (g, q) in a.gallery.iter().zip(&a.probes) {
            assert_eq!(g.label, q.label);
            assert!(g
                .image
                .pixels()
                .iter()
                .all(|v| v.fract() == 0.0 && (0.0..=255.0).contains(v)));
            g.landmarks.validate(p.width, p.height).unwrap();
            q.landmarks.validate(p.width, p.height).unwrap();
            assert!((g.landmarks.left_eye.x - q.landmarks.left_eye.x).abs() <= 2.0);
        }
        assert_ne!(a.gallery[0].image, a.gallery[1].image);
        let other = generate(&SynthParams { seed: 8, ..p }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn rejects_bad_params() {
        let base = SynthParams::default();
        for p in [
            SynthParams {
                identities: 1,
                ..base
            },
            SynthParams { width: 100, ..base },
            SynthParams {
                band: (0.2, 0.1),
                ..base
            },
            SynthParams {
                noise_sigma: -1.0,
                ..base
            },
        ] {
            assert!(generate(&p).is_err());
        }
    }
}
