//! Sliding-window selection of Log-Gabor magnitude features and feature-vector assembly.
//!
//! Locations are searched on the finest scale of each orientation only and then reused for
//! every coarser scale of that orientation.

use std::fmt;

use crate::error::{Error, Result};
use crate::filterbank::{filter_face, FilterBank, FilterParams, MagnitudeStack};
use crate::imaging::{BinaryMask, NormalizedFace};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowSpec {
    /// Side of the square search window in pixels.
    pub size: usize,
    /// Distance between consecutive window origins in pixels.
    pub step: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { size: 8, step: 6 }
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if self.step == 0 || self.step > self.size {
            return Err(Error::InvalidArgument(format!(
                "window step must be in 1..={}, got {}",
                self.size, self.step
            )));
        }
        Ok(())
    }

    /// Window origins along an axis of `len` pixels; only windows that fit are scanned.
    pub fn origins(&self, len: usize) -> impl Iterator<Item = usize> {
        let last = len.checked_sub(self.size);
        (0..=last.unwrap_or(0))
            .step_by(self.step)
            .take(if last.is_some() { usize::MAX } else { 0 })
    }
}

/// How feature locations are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Selection {
    pub window: WindowSpec,
    /// Search only unmasked pixels; windows without any unmasked pixel yield nothing.
    pub use_mask: bool,
    /// Keep a location once per orientation even when overlapping windows pick it again.
    pub dedup: bool,
}

impl Default for Selection {
    fn default() -> Self {
        Self {
            window: WindowSpec::default(),
            use_mask: true,
            dedup: false,
        }
    }
}

/// Fingerprint of everything that fixes a feature vector's length and meaning.
///
/// Vectors, models and galleries are only comparable when their tags are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayoutTag(pub u64);

impl fmt::Display for LayoutTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    fn bytes(&mut self, bytes: &[u8]) -> &mut Self {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self
    }

    fn num(&mut self, v: u64) -> &mut Self {
        self.bytes(&v.to_le_bytes())
    }

    fn mask(&mut self, mask: &BinaryMask) -> &mut Self {
        self.num(mask.width() as u64).num(mask.height() as u64);
        let packed: Vec<u8> = mask.bits().iter().map(|&b| u8::from(b)).collect();
        self.bytes(&packed)
    }
}

impl LayoutTag {
    pub fn log_gabor(selection: &Selection, params: &FilterParams, mask: &BinaryMask) -> Self {
        let mut h = Fnv1a::new();
        h.bytes(b"log-gabor/v1")
            .num(selection.window.size as u64)
            .num(selection.window.step as u64)
            .num(u64::from(selection.use_mask))
            .num(u64::from(selection.dedup))
            .num(params.num_orients as u64)
            .num(params.num_scales as u64)
            .num(params.lambda0.to_bits())
            .num(params.scale_factor.to_bits())
            .num(params.sigma_on_f.to_bits())
            .num(params.theta_scale.to_bits())
            .mask(mask);
        LayoutTag(h.0)
    }

    pub fn grayscale(mask: &BinaryMask) -> Self {
        let mut h = Fnv1a::new();
        h.bytes(b"grayscale/v1").mask(mask);
        LayoutTag(h.0)
    }
}

/// Selected `(x, y)` pixel coordinates per orientation, in window scan order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureLocations {
    per_orientation: Vec<Vec<(usize, usize)>>,
    layout: LayoutTag,
}

impl FeatureLocations {
    pub fn per_orientation(&self) -> &[Vec<(usize, usize)>] {
        &self.per_orientation
    }

    pub fn layout(&self) -> LayoutTag {
        self.layout
    }

    pub fn counts(&self) -> Vec<usize> {
        self.per_orientation.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.per_orientation.iter().map(Vec::len).sum()
    }
}

/// Best pixel of one window: largest value, then nearest to the window center, then first in
/// row-major order.
fn window_argmax<T: Real>(
    raster: &[T],
    width: usize,
    mask: Option<&BinaryMask>,
    ox: usize,
    oy: usize,
    size: usize,
) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), T, usize)> = None;
    for y in oy..oy + size {
        for x in ox..ox + size {
            if mask.is_some_and(|m| !m.is_unmasked(x, y)) {
                continue;
            }
            let value = raster[y * width + x];
            // Doubled offsets keep the half-pixel window center integral.
            let dx = (2 * (x - ox)) as isize - (size as isize - 1);
            let dy = (2 * (y - oy)) as isize - (size as isize - 1);
            let dist = (dx * dx + dy * dy) as usize;
            let better = match best {
                None => true,
                Some((_, v, d)) => value > v || (value == v && dist < d),
            };
            if better {
                best = Some(((x, y), value, dist));
            }
        }
    }
    best.map(|(loc, _, _)| loc)
}

pub fn select_locations<T: Real>(
    stack: &MagnitudeStack<T>,
    selection: &Selection,
    params: &FilterParams,
) -> Result<FeatureLocations> {
    selection.window.validate()?;
    let (w, h) = (stack.width(), stack.height());
    let size = selection.window.size;
    if size > w || size > h {
        return Err(Error::InvalidArgument(format!(
            "{size}x{size} window does not fit a {w}x{h} raster"
        )));
    }
    if stack.num_orients() != params.num_orients || stack.num_scales() != params.num_scales {
        return Err(Error::DimensionMismatch(format!(
            "stack has {}x{} rasters, parameters describe {}x{}",
            stack.num_orients(),
            stack.num_scales(),
            params.num_orients,
            params.num_scales
        )));
    }
    let mask = selection.use_mask.then(|| stack.mask());
    let per_orientation = (0..stack.num_orients())
        .map(|o| {
            let finest = stack.raster(o, 0);
            let mut picked = Vec::new();
            for oy in selection.window.origins(h) {
                for ox in selection.window.origins(w) {
                    if let Some(loc) = window_argmax(finest, w, mask, ox, oy, size) {
                        if !(selection.dedup && picked.contains(&loc)) {
                            picked.push(loc);
                        }
                    }
                }
            }
            picked
        })
        .collect();
    Ok(FeatureLocations {
        per_orientation,
        layout: LayoutTag::log_gabor(selection, params, stack.mask()),
    })
}

/// A feature vector and the layout it was assembled under.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    values: Vec<T>,
    layout: LayoutTag,
}

impl<T: Real> FeatureVector<T> {
    pub fn new(values: Vec<T>, layout: LayoutTag) -> Self {
        Self { values, layout }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn layout(&self) -> LayoutTag {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Values ordered by orientation, then location, then scale (finest first).
pub fn extract_features<T: Real>(
    stack: &MagnitudeStack<T>,
    locations: &FeatureLocations,
) -> Result<FeatureVector<T>> {
    if locations.per_orientation.len() != stack.num_orients() {
        return Err(Error::DimensionMismatch(format!(
            "locations for {} orientations, stack has {}",
            locations.per_orientation.len(),
            stack.num_orients()
        )));
    }
    let (w, h) = (stack.width(), stack.height());
    let mut values = Vec::with_capacity(locations.total() * stack.num_scales());
    for (o, locs) in locations.per_orientation.iter().enumerate() {
        for &(x, y) in locs {
            if x >= w || y >= h {
                return Err(Error::InvalidArgument(format!(
                    "location ({x}, {y}) outside {w}x{h} raster"
                )));
            }
            for s in 0..stack.num_scales() {
                values.push(stack.raster(o, s)[y * w + x]);
            }
        }
    }
    Ok(FeatureVector::new(values, locations.layout))
}

/// Unmasked pixel intensities in row-major order: the classic eigenface input.
pub fn grayscale_features<T: Real>(face: &NormalizedFace<T>) -> FeatureVector<T> {
    let values = face
        .image()
        .pixels()
        .iter()
        .zip(face.mask().bits())
        .filter(|(_, &keep)| keep)
        .map(|(&v, _)| v)
        .collect();
    FeatureVector::new(values, LayoutTag::grayscale(face.mask()))
}

/// Turns normalized faces into feature vectors.
#[derive(Debug, Clone)]
pub enum FeatureExtractor<T: Real> {
    LogGabor {
        bank: FilterBank<T>,
        selection: Selection,
    },
    Grayscale,
}

impl<T: Real> FeatureExtractor<T> {
    pub fn log_gabor(
        width: usize,
        height: usize,
        params: &FilterParams,
        selection: Selection,
    ) -> Result<Self> {
        selection.window.validate()?;
        Ok(FeatureExtractor::LogGabor {
            bank: FilterBank::new(width, height, params)?,
            selection,
        })
    }

    pub fn layout(&self, mask: &BinaryMask) -> LayoutTag {
        match self {
            FeatureExtractor::LogGabor { bank, selection } => {
                LayoutTag::log_gabor(selection, bank.params(), mask)
            }
            FeatureExtractor::Grayscale => LayoutTag::grayscale(mask),
        }
    }

    pub fn extract(&self, face: &NormalizedFace<T>) -> Result<FeatureVector<T>> {
        match self {
            FeatureExtractor::LogGabor { bank, selection } => {
                let stack = filter_face(face, bank)?;
                let locations = select_locations(&stack, selection, bank.params())?;
                extract_features(&stack, &locations)
            }
            FeatureExtractor::Grayscale => Ok(grayscale_features(face)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stack_from(
        width: usize,
        height: usize,
        finest: Vec<f64>,
        mask: BinaryMask,
    ) -> MagnitudeStack<f64> {
        let coarse: Vec<f64> = finest.iter().map(|v| v * 10.0).collect();
        MagnitudeStack::new(width, height, 1, 2, vec![finest, coarse], mask).unwrap()
    }

    fn params(no: usize, ns: usize) -> FilterParams {
        FilterParams {
            num_orients: no,
            num_scales: ns,
            ..FilterParams::default()
        }
    }

    #[test]
    fn window_origins_fit_inside() {
        let w = WindowSpec { size: 8, step: 6 };
        assert_eq!(w.origins(16).collect::<Vec<_>>(), [0, 6]);
        assert_eq!(w.origins(128).count(), 21);
        assert_eq!(w.origins(7).count(), 0);
        assert_eq!(WindowSpec { size: 4, step: 4 }.origins(128).count(), 32);
        assert!(WindowSpec { size: 4, step: 5 }.validate().is_err());
        assert!(WindowSpec { size: 4, step: 0 }.validate().is_err());
    }

    #[test]
    fn flat_window_picks_the_pixel_nearest_the_center() {
        let stack = stack_from(8, 8, vec![1.0; 64], BinaryMask::full(8, 8));
        let sel = Selection {
            use_mask: false,
            ..Selection::default()
        };
        let locs = select_locations(&stack, &sel, &params(1, 2)).unwrap();
        // Center is (3.5, 3.5); (3,3), (4,3), (3,4), (4,4) tie; row-major picks (3,3).
        assert_eq!(locs.per_orientation()[0], [(3, 3)]);
    }

    #[test]
    fn sixteen_pixel_raster_has_four_windows() {
        let values: Vec<f64> = (0..256).map(|i| ((i * 37) % 101) as f64).collect();
        let stack = stack_from(16, 16, values, BinaryMask::full(16, 16));
        let locs = select_locations(&stack, &Selection::default(), &params(1, 2)).unwrap();
        assert_eq!(locs.counts(), [4]);
    }

    #[test]
    fn scales_reuse_finest_scale_locations() {
        let values: Vec<f64> = (0..256).map(|i| ((i * 37) % 101) as f64).collect();
        let stack = stack_from(16, 16, values.clone(), BinaryMask::full(16, 16));
        let locs = select_locations(&stack, &Selection::default(), &params(1, 2)).unwrap();
        let fv = extract_features(&stack, &locs).unwrap();
        assert_eq!(fv.len(), 8);
        for (k, &(x, y)) in locs.per_orientation()[0].iter().enumerate() {
            assert_eq!(fv.values()[2 * k], values[y * 16 + x]);
            assert_eq!(fv.values()[2 * k + 1], 10.0 * values[y * 16 + x]);
        }
    }

    #[test]
    fn masked_windows_without_pixels_are_skipped() {
        let mask = BinaryMask::from_fn(16, 16, |x, y| x < 6 && y < 6);
        let values: Vec<f64> = (0..256).map(|i| i as f64).collect();
        let stack = stack_from(16, 16, values, mask.clone());
        let locs = select_locations(&stack, &Selection::default(), &params(1, 2)).unwrap();
        assert_eq!(locs.counts(), [1]);
        assert_eq!(locs.per_orientation()[0][0], (5, 5));
        let unmasked = Selection {
            use_mask: false,
            ..Selection::default()
        };
        let all = select_locations(&stack, &unmasked, &params(1, 2)).unwrap();
        assert_eq!(all.counts(), [4]);
    }

    #[test]
    fn dedup_removes_repeats() {
        // A single bright pixel in the overlap of all four windows.
        let mut values = vec![0.0; 256];
        values[7 * 16 + 7] = 9.0;
        let stack = stack_from(16, 16, values, BinaryMask::full(16, 16));
        let keep = select_locations(&stack, &Selection::default(), &params(1, 2)).unwrap();
        assert_eq!(keep.per_orientation()[0], [(7, 7); 4]);
        let dedup = Selection {
            dedup: true,
            ..Selection::default()
        };
        let once = select_locations(&stack, &dedup, &params(1, 2)).unwrap();
        assert_eq!(once.per_orientation()[0], [(7, 7)]);
        assert_ne!(keep.layout(), once.layout());
    }

    #[test]
    fn error_paths() {
        let stack = stack_from(8, 8, vec![0.0; 64], BinaryMask::full(8, 8));
        let big = Selection {
            window: WindowSpec { size: 9, step: 3 },
            ..Selection::default()
        };
        assert!(select_locations(&stack, &big, &params(1, 2)).is_err());
        assert!(select_locations(&stack, &Selection::default(), &params(2, 2)).is_err());
        let locs = FeatureLocations {
            per_orientation: vec![vec![(8, 0)]],
            layout: LayoutTag(0),
        };
        assert!(extract_features(&stack, &locs).is_err());
    }

    #[test]
    fn layout_tags_separate_configurations() {
        let mask = BinaryMask::full(4, 4);
        let p = FilterParams::default();
        let base = LayoutTag::log_gabor(&Selection::default(), &p, &mask);
        assert_eq!(base, LayoutTag::log_gabor(&Selection::default(), &p, &mask));
        let five = FilterParams { num_scales: 5, ..p };
        assert_ne!(
            base,
            LayoutTag::log_gabor(&Selection::default(), &five, &mask)
        );
        assert_ne!(base, LayoutTag::grayscale(&mask));
        let other = BinaryMask::from_fn(4, 4, |x, _| x > 0);
        assert_ne!(
            base,
            LayoutTag::log_gabor(&Selection::default(), &p, &other)
        );
    }
}
