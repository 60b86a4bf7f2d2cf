//! Whitened PCA over feature vectors and nearest-neighbour identification.
//!
//! Training follows the classic eigenface recipe: mean `m`, centered samples `d_j`,
//! covariance `C = (1/r) Σ d_j d_jᵀ`. When there are fewer samples than dimensions the
//! eigenvectors come from the `r`x`r` Gram matrix `(1/r) DᵀD` and are mapped back through
//! `D`. A sample projects to `Y = Λ^{-1/2} T (X - m)`, where the rows of `T` are the unit
//! eigenvectors sorted by decreasing eigenvalue.

use num_traits::Float;

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::features::{FeatureVector, LayoutTag};
use crate::scalar::Real;

/// Components with eigenvalue at or below this fraction of the largest are dropped.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Default number of whitened coordinates used for matching.
pub const DEFAULT_COMPONENTS: usize = 900;

/// Which symmetric matrix the eigenvectors are computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenRoute {
    /// Gram matrix when `r < N`, covariance otherwise.
    Auto,
    Gram,
    Covariance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceModel<T> {
    mean: Vec<T>,
    eigenvalues: Vec<T>,
    /// `q` rows of length `N`, row-major.
    basis: Vec<T>,
    whiteners: Vec<T>,
    trained_on: usize,
    layout: LayoutTag,
}

impl<T: Real> SubspaceModel<T> {
    /// Reassembles a model from stored parts and checks every structural invariant.
    pub fn from_parts(
        mean: Vec<T>,
        eigenvalues: Vec<T>,
        basis: Vec<T>,
        trained_on: usize,
        layout: LayoutTag,
    ) -> Result<Self> {
        let whiteners = eigenvalues.iter().map(|l| l.sqrt().recip()).collect();
        let model = Self {
            mean,
            eigenvalues,
            basis,
            whiteners,
            trained_on,
            layout,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, q) = (self.dim(), self.components());
        if n == 0 || q == 0 {
            return Err(Error::Invariant(
                "model has no dimensions or components".into(),
            ));
        }
        if self.basis.len() != n * q || self.whiteners.len() != q {
            return Err(Error::Invariant(format!(
                "basis holds {} values for {q} components of length {n}",
                self.basis.len()
            )));
        }
        if self.trained_on < 2 || q > self.trained_on.min(n) {
            return Err(Error::Invariant(format!(
                "{q} components from {} samples of length {n}",
                self.trained_on
            )));
        }
        let finite = |v: &[T]| v.iter().all(|x| x.is_finite());
        if !finite(&self.mean) || !finite(&self.basis) || !finite(&self.eigenvalues) {
            return Err(Error::Invariant("non-finite model entries".into()));
        }
        if self.eigenvalues.iter().any(|&l| !(l > T::zero())) {
            return Err(Error::Invariant("eigenvalues must be positive".into()));
        }
        if self.eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invariant(
                "eigenvalues must be sorted descending".into(),
            ));
        }
        let tol = T::lit(1e-8);
        for i in 0..q {
            for j in 0..=i {
                let dot = dot(self.basis_row(i), self.basis_row(j));
                let expected = if i == j { T::one() } else { T::zero() };
                if Float::abs(dot - expected) > tol {
                    return Err(Error::Invariant(format!(
                        "basis rows {i} and {j} are not orthonormal (dot = {dot})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &[T] {
        &self.basis
    }

    pub fn basis_row(&self, k: usize) -> &[T] {
        let n = self.dim();
        &self.basis[k * n..(k + 1) * n]
    }

    pub fn whiteners(&self) -> &[T] {
        &self.whiteners
    }

    pub fn trained_on(&self) -> usize {
        self.trained_on
    }

    pub fn layout(&self) -> LayoutTag {
        self.layout
    }

    /// Feature-vector length `N`.
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Number of retained components `q`.
    pub fn components(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `min(q, 900)`.
    pub fn default_components(&self) -> usize {
        self.components().min(DEFAULT_COMPONENTS)
    }

    /// Maps whitened coordinates back to feature space: `m + Tᵀ Λ^{1/2} y`.
    pub fn reconstruct(&self, y: &[T]) -> Vec<T> {
        let mut out = self.mean.clone();
        for (k, &yk) in y.iter().enumerate().take(self.components()) {
            let weight = yk * self.eigenvalues[k].sqrt();
            for (o, &b) in out.iter_mut().zip(self.basis_row(k)) {
                *o = *o + weight * b;
            }
        }
        out
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn train<T: Real>(vectors: &[FeatureVector<T>]) -> Result<SubspaceModel<T>> {
    train_with(vectors, EigenRoute::Auto)
}

pub fn train_with<T: Real>(
    vectors: &[FeatureVector<T>],
    route: EigenRoute,
) -> Result<SubspaceModel<T>> {
    let r = vectors.len();
    if r < 2 {
        return Err(Error::InvalidArgument(format!(
            "training needs at least 2 vectors, got {r}"
        )));
    }
    let layout = vectors[0].layout();
    let n = vectors[0].len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty feature vectors".into()));
    }
    for v in vectors {
        if v.layout() != layout {
            return Err(Error::LayoutMismatch {
                expected: layout.to_string(),
                found: v.layout().to_string(),
            });
        }
        if v.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "training vectors of lengths {n} and {}",
                v.len()
            )));
        }
    }

    let inv_r = T::one() / T::count(r);
    let mut mean = vec![T::zero(); n];
    for v in vectors {
        for (m, &x) in mean.iter_mut().zip(v.values()) {
            *m = *m + x;
        }
    }
    for m in &mut mean {
        *m = *m * inv_r;
    }
    let centered: Vec<Vec<T>> = vectors
        .iter()
        .map(|v| v.values().iter().zip(&mean).map(|(&x, &m)| x - m).collect())
        .collect();

    let use_gram = match route {
        EigenRoute::Auto => r < n,
        EigenRoute::Gram => true,
        EigenRoute::Covariance => false,
    };
    let (values, rows) = if use_gram {
        gram_eigenpairs(&centered, inv_r)?
    } else {
        covariance_eigenpairs(&centered, n, inv_r)?
    };

    let largest = values[0];
    if !(largest > T::zero()) {
        return Err(Error::Degenerate(
            "training vectors are identical (no positive eigenvalue)".into(),
        ));
    }
    let cutoff = largest * T::lit(RANK_TOLERANCE);
    let mut eigenvalues = Vec::new();
    let mut basis = Vec::new();
    for (value, mut row) in values.into_iter().zip(rows) {
        if value <= cutoff {
            break;
        }
        fix_sign(&mut row);
        eigenvalues.push(value);
        basis.extend(row);
    }
    SubspaceModel::from_parts(mean, eigenvalues, basis, r, layout)
}

/// Snapshot method: eigenpairs of `(1/r) DᵀD` lifted to unit vectors `D v / |D v|`.
fn gram_eigenpairs<T: Real>(centered: &[Vec<T>], inv_r: T) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let r = centered.len();
    let mut gram = vec![T::zero(); r * r];
    for i in 0..r {
        for j in 0..=i {
            let g = dot(&centered[i], &centered[j]) * inv_r;
            gram[i * r + j] = g;
            gram[j * r + i] = g;
        }
    }
    let eig = symmetric_eigen(&gram, r)?;
    let n = centered[0].len();
    let rows = eig
        .vectors
        .iter()
        .map(|coeffs| {
            let mut u = vec![T::zero(); n];
            for (&c, d) in coeffs.iter().zip(centered) {
                for (ui, &di) in u.iter_mut().zip(d) {
                    *ui = *ui + c * di;
                }
            }
            let norm = dot(&u, &u).sqrt();
            if norm > T::zero() {
                for ui in &mut u {
                    *ui = *ui / norm;
                }
            }
            u
        })
        .collect();
    Ok((eig.values, rows))
}

fn covariance_eigenpairs<T: Real>(
    centered: &[Vec<T>],
    n: usize,
    inv_r: T,
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let mut cov = vec![T::zero(); n * n];
    for d in centered {
        for i in 0..n {
            for j in 0..=i {
                cov[i * n + j] = cov[i * n + j] + d[i] * d[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let c = cov[i * n + j] * inv_r;
            cov[i * n + j] = c;
            cov[j * n + i] = c;
        }
    }
    let eig = symmetric_eigen(&cov, n)?;
    Ok((eig.values, eig.vectors))
}

/// Makes the entry of largest magnitude positive (the first one on ties).
fn fix_sign<T: Real>(row: &mut [T]) {
    let mut pivot = T::zero();
    let mut best = T::zero();
    for &v in row.iter() {
        if Float::abs(v) > best {
            best = Float::abs(v);
            pivot = v;
        }
    }
    if pivot < T::zero() {
        for v in row.iter_mut() {
            *v = -*v;
        }
    }
}

/// Whitened eigenfeatures of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection<T> {
    coords: Vec<T>,
    layout: LayoutTag,
}

impl<T: Real> Projection<T> {
    pub fn new(coords: Vec<T>, layout: LayoutTag) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invariant(
                "projection has non-finite coordinates".into(),
            ));
        }
        Ok(Self { coords, layout })
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn layout(&self) -> LayoutTag {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// First `n` whitened coordinates `Λ^{-1/2} T (x - m)`.
pub fn project<T: Real>(
    model: &SubspaceModel<T>,
    x: &FeatureVector<T>,
    n: usize,
) -> Result<Projection<T>> {
    if x.layout() != model.layout() {
        return Err(Error::LayoutMismatch {
            expected: model.layout().to_string(),
            found: x.layout().to_string(),
        });
    }
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a model of dimension {}",
            x.len(),
            model.dim()
        )));
    }
    if n > model.components() {
        return Err(Error::InvalidArgument(format!(
            "{n} components requested, model keeps {}",
            model.components()
        )));
    }
    let centered: Vec<T> = x
        .values()
        .iter()
        .zip(model.mean())
        .map(|(&v, &m)| v - m)
        .collect();
    let coords = (0..n)
        .map(|k| dot(model.basis_row(k), &centered) * model.whiteners()[k])
        .collect();
    Projection::new(coords, model.layout())
}

/// Negative cosine similarity, in `[-1, 1]`; smaller means more alike.
pub fn distance<T: Real>(a: &Projection<T>, b: &Projection<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "projections of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (
        dot(&a.coords, &a.coords).sqrt(),
        dot(&b.coords, &b.coords).sqrt(),
    );
    if !(na > T::zero() && nb > T::zero()) {
        return Err(Error::Degenerate("cosine distance of a zero vector".into()));
    }
    let cos = dot(&a.coords, &b.coords) / (na * nb);
    Ok(-cos.max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryEntry<T> {
    pub label: String,
    pub projection: Projection<T>,
}

/// Enrolled identities.
#[derive(Debug, Clone, PartialEq)]
pub struct Gallery<T> {
    entries: Vec<GalleryEntry<T>>,
    layout: LayoutTag,
}

impl<T: Real> Gallery<T> {
    pub fn new(layout: LayoutTag) -> Self {
        Self {
            entries: Vec::new(),
            layout,
        }
    }

    pub fn enroll(&mut self, label: impl Into<String>, projection: Projection<T>) -> Result<()> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::InvalidArgument(
                "gallery labels must be non-empty".into(),
            ));
        }
        if projection.layout() != self.layout {
            return Err(Error::LayoutMismatch {
                expected: self.layout.to_string(),
                found: projection.layout().to_string(),
            });
        }
        if let Some(first) = self.entries.first() {
            if first.projection.len() != projection.len() {
                return Err(Error::DimensionMismatch(format!(
                    "gallery projections have length {}, got {}",
                    first.projection.len(),
                    projection.len()
                )));
            }
        }
        self.entries.push(GalleryEntry { label, projection });
        Ok(())
    }

    pub fn entries(&self) -> &[GalleryEntry<T>] {
        &self.entries
    }

    pub fn layout(&self) -> LayoutTag {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Projection length shared by every entry.
    pub fn projection_len(&self) -> Option<usize> {
        self.entries.first().map(|e| e.projection.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Known(String),
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranked<T> {
    /// Position of the entry in the gallery.
    pub index: usize,
    pub label: String,
    pub distance: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Identification<T> {
    pub decision: Decision,
    /// Every gallery entry by ascending distance; ties keep gallery order.
    pub ranking: Vec<Ranked<T>>,
}

impl<T: Real> Identification<T> {
    pub fn best(&self) -> &Ranked<T> {
        &self.ranking[0]
    }
}

/// Nearest gallery entry under [`distance`]; with `tau`, a best distance `>= tau` is Unknown.
pub fn identify<T: Real>(
    gallery: &Gallery<T>,
    probe: &Projection<T>,
    tau: Option<T>,
) -> Result<Identification<T>> {
    if gallery.is_empty() {
        return Err(Error::InvalidArgument("empty gallery".into()));
    }
    if probe.layout() != gallery.layout() {
        return Err(Error::LayoutMismatch {
            expected: gallery.layout().to_string(),
            found: probe.layout().to_string(),
        });
    }
    let mut ranking = gallery
        .entries()
        .iter()
        .enumerate()
        .map(|(index, entry)| {
            Ok(Ranked {
                index,
                label: entry.label.clone(),
                distance: distance(probe, &entry.projection)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranking.sort_by(|a, b| {
        a.distance
            .partial_cmp(&b.distance)
            .expect("finite distances")
    });
    let best = &ranking[0];
    let decision = match tau {
        Some(tau) if best.distance >= tau => Decision::Unknown,
        _ => Decision::Known(best.label.clone()),
    };
    Ok(Identification { decision, ranking })
}
