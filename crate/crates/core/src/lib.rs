//! Face identification with Log-Gabor magnitude features and whitened PCA.
//!
//! The pipeline runs in five stages, one module each:
//!
//! * [`imaging`]: PGM input, landmark-based 3-point and 2-point normalization,
//!   elliptical masks and masked histogram equalization.
//! * [`filterbank`]: frequency-domain Log-Gabor transfer functions and FFT filtering
//!   into masked magnitude rasters.
//! * [`features`]: sliding-window selection of maximal magnitudes at the finest scale
//!   and assembly of the feature vector.
//! * [`subspace`]: whitened PCA (snapshot method when samples are fewer than dimensions),
//!   negative-cosine distance and nearest-neighbour identification.
//! * [`metrics`]: CMC, ROC and their scalar summaries.
//!
//! [`harness`] ties them together for manifests, model containers and experiments.
//!
//! Numerical types are generic over [`Real`] (`f32` or `f64`); the aliases at the crate
//! root fix the scalar to `f64`, which is what the harness uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod error;
pub mod features;
pub mod filterbank;
pub mod harness;
pub mod imaging;
pub mod metrics;
pub mod scalar;
pub mod subspace;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GrayImage = imaging::GrayImage<f64>;
pub type NormalizedFace = imaging::NormalizedFace<f64>;
pub type Landmarks = imaging::Landmarks<f64>;
pub type Point = imaging::Point<f64>;
pub type FrequencyFilter = filterbank::FrequencyFilter<f64>;
pub type FilterBank = filterbank::FilterBank<f64>;
pub type MagnitudeStack = filterbank::MagnitudeStack<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type SubspaceModel = subspace::SubspaceModel<f64>;
pub type Projection = subspace::Projection<f64>;
pub type Gallery = subspace::Gallery<f64>;

pub use features::{FeatureLocations, LayoutTag, Selection, WindowSpec};
pub use filterbank::FilterParams;
pub use imaging::{BinaryMask, NormalizationMethod};
