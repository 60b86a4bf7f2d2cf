//! Manifests, configuration, model persistence and end-to-end experiments.

pub mod config;
pub mod container;
pub mod manifest;
pub mod pipeline;
pub mod synth;

pub use config::{FeatureMode, PipelineConfig};
pub use container::{load, save};
pub use manifest::{Manifest, ManifestEntry};
pub use pipeline::{
    identify_probes, load_samples, run_identify_evaluate, run_shift_experiment, run_train_enroll,
    shift_csv, shift_landmarks, Eye, ModelContainer, Pipeline, ProbeOutcome, Sample, ShiftRow,
    DEFAULT_SHIFTS, SHIFT_DIRECTIONS,
};
pub use synth::{generate, write_dataset, SynthData, SynthParams};
