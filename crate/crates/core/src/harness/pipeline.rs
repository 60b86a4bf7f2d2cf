//! End-to-end runs: normalize, extract, train and enroll, identify, evaluate.

use rayon::prelude::*;

use super::config::{FeatureMode, PipelineConfig};
use super::manifest::ManifestEntry;
use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, FeatureVector, LayoutTag};
use crate::imaging::{normalize, pgm, GrayImage, Landmarks, NormalizedFace, FACE_SIZE};
use crate::metrics::{EvalReport, RankingResult, RejectionCounts};
use crate::subspace::{identify, project, train, Decision, Gallery, Projection, SubspaceModel};

/// One labelled image with its landmarks, held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub label: String,
    pub image: GrayImage<f64>,
    pub landmarks: Landmarks<f64>,
}

/// Reads every image of `entries`, in order.
pub fn load_samples(entries: &[ManifestEntry]) -> Result<Vec<Sample>> {
    entries
        .par_iter()
        .map(|e| {
            Ok(Sample {
                label: e.label.clone(),
                image: pgm::read(&e.resolved)?,
                landmarks: e.landmarks,
            })
        })
        .collect()
}

/// Normalization plus feature extraction for one configuration.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    extractor: FeatureExtractor<f64>,
    layout: LayoutTag,
}

impl Pipeline {
    pub fn new(config: &PipelineConfig) -> Result<Self> {
        config.validate()?;
        let extractor = match config.features {
            FeatureMode::LogGabor => {
                FeatureExtractor::log_gabor(FACE_SIZE, FACE_SIZE, &config.filter, config.selection)?
            }
            FeatureMode::Grayscale => FeatureExtractor::Grayscale,
        };
        let layout = extractor.layout(config.normalization.mask());
        Ok(Self {
            config: *config,
            extractor,
            layout,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn layout(&self) -> LayoutTag {
        self.layout
    }

    pub fn normalize(&self, sample: &Sample) -> Result<NormalizedFace<f64>> {
        normalize(
            &sample.image,
            &sample.landmarks,
            self.config.normalization,
            &self.config.normalize,
        )
    }

    pub fn features(&self, sample: &Sample) -> Result<FeatureVector<f64>> {
        self.extractor.extract(&self.normalize(sample)?)
    }

    /// Feature vectors of all samples, in input order.
    pub fn features_all(&self, samples: &[Sample]) -> Result<Vec<FeatureVector<f64>>> {
        samples.par_iter().map(|s| self.features(s)).collect()
    }
}

/// Trained model with its enrolled gallery and the configuration that produced both.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelContainer {
    pub config: PipelineConfig,
    pub model: SubspaceModel<f64>,
    pub gallery: Gallery<f64>,
    /// Whitened coordinates used for matching.
    pub components: usize,
}

impl ModelContainer {
    pub fn layout(&self) -> LayoutTag {
        self.model.layout()
    }

    /// Cross-checks the parts against each other and against the configuration.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let expected = Pipeline::new(&self.config)?.layout();
        if self.model.layout() != expected || self.gallery.layout() != expected {
            return Err(Error::Invariant(format!(
                "container layout {} does not match its configuration ({expected})",
                self.model.layout()
            )));
        }
        if self.components == 0 || self.components > self.model.components() {
            return Err(Error::Invariant(format!(
                "{} matching components for a model with {}",
                self.components,
                self.model.components()
            )));
        }
        if self.gallery.is_empty() {
            return Err(Error::Invariant("empty gallery".into()));
        }
        if self.gallery.projection_len() != Some(self.components) {
            return Err(Error::Invariant(
                "gallery projection length differs from component count".into(),
            ));
        }
        Ok(())
    }
}

/// Trains on the gallery samples and enrolls each of them.
pub fn run_train_enroll(gallery: &[Sample], config: &PipelineConfig) -> Result<ModelContainer> {
    if gallery.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "training needs at least 2 gallery images, got {}",
            gallery.len()
        )));
    }
    let pipeline = Pipeline::new(config)?;
    let vectors = pipeline.features_all(gallery)?;
    let model = train(&vectors)?;
    let components = config
        .components
        .unwrap_or_else(|| model.default_components())
        .min(model.components());
    let projections: Vec<Projection<f64>> = vectors
        .par_iter()
        .map(|v| project(&model, v, components))
        .collect::<Result<_>>()?;
    let mut enrolled = Gallery::new(model.layout());
    for (sample, projection) in gallery.iter().zip(projections) {
        enrolled.enroll(sample.label.clone(), projection)?;
    }
    let container = ModelContainer {
        config: *config,
        model,
        gallery: enrolled,
        components,
    };
    container.validate()?;
    Ok(container)
}

/// Per-probe outcome of matching against a container.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcome {
    pub ranking: RankingResult,
    pub decision: Decision,
}

/// Ranks the gallery identities for every probe. Identities enrolled more than once count
/// with their closest entry.
pub fn identify_probes(
    container: &ModelContainer,
    probes: &[Sample],
    probe_config: Option<&PipelineConfig>,
) -> Result<Vec<ProbeOutcome>> {
    let pipeline = Pipeline::new(probe_config.unwrap_or(&container.config))?;
    if pipeline.layout() != container.layout() {
        return Err(Error::LayoutMismatch {
            expected: container.layout().to_string(),
            found: pipeline.layout().to_string(),
        });
    }
    let tau = pipeline.config().tau;
    probes
        .par_iter()
        .map(|probe| {
            let z = project(
                &container.model,
                &pipeline.features(probe)?,
                container.components,
            )?;
            let id = identify(&container.gallery, &z, tau)?;
            let mut seen = std::collections::HashSet::new();
            let ranked = id
                .ranking
                .into_iter()
                .filter(|r| seen.insert(r.label.clone()))
                .map(|r| (r.label, r.distance))
                .collect();
            Ok(ProbeOutcome {
                ranking: RankingResult::new(probe.label.clone(), ranked)?,
                decision: id.decision,
            })
        })
        .collect()
}

/// Closed-set CMC and verification ROC for the probes; open-set counts when `tau` is set.
pub fn run_identify_evaluate(
    container: &ModelContainer,
    probes: &[Sample],
    probe_config: Option<&PipelineConfig>,
) -> Result<EvalReport> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("no probe images".into()));
    }
    let outcomes = identify_probes(container, probes, probe_config)?;
    let rankings: Vec<RankingResult> = outcomes.iter().map(|o| o.ranking.clone()).collect();
    let mut report = EvalReport::from_rankings(&rankings)?;
    let tau = probe_config.unwrap_or(&container.config).tau;
    if let Some(tau) = tau {
        let rejected = outcomes
            .iter()
            .filter(|o| o.decision == Decision::Unknown)
            .count();
        report.rejection = Some((
            tau,
            RejectionCounts {
                accepted: outcomes.len() - rejected,
                rejected,
            },
        ));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eye {
    Left,
    Right,
}

impl std::str::FromStr for Eye {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Eye::Left),
            "right" | "r" => Ok(Eye::Right),
            other => Err(Error::InvalidArgument(format!("unknown eye '{other}'"))),
        }
    }
}

/// Default shift percentages of the eye-marker experiment.
pub const DEFAULT_SHIFTS: [f64; 7] = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0];

/// Unit displacements for angles 0, π/2, π and 3π/2 in image axes.
pub const SHIFT_DIRECTIONS: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftRow {
    pub shift: f64,
    pub first1: f64,
    pub first1d: f64,
    pub eer: f64,
    pub eerd: f64,
}

/// Pixel displacement of a `shift` percent move for the given interocular distance.
pub fn shift_displacement(shift: f64, interocular: f64) -> f64 {
    shift * interocular / 100.0
}

/// Moves one eye marker by `shift` percent of the interocular distance along `direction`.
pub fn shift_landmarks(
    lm: &Landmarks<f64>,
    eye: Eye,
    shift: f64,
    direction: (f64, f64),
) -> Landmarks<f64> {
    let d = shift_displacement(shift, lm.interocular_distance());
    let mut out = *lm;
    let target = match eye {
        Eye::Left => &mut out.left_eye,
        Eye::Right => &mut out.right_eye,
    };
    *target = target.offset(d * direction.0, d * direction.1);
    out
}

/// Identification under displaced eye markers, averaged over the four axis directions.
pub fn run_shift_experiment(
    container: &ModelContainer,
    probes: &[Sample],
    shifts: &[f64],
    eye: Eye,
) -> Result<Vec<ShiftRow>> {
    if container.config.normalization != crate::imaging::NormalizationMethod::TwoPoint {
        return Err(Error::InvalidArgument(
            "the eye-shift experiment needs 2-point normalization".into(),
        ));
    }
    if shifts.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::InvalidArgument(
            "shifts must be non-negative percentages".into(),
        ));
    }
    let baseline = run_identify_evaluate(container, probes, None)?;
    let mut rows = Vec::with_capacity(shifts.len());
    for &shift in shifts {
        let (first1, eer) = if shift == 0.0 {
            (baseline.cmc.first1, baseline.roc.eer)
        } else {
            let mut first1 = 0.0;
            let mut eer = 0.0;
            for direction in SHIFT_DIRECTIONS {
                let moved = probes
                    .iter()
                    .map(|p| {
                        let landmarks = shift_landmarks(&p.landmarks, eye, shift, direction);
                        landmarks.validate(p.image.width(), p.image.height())?;
                        Ok(Sample {
                            landmarks,
                            ..p.clone()
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let report = run_identify_evaluate(container, &moved, None)?;
                first1 += report.cmc.first1;
                eer += report.roc.eer;
            }
            let n = SHIFT_DIRECTIONS.len() as f64;
            (first1 / n, eer / n)
        };
        rows.push(ShiftRow {
            shift,
            first1,
            first1d: (first1 - baseline.cmc.first1).abs(),
            eer,
            eerd: (eer - baseline.roc.eer).abs(),
        });
    }
    Ok(rows)
}

/// `shift,first1,first1d,eer,eerd` table.
pub fn shift_csv(rows: &[ShiftRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["shift", "first1", "first1d", "eer", "eerd"])
        .map_err(fail)?;
    for r in rows {
        w.serialize((r.shift, r.first1, r.first1d, r.eer, r.eerd))
            .map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}
