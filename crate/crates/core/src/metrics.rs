//! Identification and verification measures: CMC with its summaries, and ROC with EER
//! and the area below the curve.
//!
//! All rates are percentages. Areas are in percent times percent, so they lie in `[0, 10⁴]`.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Levels reported by `rank_to_reach`.
pub const REACH_LEVELS: [u32; 6] = [95, 96, 97, 98, 99, 100];

/// One probe's gallery ranking, closest identity first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingResult {
    probe_label: String,
    labels: Vec<String>,
    distances: Vec<f64>,
}

impl RankingResult {
    /// `ranked` must be sorted by ascending distance with distinct labels.
    pub fn new(probe_label: impl Into<String>, ranked: Vec<(String, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (label, _) in &ranked {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "label {label} appears twice in one ranking"
                )));
            }
        }
        if ranked.windows(2).any(|w| w[0].1 > w[1].1) {
            return Err(Error::InvalidArgument(
                "ranking is not sorted by distance".into(),
            ));
        }
        let (labels, distances) = ranked.into_iter().unzip();
        Ok(Self {
            probe_label: probe_label.into(),
            labels,
            distances,
        })
    }

    pub fn probe_label(&self) -> &str {
        &self.probe_label
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    /// 1-based rank of the probe's own identity.
    pub fn correct_rank(&self) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| *l == self.probe_label)
            .map(|i| i + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmcReport {
    pub probes: usize,
    pub gallery: usize,
    /// `cmc[k - 1]` is the recognition rate within rank `k`.
    pub cmc: Vec<f64>,
    pub first1: f64,
    /// Rank needed for each of [`REACH_LEVELS`], as a percentage of the gallery size.
    pub rank_to_reach: Vec<(u32, f64)>,
    pub cum100: f64,
    pub cmca: f64,
}

pub fn cmc_curve(results: &[RankingResult]) -> Result<CmcReport> {
    let first = results
        .first()
        .ok_or_else(|| Error::InvalidArgument("no rankings to evaluate".into()))?;
    let g = first.labels.len();
    if g == 0 {
        return Err(Error::InvalidArgument("empty gallery ranking".into()));
    }
    let p = results.len();
    let mut hits_at = vec![0usize; g];
    for r in results {
        if r.labels.len() != g {
            return Err(Error::DimensionMismatch(format!(
                "rankings over {g} and {} gallery identities",
                r.labels.len()
            )));
        }
        let rank = r.correct_rank().ok_or_else(|| {
            Error::InvalidArgument(format!("probe identity {} is not enrolled", r.probe_label))
        })?;
        hits_at[rank - 1] += 1;
    }
    let mut cumulative = Vec::with_capacity(g);
    let mut running = 0;
    for h in hits_at {
        running += h;
        cumulative.push(running);
    }
    let cmc: Vec<f64> = cumulative
        .iter()
        .map(|&c| 100.0 * c as f64 / p as f64)
        .collect();
    let rank_to_reach: Vec<(u32, f64)> = REACH_LEVELS
        .iter()
        .map(|&level| {
            let k = cumulative
                .iter()
                .position(|&c| c * 100 >= level as usize * p)
                .map_or(g, |i| i + 1);
            (level, 100.0 * k as f64 / g as f64)
        })
        .collect();
    let cum100 = rank_to_reach[rank_to_reach.len() - 1].1;
    let cmca = cmc.iter().map(|c| 100.0 - c).sum::<f64>() * 100.0 / g as f64;
    Ok(CmcReport {
        probes: p,
        gallery: g,
        first1: cmc[0],
        cmc,
        rank_to_reach,
        cum100,
        cmca,
    })
}

/// Verification distances: genuine pairs share an identity, impostor pairs do not.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreSet<T> {
    pub genuine: Vec<T>,
    pub impostor: Vec<T>,
}

impl<T: Real> ScoreSet<T> {
    pub fn new(genuine: Vec<T>, impostor: Vec<T>) -> Self {
        Self { genuine, impostor }
    }
}

impl ScoreSet<f64> {
    /// Each probe against its own identity (genuine) and every other identity (impostor).
    pub fn from_rankings(results: &[RankingResult]) -> Self {
        let mut set = Self::default();
        for r in results {
            for (label, &d) in r.labels.iter().zip(&r.distances) {
                if *label == r.probe_label {
                    set.genuine.push(d);
                } else {
                    set.impostor.push(d);
                }
            }
        }
        set
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocReport {
    /// Ascending threshold order.
    pub points: Vec<RocPoint>,
    pub eer: f64,
    pub roca: f64,
}

fn sorted<T: Real>(values: &[T], what: &str) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("no {what} scores")));
    }
    let mut out: Vec<f64> = values.iter().map(|v| v.as_f64()).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite {what} score")));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// FAR and FRR at one threshold; a distance below `threshold` is accepted.
pub fn error_rates(genuine_sorted: &[f64], impostor_sorted: &[f64], threshold: f64) -> (f64, f64) {
    let accepted_impostors = impostor_sorted.partition_point(|&s| s < threshold);
    let accepted_genuine = genuine_sorted.partition_point(|&s| s < threshold);
    let far = 100.0 * accepted_impostors as f64 / impostor_sorted.len() as f64;
    let frr =
        100.0 * (genuine_sorted.len() - accepted_genuine) as f64 / genuine_sorted.len() as f64;
    (far, frr)
}

/// Every distinct score, the midpoints between neighbours, and one threshold above the maximum.
fn default_thresholds(genuine: &[f64], impostor: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = genuine.iter().chain(impostor).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let mut out = Vec::with_capacity(2 * all.len());
    for (i, &s) in all.iter().enumerate() {
        if i > 0 {
            out.push(all[i - 1] + (s - all[i - 1]) / 2.0);
        }
        out.push(s);
    }
    out.push(all[all.len() - 1] + 1.0);
    out
}

/// ROC over `sweep` evenly spaced thresholds spanning the scores, or over the default
/// threshold set when `sweep` is `None`.
pub fn roc_curve<T: Real>(scores: &ScoreSet<T>, sweep: Option<usize>) -> Result<RocReport> {
    let genuine = sorted(&scores.genuine, "genuine")?;
    let impostor = sorted(&scores.impostor, "impostor")?;
    let thresholds = match sweep {
        None => default_thresholds(&genuine, &impostor),
        Some(n) if n < 2 => {
            return Err(Error::InvalidArgument(format!(
                "sweep needs at least 2 thresholds, got {n}"
            )))
        }
        Some(n) => {
            let lo = genuine[0].min(impostor[0]);
            let hi = genuine[genuine.len() - 1].max(impostor[impostor.len() - 1]);
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()
        }
    };
    let points: Vec<RocPoint> = thresholds
        .into_iter()
        .map(|threshold| {
            let (far, frr) = error_rates(&genuine, &impostor, threshold);
            RocPoint {
                threshold,
                far,
                frr,
            }
        })
        .collect();
    let eer = equal_error_rate(&points);
    let roca = area_below(&points);
    Ok(RocReport { points, eer, roca })
}

fn equal_error_rate(points: &[RocPoint]) -> f64 {
    let diff = |p: &RocPoint| p.far - p.frr;
    match points.iter().position(|p| diff(p) >= 0.0) {
        Some(0) => (points[0].far + points[0].frr) / 2.0,
        Some(i) => {
            let (a, b) = (&points[i - 1], &points[i]);
            let t = -diff(a) / (diff(b) - diff(a));
            a.far + t * (b.far - a.far)
        }
        None => {
            let last = &points[points.len() - 1];
            (last.far + last.frr) / 2.0
        }
    }
}

/// Trapezoidal `∫ FRR dFAR`, closing the curve at (0, 100) and (100, 0).
fn area_below(points: &[RocPoint]) -> f64 {
    let mut area = 0.0;
    let (mut far, mut frr) = (0.0, 100.0);
    for p in points.iter().chain(std::iter::once(&RocPoint {
        threshold: f64::INFINITY,
        far: 100.0,
        frr: 0.0,
    })) {
        area += (p.far - far) * (p.frr + frr) / 2.0;
        far = p.far;
        frr = p.frr;
    }
    area.clamp(0.0, 1e4)
}

/// Open-set decision counts at a fixed threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RejectionCounts {
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub cmc: CmcReport,
    pub roc: RocReport,
    pub rejection: Option<(f64, RejectionCounts)>,
}

impl EvalReport {
    pub fn from_rankings(results: &[RankingResult]) -> Result<Self> {
        let cmc = cmc_curve(results)?;
        let roc = roc_curve(&ScoreSet::from_rankings(results), None)?;
        Ok(Self {
            cmc,
            roc,
            rejection: None,
        })
    }

    /// Flat `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let c = &self.cmc;
        let mut out = String::new();
        let _ = writeln!(out, "probes={}", c.probes);
        let _ = writeln!(out, "gallery={}", c.gallery);
        let _ = writeln!(out, "first1={}", c.first1);
        for (level, rank) in &c.rank_to_reach {
            let _ = writeln!(out, "rank{level}={rank:.2}");
        }
        let _ = writeln!(out, "cum100={:.2}", c.cum100);
        let _ = writeln!(out, "cmca={}", c.cmca);
        let _ = writeln!(out, "eer={}", self.roc.eer);
        let _ = writeln!(out, "roca={}", self.roc.roca);
        if let Some((tau, counts)) = self.rejection {
            let _ = writeln!(out, "tau={tau}");
            let _ = writeln!(out, "accepted={}", counts.accepted);
            let _ = writeln!(out, "rejected={}", counts.rejected);
        }
        out
    }

    /// Parses the output of [`to_key_values`](Self::to_key_values) into key/value pairs.
    pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| Error::Parse(format!("expected key=value, got {l:?}")))
            })
            .collect()
    }
}

fn to_csv<R: serde::Serialize>(header: &[&str], rows: impl Iterator<Item = R>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.serialize(row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// `rank,cmc` table.
pub fn cmc_csv(report: &CmcReport) -> Result<String> {
    to_csv(
        &["rank", "cmc"],
        report.cmc.iter().enumerate().map(|(i, &c)| (i + 1, c)),
    )
}

/// `threshold,far,frr` table.
pub fn roc_csv(report: &RocReport) -> Result<String> {
    to_csv(
        &["threshold", "far", "frr"],
        report.points.iter().map(|p| (p.threshold, p.far, p.frr)),
    )
}
