//! Pipeline configuration as a flat `key=value` file.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{Selection, WindowSpec};
use crate::filterbank::FilterParams;
use crate::imaging::{NormalizationMethod, NormalizeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureMode {
    LogGabor,
    /// Raw unmasked intensities.
    Grayscale,
}

impl FeatureMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::LogGabor => "loggabor",
            FeatureMode::Grayscale => "grayscale",
        }
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "loggabor" | "log-gabor" => Ok(Self::LogGabor),
            "grayscale" | "gray" | "greyscale" => Ok(Self::Grayscale),
            other => Err(Error::Config(format!("unknown feature mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub normalization: NormalizationMethod,
    pub normalize: NormalizeParams,
    pub features: FeatureMode,
    pub filter: FilterParams,
    pub selection: Selection,
    /// Upper bound on matching components; `None` uses the model default.
    pub components: Option<usize>,
    /// Open-set rejection threshold on the best distance.
    pub tau: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            normalization: NormalizationMethod::TwoPoint,
            normalize: NormalizeParams::default(),
            features: FeatureMode::LogGabor,
            filter: FilterParams::default(),
            selection: Selection::default(),
            components: None,
            tau: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad flag '{value}' for {key}"))),
    }
}

fn parse_optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    match value.to_ascii_lowercase().as_str() {
        "" | "none" | "auto" => Ok(None),
        _ => parse(key, value).map(Some),
    }
}

impl PipelineConfig {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "normalization" => self.normalization = value.parse()?,
            "denoise_sigma" => self.normalize.denoise_sigma = parse(key, value)?,
            "denoise_window" => self.normalize.denoise_window = parse(key, value)?,
            "levels" => self.normalize.levels = parse(key, value)?,
            "features" => self.features = value.parse()?,
            "lambda0" => self.filter.lambda0 = parse(key, value)?,
            "scale_factor" => self.filter.scale_factor = parse(key, value)?,
            "sigma_on_f" => self.filter.sigma_on_f = parse(key, value)?,
            "num_scales" => self.filter.num_scales = parse(key, value)?,
            "num_orients" => self.filter.num_orients = parse(key, value)?,
            "theta_scale" => self.filter.theta_scale = parse(key, value)?,
            "window_size" => self.selection.window.size = parse(key, value)?,
            "window_step" => self.selection.window.step = parse(key, value)?,
            "use_mask" => self.selection.use_mask = parse_bool(key, value)?,
            "dedup" => self.selection.dedup = parse_bool(key, value)?,
            "components" => self.components = parse_optional(key, value)?,
            "tau" => self.tau = parse_optional(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.to_string());
        self.filter.validate().map_err(wrap)?;
        WindowSpec::validate(&self.selection.window).map_err(wrap)?;
        if self.normalize.levels < 2 || self.normalize.denoise_window == 0 {
            return Err(Error::Config(
                "levels must be >= 2 and denoise_window >= 1".into(),
            ));
        }
        if !(self.normalize.denoise_sigma > 0.0) {
            return Err(Error::Config("denoise_sigma must be positive".into()));
        }
        if self.components == Some(0) {
            return Err(Error::Config("components must be positive".into()));
        }
        if self.tau.is_some_and(|t| !t.is_finite()) {
            return Err(Error::Config("tau must be finite".into()));
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back an equal configuration.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        line("normalization", self.normalization.to_string());
        line("denoise_sigma", self.normalize.denoise_sigma.to_string());
        line("denoise_window", self.normalize.denoise_window.to_string());
        line("levels", self.normalize.levels.to_string());
        line("features", self.features.as_str().into());
        line("lambda0", self.filter.lambda0.to_string());
        line("scale_factor", self.filter.scale_factor.to_string());
        line("sigma_on_f", self.filter.sigma_on_f.to_string());
        line("num_scales", self.filter.num_scales.to_string());
        line("num_orients", self.filter.num_orients.to_string());
        line("theta_scale", self.filter.theta_scale.to_string());
        line("window_size", self.selection.window.size.to_string());
        line("window_step", self.selection.window.step.to_string());
        line("use_mask", self.selection.use_mask.to_string());
        line("dedup", self.selection.dedup.to_string());
        line("components", opt(self.components.map(|c| c.to_string())));
        line("tau", opt(self.tau.map(|t| t.to_string())));
        out
    }
}

impl FromStr for PipelineConfig {
    type Err = Error;

    /// Blank lines and `#` comments are ignored; absent keys keep their defaults.
    fn from_str(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            config.set(key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }
}
