use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::agents::RefitLabels;
use crate::error::{Error, Result};
use crate::predictors::{GpKernel, PredictorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Design,
    ActiveLearning,
}

/// Split CP (coin-flip calibration set) or full CP (ridge closed form).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CpKind {
    #[default]
    Split,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Standard,
    OneStep,
    /// One method per entry of the depth list.
    Mfcs,
    Aci,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolKind {
    /// All sign vectors of length `length`.
    #[default]
    Hypercube,
    /// `size` correlated Gaussian vectors of dimension `length`, min-max
    /// scaled.
    Continuous,
}

/// Half-open range of experiment seeds, written `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl SeedRange {
    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn iter(&self) -> std::ops::Range<u64> {
        self.start..self.end
    }
}

impl FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected START..END, got `{s}`"))?;
        let start = a.trim().parse().map_err(|e| format!("bad start `{a}`: {e}"))?;
        let end = b.trim().parse().map_err(|e| format!("bad end `{b}`: {e}"))?;
        if end <= start {
            return Err(format!("empty seed range `{s}`"));
        }
        Ok(Self { start, end })
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl Serialize for SeedRange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SeedRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_aci_step() -> f64 {
    0.005
}
fn default_cal_prob() -> f64 {
    0.5
}
fn default_gamma() -> f64 {
    3.0
}
fn default_holdout() -> usize {
    250
}
fn default_interaction_order() -> usize {
    2
}
fn default_epistasis() -> f64 {
    0.15
}
fn default_pool_size() -> usize {
    1024
}
fn default_ridge() -> f64 {
    0.01
}
fn default_sigma0() -> f64 {
    GpKernel::default().sigma0
}
fn default_noise_level() -> f64 {
    GpKernel::default().noise_level
}
fn default_grid_points() -> usize {
    200
}
fn default_max_evaluations() -> u64 {
    crate::weights::WeightOptions::default().max_evaluations as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub mode: Mode,
    pub predictor: PredictorKind,
    #[serde(default)]
    pub cp: CpKind,
    pub methods: Vec<MethodKind>,
    pub alpha: f64,
    pub n_train: usize,
    #[serde(default)]
    pub n_cal: usize,
    pub lambda: f64,
    #[serde(default)]
    pub d: Vec<usize>,
    pub steps: usize,
    #[serde(default = "default_aci_step")]
    pub aci_step: f64,
    #[serde(default = "default_cal_prob")]
    pub cal_assignment_prob: f64,
    #[serde(default = "default_gamma")]
    pub gamma_init_bias: f64,
    #[serde(default)]
    pub bounded: bool,
    pub seeds: SeedRange,
    #[serde(default = "default_holdout")]
    pub holdout_size: usize,
    #[serde(default)]
    pub evaluator_labels: RefitLabels,
    #[serde(default)]
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSection {
    #[serde(default)]
    pub kind: PoolKind,
    pub length: usize,
    #[serde(default = "default_pool_size")]
    pub size: usize,
    #[serde(default = "default_interaction_order")]
    pub interaction_order: usize,
    #[serde(default = "default_epistasis")]
    pub epistasis: f64,
    pub seed: u64,
    pub noise_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorSection {
    #[serde(default = "default_ridge")]
    pub ridge_regularization: f64,
    #[serde(default = "default_sigma0")]
    pub gp_sigma0: f64,
    #[serde(default = "default_noise_level")]
    pub gp_noise_level: f64,
}

impl Default for PredictorSection {
    fn default() -> Self {
        Self {
            ridge_regularization: default_ridge(),
            gp_sigma0: default_sigma0(),
            gp_noise_level: default_noise_level(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalSection {
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_max_evaluations")]
    pub max_evaluations: u64,
}

impl Default for ConformalSection {
    fn default() -> Self {
        Self {
            grid_points: default_grid_points(),
            max_evaluations: default_max_evaluations(),
        }
    }
}

/// Everything a run needs; `(config, seed)` determines its records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub pool: PoolSection,
    #[serde(default)]
    pub predictor: PredictorSection,
    #[serde(default)]
    pub conformal: ConformalSection,
}

fn bad(field: &str, message: impl Into<String>) -> Error {
    Error::config(field, message)
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let field = message
                .split('`')
                .nth(1)
                .unwrap_or("<document>")
                .to_string();
            Error::Config { field, message }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if !(e.alpha > 0.0 && e.alpha < 1.0) {
            return Err(bad("experiment.alpha", "must lie in (0, 1)"));
        }
        if e.steps < 1 {
            return Err(bad("experiment.steps", "must be at least 1"));
        }
        if e.n_train < 1 {
            return Err(bad("experiment.n_train", "must be at least 1"));
        }
        if e.cp == CpKind::Split && e.n_cal < 1 {
            return Err(bad("experiment.n_cal", "split CP needs at least 1 calibration point"));
        }
        if e.methods.is_empty() {
            return Err(bad("experiment.methods", "no methods selected"));
        }
        if e.methods.contains(&MethodKind::Mfcs) && e.d.is_empty() {
            return Err(bad("experiment.d", "the mfcs method needs at least one depth"));
        }
        if let Some(&d) = e.d.iter().find(|&&d| d < 1 || d > e.steps) {
            return Err(bad("experiment.d", format!("depth {d} outside [1, {}]", e.steps)));
        }
        if !(e.lambda >= 0.0) || !e.lambda.is_finite() {
            return Err(bad("experiment.lambda", "must be finite and nonnegative"));
        }
        if !(e.aci_step > 0.0) {
            return Err(bad("experiment.aci_step", "must be positive"));
        }
        if !(0.0..=1.0).contains(&e.cal_assignment_prob) {
            return Err(bad("experiment.cal_assignment_prob", "must lie in [0, 1]"));
        }
        if !e.gamma_init_bias.is_finite() {
            return Err(bad("experiment.gamma_init_bias", "must be finite"));
        }
        if e.seeds.is_empty() {
            return Err(bad("experiment.seeds", "empty range"));
        }
        match e.mode {
            Mode::ActiveLearning => {
                if e.predictor != PredictorKind::Gp {
                    return Err(bad("experiment.predictor", "active learning uses the gp predictor"));
                }
                if e.cp != CpKind::Split {
                    return Err(bad("experiment.cp", "active learning runs split CP"));
                }
            }
            Mode::Design => {
                if e.cp == CpKind::Full && e.predictor != PredictorKind::Ridge {
                    return Err(bad("experiment.predictor", "full CP needs the ridge predictor"));
                }
            }
        }
        let p = &self.pool;
        match p.kind {
            PoolKind::Hypercube => {
                if !(4..=14).contains(&p.length) {
                    return Err(bad("pool.length", "hypercube length must lie in [4, 14]"));
                }
            }
            PoolKind::Continuous => {
                if p.length < 1 {
                    return Err(bad("pool.length", "must be at least 1"));
                }
                if p.size < 2 {
                    return Err(bad("pool.size", "must be at least 2"));
                }
            }
        }
        if !(1..=2).contains(&p.interaction_order) {
            return Err(bad("pool.interaction_order", "must be 1 or 2"));
        }
        if !p.epistasis.is_finite() {
            return Err(bad("pool.epistasis", "must be finite"));
        }
        if !(p.noise_scale >= 0.0) {
            return Err(bad("pool.noise_scale", "must be nonnegative"));
        }
        let pool_size = match p.kind {
            PoolKind::Hypercube => 1usize << p.length,
            PoolKind::Continuous => p.size,
        };
        if e.mode == Mode::ActiveLearning && e.holdout_size + e.n_train + e.n_cal > pool_size {
            return Err(bad(
                "experiment.holdout_size",
                "holdout and initial sets do not fit in the pool",
            ));
        }
        let r = &self.predictor;
        if !(r.ridge_regularization > 0.0) {
            return Err(bad("predictor.ridge_regularization", "must be positive"));
        }
        if !(r.gp_noise_level > 0.0) {
            return Err(bad("predictor.gp_noise_level", "must be positive"));
        }
        if self.conformal.grid_points < 2 {
            return Err(bad("conformal.grid_points", "must be at least 2"));
        }
        Ok(())
    }

    pub fn gp_kernel(&self) -> GpKernel {
        GpKernel {
            sigma0: self.predictor.gp_sigma0,
            noise_level: self.predictor.gp_noise_level,
        }
    }

    /// Method labels in record order.
    pub fn method_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for m in &self.experiment.methods {
            match m {
                MethodKind::Standard => out.push("standard".to_string()),
                MethodKind::OneStep => out.push("one-step".to_string()),
                MethodKind::Mfcs => {
                    out.extend(self.experiment.d.iter().map(|d| format!("mfcs-d{d}")))
                }
                MethodKind::Aci => out.push("aci".to_string()),
            }
        }
        out
    }

    /// SHA-256 of the canonical JSON form (keys sorted), hex encoded.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("json serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
