use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Kind {
    Esd,
    SsvSweep,
    NormSweep,
    Expansion,
    Distance,
    Threshold,
    Oracle,
    Replacement,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Strict,
    /// Larger vector-class constants for desk-scale `n`; outside the constant
    /// regime of the theory.
    Relaxed,
}

/// Flat, versioned experiment description. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub kind: Kind,
    pub n: usize,
    pub d: Vec<usize>,
    #[serde(default)]
    pub z_re: f64,
    #[serde(default)]
    pub z_im: f64,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,
    #[serde(default)]
    pub preset: Preset,
    /// Subset size (expansion) or subspace dimension (distance).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Bernoulli parameter of the distance experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    /// `s_min` threshold for the threshold and ssv_sweep kinds (default `n^-9`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage_tol: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(kind: Kind, n: usize, d: Vec<usize>, out: impl Into<PathBuf>) -> Self {
        Self {
            version: CONFIG_VERSION,
            kind,
            n,
            d,
            z_re: 0.0,
            z_im: 0.0,
            trials: 1,
            seed: 0,
            out: out.into(),
            preset: Preset::Strict,
            k: None,
            eps: None,
            p: None,
            delta: None,
            rho: None,
            a1: None,
            a2: None,
            a3: None,
            c1: None,
            c2: None,
            singular_threshold: None,
            coverage_tol: None,
        }
    }

    pub fn from_json(text: &str) -> LabResult<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks that do not depend on the experiment kind.
    pub fn validate_common(&self) -> LabResult<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version));
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.d.is_empty() {
            return bad("at least one d value is required".into());
        }
        if let Some(d) = self.d.iter().find(|&&d| d == 0 || d > self.n) {
            return bad(format!("d = {d} outside 1..=n (n = {})", self.n));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !self.z_re.is_finite() || !self.z_im.is_finite() {
            return bad("z must be finite".into());
        }
        Ok(())
    }
}
