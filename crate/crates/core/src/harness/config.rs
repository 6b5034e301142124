use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{OffsetModel, ScenarioConfig, SceneSampler};
use crate::pipeline::{Method, PipelineConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    SnrDb,
    Q,
    L,
    C,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::SnrDb => "snr_db",
            SweepKind::Q => "q",
            SweepKind::L => "l",
            SweepKind::C => "c",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One swept parameter; every other setting comes from the base sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    SnrDb { values: Vec<f64> },
    Q { values: Vec<usize> },
    L { values: Vec<usize> },
    C { values: Vec<usize> },
}

impl Sweep {
    pub fn kind(&self) -> SweepKind {
        match self {
            Sweep::SnrDb { .. } => SweepKind::SnrDb,
            Sweep::Q { .. } => SweepKind::Q,
            Sweep::L { .. } => SweepKind::L,
            Sweep::C { .. } => SweepKind::C,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sweep::SnrDb { values } => values.len(),
            Sweep::Q { values } | Sweep::L { values } | Sweep::C { values } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sweep values as `f64`, in order.
    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::SnrDb { values } => values.clone(),
            Sweep::Q { values } | Sweep::L { values } | Sweep::C { values } => {
                values.iter().map(|&v| v as f64).collect()
            }
        }
    }
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep::SnrDb { values: vec![20.0] }
    }
}

/// A Monte-Carlo study.
///
/// ```toml
/// trials = 200
/// methods = ["mirrored", "conventional", "ams"]
/// master_seed = 7
///
/// [sweep]
/// kind = "snr_db"
/// values = [0, 5, 10, 15, 20, 25, 30]
///
/// [scenario]
/// num_packets = 128
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub trials: usize,
    pub methods: Vec<Method>,
    /// A target counts as detected when both its delay and Doppler NMSE are
    /// below this.
    pub detection_nmse_threshold: f64,
    pub master_seed: u64,
    /// SNR of the LOS path when the sweep is not over SNR.
    pub snr_db: f64,
    /// Attach error-predictor columns (costs one extra SVD set per trial).
    pub predict: bool,
    pub sweep: Sweep,
    pub scenario: ScenarioConfig,
    pub sampler: SceneSampler,
    pub offsets: OffsetModel,
    pub pipeline: PipelineConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let scenario = ScenarioConfig::default();
        Self {
            trials: 200,
            methods: Method::ALL.to_vec(),
            detection_nmse_threshold: 1e-3,
            master_seed: 0,
            snr_db: 20.0,
            predict: true,
            sweep: Sweep::default(),
            offsets: OffsetModel::default_for(&scenario),
            scenario,
            sampler: SceneSampler::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

/// 1-based line of the first `key = ...` assignment or `[key]` header.
fn line_of(src: &str, key: &str) -> Option<usize> {
    src.lines()
        .position(|l| {
            let t = l.trim_start();
            let header = t
                .strip_prefix("[[")
                .or_else(|| t.strip_prefix('['))
                .map(|h| h.trim_end_matches(']').trim() == key);
            header.unwrap_or(false)
                || t.strip_prefix(key)
                    .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

/// Prefixes a validation message with the line of the key it starts with.
pub(crate) fn locate(src: &str, err: Error) -> Error {
    match err {
        Error::InvalidConfig(msg) => {
            let key = msg.split_whitespace().next().unwrap_or("");
            match line_of(src, key) {
                Some(line) => Error::InvalidConfig(format!("line {line}: {msg}")),
                None => Error::InvalidConfig(msg),
            }
        }
        other => other,
    }
}

impl ExperimentSpec {
    /// Parses and validates; errors name the offending line when it can be found.
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let spec: Self = toml::from_str(src)?;
        spec.validate().map_err(|e| locate(src, e))?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        Self::from_toml_str(&src).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.sweep.is_empty() {
            return bad("sweep values must not be empty".into());
        }
        if self.methods.is_empty() {
            return bad("methods must list at least one method".into());
        }
        if !(self.detection_nmse_threshold > 0.0) {
            return bad("detection_nmse_threshold must be positive".into());
        }
        if self.sweep.values().iter().any(|v| !v.is_finite()) || !self.snr_db.is_finite() {
            return bad("sweep values must be finite".into());
        }
        self.scenario
            .validate()
            .map_err(|e| Error::InvalidConfig(format!("scenario {e}")))?;
        Ok(())
    }
}
