//! Single-scene config files: a scenario with either an explicit path list
//! or a random sampler, plus the offset laws and pipeline settings used to
//! process it.
//!
//! ```toml
//! snr_db = 20
//! [scenario]
//! rng_seed = 7
//! [[paths]]
//! los = true
//! delay_s = 50e-9
//! aoa_rad = 1.1
//! [[paths]]
//! amplitude = 0.316
//! phase_rad = 0.3
//! delay_s = 150e-9
//! doppler_hz = 120
//! aoa_rad = 0.5
//! ```
//!
//! Without `[[paths]]` the scene is drawn from `[sampler]`.

use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::locate;
use crate::model::{
    generate_offsets, generate_symbols, split_los, synthesize_rx, OffsetModel, PathParams, RxGrid,
    ScenarioConfig, SceneSampler,
};
use crate::pipeline::PipelineConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathSpec {
    pub los: bool,
    pub amplitude: f64,
    pub phase_rad: f64,
    pub delay_s: f64,
    pub doppler_hz: f64,
    /// Angle from the array axis, in `(0, pi)`.
    pub aoa_rad: f64,
}

impl Default for PathSpec {
    fn default() -> Self {
        Self {
            los: false,
            amplitude: 1.0,
            phase_rad: 0.0,
            delay_s: 0.0,
            doppler_hz: 0.0,
            aoa_rad: 0.5 * std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneFile {
    /// Overrides `scenario.noise_variance` with the LOS SNR when set.
    pub snr_db: Option<f64>,
    pub scenario: ScenarioConfig,
    pub offsets: OffsetModel,
    pub sampler: SceneSampler,
    pub pipeline: PipelineConfig,
    pub paths: Vec<PathSpec>,
}

impl Default for SceneFile {
    fn default() -> Self {
        let scenario = ScenarioConfig::default();
        Self {
            snr_db: None,
            offsets: OffsetModel::default_for(&scenario),
            scenario,
            sampler: SceneSampler::default(),
            pipeline: PipelineConfig::default(),
            paths: Vec::new(),
        }
    }
}

/// Paths and the received grid synthesised from them.
#[derive(Debug, Clone)]
pub struct Scene {
    pub scenario: ScenarioConfig,
    pub paths: Vec<PathParams>,
    pub rx: RxGrid,
}

impl Scene {
    pub fn los(&self) -> Result<PathParams> {
        Ok(split_los(&self.paths)?.0)
    }
}

impl SceneFile {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let file: Self = toml::from_str(src)?;
        file.validate().map_err(|e| locate(src, e))?;
        Ok(file)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        Self::from_toml_str(&src).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_some_and(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("snr_db must be finite".into()));
        }
        self.scenario()
            .validate()
            .map_err(|e| Error::InvalidConfig(format!("scenario {e}")))?;
        if !self.paths.is_empty() {
            let los = self.paths.iter().filter(|p| p.los).count();
            if los != 1 {
                return Err(Error::InvalidConfig(format!(
                    "paths must hold exactly one LOS entry, found {los}"
                )));
            }
            if self.paths.iter().any(|p| {
                !(p.amplitude.is_finite() && p.delay_s.is_finite() && p.doppler_hz.is_finite())
            }) {
                return Err(Error::InvalidConfig("paths entries must be finite".into()));
            }
        }
        Ok(())
    }

    /// The scenario with `snr_db` applied.
    pub fn scenario(&self) -> ScenarioConfig {
        let mut s = self.scenario.clone();
        if let Some(snr) = self.snr_db {
            s.noise_variance = ScenarioConfig::noise_for_snr(1.0, snr);
        }
        s
    }

    /// Draws the scene with `seed`, or `scenario.rng_seed` when `None`.
    /// Paths, offsets and symbols use one stream of the generator and the
    /// noise another, so changing the SNR leaves the scene unchanged.
    pub fn synthesize(&self, seed: Option<u64>) -> Result<Scene> {
        let scenario = self.scenario();
        let seed = seed.unwrap_or(scenario.rng_seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut noise = ChaCha8Rng::seed_from_u64(seed);
        noise.set_stream(1);
        let paths = if self.paths.is_empty() {
            self.sampler.sample(&scenario, &mut rng)?
        } else {
            self.paths
                .iter()
                .map(|p| {
                    let gain = Complex64::from_polar(p.amplitude, p.phase_rad);
                    PathParams::new(&scenario, gain, p.delay_s, p.doppler_hz, p.aoa_rad, p.los)
                })
                .collect()
        };
        let offsets = generate_offsets(&scenario, self.offsets.timing, self.offsets.cfo, &mut rng);
        let symbols = generate_symbols(&scenario, &mut rng);
        let rx = synthesize_rx(&scenario, &paths, &offsets, &symbols, &mut noise)?;
        Ok(Scene {
            scenario,
            paths,
            rx,
        })
    }
}
