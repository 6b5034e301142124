//! End-to-end estimation from a received grid: CACC, high-pass filtering,
//! reference-plane selection and one of the delay/Doppler methods, followed
//! by the AoA stage.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aoa::{algorithm2, AoAConfig, AoaOutput};
use crate::baselines::{ams_estimate, ams_transform, conventional_estimate};
use crate::cacc::{
    cacc, highpass_butterworth_with, highpass_mean_subtraction, select_reference_index_n0,
    CaccGrid, Cutoff, EdgeExtension, RefIndex, XiGrid,
};
use crate::error::{Error, Result};
use crate::estimate::EstimateSet;
use crate::mirrored::{algorithm1, Algorithm1Output, MirrorConfig};
use crate::model::{RxGrid, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mirrored,
    Conventional,
    Ams,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mirrored, Method::Conventional, Method::Ams];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mirrored => "mirrored",
            Method::Conventional => "conventional",
            Method::Ams => "ams",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown method `{s}` (mirrored, conventional, ams)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterConfig {
    Butterworth { order: usize },
    MeanSubtraction { window: usize },
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig::Butterworth { order: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub reference: RefIndex,
    pub filter: FilterConfig,
    pub cutoff: Cutoff,
    pub edges: EdgeExtension,
    pub mirror: MirrorConfig,
    pub aoa: AoAConfig,
    pub estimate_aoa: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            reference: RefIndex::default(),
            filter: FilterConfig::default(),
            cutoff: Cutoff::default(),
            edges: EdgeExtension::default(),
            mirror: MirrorConfig::default(),
            aoa: AoAConfig::default(),
            estimate_aoa: true,
        }
    }
}

/// CACC output, its filtered version and the plane used for `P`/`Q`.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub rho: CaccGrid,
    pub xi: XiGrid,
    pub n0: usize,
}

pub fn highpass(rho: &CaccGrid, cfg: &PipelineConfig) -> Result<XiGrid> {
    match cfg.filter {
        FilterConfig::Butterworth { order } => {
            highpass_butterworth_with(rho, cfg.cutoff, order, cfg.edges)
        }
        FilterConfig::MeanSubtraction { window } => highpass_mean_subtraction(rho, window),
    }
}

/// CACC and filtering; `n0` comes from the configuration or from the plane
/// of `rho` with the least low-pass energy.
pub fn prepare(rx: &RxGrid, cfg: &PipelineConfig) -> Result<Prepared> {
    let rho = cacc(rx, cfg.reference)?;
    let xi = highpass(&rho, cfg)?;
    let n0 = match cfg.mirror.n0 {
        Some(n) => n,
        None => select_reference_index_n0(&rho),
    };
    Ok(Prepared { rho, xi, n0 })
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub method: Method,
    pub estimates: EstimateSet,
    pub stage1: Algorithm1Output,
    pub aoa: Option<AoaOutput>,
}

/// Runs `method` on a prepared grid. The AMS method works from `rx`
/// directly and does not estimate AoA.
pub fn estimate_prepared(
    method: Method,
    rx: &RxGrid,
    prepared: &Prepared,
    omega0: f64,
    tau0: f64,
    scen: &ScenarioConfig,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    let mirror = MirrorConfig {
        n0: Some(prepared.n0),
        ..cfg.mirror.clone()
    };
    let stage1 = match method {
        Method::Mirrored => algorithm1(&prepared.xi, omega0, tau0, scen, &mirror)?,
        Method::Conventional => conventional_estimate(&prepared.xi, omega0, tau0, scen, &mirror)?,
        Method::Ams => {
            let ams = ams_transform(rx)?;
            let n0 = if ams.xi.antennas.contains(&prepared.n0) {
                Some(prepared.n0)
            } else {
                None
            };
            ams_estimate(
                &ams,
                omega0,
                tau0,
                scen,
                &MirrorConfig {
                    n0,
                    ..cfg.mirror.clone()
                },
            )?
        }
    };
    let mut estimates = stage1.estimates.clone();
    let aoa = if cfg.estimate_aoa && method != Method::Ams && !estimates.is_empty() {
        let out = algorithm2(&prepared.xi, &estimates, &cfg.aoa, scen)?;
        out.apply(&mut estimates);
        Some(out)
    } else {
        None
    };
    Ok(PipelineOutput {
        method,
        estimates,
        stage1,
        aoa,
    })
}

pub fn estimate(
    method: Method,
    rx: &RxGrid,
    omega0: f64,
    tau0: f64,
    scen: &ScenarioConfig,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    let prepared = prepare(rx, cfg)?;
    estimate_prepared(method, rx, &prepared, omega0, tau0, scen, cfg)
}
