//! Uplink sensing with asynchronous transceivers: signal synthesis,
//! cross-antenna cross-correlation, mirrored-MUSIC delay/Doppler estimation,
//! multi-domain AoA MUSIC, baselines, error predictors and a Monte-Carlo
//! harness.

pub mod analysis;
pub mod aoa;
pub mod baselines;
pub mod cacc;
pub mod error;
pub mod estimate;
pub mod filter;
pub mod grid;
pub mod harness;
pub mod mirrored;
pub mod model;
pub mod pipeline;
pub mod scene;
pub mod subspace;

pub use cacc::{CaccGrid, CorrGrid, Cutoff, RefIndex, XiGrid};
pub use error::{Error, Result};
pub use estimate::{AoaStatus, EstimateSet, TargetEstimate};
pub use grid::Grid3;
pub use mirrored::MirrorConfig;
pub use model::{OffsetTrace, PathParams, RxGrid, ScenarioConfig, SymbolGrid};
pub use scene::{PathSpec, Scene, SceneFile};
