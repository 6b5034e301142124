//! Fixtures shared by the benchmarks.

use uplink_core::pipeline::{prepare, PipelineConfig, Prepared};
use uplink_core::{Scene, SceneFile};

/// A default-sized scene at 20 dB with its CACC and filtered grid.
pub struct Fixture {
    pub scene: Scene,
    pub pipeline: PipelineConfig,
    pub prepared: Prepared,
}

pub fn fixture(seed: u64) -> Fixture {
    let file = SceneFile {
        snr_db: Some(20.0),
        ..SceneFile::default()
    };
    let scene = file
        .synthesize(Some(seed))
        .expect("default scene synthesises");
    let prepared = prepare(&scene.rx, &file.pipeline).expect("default pipeline prepares");
    Fixture {
        scene,
        pipeline: file.pipeline,
        prepared,
    }
}
