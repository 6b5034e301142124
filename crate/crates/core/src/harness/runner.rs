use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::perturbation_report;
use crate::error::Result;
use crate::mirrored::{resolve_selection, MirrorConfig};
use crate::model::{
    generate_offsets, generate_symbols, split_los, synthesize_rx, ScenarioConfig, SceneSampler,
};
use crate::pipeline::{estimate_prepared, prepare, PipelineConfig};

use super::config::{ExperimentSpec, Sweep};
use super::metrics::{summarize, MetricRow, Prediction, TrialResult};

/// Settings in force at one sweep point.
#[derive(Debug, Clone)]
pub struct PointParams {
    pub index: usize,
    pub value: f64,
    pub scenario: ScenarioConfig,
    pub sampler: SceneSampler,
    pub pipeline: PipelineConfig,
}

impl ExperimentSpec {
    pub fn points(&self) -> Vec<PointParams> {
        let values = self.sweep.values();
        (0..values.len())
            .map(|index| {
                let mut scenario = self.scenario.clone();
                let mut sampler = self.sampler.clone();
                let mut pipeline = self.pipeline.clone();
                let mut snr = self.snr_db;
                match &self.sweep {
                    Sweep::SnrDb { values } => snr = values[index],
                    Sweep::Q { values } => pipeline.mirror.q = values[index],
                    Sweep::L { values } => {
                        sampler.num_targets = values[index];
                        pipeline.mirror.num_targets = values[index];
                    }
                    Sweep::C { values } => pipeline.aoa.c = values[index],
                }
                scenario.noise_variance = ScenarioConfig::noise_for_snr(1.0, snr);
                PointParams {
                    index,
                    value: values[index],
                    scenario,
                    sampler,
                    pipeline,
                }
            })
            .collect()
    }
}

/// `(scene, noise)` generators of one trial. The scene stream depends on
/// the trial only, so every sweep point sees the same scenes; the noise
/// stream is distinct per `(point, trial)`.
pub fn trial_rngs(master_seed: u64, point: usize, trial: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut scene = ChaCha8Rng::seed_from_u64(master_seed);
    scene.set_stream(trial as u64);
    let mut noise = ChaCha8Rng::seed_from_u64(master_seed);
    noise.set_stream(((point as u64 + 1) << 32) | trial as u64);
    (scene, noise)
}

/// One scene at one sweep point, scored for every method of `spec`.
pub fn run_trial(
    spec: &ExperimentSpec,
    point: &PointParams,
    trial: usize,
) -> Result<Vec<TrialResult>> {
    let (mut scene_rng, mut noise_rng) = trial_rngs(spec.master_seed, point.index, trial);
    let scen = &point.scenario;
    let paths = point.sampler.sample(scen, &mut scene_rng)?;
    let offsets = generate_offsets(scen, spec.offsets.timing, spec.offsets.cfo, &mut scene_rng);
    let symbols = generate_symbols(scen, &mut scene_rng);
    let rx = synthesize_rx(scen, &paths, &offsets, &symbols, &mut noise_rng)?;
    let (los, nlos) = split_los(&paths)?;
    let targets: Vec<_> = nlos
        .iter()
        .map(|p| crate::model::PathParams {
            delay_s: p.delay_s - los.delay_s,
            ..*p
        })
        .collect();

    let cfg = &point.pipeline;
    let prepared = prepare(&rx, cfg)?;
    let prediction = if spec.predict {
        let mirror = MirrorConfig {
            n0: Some(prepared.n0),
            ..cfg.mirror.clone()
        };
        let selection = resolve_selection(&prepared.xi, &mirror);
        let aoa = cfg.estimate_aoa.then_some(&cfg.aoa);
        let r = perturbation_report(
            scen,
            &paths,
            prepared.rho.reference,
            selection,
            cfg.mirror.p,
            cfg.mirror.q,
            aoa,
        )?;
        Some(Prediction {
            nmse_delay: r.nmse_delay(scen),
            nmse_doppler: r.nmse_doppler(scen),
            var_aoa: r.predicted_var_aoa,
            structured_nmse_delay: r.structured_nmse_delay(scen),
            structured_nmse_doppler: r.structured_nmse_doppler(scen),
            structured_var_aoa: r.structured_var_aoa,
        })
    } else {
        None
    };

    let mut out = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let start = Instant::now();
        let res = estimate_prepared(
            method,
            &rx,
            &prepared,
            los.spatial_freq,
            los.delay_s,
            scen,
            cfg,
        )?;
        let wall = start.elapsed().as_secs_f64();
        let mut tr = TrialResult::score(
            method,
            trial,
            &targets,
            &res.estimates.targets,
            scen,
            spec.detection_nmse_threshold,
        );
        tr.candidates_evaluated = [&res.stage1.doppler, &res.stage1.delay]
            .iter()
            .filter_map(|s| s.as_ref().map(|s| s.candidates_evaluated))
            .sum();
        tr.wall_time_s = wall;
        tr.prediction = prediction;
        out.push(tr);
    }
    Ok(out)
}

/// Runs every sweep point; trials execute in parallel on the current rayon
/// pool and are reduced in trial order, so the rows do not depend on the
/// thread count. Rows are ordered by sweep point, then by method.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<MetricRow>> {
    spec.validate()?;
    let kind = spec.sweep.kind();
    let mut rows = Vec::with_capacity(spec.sweep.len() * spec.methods.len());
    for point in spec.points() {
        let trials: Result<Vec<Vec<TrialResult>>> = (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(spec, &point, t))
            .collect();
        let trials = trials?;
        for (k, &method) in spec.methods.iter().enumerate() {
            let per: Vec<TrialResult> = trials.iter().map(|t| t[k].clone()).collect();
            rows.push(summarize(
                method,
                kind,
                point.value,
                &per,
                spec.detection_nmse_threshold,
            ));
        }
    }
    Ok(rows)
}
