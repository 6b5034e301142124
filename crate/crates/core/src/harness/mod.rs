//! Monte-Carlo experiments: TOML specs, truth matching, metrics, CSV output
//! and complexity counters.

mod bench;
pub(crate) mod config;
mod csv;
mod metrics;
mod runner;

pub use bench::{bench_candidate_counts, write_bench_csv, BenchRow};
pub use config::{ExperimentSpec, Sweep, SweepKind};
pub use csv::{write_metrics_csv, METRICS_CSV_VERSION};
pub use metrics::{
    match_targets, median, nmse, roc_point, summarize, MetricRow, Prediction, TargetOutcome,
    TrialResult,
};
pub use runner::{run_experiment, run_trial, trial_rngs, PointParams};
