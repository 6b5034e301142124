use crate::aoa::angle_distance;
use crate::estimate::TargetEstimate;
use crate::model::{PathParams, ScenarioConfig};
use crate::pipeline::Method;

use super::config::SweepKind;

/// `mean(|e|^2) / normalizer^2`; NaN for no errors.
pub fn nmse(errors: &[f64], normalizer: f64) -> f64 {
    if errors.is_empty() {
        return f64::NAN;
    }
    errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64 / (normalizer * normalizer)
}

/// Median of the finite entries; NaN when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Greedy one-to-one assignment of estimates to targets by the distance
/// `(d_tau / T)^2 + (d_f T_A)^2`, closest pair first. `targets` carry
/// delays relative to the LOS path in `delay_s`. Entry `i` of the result is
/// the estimate index assigned to target `i`.
pub fn match_targets(
    targets: &[PathParams],
    estimates: &[TargetEstimate],
    scen: &ScenarioConfig,
) -> Vec<Option<usize>> {
    let t = scen.symbol_period();
    let ta = scen.packet_interval_s;
    let mut pairs = Vec::with_capacity(targets.len() * estimates.len());
    for (i, tg) in targets.iter().enumerate() {
        for (j, e) in estimates.iter().enumerate() {
            let d = ((e.delay_rel_s - tg.delay_s) / t).powi(2)
                + ((e.doppler_hz - tg.doppler_hz) * ta).powi(2);
            pairs.push((d, i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![None; targets.len()];
    let mut used = vec![false; estimates.len()];
    for (_, i, j) in pairs {
        if out[i].is_none() && !used[j] {
            out[i] = Some(j);
            used[j] = true;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetOutcome {
    /// Delay relative to the LOS path.
    pub truth: PathParams,
    pub estimate: Option<TargetEstimate>,
    /// `|d_tau|^2 / T^2`; NaN when unmatched.
    pub nmse_delay: f64,
    /// `|d_f|^2 T_A^2`; NaN when unmatched.
    pub nmse_doppler: f64,
    /// Wrapped spatial-frequency error.
    pub aoa_error_rad: Option<f64>,
    pub detected: bool,
}

/// Predicted errors for one scene, in NMSE units for delay/Doppler and
/// rad^2 for `Omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub nmse_delay: f64,
    pub nmse_doppler: f64,
    pub var_aoa: f64,
    pub structured_nmse_delay: f64,
    pub structured_nmse_doppler: f64,
    pub structured_var_aoa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub method: Method,
    pub trial: usize,
    pub targets: Vec<TargetOutcome>,
    pub num_estimates: usize,
    /// Estimates not assigned to any target.
    pub unmatched_estimates: usize,
    /// Coarse pseudo-spectrum evaluations of the delay and Doppler searches.
    pub candidates_evaluated: usize,
    pub wall_time_s: f64,
    pub prediction: Option<Prediction>,
}

impl TrialResult {
    /// Scores `estimates` against `targets` (relative delays).
    pub fn score(
        method: Method,
        trial: usize,
        targets: &[PathParams],
        estimates: &[TargetEstimate],
        scen: &ScenarioConfig,
        threshold: f64,
    ) -> Self {
        let assign = match_targets(targets, estimates, scen);
        let t = scen.symbol_period();
        let ta = scen.packet_interval_s;
        let outcomes: Vec<TargetOutcome> = targets
            .iter()
            .zip(&assign)
            .map(|(tg, a)| match a.map(|j| estimates[j]) {
                Some(e) => {
                    let nd = ((e.delay_rel_s - tg.delay_s) / t).powi(2);
                    let nf = ((e.doppler_hz - tg.doppler_hz) * ta).powi(2);
                    TargetOutcome {
                        truth: *tg,
                        estimate: Some(e),
                        nmse_delay: nd,
                        nmse_doppler: nf,
                        aoa_error_rad: e.aoa_rad.map(|w| angle_distance(w, tg.spatial_freq)),
                        detected: nd < threshold && nf < threshold,
                    }
                }
                None => TargetOutcome {
                    truth: *tg,
                    estimate: None,
                    nmse_delay: f64::NAN,
                    nmse_doppler: f64::NAN,
                    aoa_error_rad: None,
                    detected: false,
                },
            })
            .collect();
        let matched = assign.iter().flatten().count();
        Self {
            method,
            trial,
            targets: outcomes,
            num_estimates: estimates.len(),
            unmatched_estimates: estimates.len() - matched,
            candidates_evaluated: 0,
            wall_time_s: 0.0,
            prediction: None,
        }
    }
}

/// `(Pd, Pfa)`: detected targets over all targets, and unmatched or failing
/// estimates over all estimates. A matched estimate fails when its target
/// is not detected at `threshold`.
pub fn roc_point(trials: &[TrialResult], threshold: f64) -> (f64, f64) {
    let mut targets = 0usize;
    let mut detected = 0usize;
    let mut estimates = 0usize;
    let mut false_alarms = 0usize;
    for tr in trials {
        targets += tr.targets.len();
        estimates += tr.num_estimates;
        false_alarms += tr.unmatched_estimates;
        for o in &tr.targets {
            let hit = o.nmse_delay < threshold && o.nmse_doppler < threshold;
            if hit {
                detected += 1;
            } else if o.estimate.is_some() {
                false_alarms += 1;
            }
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    (ratio(detected, targets), ratio(false_alarms, estimates))
}

/// One CSV row: one method at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub method: Method,
    pub sweep_kind: SweepKind,
    pub sweep_value: f64,
    pub trials: usize,
    pub targets: usize,
    pub estimates: usize,
    pub nmse_delay_mean: f64,
    pub nmse_delay_median: f64,
    pub nmse_doppler_mean: f64,
    pub nmse_doppler_median: f64,
    pub aoa_rmse_rad: f64,
    pub aoa_median_abs_rad: f64,
    pub pd: f64,
    pub pfa: f64,
    pub candidates_mean: f64,
    pub pred_nmse_delay: f64,
    pub pred_nmse_doppler: f64,
    pub pred_aoa_rmse_rad: f64,
    pub pred_structured_nmse_delay: f64,
    pub pred_structured_nmse_doppler: f64,
    pub pred_structured_aoa_rmse_rad: f64,
}

/// Aggregates trials of one method at one sweep point. NMSE and AoA figures
/// cover matched targets only; misses show up in `pd`.
pub fn summarize(
    method: Method,
    kind: SweepKind,
    value: f64,
    trials: &[TrialResult],
    threshold: f64,
) -> MetricRow {
    let outcomes: Vec<&TargetOutcome> = trials
        .iter()
        .flat_map(|t| &t.targets)
        .filter(|o| o.estimate.is_some())
        .collect();
    let nd: Vec<f64> = outcomes.iter().map(|o| o.nmse_delay).collect();
    let nf: Vec<f64> = outcomes.iter().map(|o| o.nmse_doppler).collect();
    let aoa: Vec<f64> = outcomes.iter().filter_map(|o| o.aoa_error_rad).collect();
    let (pd, pfa) = roc_point(trials, threshold);
    let preds: Vec<Prediction> = trials.iter().filter_map(|t| t.prediction).collect();
    let pmean = |f: fn(&Prediction) -> f64| mean(preds.iter().map(f));
    MetricRow {
        method,
        sweep_kind: kind,
        sweep_value: value,
        trials: trials.len(),
        targets: trials.iter().map(|t| t.targets.len()).sum(),
        estimates: trials.iter().map(|t| t.num_estimates).sum(),
        nmse_delay_mean: mean(nd.iter().copied()),
        nmse_delay_median: median(&nd),
        nmse_doppler_mean: mean(nf.iter().copied()),
        nmse_doppler_median: median(&nf),
        aoa_rmse_rad: mean(aoa.iter().map(|e| e * e)).sqrt(),
        aoa_median_abs_rad: median(&aoa.iter().map(|e| e.abs()).collect::<Vec<_>>()),
        pd,
        pfa,
        candidates_mean: mean(trials.iter().map(|t| t.candidates_evaluated as f64)),
        pred_nmse_delay: pmean(|p| p.nmse_delay),
        pred_nmse_doppler: pmean(|p| p.nmse_doppler),
        pred_aoa_rmse_rad: pmean(|p| p.var_aoa).sqrt(),
        pred_structured_nmse_delay: pmean(|p| p.structured_nmse_delay),
        pred_structured_nmse_doppler: pmean(|p| p.structured_nmse_doppler),
        pred_structured_aoa_rmse_rad: pmean(|p| p.structured_var_aoa).sqrt(),
    }
}
