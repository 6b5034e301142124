//! First-order perturbation predictors for the Doppler, delay and AoA
//! estimates, and the entry-variance model of the perturbation matrix.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::aoa::{assemble_cmatrix, basis_pair, basis_pair_deriv, AoAConfig};
use crate::cacc::decompose_cacc;
use crate::error::{Error, Result};
use crate::mirrored::{
    assemble_p, assemble_q, basis_p, basis_p_deriv, basis_q, basis_q_deriv, Selection,
};
use crate::model::{split_los, PathParams, ScenarioConfig};
use crate::subspace::{svd_left, CMatrix, SubspaceDecomposition};

/// Entry variance of the perturbation `Psi` of `P` or `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiVariance {
    /// `sum_{l != x, l,x >= 1} |a_l|^2 |a_x|^2`, the mean power of the NLOS cross terms.
    pub delta_xi: f64,
    /// `|sum_{l >= 0} |a_l|^2 e^{j lag W_l}|^2`.
    pub delta_n0: f64,
    /// `4 delta_xi + 4 delta_n0 sigma^2`.
    pub total: f64,
}

fn delta_xi(targets: &[PathParams]) -> f64 {
    let p: Vec<f64> = targets.iter().map(|t| t.gain.norm_sqr()).collect();
    let sum: f64 = p.iter().sum();
    let sq: f64 = p.iter().map(|v| v * v).sum();
    sum * sum - sq
}

/// Objective minimised by the best correlation plane: `|sum_l |a_l|^2 e^{j lag W_l}|^2`.
pub fn proposition2_objective(paths: &[PathParams], lag: i32) -> f64 {
    paths
        .iter()
        .map(|p| p.gain.norm_sqr() * Complex64::cis(lag as f64 * p.spatial_freq))
        .sum::<Complex64>()
        .norm_sqr()
}

pub fn psi_variance(paths: &[PathParams], lag: i32, noise_variance: f64) -> Result<PsiVariance> {
    let (_, targets) = split_los(paths)?;
    let delta_xi = delta_xi(&targets);
    let delta_n0 = proposition2_objective(paths, lag);
    Ok(PsiVariance {
        delta_xi,
        delta_n0,
        total: 4.0 * delta_xi + 4.0 * delta_n0 * noise_variance,
    })
}

/// Entry variance of the perturbation of the AoA matrix: each entry is a
/// single `xi` sample, averaged over the correlation planes.
pub fn psi_variance_c(paths: &[PathParams], lags: &[i32], noise_variance: f64) -> Result<f64> {
    let (_, targets) = split_los(paths)?;
    if lags.is_empty() {
        return Err(Error::InvalidConfig("no correlation planes".into()));
    }
    let dx = delta_xi(&targets);
    let mean = lags
        .iter()
        .map(|&l| dx + proposition2_objective(paths, l) * noise_variance)
        .sum::<f64>();
    Ok(mean / lags.len() as f64)
}

fn to_vec(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}

/// `K = sum_k g_k b_k^H` and `Re sum_k d_k^H g_k` of the single-step Newton
/// error `Re[sum_k b_k^H Psi^H g_k] / Re sum_k d_k^H g_k`, with
/// `b_k = -V E^-1 U^H basis_k` and `g_k` the null-space projection of the
/// derivative `d_k`.
fn newton_terms(
    dec: &SubspaceDecomposition,
    basis: &[Vec<Complex64>],
    deriv: &[Vec<Complex64>],
) -> Result<(CMatrix, f64)> {
    if basis.len() != deriv.len() || basis.is_empty() {
        return Err(Error::Shape(
            "basis and derivative column counts differ".into(),
        ));
    }
    let r = dec.signal_rank;
    if r == 0 {
        return Err(Error::DegenerateBasis("signal rank is zero".into()));
    }
    let us = dec.signal_space();
    let vs = dec.v.columns(0, r).into_owned();
    let inv_e: Vec<f64> = dec.singular_values[..r]
        .iter()
        .map(|&s| if s > 0.0 { 1.0 / s } else { 0.0 })
        .collect();
    let rows = us.nrows();
    let mut outer = CMatrix::zeros(rows, vs.nrows());
    let mut denom = 0.0;
    for (b, d) in basis.iter().zip(deriv) {
        if b.len() != rows || d.len() != rows {
            return Err(Error::Shape(format!(
                "basis length {} vs {rows} rows",
                b.len()
            )));
        }
        let b = to_vec(b);
        let d = to_vec(d);
        let mut coef = us.adjoint() * &b;
        for (c, w) in coef.iter_mut().zip(&inv_e) {
            *c *= *w;
        }
        let beta = -(&vs * coef);
        let gamma = &d - &us * (us.adjoint() * &d);
        outer += &gamma * beta.adjoint();
        denom += d.dotc(&gamma).re;
    }
    if !(denom.abs() > 1e-300) {
        return Err(Error::DegenerateBasis(
            "derivative lies in the signal subspace".into(),
        ));
    }
    Ok((outer, denom))
}

/// Variance of the single-step Newton error of a MUSIC estimate when the
/// entries of `Psi` are independent with variance `psi_variance`:
/// `1/2 s2 ||K||_F^2 / den^2`. `dec` must be the signal-only decomposition
/// with its signal rank set.
pub fn predict_parameter_error(
    dec: &SubspaceDecomposition,
    basis: &[Vec<Complex64>],
    deriv: &[Vec<Complex64>],
    psi_variance: f64,
) -> Result<f64> {
    let (k, denom) = newton_terms(dec, basis, deriv)?;
    let num: f64 = k.iter().map(|v| v.norm_sqr()).sum();
    Ok(0.5 * psi_variance * num / (denom * denom))
}

/// As [`predict_parameter_error`], but `Psi[i, j]` is the sum of the white
/// samples listed by `samples_of(i, j)` (each of variance `sample_variance`),
/// so samples shared between entries add coherently.
pub fn predict_parameter_error_structured(
    dec: &SubspaceDecomposition,
    basis: &[Vec<Complex64>],
    deriv: &[Vec<Complex64>],
    sample_variance: f64,
    num_samples: usize,
    samples_of: impl Fn(usize, usize) -> [Option<usize>; 2],
) -> Result<f64> {
    let (k, denom) = newton_terms(dec, basis, deriv)?;
    let mut c = vec![Complex64::new(0.0, 0.0); num_samples];
    for j in 0..k.ncols() {
        for i in 0..k.nrows() {
            for idx in samples_of(i, j).into_iter().flatten() {
                let slot = c
                    .get_mut(idx)
                    .ok_or_else(|| Error::Index(format!("sample {idx} of {num_samples}")))?;
                *slot += k[(i, j)].conj();
            }
        }
    }
    let num: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    Ok(0.5 * sample_variance * num / (denom * denom))
}

/// Variance of one `xi` sample from the noise cross terms of the CACC,
/// `sigma^2 (P_n + P_ref) + sigma^4`. The NLOS cross terms are deterministic
/// and left out: they bias the estimates rather than spread them.
pub fn xi_sample_variance(paths: &[PathParams], noise_variance: f64) -> f64 {
    let power: f64 = paths.iter().map(|p| p.gain.norm_sqr()).sum();
    2.0 * power * noise_variance + noise_variance * noise_variance
}

/// Predicted error variances for one target, from the independent-entry
/// model and from the structured model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetPrediction {
    pub var_doppler_hz2: f64,
    pub var_delay_s2: f64,
    /// Of the spatial frequency `Omega`, rad^2.
    pub var_aoa_rad2: f64,
    pub structured_var_doppler_hz2: f64,
    pub structured_var_delay_s2: f64,
    pub structured_var_aoa_rad2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub targets: Vec<TargetPrediction>,
    /// Mean over targets, independent-entry model.
    pub predicted_var_doppler: f64,
    pub predicted_var_delay: f64,
    pub predicted_var_aoa: f64,
    /// Mean over targets, structured model.
    pub structured_var_doppler: f64,
    pub structured_var_delay: f64,
    pub structured_var_aoa: f64,
    pub psi_entry_variance: f64,
    pub psi_entry_variance_c: f64,
    pub xi_sample_variance: f64,
    pub delta_xi: f64,
    pub delta_n0: f64,
}

impl PerturbationReport {
    /// Mean predicted `(f T_A)^2` error.
    pub fn nmse_doppler(&self, scen: &ScenarioConfig) -> f64 {
        self.predicted_var_doppler * scen.packet_interval_s.powi(2)
    }

    /// Mean predicted `(tau / T)^2` error.
    pub fn nmse_delay(&self, scen: &ScenarioConfig) -> f64 {
        self.predicted_var_delay / scen.symbol_period().powi(2)
    }

    pub fn structured_nmse_doppler(&self, scen: &ScenarioConfig) -> f64 {
        self.structured_var_doppler * scen.packet_interval_s.powi(2)
    }

    pub fn structured_nmse_delay(&self, scen: &ScenarioConfig) -> f64 {
        self.structured_var_delay / scen.symbol_period().powi(2)
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Predictions for every target of a scene from the analytic `xi` at the
/// given correlation reference and `P`/`Q` selection. `aoa` is skipped
/// (NaN) when `None`.
pub fn perturbation_report(
    scen: &ScenarioConfig,
    paths: &[PathParams],
    reference: usize,
    selection: Selection,
    p: usize,
    q: usize,
    aoa: Option<&AoAConfig>,
) -> Result<PerturbationReport> {
    let (los, targets) = split_los(paths)?;
    let xi = decompose_cacc(scen, paths, reference)?.xi();
    let l = targets.len();
    let lag = selection.n0 as i32 - reference as i32;
    let psi = psi_variance(paths, lag, scen.noise_variance)?;
    let lags = xi.lags();
    let psi_c = psi_variance_c(paths, &lags, scen.noise_variance)?;
    let sample_var = xi_sample_variance(paths, scen.noise_variance);
    let ta = scen.packet_interval_s;
    let t = scen.symbol_period();
    let (s_count, m_count, g_count) = xi.grid.shape();

    let pdec = svd_left(&assemble_p(&xi, selection.n0, selection.g0, p)?)?.with_rank(l)?;
    let qdec = svd_left(&assemble_q(&xi, selection.n0, selection.m0, q)?)?.with_rank(l)?;
    let cdec = match aoa {
        Some(cfg) => Some(svd_left(&assemble_cmatrix(&xi, cfg)?)?.with_rank(4 * l)?),
        None => None,
    };
    let p_samples = |i: usize, m: usize| [Some(m + i), Some(m + p - i)];
    let q_samples = |i: usize, g: usize| [Some(g + i), Some(g + q - i)];
    let c_samples = |r: usize, col: usize| {
        let (k, i, s) = (col / 2, r / s_count, r % s_count);
        let (m, g) = if col % 2 == 0 { (k, k + i) } else { (k + i, k) };
        [Some((s * m_count + m) * g_count + g), None]
    };

    let mut out = Vec::with_capacity(l);
    for tgt in &targets {
        let f = tgt.doppler_hz.abs();
        let tau = tgt.delay_s - los.delay_s;
        let (bp, dp) = ([basis_p(f, p, 0, ta)], [basis_p_deriv(f, p, 0, ta)]);
        let (bq, dq) = ([basis_q(tau, q, 0, t)], [basis_q_deriv(tau, q, 0, t)]);
        let (var_aoa_rad2, structured_var_aoa_rad2) = match (&cdec, aoa) {
            (Some(dec), Some(cfg)) => {
                let b =
                    basis_pair(tgt.spatial_freq, tau, tgt.doppler_hz, cfg.c, &lags, scen).columns();
                let d = basis_pair_deriv(tgt.spatial_freq, tau, tgt.doppler_hz, cfg.c, &lags, scen)
                    .columns();
                (
                    predict_parameter_error(dec, &b, &d, psi_c)?,
                    predict_parameter_error_structured(
                        dec,
                        &b,
                        &d,
                        sample_var,
                        s_count * m_count * g_count,
                        c_samples,
                    )?,
                )
            }
            _ => (f64::NAN, f64::NAN),
        };
        out.push(TargetPrediction {
            var_doppler_hz2: predict_parameter_error(&pdec, &bp, &dp, psi.total)?,
            var_delay_s2: predict_parameter_error(&qdec, &bq, &dq, psi.total)?,
            var_aoa_rad2,
            structured_var_doppler_hz2: predict_parameter_error_structured(
                &pdec, &bp, &dp, sample_var, m_count, p_samples,
            )?,
            structured_var_delay_s2: predict_parameter_error_structured(
                &qdec, &bq, &dq, sample_var, g_count, q_samples,
            )?,
            structured_var_aoa_rad2,
        });
    }
    Ok(PerturbationReport {
        predicted_var_doppler: mean(out.iter().map(|t| t.var_doppler_hz2)),
        predicted_var_delay: mean(out.iter().map(|t| t.var_delay_s2)),
        predicted_var_aoa: mean(out.iter().map(|t| t.var_aoa_rad2)),
        structured_var_doppler: mean(out.iter().map(|t| t.structured_var_doppler_hz2)),
        structured_var_delay: mean(out.iter().map(|t| t.structured_var_delay_s2)),
        structured_var_aoa: mean(out.iter().map(|t| t.structured_var_aoa_rad2)),
        targets: out,
        psi_entry_variance: psi.total,
        psi_entry_variance_c: psi_c,
        xi_sample_variance: sample_var,
        delta_xi: psi.delta_xi,
        delta_n0: psi.delta_n0,
    })
}
