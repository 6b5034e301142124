//! Comparison methods: conventional (non-mirrored) MUSIC on `xi` and the
//! add-minus suppression (AMS) transform.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::cacc::{CorrGrid, XiGrid};
use crate::error::{Error, Result};
use crate::estimate::EstimateSet;
use crate::grid::Grid3;
use crate::mirrored::{
    candidate_grid, fold_half, music_scan, pair_and_sign_with, resolve_selection, Algorithm1Output,
    LineSearch, MirrorConfig, PairGain, SearchOptions,
};
use crate::model::{RxGrid, ScenarioConfig};
use crate::subspace::{estimate_model_order, svd_left, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Doppler,
    Delay,
}

/// `(P+1) x (M-P)` Hankel matrix, column `m` = `xi[m..=m+P, g0]` on plane `n0`.
pub fn hankel_p(xi: &XiGrid, n0: usize, g0: usize, p: usize) -> Result<CMatrix> {
    let (m_count, g_count) = (xi.packets(), xi.subcarriers());
    if p >= m_count || g0 >= g_count {
        return Err(Error::InvalidConfig(format!(
            "Hankel P = {p}, g0 = {g0} on {m_count}x{g_count}"
        )));
    }
    let s = xi.grid.slice(xi.slice_of_antenna(n0)?);
    Ok(CMatrix::from_fn(p + 1, m_count - p, |i, m| {
        s[(m + i) * g_count + g0]
    }))
}

/// `(Q+1) x (G-Q)` Hankel matrix, column `g` = `xi[m0, g..=g+Q]` on plane `n0`.
pub fn hankel_q(xi: &XiGrid, n0: usize, m0: usize, q: usize) -> Result<CMatrix> {
    let (m_count, g_count) = (xi.packets(), xi.subcarriers());
    if q >= g_count || m0 >= m_count {
        return Err(Error::InvalidConfig(format!(
            "Hankel Q = {q}, m0 = {m0} on {m_count}x{g_count}"
        )));
    }
    let s = xi.grid.slice(xi.slice_of_antenna(n0)?);
    let row = &s[m0 * g_count..(m0 + 1) * g_count];
    Ok(CMatrix::from_fn(q + 1, g_count - q, |i, g| row[g + i]))
}

/// `e^{j i 2 pi T_A f}`.
pub fn conventional_basis_p(f_hz: f64, p: usize, packet_interval: f64) -> Vec<Complex64> {
    let phi = TAU * packet_interval * f_hz;
    (0..=p).map(|i| Complex64::cis(i as f64 * phi)).collect()
}

/// `e^{-j i 2 pi tau / T}`.
pub fn conventional_basis_q(tau_s: f64, q: usize, symbol_period: f64) -> Vec<Complex64> {
    let theta = TAU * tau_s / symbol_period;
    (0..=q)
        .map(|i| Complex64::cis(-(i as f64) * theta))
        .collect()
}

fn wrap_signed(x: f64, period: f64) -> f64 {
    x - period * (x / period).round()
}

/// MUSIC over the full signed range with a plain steering basis. The signal
/// rank and the number of peaks are both `count`.
pub fn conventional_music(
    mat: &CMatrix,
    axis: Axis,
    count: usize,
    scen: &ScenarioConfig,
    opts: SearchOptions,
) -> Result<LineSearch> {
    let len = mat.nrows() - 1;
    let dec = svd_left(mat)?;
    let singular_values = dec.singular_values.clone();
    let proj = dec.with_rank(count)?.projector();
    let (resolution, period) = match axis {
        Axis::Doppler => (
            1.0 / (scen.packet_interval_s * (len + 1) as f64),
            1.0 / scen.packet_interval_s,
        ),
        Axis::Delay => (
            scen.symbol_period() / (len + 1) as f64,
            scen.symbol_period(),
        ),
    };
    let step = opts.spacing(resolution);
    let grid = candidate_grid(step, 0.5 * period, true);
    let ta = scen.packet_interval_s;
    let t = scen.symbol_period();
    let (values, scores, complete) = match axis {
        Axis::Doppler => music_scan(
            &proj,
            |f| conventional_basis_p(f, len, ta),
            &grid,
            count,
            step,
            opts.refine,
        ),
        Axis::Delay => music_scan(
            &proj,
            |x| conventional_basis_q(x, len, t),
            &grid,
            count,
            step,
            opts.refine,
        ),
    };
    let values = values.into_iter().map(|v| wrap_signed(v, period)).collect();
    Ok(LineSearch {
        values,
        scores,
        complete,
        candidates_evaluated: grid.len(),
        step,
        resolution,
        singular_values,
    })
}

/// Magnitudes of signed peaks, strongest first, dropping any within `step`
/// of one already kept; at most `count` are returned.
pub fn fold_to_unsigned(values: &[f64], count: usize, step: f64, period: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(count);
    for &v in values {
        if out.len() == count {
            break;
        }
        let a = fold_half(v, period);
        if out.iter().all(|&o| (o - a).abs() >= step) {
            out.push(a);
        }
    }
    out
}

fn model_order(mat: &CMatrix, cfg: &MirrorConfig) -> Result<usize> {
    if cfg.mdl {
        let sv = svd_left(mat)?.singular_values;
        Ok(estimate_model_order(&sv, mat.ncols()))
    } else {
        Ok(cfg.num_targets)
    }
}

/// Conventional MUSIC on `xi`: rank `2L` per axis (actual and mirrored
/// components), folded to `L` magnitudes, then the same pairing and sign
/// recovery as the mirrored method.
pub fn conventional_estimate(
    xi: &XiGrid,
    omega0: f64,
    tau0: f64,
    scen: &ScenarioConfig,
    cfg: &MirrorConfig,
) -> Result<Algorithm1Output> {
    run_baseline(xi, omega0, tau0, scen, cfg, 2, PairGain::Coherent)
}

fn run_baseline(
    xi: &XiGrid,
    omega0: f64,
    tau0: f64,
    scen: &ScenarioConfig,
    cfg: &MirrorConfig,
    rank_factor: usize,
    gain: PairGain,
) -> Result<Algorithm1Output> {
    let selection = resolve_selection(xi, cfg);
    let empty = Algorithm1Output {
        estimates: EstimateSet::empty(),
        selection,
        order: 0,
        doppler: None,
        delay: None,
    };
    if cfg.num_targets == 0 && !cfg.mdl || !(xi.grid.mean_power() > 1e-24) {
        return Ok(empty);
    }
    let pmat = hankel_p(xi, selection.n0, selection.g0, cfg.p)?;
    let qmat = hankel_q(xi, selection.n0, selection.m0, cfg.q)?;
    // With MDL the estimated rank already counts mirrored components.
    let rank = if cfg.mdl {
        model_order(&pmat, cfg)?
    } else {
        rank_factor * cfg.num_targets
    };
    let order = rank.div_ceil(rank_factor).max(1);
    let rank = rank.min(pmat.nrows() - 1).min(qmat.nrows() - 1);
    let doppler = conventional_music(&pmat, Axis::Doppler, rank, scen, cfg.search())?;
    let delay = conventional_music(&qmat, Axis::Delay, rank, scen, cfg.search())?;
    let f_abs = fold_to_unsigned(
        &doppler.values,
        order,
        doppler.resolution,
        1.0 / scen.packet_interval_s,
    );
    let t_abs = fold_to_unsigned(&delay.values, order, delay.resolution, scen.symbol_period());
    let mut estimates = pair_and_sign_with(&f_abs, &t_abs, xi, omega0, tau0, scen, gain);
    estimates.short_doppler = !doppler.complete || f_abs.len() < order;
    estimates.short_delay = !delay.complete || t_abs.len() < order;
    Ok(Algorithm1Output {
        estimates,
        selection,
        order,
        doppler: Some(doppler),
        delay: Some(delay),
    })
}

/// AMS signals on all antennas and the cross-correlated output on antennas
/// `1..N` against antenna 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AmsGrids {
    /// `y_n - D_n`.
    pub a: Grid3,
    /// `y_n + D_n`.
    pub b: Grid3,
    /// `A_n conj(B_0)`.
    pub xi: XiGrid,
}

/// `D_n[g]` is the mean of `y_n[m, g]` over all packets.
pub fn ams_transform(rx: &RxGrid) -> Result<AmsGrids> {
    let (n_ant, m_count, g_count) = rx.grid.shape();
    if n_ant < 2 {
        return Err(Error::InvalidConfig(
            "AMS needs at least two antennas".into(),
        ));
    }
    let mut d = vec![Complex64::new(0.0, 0.0); n_ant * g_count];
    for n in 0..n_ant {
        for (i, v) in rx.grid.slice(n).iter().enumerate() {
            d[n * g_count + i % g_count] += v;
        }
    }
    for v in &mut d {
        *v /= m_count as f64;
    }
    let a = Grid3::from_fn(n_ant, m_count, g_count, |n, m, g| {
        rx.grid.get(n, m, g) - d[n * g_count + g]
    });
    let b = Grid3::from_fn(n_ant, m_count, g_count, |n, m, g| {
        rx.grid.get(n, m, g) + d[n * g_count + g]
    });
    let antennas: Vec<usize> = (1..n_ant).collect();
    let cross = Grid3::from_fn(n_ant - 1, m_count, g_count, |s, m, g| {
        a.get(s + 1, m, g) * b.get(0, m, g).conj()
    });
    Ok(AmsGrids {
        a,
        b,
        xi: CorrGrid {
            grid: cross,
            antennas,
            reference: 0,
        },
    })
}

/// Conventional MUSIC at rank `L` on the AMS output (which keeps only the
/// actual term), paired per plane on the conjugated grid.
pub fn ams_estimate(
    ams: &AmsGrids,
    omega0: f64,
    tau0: f64,
    scen: &ScenarioConfig,
    cfg: &MirrorConfig,
) -> Result<Algorithm1Output> {
    run_baseline(
        &ams.xi,
        omega0,
        tau0,
        scen,
        cfg,
        1,
        PairGain::ConjugatePerPlane,
    )
}
