//! Mirrored-MUSIC: palindromic signal vectors, the `P`/`Q` matrices, the
//! half-range Doppler and delay searches, and pair matching with sign
//! recovery through the combining gain `P_xi`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cacc::{select_reference_index_n0, XiGrid};
use crate::error::{Error, Result};
use crate::estimate::{EstimateSet, TargetEstimate};
use crate::model::ScenarioConfig;
use crate::subspace::{estimate_model_order, golden_min, pick_peaks, svd_left, CMatrix, Projector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MirrorConfig {
    /// Mirrored length along packets; `L <= P < M - L`.
    pub p: usize,
    /// Mirrored length along subcarriers; `L <= Q < G - L`.
    pub q: usize,
    /// Plane used for `P`/`Q`, as an antenna index. `None` selects it from
    /// the data.
    pub n0: Option<usize>,
    pub m0: Option<usize>,
    pub g0: Option<usize>,
    /// Number of targets to extract (the signal rank).
    pub num_targets: usize,
    /// Use MDL on the singular values of `P` instead of `num_targets`.
    pub mdl: bool,
    /// Golden-section refinement around each coarse peak.
    pub refine: bool,
    /// Candidates per resolution step `1/(T_A (P+1))` or `T/(Q+1)`.
    pub oversample: usize,
}

impl Default for MirrorConfig {
    fn default() -> Self {
        Self {
            p: 64,
            q: 128,
            n0: None,
            m0: None,
            g0: None,
            num_targets: 3,
            mdl: false,
            refine: true,
            oversample: 4,
        }
    }
}

/// Line-search settings shared by the mirrored and conventional searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub refine: bool,
    pub oversample: usize,
}

impl SearchOptions {
    /// One candidate per resolution step, no refinement.
    pub fn coarse() -> Self {
        Self {
            refine: false,
            oversample: 1,
        }
    }

    pub(crate) fn spacing(&self, resolution: f64) -> f64 {
        resolution / self.oversample.max(1) as f64
    }
}

impl MirrorConfig {
    pub fn search(&self) -> SearchOptions {
        SearchOptions {
            refine: self.refine,
            oversample: self.oversample,
        }
    }

    pub fn validate(&self, m_count: usize, g_count: usize) -> Result<()> {
        let l = self.num_targets;
        if !(l <= self.p && self.p + l < m_count) {
            return Err(Error::InvalidConfig(format!(
                "P = {} outside [{l}, {m_count} - {l})",
                self.p
            )));
        }
        if !(l <= self.q && self.q + l < g_count) {
            return Err(Error::InvalidConfig(format!(
                "Q = {} outside [{l}, {g_count} - {l})",
                self.q
            )));
        }
        Ok(())
    }
}

fn plane<'a>(xi: &'a XiGrid, n0: usize) -> Result<&'a [Complex64]> {
    Ok(xi.grid.slice(xi.slice_of_antenna(n0)?))
}

/// `p[i] = xi[m+i, g0] + xi[m+P-i, g0]` on plane `n0`.
pub fn mirrored_vector_p(
    xi: &XiGrid,
    n0: usize,
    m: usize,
    g0: usize,
    p: usize,
) -> Result<Vec<Complex64>> {
    let (m_count, g_count) = (xi.packets(), xi.subcarriers());
    if m + p >= m_count || g0 >= g_count {
        return Err(Error::Index(format!(
            "mirrored p at m={m}, P={p}, g0={g0} on {m_count}x{g_count}"
        )));
    }
    let s = plane(xi, n0)?;
    Ok((0..=p)
        .map(|i| s[(m + i) * g_count + g0] + s[(m + p - i) * g_count + g0])
        .collect())
}

/// `q[i] = xi[m0, g+i] + xi[m0, g+Q-i]` on plane `n0`.
pub fn mirrored_vector_q(
    xi: &XiGrid,
    n0: usize,
    m0: usize,
    g: usize,
    q: usize,
) -> Result<Vec<Complex64>> {
    let (m_count, g_count) = (xi.packets(), xi.subcarriers());
    if g + q >= g_count || m0 >= m_count {
        return Err(Error::Index(format!(
            "mirrored q at g={g}, Q={q}, m0={m0} on {m_count}x{g_count}"
        )));
    }
    let row = &plane(xi, n0)?[m0 * g_count..(m0 + 1) * g_count];
    Ok((0..=q).map(|i| row[g + i] + row[g + q - i]).collect())
}

/// `e^{j(m+i)phi} + e^{j(m+P-i)phi}` with `phi = 2 pi T_A f`.
pub fn basis_p(f_hz: f64, p: usize, m: usize, packet_interval: f64) -> Vec<Complex64> {
    let phi = TAU * packet_interval * f_hz;
    (0..=p)
        .map(|i| Complex64::cis((m + i) as f64 * phi) + Complex64::cis((m + p - i) as f64 * phi))
        .collect()
}

/// Derivative of [`basis_p`] with respect to `f`.
pub fn basis_p_deriv(f_hz: f64, p: usize, m: usize, packet_interval: f64) -> Vec<Complex64> {
    let k = TAU * packet_interval;
    let phi = k * f_hz;
    let j = Complex64::i();
    (0..=p)
        .map(|i| {
            let (a, b) = ((m + i) as f64, (m + p - i) as f64);
            j * k * (a * Complex64::cis(a * phi) + b * Complex64::cis(b * phi))
        })
        .collect()
}

/// `e^{-j(g+i)theta} + e^{-j(g+Q-i)theta}` with `theta = 2 pi tau / T`.
pub fn basis_q(tau_s: f64, q: usize, g: usize, symbol_period: f64) -> Vec<Complex64> {
    let theta = TAU * tau_s / symbol_period;
    (0..=q)
        .map(|i| {
            Complex64::cis(-((g + i) as f64) * theta)
                + Complex64::cis(-((g + q - i) as f64) * theta)
        })
        .collect()
}

pub fn basis_q_deriv(tau_s: f64, q: usize, g: usize, symbol_period: f64) -> Vec<Complex64> {
    let k = TAU / symbol_period;
    let theta = k * tau_s;
    let j = Complex64::i();
    (0..=q)
        .map(|i| {
            let (a, b) = ((g + i) as f64, (g + q - i) as f64);
            -j * k * (a * Complex64::cis(-a * theta) + b * Complex64::cis(-b * theta))
        })
        .collect()
}

/// `(P+1) x (M-P)` matrix of mirrored packet vectors at `(n0, g0)`.
pub fn assemble_p(xi: &XiGrid, n0: usize, g0: usize, p: usize) -> Result<CMatrix> {
    let m_count = xi.packets();
    if p >= m_count {
        return Err(Error::InvalidConfig(format!(
            "P = {p} needs more than {m_count} packets"
        )));
    }
    let cols: Result<Vec<_>> = (0..m_count - p)
        .map(|m| mirrored_vector_p(xi, n0, m, g0, p))
        .collect();
    let cols = cols?;
    Ok(CMatrix::from_fn(p + 1, cols.len(), |r, c| cols[c][r]))
}

/// `(Q+1) x (G-Q)` matrix of mirrored subcarrier vectors at `(n0, m0)`.
pub fn assemble_q(xi: &XiGrid, n0: usize, m0: usize, q: usize) -> Result<CMatrix> {
    let g_count = xi.subcarriers();
    if q >= g_count {
        return Err(Error::InvalidConfig(format!(
            "Q = {q} needs more than {g_count} subcarriers"
        )));
    }
    let cols: Result<Vec<_>> = (0..g_count - q)
        .map(|g| mirrored_vector_q(xi, n0, m0, g, q))
        .collect();
    let cols = cols?;
    Ok(CMatrix::from_fn(q + 1, cols.len(), |r, c| cols[c][r]))
}

/// Outcome of a one-dimensional MUSIC search.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSearch {
    /// Estimates, strongest peak first.
    pub values: Vec<f64>,
    /// Pseudo-spectrum value at each estimate.
    pub scores: Vec<f64>,
    /// All requested peaks were found.
    pub complete: bool,
    /// Coarse-grid candidates evaluated (refinement not included).
    pub candidates_evaluated: usize,
    /// Candidate spacing.
    pub step: f64,
    /// `1/(T_A (P+1))` or `T/(Q+1)`.
    pub resolution: f64,
    pub singular_values: Vec<f64>,
}

/// Strictly positive grid `k * step < upper`; with `signed`, the mirrored
/// negatives are interleaved too.
pub fn candidate_grid(step: f64, upper: f64, signed: bool) -> Vec<f64> {
    let mut pos = Vec::new();
    let mut k = 1usize;
    while (k as f64) * step < upper * (1.0 - 1e-12) {
        pos.push(k as f64 * step);
        k += 1;
    }
    if !signed {
        return pos;
    }
    let mut out: Vec<f64> = pos.iter().rev().map(|v| -v).collect();
    out.extend(pos);
    out
}

pub(crate) fn music_scan(
    proj: &Projector,
    basis: impl Fn(f64) -> Vec<Complex64>,
    grid: &[f64],
    count: usize,
    step: f64,
    refine: bool,
) -> (Vec<f64>, Vec<f64>, bool) {
    let values: Vec<f64> = grid.iter().map(|&x| proj.value(&[basis(x)])).collect();
    let peaks = pick_peaks(&values, count, 1);
    let mut est = Vec::with_capacity(peaks.indices.len());
    let mut scores = Vec::with_capacity(peaks.indices.len());
    for &i in &peaks.indices {
        let x0 = grid[i];
        let x = if refine {
            golden_min(|x| proj.null_norm(&[basis(x)]), x0 - step, x0 + step, 48)
        } else {
            x0
        };
        est.push(x);
        scores.push(proj.value(&[basis(x)]));
    }
    (est, scores, peaks.complete)
}

fn search(
    mat: &CMatrix,
    count: usize,
    basis: impl Fn(f64) -> Vec<Complex64>,
    resolution: f64,
    upper: f64,
    opts: SearchOptions,
) -> Result<LineSearch> {
    let dec = svd_left(mat)?;
    let singular_values = dec.singular_values.clone();
    let proj = dec.with_rank(count)?.projector();
    let step = opts.spacing(resolution);
    let grid = candidate_grid(step, upper, false);
    let (values, scores, complete) = music_scan(&proj, basis, &grid, count, step, opts.refine);
    // Refinement may step past the mirror point; fold back into (0, upper).
    let period = 2.0 * upper;
    let values = values.into_iter().map(|v| fold_half(v, period)).collect();
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

/// Maps `x` to `|x|` modulo `period`, within `[0, period/2]`.
pub fn fold_half(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    r.min(period - r)
}

/// `L` values of `|f_D|` in `(0, 1/(2 T_A))` from the mirrored packet matrix.
pub fn estimate_dopplers_abs(
    pmat: &CMatrix,
    count: usize,
    packet_interval: f64,
    opts: SearchOptions,
) -> Result<LineSearch> {
    let p = pmat.nrows() - 1;
    let step = 1.0 / (packet_interval * (p + 1) as f64);
    search(
        pmat,
        count,
        |f| basis_p(f, p, 0, packet_interval),
        step,
        0.5 / packet_interval,
        opts,
    )
}

/// `L` values of `tau_l - tau_0` in `(0, T/2)` from the mirrored subcarrier matrix.
pub fn estimate_delays_rel(
    qmat: &CMatrix,
    count: usize,
    symbol_period: f64,
    opts: SearchOptions,
) -> Result<LineSearch> {
    let q = qmat.nrows() - 1;
    let step = symbol_period / (q + 1) as f64;
    search(
        qmat,
        count,
        |t| basis_q(t, q, 0, symbol_period),
        step,
        0.5 * symbol_period,
        opts,
    )
}

/// Per plane and packet, `sum_g xi[m,g] e^{-j g 2 pi tau / T}`.
fn delay_projection(xi: &XiGrid, tau_rel: f64, symbol_period: f64) -> Vec<Complex64> {
    let (s_count, m_count, g_count) = xi.grid.shape();
    let rot = Complex64::cis(-TAU * tau_rel / symbol_period);
    let phasors: Vec<Complex64> =
        std::iter::successors(Some(Complex64::new(1.0, 0.0)), |w| Some(w * rot))
            .take(g_count)
            .collect();
    let mut out = Vec::with_capacity(s_count * m_count);
    for row in xi.grid.as_slice().chunks(g_count) {
        out.push(row.iter().zip(&phasors).map(|(a, b)| a * b).sum());
    }
    out
}

/// Per plane, `sum_m proj[m] e^{j m 2 pi T_A f}`.
fn doppler_sums(
    proj: &[Complex64],
    m_count: usize,
    f_hz: f64,
    packet_interval: f64,
) -> Vec<Complex64> {
    let rot = Complex64::cis(TAU * packet_interval * f_hz);
    proj.chunks(m_count)
        .map(|rows| {
            let mut w = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for r in rows {
                acc += r * w;
                w *= rot;
            }
            acc
        })
        .collect()
}

fn steer_sum(xi: &XiGrid, sums: &[Complex64], omega0: f64) -> Complex64 {
    sums.iter()
        .enumerate()
        .map(|(s, v)| v * Complex64::cis(-(xi.lag(s) as f64) * omega0))
        .sum()
}

/// `P_xi(f, tau) = sum_{n,m,g} xi_n[m,g] e^{j m 2 pi T_A f - j g 2 pi tau / T - j n Omega_0}`,
/// with `tau = tau_l - tau_0` and `n` the antenna lag.
pub fn combine_gain_pxi(
    xi: &XiGrid,
    f_hz: f64,
    tau_rel: f64,
    omega0: f64,
    scen: &ScenarioConfig,
) -> Complex64 {
    let proj = delay_projection(xi, tau_rel, scen.symbol_period());
    steer_sum(
        xi,
        &doppler_sums(&proj, xi.packets(), f_hz, scen.packet_interval_s),
        omega0,
    )
}

/// How the combining gains of the `2 L^2` signed candidates are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairGain {
    /// `|P_xi|` with the LOS steering removed.
    Coherent,
    /// `sum_n |P_xi,n|` on the conjugated grid, for inputs without the side
    /// product.
    ConjugatePerPlane,
}

/// Greedy matching of `|f_D|` with `tau_l - tau_0`: repeatedly take the
/// signed pair with the largest gain, then drop that Doppler (both signs)
/// and that delay. Scores are not recomputed.
pub fn pair_and_sign(
    dopplers_abs: &[f64],
    delays_rel: &[f64],
    xi: &XiGrid,
    omega0: f64,
    tau0: f64,
    scen: &ScenarioConfig,
) -> EstimateSet {
    pair_and_sign_with(
        dopplers_abs,
        delays_rel,
        xi,
        omega0,
        tau0,
        scen,
        PairGain::Coherent,
    )
}

pub fn pair_and_sign_with(
    dopplers_abs: &[f64],
    delays_rel: &[f64],
    xi: &XiGrid,
    omega0: f64,
    tau0: f64,
    scen: &ScenarioConfig,
    gain: PairGain,
) -> EstimateSet {
    let (lx, ly) = (dopplers_abs.len(), delays_rel.len());
    // scores[y][x][sign]
    let mut scores: Vec<Vec<[f64; 2]>> = Vec::with_capacity(ly);
    let conj;
    let grid = match gain {
        PairGain::Coherent => xi,
        PairGain::ConjugatePerPlane => {
            conj = xi.with_grid(xi.grid.map(|v| v.conj()));
            &conj
        }
    };
    for &tau in delays_rel {
        let proj = delay_projection(grid, tau, scen.symbol_period());
        let mut row = Vec::with_capacity(lx);
        for &f in dopplers_abs {
            let mut pair = [0.0; 2];
            for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
                let sums = doppler_sums(&proj, grid.packets(), sign * f, scen.packet_interval_s);
                pair[k] = match gain {
                    PairGain::Coherent => steer_sum(grid, &sums, omega0).norm(),
                    PairGain::ConjugatePerPlane => sums.iter().map(|v| v.norm()).sum(),
                };
            }
            row.push(pair);
        }
        scores.push(row);
    }
    let mut x_alive = vec![true; lx];
    let mut y_alive = vec![true; ly];
    let mut targets = Vec::new();
    for _ in 0..lx.min(ly) {
        let mut best: Option<(usize, usize, usize, f64)> = None;
        for y in (0..ly).filter(|&y| y_alive[y]) {
            for x in (0..lx).filter(|&x| x_alive[x]) {
                for k in 0..2 {
                    let v = scores[y][x][k];
                    if best.is_none_or(|b| v > b.3) {
                        best = Some((y, x, k, v));
                    }
                }
            }
        }
        let Some((y, x, k, v)) = best else { break };
        x_alive[x] = false;
        y_alive[y] = false;
        let sign = if k == 0 { 1.0 } else { -1.0 };
        targets.push(TargetEstimate {
            delay_rel_s: delays_rel[y],
            delay_abs_s: tau0 + delays_rel[y],
            doppler_hz: sign * dopplers_abs[x],
            aoa_rad: None,
            aoa_status: Default::default(),
            pair_score: v,
        });
    }
    EstimateSet {
        targets,
        ..Default::default()
    }
}

/// Indices at which `P` and `Q` are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub n0: usize,
    pub m0: usize,
    pub g0: usize,
}

/// `(m0, g0)` maximising the mean power across planes.
pub fn select_m0_g0(xi: &XiGrid) -> (usize, usize) {
    let (s_count, m_count, g_count) = xi.grid.shape();
    let mut best = (0, 0, f64::NEG_INFINITY);
    for m in 0..m_count {
        for g in 0..g_count {
            let p: f64 = (0..s_count).map(|s| xi.grid.get(s, m, g).norm_sqr()).sum();
            if p > best.2 {
                best = (m, g, p);
            }
        }
    }
    (best.0, best.1)
}

pub fn resolve_selection(xi: &XiGrid, cfg: &MirrorConfig) -> Selection {
    let n0 = cfg.n0.unwrap_or_else(|| select_reference_index_n0(xi));
    let (m0, g0) = match (cfg.m0, cfg.g0) {
        (Some(m), Some(g)) => (m, g),
        (m, g) => {
            let (am, ag) = select_m0_g0(xi);
            (m.unwrap_or(am), g.unwrap_or(ag))
        }
    };
    Selection { n0, m0, g0 }
}

#[derive(Debug, Clone)]
pub struct Algorithm1Output {
    pub estimates: EstimateSet,
    pub selection: Selection,
    pub order: usize,
    pub doppler: Option<LineSearch>,
    pub delay: Option<LineSearch>,
}

/// Full mirrored-MUSIC estimation from `xi` given the LOS angle and delay.
pub fn algorithm1(
    xi: &XiGrid,
    omega0: f64,
    tau0: f64,
    scen: &ScenarioConfig,
    cfg: &MirrorConfig,
) -> Result<Algorithm1Output> {
    cfg.validate(xi.packets(), xi.subcarriers())?;
    let selection = resolve_selection(xi, cfg);
    let empty = |order| Algorithm1Output {
        estimates: EstimateSet::empty(),
        selection,
        order,
        doppler: None,
        delay: None,
    };
    let energy = xi.grid.mean_power();
    if cfg.num_targets == 0 && !cfg.mdl || !(energy > 1e-24) {
        return Ok(empty(0));
    }
    let pmat = assemble_p(xi, selection.n0, selection.g0, cfg.p)?;
    let qmat = assemble_q(xi, selection.n0, selection.m0, cfg.q)?;
    let order = if cfg.mdl {
        let sv = svd_left(&pmat)?.singular_values;
        estimate_model_order(&sv, pmat.ncols())
    } else {
        cfg.num_targets
    };
    let doppler = estimate_dopplers_abs(&pmat, order, scen.packet_interval_s, cfg.search())?;
    let delay = estimate_delays_rel(&qmat, order, scen.symbol_period(), cfg.search())?;
    let mut estimates = pair_and_sign(&doppler.values, &delay.values, xi, omega0, tau0, scen);
    estimates.short_doppler = !doppler.complete;
    estimates.short_delay = !delay.complete;
    Ok(Algorithm1Output {
        estimates,
        selection,
        order,
        doppler: Some(doppler),
        delay: Some(delay),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cacc::CorrGrid;
    use crate::grid::Grid3;

    const TA: f64 = 1e-3;

    fn xi_from(m_count: usize, g_count: usize, f: impl Fn(usize, usize) -> Complex64) -> XiGrid {
        CorrGrid {
            grid: Grid3::from_fn(1, m_count, g_count, |_, m, g| f(m, g)),
            antennas: vec![1],
            reference: 0,
        }
    }

    #[test]
    fn mirrored_vectors_of_constants() {
        let xi = xi_from(8, 8, |_, _| Complex64::new(1.0, 0.0));
        let p = mirrored_vector_p(&xi, 1, 0, 0, 3).unwrap();
        assert!(p.iter().all(|v| *v == Complex64::new(2.0, 0.0)));
        assert!(mirrored_vector_p(&xi, 1, 5, 0, 3).is_err());
        assert!(mirrored_vector_q(&xi, 1, 0, 6, 3).is_err());
        assert!(mirrored_vector_p(&xi, 2, 0, 0, 3).is_err());
    }

    #[test]
    fn mirrored_vector_of_tone_and_palindrome() {
        let phi = 0.37;
        let xi = xi_from(16, 4, |m, _| Complex64::cis(m as f64 * phi));
        let p = mirrored_vector_p(&xi, 1, 0, 1, 5).unwrap();
        for i in 0..=5 {
            let want = Complex64::cis(i as f64 * phi) + Complex64::cis((5 - i) as f64 * phi);
            assert!((p[i] - want).norm() < 1e-14);
            assert_eq!(p[i], p[5 - i]);
        }
    }

    #[test]
    fn basis_identities() {
        let (p, f) = (9, 123.4);
        assert!(basis_p(0.0, p, 0, TA)
            .iter()
            .all(|v| (v - Complex64::new(2.0, 0.0)).norm() < 1e-15));
        let a = basis_p(f, p, 3, TA);
        let b = basis_p(-f, p, 3, TA);
        let rot = Complex64::cis(-((2 * 3 + p) as f64) * TAU * TA * f);
        for i in 0..=p {
            assert!((b[i] - a[i] * rot).norm() < 1e-12);
            assert!((a[i] - a[p - i]).norm() < 1e-12);
        }
        let next = basis_p(f, p, 4, TA);
        let step = Complex64::cis(TAU * TA * f);
        for i in 0..=p {
            assert!((next[i] - a[i] * step).norm() < 1e-12);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-4;
        let (a, b) = (basis_p(80.0 + h, 12, 2, TA), basis_p(80.0 - h, 12, 2, TA));
        let d = basis_p_deriv(80.0, 12, 2, TA);
        for i in 0..d.len() {
            assert!(((a[i] - b[i]) / (2.0 * h) - d[i]).norm() < 1e-6);
        }
        let t = 2e-6;
        let h = 1e-13;
        let (a, b) = (basis_q(1e-7 + h, 10, 1, t), basis_q(1e-7 - h, 10, 1, t));
        let d = basis_q_deriv(1e-7, 10, 1, t);
        for i in 0..d.len() {
            assert!(((a[i] - b[i]) / (2.0 * h) - d[i]).norm() / d[i].norm().max(1.0) < 1e-5);
        }
    }

    #[test]
    fn grids_halve() {
        let step = 1.0 / (TA * 65.0);
        let half = candidate_grid(step, 0.5 / TA, false);
        let full = candidate_grid(step, 0.5 / TA, true);
        assert_eq!(full.len(), 2 * half.len());
        assert!(half.iter().all(|&v| v > 0.0 && v < 500.0));
    }

    #[test]
    fn single_on_grid_tone_is_exact() {
        let (m_count, p) = (64, 31);
        let f = 5.0 / (TA * 32.0);
        let xi = xi_from(m_count, 4, |m, _| {
            Complex64::cis(TAU * TA * f * m as f64) + Complex64::cis(-TAU * TA * f * m as f64 + 0.3)
        });
        let pm = assemble_p(&xi, 1, 0, p).unwrap();
        let est = estimate_dopplers_abs(&pm, 1, TA, SearchOptions::coarse()).unwrap();
        assert!((est.values[0] - f).abs() < 1e-9);
        let sv = svd_left(&pm).unwrap().singular_values;
        assert!(sv[1] / sv[0] < 1e-10);
    }

    #[test]
    fn zero_xi_gives_zero_gain_and_empty_estimates() {
        let scen = ScenarioConfig::default();
        let xi = CorrGrid {
            grid: Grid3::zeros(3, 128, 256),
            antennas: vec![1, 2, 3],
            reference: 0,
        };
        assert_eq!(
            combine_gain_pxi(&xi, 40.0, 1e-7, 0.3, &scen),
            Complex64::new(0.0, 0.0)
        );
        let out = algorithm1(
            &xi,
            0.3,
            0.0,
            &scen,
            &MirrorConfig {
                n0: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.estimates.empty && out.estimates.is_empty());
    }

    #[test]
    fn fold_half_wraps() {
        assert!((fold_half(-3.0, 100.0) - 3.0).abs() < 1e-12);
        assert!((fold_half(52.0, 100.0) - 48.0).abs() < 1e-12);
    }

    #[test]
    fn config_ranges() {
        let c = MirrorConfig::default();
        c.validate(128, 256).unwrap();
        assert!(MirrorConfig {
            p: 126,
            ..c.clone()
        }
        .validate(128, 256)
        .is_err());
        assert!(MirrorConfig { q: 2, ..c }.validate(128, 256).is_err());
    }
}
