//! Multi-domain AoA MUSIC: the spatial vectors `c[m,g]` are stacked along
//! subcarriers and packets so the effective aperture grows to `C (N-1)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cacc::XiGrid;
use crate::error::{Error, Result};
use crate::estimate::{AoaStatus, EstimateSet};
use crate::model::ScenarioConfig;
use crate::subspace::{golden_min, pick_peaks_with, svd_left, CMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AoAConfig {
    /// Blocks per column of `C'`.
    pub c: usize,
    /// `C'` blocks along the diagonal are `0..=c1`.
    pub c1: usize,
    /// Peaks above this fraction of the maximum count as candidates.
    pub peak_threshold_ratio: f64,
    /// Candidate grid has `grid_factor * C (N-1)` points over `(-pi, pi]`.
    pub grid_factor: usize,
    pub refine: bool,
    /// Keep several peaks and resolve collisions; `false` keeps only the
    /// highest peak per target.
    pub multi_peak: bool,
}

impl Default for AoAConfig {
    fn default() -> Self {
        Self {
            c: 115,
            c1: 10,
            peak_threshold_ratio: 0.5,
            grid_factor: 4,
            refine: true,
            multi_peak: true,
        }
    }
}

impl AoAConfig {
    pub fn validate(
        &self,
        num_targets: usize,
        planes: usize,
        m_count: usize,
        g_count: usize,
    ) -> Result<()> {
        let l4 = 4 * num_targets;
        let lower_ok = planes > 0 && l4 < self.c * planes;
        let upper = g_count.min(m_count).saturating_sub(l4);
        if !(lower_ok && self.c < upper) {
            return Err(Error::InvalidConfig(format!(
                "C = {} outside (4L/(N-1), min(G-4L, M-4L)) = ({l4}/{planes}, {upper})",
                self.c
            )));
        }
        if self.c + self.c1 >= m_count.min(g_count) {
            return Err(Error::InvalidConfig(format!(
                "C + C1 = {} must stay below min(M, G)",
                self.c + self.c1
            )));
        }
        if 2 * (self.c1 + 1) < l4 {
            return Err(Error::InvalidConfig(format!(
                "2(C1+1) = {} columns cannot hold rank {l4}",
                2 * (self.c1 + 1)
            )));
        }
        if !(self.peak_threshold_ratio > 0.0 && self.peak_threshold_ratio <= 1.0)
            || self.grid_factor == 0
        {
            return Err(Error::InvalidConfig(
                "peak threshold in (0, 1] and grid_factor >= 1".into(),
            ));
        }
        Ok(())
    }

    /// `2 pi / (C (N-1))`.
    pub fn min_separation(&self, planes: usize) -> f64 {
        TAU / (self.c * planes) as f64
    }
}

/// `[xi_1[m,g], ..., xi_{N-1}[m,g]]`.
pub fn spatial_vector_c(xi: &XiGrid, m: usize, g: usize) -> Result<Vec<Complex64>> {
    let (s_count, m_count, g_count) = xi.grid.shape();
    if m >= m_count || g >= g_count {
        return Err(Error::Index(format!(
            "(m, g) = ({m}, {g}) on {m_count}x{g_count}"
        )));
    }
    Ok((0..s_count).map(|s| xi.grid.get(s, m, g)).collect())
}

/// `C(N-1) x 2`: column 1 stacks `c[m, g+i]`, column 2 stacks `c[m+i, g]`.
pub fn build_cprime(xi: &XiGrid, m: usize, g: usize, c: usize) -> Result<CMatrix> {
    let (s_count, m_count, g_count) = xi.grid.shape();
    if c == 0 || m + c > m_count || g + c > g_count {
        return Err(Error::Index(format!(
            "C' at ({m}, {g}) with C = {c} on {m_count}x{g_count}"
        )));
    }
    Ok(CMatrix::from_fn(c * s_count, 2, |r, col| {
        let (i, s) = (r / s_count, r % s_count);
        if col == 0 {
            xi.grid.get(s, m, g + i)
        } else {
            xi.grid.get(s, m + i, g)
        }
    }))
}

/// `[C'[0,0], C'[1,1], ..., C'[C1,C1]]`.
pub fn assemble_cmatrix(xi: &XiGrid, cfg: &AoAConfig) -> Result<CMatrix> {
    let rows = cfg.c * xi.antennas.len();
    let mut out = CMatrix::zeros(rows, 2 * (cfg.c1 + 1));
    for k in 0..=cfg.c1 {
        let block = build_cprime(xi, k, k, cfg.c)?;
        out.columns_mut(2 * k, 2).copy_from(&block);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnlargedBasisPair {
    pub c1: Vec<Complex64>,
    pub c2: Vec<Complex64>,
}

impl EnlargedBasisPair {
    pub fn columns(&self) -> [Vec<Complex64>; 2] {
        [self.c1.clone(), self.c2.clone()]
    }
}

/// Block `i` of `c1` is `a(Omega) e^{-j i tau_bar}`, of `c2` is
/// `a(Omega) e^{+j i f_bar}`, with `a(Omega)_s = e^{j lag_s Omega}`,
/// `tau_bar = 2 pi (tau_l - tau_0)/T` and `f_bar = 2 pi T_A f_D`.
pub fn basis_pair(
    omega: f64,
    delay_rel_s: f64,
    doppler_hz: f64,
    c: usize,
    lags: &[i32],
    scen: &ScenarioConfig,
) -> EnlargedBasisPair {
    let tau_bar = TAU * delay_rel_s / scen.symbol_period();
    let f_bar = TAU * scen.packet_interval_s * doppler_hz;
    let a: Vec<Complex64> = lags
        .iter()
        .map(|&l| Complex64::cis(l as f64 * omega))
        .collect();
    let mut c1 = Vec::with_capacity(c * lags.len());
    let mut c2 = Vec::with_capacity(c * lags.len());
    for i in 0..c {
        let (p1, p2) = (
            Complex64::cis(-(i as f64) * tau_bar),
            Complex64::cis(i as f64 * f_bar),
        );
        c1.extend(a.iter().map(|v| v * p1));
        c2.extend(a.iter().map(|v| v * p2));
    }
    EnlargedBasisPair { c1, c2 }
}

/// Derivative of [`basis_pair`] with respect to `Omega`.
pub fn basis_pair_deriv(
    omega: f64,
    delay_rel_s: f64,
    doppler_hz: f64,
    c: usize,
    lags: &[i32],
    scen: &ScenarioConfig,
) -> EnlargedBasisPair {
    let mut b = basis_pair(omega, delay_rel_s, doppler_hz, c, lags, scen);
    let s_count = lags.len();
    for v in [&mut b.c1, &mut b.c2] {
        for (r, x) in v.iter_mut().enumerate() {
            *x *= Complex64::new(0.0, lags[r % s_count] as f64);
        }
    }
    b
}

/// Per-target null-spectrum evaluator. The block phase progression is
/// folded into the signal basis once so each candidate costs `O((N-1) 4L)`.
struct TargetScanner {
    lags: Vec<i32>,
    /// `w[k][s * rank + col] = sum_i conj(U[(i, s), col]) phase_k(i)`.
    w: [Vec<Complex64>; 2],
    rank: usize,
    energy: f64,
}

impl TargetScanner {
    fn new(us: &CMatrix, lags: &[i32], c: usize, tau_bar: f64, f_bar: f64) -> Self {
        let s_count = lags.len();
        let rank = us.ncols();
        let mut w = [
            vec![Complex64::new(0.0, 0.0); s_count * rank],
            vec![Complex64::new(0.0, 0.0); s_count * rank],
        ];
        for i in 0..c {
            let ph = [
                Complex64::cis(-(i as f64) * tau_bar),
                Complex64::cis(i as f64 * f_bar),
            ];
            for s in 0..s_count {
                let row = i * s_count + s;
                for col in 0..rank {
                    let u = us[(row, col)].conj();
                    w[0][s * rank + col] += u * ph[0];
                    w[1][s * rank + col] += u * ph[1];
                }
            }
        }
        Self {
            lags: lags.to_vec(),
            w,
            rank,
            energy: 2.0 * (c * s_count) as f64,
        }
    }

    fn null_norm(&self, omega: f64) -> f64 {
        let a: Vec<Complex64> = self
            .lags
            .iter()
            .map(|&l| Complex64::cis(l as f64 * omega))
            .collect();
        let mut captured = 0.0;
        for w in &self.w {
            for col in 0..self.rank {
                let dot: Complex64 = a
                    .iter()
                    .enumerate()
                    .map(|(s, v)| w[s * self.rank + col] * v)
                    .sum();
                captured += dot.norm_sqr();
            }
        }
        (self.energy - captured).max(0.0)
    }

    fn value(&self, omega: f64) -> f64 {
        let d = self.null_norm(omega);
        if d <= 1.0 / crate::subspace::SPECTRUM_CAP {
            crate::subspace::SPECTRUM_CAP
        } else {
            1.0 / d
        }
    }
}

/// Wrapped distance on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn wrap_pi(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoaTarget {
    pub omega: Option<f64>,
    pub status: AoaStatus,
    /// Peaks above threshold as `(Omega, value)`, strongest first.
    pub peaks: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoaOutput {
    pub targets: Vec<AoaTarget>,
    pub candidates_evaluated: usize,
    pub singular_values: Vec<f64>,
}

impl AoaOutput {
    /// Copies the AoAs into an estimate set of the same length.
    pub fn apply(&self, estimates: &mut EstimateSet) {
        for (e, a) in estimates.targets.iter_mut().zip(&self.targets) {
            e.aoa_rad = a.omega;
            e.aoa_status = a.status;
        }
    }
}

/// Candidate AoA grid over `(-pi, pi]`.
pub fn aoa_grid(cfg: &AoAConfig, planes: usize) -> Vec<f64> {
    let k = cfg.grid_factor * cfg.c * planes;
    (0..k)
        .map(|i| -PI + TAU * (i as f64 + 1.0) / k as f64)
        .collect()
}

/// AoA for every target of `estimates`, testing only the actual-target
/// bases (the side-product bases all point at the known LOS angle).
pub fn algorithm2(
    xi: &XiGrid,
    estimates: &EstimateSet,
    cfg: &AoAConfig,
    scen: &ScenarioConfig,
) -> Result<AoaOutput> {
    let planes = xi.antennas.len();
    let l = estimates.targets.len();
    if l == 0 {
        return Ok(AoaOutput {
            targets: Vec::new(),
            candidates_evaluated: 0,
            singular_values: Vec::new(),
        });
    }
    cfg.validate(l, planes, xi.packets(), xi.subcarriers())?;
    let cmat = assemble_cmatrix(xi, cfg)?;
    if cmat.iter().all(|v| v.norm_sqr() == 0.0) {
        return Err(Error::DegenerateBasis("C matrix is zero".into()));
    }
    let dec = svd_left(&cmat)?;
    let singular_values = dec.singular_values.clone();
    let us = dec.with_rank(4 * l)?.signal_space();
    let lags = xi.lags();
    let grid = aoa_grid(cfg, planes);
    let step = TAU / grid.len() as f64;
    let min_sep = cfg.min_separation(planes);
    let sep_bins = cfg.grid_factor.max(1);

    let mut per_target = Vec::with_capacity(l);
    for t in &estimates.targets {
        let tau_bar = TAU * t.delay_rel_s / scen.symbol_period();
        let f_bar = TAU * scen.packet_interval_s * t.doppler_hz;
        let scan = TargetScanner::new(&us, &lags, cfg.c, tau_bar, f_bar);
        let values: Vec<f64> = grid.iter().map(|&w| scan.value(w)).collect();
        let max = values.iter().copied().fold(0.0, f64::max);
        let picked = pick_peaks_with(&values, values.len(), sep_bins, true);
        let mut peaks: Vec<(f64, f64)> = picked
            .indices
            .into_iter()
            .filter(|&i| values[i] >= cfg.peak_threshold_ratio * max)
            .map(|i| {
                let w0 = grid[i];
                let w = if cfg.refine {
                    wrap_pi(golden_min(|w| scan.null_norm(w), w0 - step, w0 + step, 48))
                } else {
                    w0
                };
                (w, scan.value(w))
            })
            .collect();
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
        per_target.push(peaks);
    }

    let mut targets: Vec<AoaTarget> = per_target
        .iter()
        .map(|peaks| AoaTarget {
            omega: None,
            status: AoaStatus::Unresolved,
            peaks: peaks.clone(),
        })
        .collect();
    if !cfg.multi_peak {
        for t in &mut targets {
            if let Some(&(w, _)) = t.peaks.first() {
                t.omega = Some(w);
                t.status = AoaStatus::Unique;
            }
        }
    } else {
        let mut settled: Vec<f64> = Vec::new();
        for t in &mut targets {
            if t.peaks.len() == 1 {
                t.omega = Some(t.peaks[0].0);
                t.status = AoaStatus::Unique;
                settled.push(t.peaks[0].0);
            }
        }
        for t in &mut targets {
            if t.peaks.len() < 2 {
                continue;
            }
            let free = t
                .peaks
                .iter()
                .find(|(w, _)| settled.iter().all(|s| angle_distance(*w, *s) > min_sep));
            let (w, _) = *free.unwrap_or(&t.peaks[0]);
            t.omega = Some(w);
            t.status = AoaStatus::Disambiguated;
            settled.push(w);
        }
    }
    Ok(AoaOutput {
        targets,
        candidates_evaluated: grid.len() * l,
        singular_values,
    })
}
