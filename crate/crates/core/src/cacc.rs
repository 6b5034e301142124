//! Cross-antenna cross-correlation, its analytic decomposition, reference
//! selection, 2-D spectra and the high-pass stage that yields `xi`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{filter_line, Butterworth, Predictor};
use crate::grid::Grid3;
use crate::model::{split_los, PathParams, RxGrid, ScenarioConfig};

/// Correlation-domain tensor: one `M x G` plane per non-reference antenna.
///
/// Used both for the raw CACC output `rho` and the filtered `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrGrid {
    pub grid: Grid3,
    /// Physical antenna index of each plane.
    pub antennas: Vec<usize>,
    pub reference: usize,
}

pub type CaccGrid = CorrGrid;
pub type XiGrid = CorrGrid;

impl CorrGrid {
    /// Antenna lag `n - reference` of plane `slice`; the steering phase of a
    /// path in that plane is `lag * Omega`.
    pub fn lag(&self, slice: usize) -> i32 {
        self.antennas[slice] as i32 - self.reference as i32
    }

    pub fn lags(&self) -> Vec<i32> {
        (0..self.antennas.len()).map(|s| self.lag(s)).collect()
    }

    pub fn slice_of_antenna(&self, antenna: usize) -> Result<usize> {
        self.antennas
            .iter()
            .position(|&a| a == antenna)
            .ok_or_else(|| Error::Index(format!("antenna {antenna} is not a correlation plane")))
    }

    pub fn with_grid(&self, grid: Grid3) -> Self {
        Self {
            grid,
            antennas: self.antennas.clone(),
            reference: self.reference,
        }
    }

    pub fn packets(&self) -> usize {
        self.grid.packets()
    }

    pub fn subcarriers(&self) -> usize {
        self.grid.subcarriers()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefIndex {
    Fixed(usize),
    /// Antenna with the largest average received power.
    Auto,
}

impl Default for RefIndex {
    fn default() -> Self {
        RefIndex::Fixed(0)
    }
}

/// `rho_n[m,g] = y_n[m,g] conj(y_ref[m,g])` for every `n != ref`.
pub fn cacc(rx: &RxGrid, reference: RefIndex) -> Result<CaccGrid> {
    let (n_ant, m_count, g_count) = rx.grid.shape();
    if n_ant < 2 {
        return Err(Error::InvalidConfig(
            "CACC needs at least two antennas".into(),
        ));
    }
    let reference = match reference {
        RefIndex::Fixed(r) if r < n_ant => r,
        RefIndex::Fixed(r) => {
            return Err(Error::Index(format!("reference antenna {r} of {n_ant}")))
        }
        RefIndex::Auto => {
            let power = |n: usize| rx.grid.slice(n).iter().map(|v| v.norm_sqr()).sum::<f64>();
            let mut best = 0;
            for n in 1..n_ant {
                if power(n) > power(best) {
                    best = n;
                }
            }
            best
        }
    };
    let antennas: Vec<usize> = (0..n_ant).filter(|&n| n != reference).collect();
    let y_ref = rx.grid.slice(reference);
    let mut data = Vec::with_capacity(antennas.len() * m_count * g_count);
    for &n in &antennas {
        data.extend(
            rx.grid
                .slice(n)
                .iter()
                .zip(y_ref)
                .map(|(a, b)| a * b.conj()),
        );
    }
    Ok(CorrGrid {
        grid: Grid3::from_vec(antennas.len(), m_count, g_count, data)?,
        antennas,
        reference,
    })
}

/// Analytic split of the noiseless CACC output into LOS x LOS (`rho1`),
/// NLOS x NLOS (`rho2 = rho2_bar + rho2_tilde`), LOS x NLOS side product
/// (`rho3`) and NLOS x LOS actual term (`rho4`).
#[derive(Debug, Clone, PartialEq)]
pub struct CaccDecomposition {
    /// Per plane, constant over `(m, g)`.
    pub rho1: Vec<Complex64>,
    /// Per plane, constant over `(m, g)`.
    pub rho2_bar: Vec<Complex64>,
    pub rho2_tilde: Grid3,
    pub rho3: Grid3,
    pub rho4: Grid3,
    pub antennas: Vec<usize>,
    pub reference: usize,
}

impl CaccDecomposition {
    fn constant_plus(&self, consts: &[Complex64], grid: Option<&Grid3>) -> Grid3 {
        let (s, m, g) = self.rho3.shape();
        Grid3::from_fn(s, m, g, |n, mm, gg| {
            consts[n] + grid.map_or(Complex64::new(0.0, 0.0), |x| x.get(n, mm, gg))
        })
    }

    pub fn rho2(&self) -> Grid3 {
        self.constant_plus(&self.rho2_bar, Some(&self.rho2_tilde))
    }

    /// `rho1 + rho2 + rho3 + rho4`.
    pub fn total(&self) -> Grid3 {
        let consts: Vec<Complex64> = self
            .rho1
            .iter()
            .zip(&self.rho2_bar)
            .map(|(a, b)| a + b)
            .collect();
        let base = self.constant_plus(&consts, Some(&self.rho2_tilde));
        &(&base + &self.rho3) + &self.rho4
    }

    /// The analytic high-pass target `xi = rho3 + rho4`.
    pub fn xi(&self) -> XiGrid {
        CorrGrid {
            grid: &self.rho3 + &self.rho4,
            antennas: self.antennas.clone(),
            reference: self.reference,
        }
    }
}

/// Per-path factor `e^{j 2 pi m T_A f} e^{-j 2 pi g tau / T}` sampled on the grid.
fn path_plane(cfg: &ScenarioConfig, doppler_hz: f64, delay_s: f64) -> Vec<Complex64> {
    let (m_count, g_count) = (cfg.num_packets, cfg.num_subcarriers);
    let row: Vec<Complex64> = (0..g_count)
        .map(|g| Complex64::cis(-TAU * g as f64 * delay_s / cfg.symbol_period()))
        .collect();
    let mut out = Vec::with_capacity(m_count * g_count);
    for m in 0..m_count {
        let head = Complex64::cis(TAU * m as f64 * cfg.packet_interval_s * doppler_hz);
        out.extend(row.iter().map(|r| head * r));
    }
    out
}

/// Offsets are common to every antenna and cancel exactly, so they do not
/// enter the decomposition.
pub fn decompose_cacc(
    cfg: &ScenarioConfig,
    paths: &[PathParams],
    reference: usize,
) -> Result<CaccDecomposition> {
    cfg.validate()?;
    let (los, targets) = split_los(paths)?;
    if reference >= cfg.num_antennas {
        return Err(Error::Index(format!("reference antenna {reference}")));
    }
    let antennas: Vec<usize> = (0..cfg.num_antennas).filter(|&n| n != reference).collect();
    let (m_count, g_count) = (cfg.num_packets, cfg.num_subcarriers);
    let plane_len = m_count * g_count;
    let r = reference as f64;
    let all: Vec<PathParams> = std::iter::once(los)
        .chain(targets.iter().copied())
        .collect();
    // Steering coefficient of path pair (l, x) on antenna n.
    let coef = |n: usize, l: &PathParams, x: &PathParams| {
        l.gain * x.gain.conj() * Complex64::cis(n as f64 * l.spatial_freq - r * x.spatial_freq)
    };

    let mut rho1 = Vec::new();
    let mut rho2_bar = Vec::new();
    for &n in &antennas {
        rho1.push(coef(n, &los, &los));
        rho2_bar.push(targets.iter().map(|t| coef(n, t, t)).sum());
    }

    let mut rho2_tilde = Grid3::zeros(antennas.len(), m_count, g_count);
    let mut rho3 = Grid3::zeros(antennas.len(), m_count, g_count);
    let mut rho4 = Grid3::zeros(antennas.len(), m_count, g_count);
    for (li, l) in all.iter().enumerate() {
        for (xi, x) in all.iter().enumerate() {
            if li == xi {
                continue;
            }
            let target = match (li, xi) {
                (0, _) => &mut rho3,
                (_, 0) => &mut rho4,
                _ => &mut rho2_tilde,
            };
            let plane = path_plane(cfg, l.doppler_hz - x.doppler_hz, l.delay_s - x.delay_s);
            for (s, &n) in antennas.iter().enumerate() {
                let c = coef(n, l, x);
                let dst = &mut target.as_mut_slice()[s * plane_len..(s + 1) * plane_len];
                for (d, p) in dst.iter_mut().zip(&plane) {
                    *d += c * p;
                }
            }
        }
    }
    Ok(CaccDecomposition {
        rho1,
        rho2_bar,
        rho2_tilde,
        rho3,
        rho4,
        antennas,
        reference,
    })
}

/// Normalised 2-D cutoff `(omega_f, omega_tau)` in rad/sample along `m` and `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoff {
    pub omega_f: f64,
    pub omega_tau: f64,
}

impl Default for Cutoff {
    fn default() -> Self {
        Self {
            omega_f: PI / 128.0,
            omega_tau: PI / 128.0,
        }
    }
}

impl Cutoff {
    /// `(min |pi T_A f_D|, min pi (tau_l - tau_0) / T)` from the slowest and
    /// nearest expected targets.
    pub fn auto(
        cfg: &ScenarioConfig,
        min_abs_doppler_hz: f64,
        min_rel_delay_s: f64,
    ) -> Result<Self> {
        let c = Self {
            omega_f: PI * cfg.packet_interval_s * min_abs_doppler_hz,
            omega_tau: PI * min_rel_delay_s / cfg.symbol_period(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for w in [self.omega_f, self.omega_tau] {
            if !(w > 0.0 && w < PI) {
                return Err(Error::Cutoff(w));
            }
        }
        Ok(())
    }
}

/// Edge handling of the zero-phase filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeExtension {
    /// Linear-prediction order; 0 disables extension.
    pub order: usize,
    /// Samples extrapolated at each end.
    pub pad: usize,
    /// At most this many lines per axis feed the shared predictor fit.
    pub fit_lines: usize,
}

impl Default for EdgeExtension {
    fn default() -> Self {
        Self {
            order: 16,
            pad: 768,
            fit_lines: 48,
        }
    }
}

/// Separable zero-phase Butterworth high-pass along `m` then along `g`.
pub fn highpass_butterworth(grid: &CaccGrid, cutoff: Cutoff, order: usize) -> Result<XiGrid> {
    highpass_butterworth_with(grid, cutoff, order, EdgeExtension::default())
}

pub fn highpass_butterworth_with(
    grid: &CaccGrid,
    cutoff: Cutoff,
    order: usize,
    edges: EdgeExtension,
) -> Result<XiGrid> {
    cutoff.validate()?;
    let f_m = Butterworth::highpass(order, cutoff.omega_f)?;
    let f_g = Butterworth::highpass(order, cutoff.omega_tau)?;
    let (s_count, m_count, g_count) = grid.grid.shape();
    let mut out = grid.grid.clone();
    let mut scratch = Vec::new();

    // Along m: gather columns.
    let columns: Vec<Vec<Complex64>> = (0..s_count * g_count)
        .map(|k| {
            let (s, g) = (k / g_count, k % g_count);
            (0..m_count).map(|m| out.get(s, m, g)).collect()
        })
        .collect();
    let pred_m = fit_predictor(&columns, edges);
    for (k, col) in columns.iter().enumerate() {
        let (s, g) = (k / g_count, k % g_count);
        let y = filter_line(&f_m, pred_m.as_ref(), edges.pad, col, &mut scratch);
        for (m, v) in y.into_iter().enumerate() {
            out.set(s, m, g, v);
        }
    }

    // Along g: rows are contiguous.
    let rows: Vec<Vec<Complex64>> = out.as_slice().chunks(g_count).map(|r| r.to_vec()).collect();
    let pred_g = fit_predictor(&rows, edges);
    for (row, dst) in rows.iter().zip(out.as_mut_slice().chunks_mut(g_count)) {
        let y = filter_line(&f_g, pred_g.as_ref(), edges.pad, row, &mut scratch);
        dst.copy_from_slice(&y);
    }
    Ok(grid.with_grid(out))
}

fn fit_predictor(lines: &[Vec<Complex64>], edges: EdgeExtension) -> Option<Predictor> {
    if edges.order == 0 || edges.pad == 0 || lines.is_empty() {
        return None;
    }
    let step = lines.len().div_ceil(edges.fit_lines.max(1)).max(1);
    let order = edges.order.min(lines[0].len() / 3);
    Predictor::fit(lines.iter().step_by(step).map(|l| l.as_slice()), order)
}

/// Subtracts, for each `(n, g)`, the mean over a `window`-packet span around
/// each `m` (shifted to stay inside the grid).
pub fn highpass_mean_subtraction(grid: &CaccGrid, window: usize) -> Result<XiGrid> {
    let (s_count, m_count, g_count) = grid.grid.shape();
    if window == 0 || window > m_count {
        return Err(Error::InvalidConfig(format!(
            "mean window {window} outside 1..={m_count}"
        )));
    }
    let mut out = grid.grid.clone();
    for s in 0..s_count {
        for g in 0..g_count {
            let col: Vec<Complex64> = (0..m_count).map(|m| grid.grid.get(s, m, g)).collect();
            let mut prefix = vec![Complex64::new(0.0, 0.0); m_count + 1];
            for m in 0..m_count {
                prefix[m + 1] = prefix[m] + col[m];
            }
            for m in 0..m_count {
                let start = m.saturating_sub(window / 2).min(m_count - window);
                let mean = (prefix[start + window] - prefix[start]) / window as f64;
                out.set(s, m, g, col[m] - mean);
            }
        }
    }
    Ok(grid.with_grid(out))
}

/// `|FFT2|` of one plane, centred. Row index is the Doppler bin `k_m` in
/// `-M/2..M/2`, column the delay bin `k_g` in `-G/2..G/2`; a component
/// `e^{j 2 pi m T_A f} e^{-j 2 pi g tau / T}` lands at `(T_A f M, tau G / T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2d {
    pub doppler_bins: usize,
    pub delay_bins: usize,
    /// Row-major `doppler_bins x delay_bins` magnitudes.
    pub values: Vec<f64>,
}

impl Spectrum2d {
    /// CSV with one row per delay bin and one column per Doppler bin, both
    /// centred (bin 0 is DC).
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let (dm, dg) = ((self.doppler_bins / 2) as i64, (self.delay_bins / 2) as i64);
        write!(w, "delay_bin")?;
        for r in 0..self.doppler_bins as i64 {
            write!(w, ",{}", r - dm)?;
        }
        writeln!(w)?;
        for c in 0..self.delay_bins {
            write!(w, "{}", c as i64 - dg)?;
            for r in 0..self.doppler_bins {
                write!(w, ",{:.9e}", self.values[r * self.delay_bins + c])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn at(&self, doppler_bin: i64, delay_bin: i64) -> f64 {
        let r = (doppler_bin + (self.doppler_bins / 2) as i64).rem_euclid(self.doppler_bins as i64)
            as usize;
        let c =
            (delay_bin + (self.delay_bins / 2) as i64).rem_euclid(self.delay_bins as i64) as usize;
        self.values[r * self.delay_bins + c]
    }

    /// Signed bin coordinates of row `r`, column `c`.
    pub fn bin_of(&self, r: usize, c: usize) -> (i64, i64) {
        (
            r as i64 - (self.doppler_bins / 2) as i64,
            c as i64 - (self.delay_bins / 2) as i64,
        )
    }
}

/// Raw (uncentred) 2-D transform of a plane: forward along `m`, inverse
/// kernel along `g`.
fn fft2_plane(plane: &[Complex64], m_count: usize, g_count: usize) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m_count);
    let inv = planner.plan_fft_inverse(g_count);
    let mut data = plane.to_vec();
    for row in data.chunks_mut(g_count) {
        inv.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); m_count];
    for g in 0..g_count {
        for m in 0..m_count {
            col[m] = data[m * g_count + g];
        }
        fwd.process(&mut col);
        for m in 0..m_count {
            data[m * g_count + g] = col[m];
        }
    }
    data
}

pub fn spectrum_2d(grid: &CorrGrid, slice: usize) -> Result<Spectrum2d> {
    let (s_count, m_count, g_count) = grid.grid.shape();
    if slice >= s_count {
        return Err(Error::Index(format!("plane {slice} of {s_count}")));
    }
    let raw = fft2_plane(grid.grid.slice(slice), m_count, g_count);
    let mut values = vec![0.0; m_count * g_count];
    for m in 0..m_count {
        let r = (m + m_count / 2) % m_count;
        for g in 0..g_count {
            let c = (g + g_count / 2) % g_count;
            values[r * g_count + c] = raw[m * g_count + g].norm();
        }
    }
    Ok(Spectrum2d {
        doppler_bins: m_count,
        delay_bins: g_count,
        values,
    })
}

/// Energy in the 3x3 lowest-frequency bins of one plane.
pub fn dc_energy(grid: &CorrGrid, slice: usize) -> f64 {
    let (_, m_count, g_count) = grid.grid.shape();
    let raw = fft2_plane(grid.grid.slice(slice), m_count, g_count);
    let mut e = 0.0;
    for dm in [m_count - 1, 0, 1] {
        for dg in [g_count - 1, 0, 1] {
            e += raw[(dm % m_count) * g_count + dg % g_count].norm_sqr();
        }
    }
    e
}

/// Antenna whose correlation plane carries the least low-pass energy.
pub fn select_reference_index_n0(grid: &CorrGrid) -> usize {
    let mut best = (0, f64::INFINITY);
    for s in 0..grid.antennas.len() {
        let e = dc_energy(grid, s);
        if e < best.1 {
            best = (s, e);
        }
    }
    grid.antennas[best.0]
}

/// Mean squared entrywise deviation.
pub fn input_error(xi_hat: &XiGrid, xi_oracle: &XiGrid) -> Result<f64> {
    xi_hat.grid.check_same_shape(&xi_oracle.grid)?;
    let n = xi_hat.grid.as_slice().len();
    if n == 0 {
        return Ok(0.0);
    }
    let s: f64 = xi_hat
        .grid
        .as_slice()
        .iter()
        .zip(xi_oracle.grid.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(s / n as f64)
}

/// Input error split into the filter-residual part (noiseless filtered vs
/// oracle) and the part added by noise (noisy vs noiseless filtered).
pub fn input_error_split(
    noisy: &XiGrid,
    noiseless: &XiGrid,
    oracle: &XiGrid,
) -> Result<(f64, f64)> {
    Ok((
        input_error(noiseless, oracle)?,
        input_error(noisy, noiseless)?,
    ))
}
