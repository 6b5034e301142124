//! Scenario, channel and clock-offset model, and synthesis of the post-FFT
//! received grid `y_n[m, g]`.

use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid3;

/// OFDM, array and timing parameterisation of one sensing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub carrier_freq_hz: f64,
    /// `G`
    pub num_subcarriers: usize,
    pub bandwidth_hz: f64,
    /// `T_C`
    pub cp_period_s: f64,
    /// `T_A`
    pub packet_interval_s: f64,
    /// `M`
    pub num_packets: usize,
    /// `N`
    pub num_antennas: usize,
    /// `d / lambda`
    pub antenna_spacing_ratio: f64,
    /// Per-entry variance of the complex AWGN.
    pub noise_variance: f64,
    pub los_nlos_power_gap_db: f64,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            carrier_freq_hz: 3e9,
            num_subcarriers: 256,
            bandwidth_hz: 128e6,
            cp_period_s: 0.4e-6,
            packet_interval_s: 1e-3,
            num_packets: 128,
            num_antennas: 4,
            antenna_spacing_ratio: 0.5,
            noise_variance: 0.01,
            los_nlos_power_gap_db: 10.0,
            rng_seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// OFDM symbol length `T = G / bandwidth`; subcarrier spacing is `1/T`.
    pub fn symbol_period(&self) -> f64 {
        self.num_subcarriers as f64 / self.bandwidth_hz
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.num_antennas < 2 {
            return bad("num_antennas must be >= 2");
        }
        if self.num_packets < 2 {
            return bad("num_packets must be >= 2");
        }
        if self.num_subcarriers < 2 {
            return bad("num_subcarriers must be >= 2");
        }
        if !(self.bandwidth_hz > 0.0 && self.packet_interval_s > 0.0 && self.carrier_freq_hz > 0.0)
        {
            return bad("bandwidth, packet interval and carrier must be positive");
        }
        if !(self.cp_period_s > 0.0 && self.cp_period_s < self.symbol_period()) {
            return bad("cp_period_s must lie in (0, T)");
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return bad("noise_variance must be finite and non-negative");
        }
        if !(self.antenna_spacing_ratio > 0.0) {
            return bad("antenna_spacing_ratio must be positive");
        }
        Ok(())
    }

    /// Spatial frequency `Omega = 2 pi (d/lambda) cos(theta)`.
    pub fn spatial_freq(&self, aoa_rad: f64) -> f64 {
        TAU * self.antenna_spacing_ratio * aoa_rad.cos()
    }

    /// Noise variance giving `snr_db` relative to a LOS path of power `los_power`.
    pub fn noise_for_snr(los_power: f64, snr_db: f64) -> f64 {
        los_power / 10f64.powf(snr_db / 10.0)
    }
}

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    pub gain: Complex64,
    pub delay_s: f64,
    pub doppler_hz: f64,
    /// Angle of arrival `theta` in `(0, pi)`.
    pub aoa_rad: f64,
    /// `Omega`, the phase step between adjacent antennas.
    pub spatial_freq: f64,
    pub is_los: bool,
}

impl PathParams {
    pub fn new(
        cfg: &ScenarioConfig,
        gain: Complex64,
        delay_s: f64,
        doppler_hz: f64,
        aoa_rad: f64,
        is_los: bool,
    ) -> Self {
        Self {
            gain,
            delay_s,
            doppler_hz,
            aoa_rad,
            spatial_freq: cfg.spatial_freq(aoa_rad),
            is_los,
        }
    }

    /// Builds a path directly from its spatial frequency.
    pub fn with_spatial_freq(
        gain: Complex64,
        delay_s: f64,
        doppler_hz: f64,
        spatial_freq: f64,
        is_los: bool,
    ) -> Self {
        Self {
            gain,
            delay_s,
            doppler_hz,
            aoa_rad: f64::NAN,
            spatial_freq,
            is_los,
        }
    }
}

/// Splits a path list into the LOS path and the NLOS targets, checking there
/// is exactly one LOS path.
pub fn split_los(paths: &[PathParams]) -> Result<(PathParams, Vec<PathParams>)> {
    let los: Vec<_> = paths.iter().filter(|p| p.is_los).collect();
    if los.len() != 1 {
        return Err(Error::LosCount(los.len()));
    }
    let targets = paths.iter().filter(|p| !p.is_los).copied().collect();
    Ok((*los[0], targets))
}

/// Per-packet clock asynchrony.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetTrace {
    pub timing_offset_s: Vec<f64>,
    pub cfo_hz: Vec<f64>,
}

impl OffsetTrace {
    pub fn zeros(num_packets: usize) -> Self {
        Self {
            timing_offset_s: vec![0.0; num_packets],
            cfo_hz: vec![0.0; num_packets],
        }
    }

    pub fn len(&self) -> usize {
        self.timing_offset_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timing_offset_s.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimingOffsetModel {
    None,
    /// Redrawn uniformly over `[0, max_s)` for every packet.
    PerPacketUniform {
        max_s: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CfoModel {
    None,
    /// One offset per run, uniform over `[-max_abs_hz, max_abs_hz]`.
    Constant {
        max_abs_hz: f64,
    },
    /// Uniform start in `[-max_abs_hz, max_abs_hz]`, then Gaussian steps of
    /// standard deviation `step_hz` between packets.
    RandomWalk {
        max_abs_hz: f64,
        step_hz: f64,
    },
}

/// Offset laws used when a config does not say otherwise: TO uniform over
/// `[0, 0.1 T_C)` per packet, CFO constant within +-1 ppm of the carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OffsetModel {
    pub timing: TimingOffsetModel,
    pub cfo: CfoModel,
}

impl OffsetModel {
    pub fn default_for(cfg: &ScenarioConfig) -> Self {
        Self {
            timing: TimingOffsetModel::PerPacketUniform {
                max_s: 0.1 * cfg.cp_period_s,
            },
            cfo: CfoModel::Constant {
                max_abs_hz: 1e-6 * cfg.carrier_freq_hz,
            },
        }
    }

    pub fn none() -> Self {
        Self {
            timing: TimingOffsetModel::None,
            cfo: CfoModel::None,
        }
    }
}

impl Default for OffsetModel {
    fn default() -> Self {
        Self::default_for(&ScenarioConfig::default())
    }
}

pub fn generate_offsets<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    timing: TimingOffsetModel,
    cfo: CfoModel,
    rng: &mut R,
) -> OffsetTrace {
    let m_count = cfg.num_packets;
    let timing_offset_s = match timing {
        TimingOffsetModel::None => vec![0.0; m_count],
        TimingOffsetModel::PerPacketUniform { max_s } => {
            (0..m_count).map(|_| rng.random::<f64>() * max_s).collect()
        }
    };
    let cfo_hz = match cfo {
        CfoModel::None => vec![0.0; m_count],
        CfoModel::Constant { max_abs_hz } => {
            let v = (2.0 * rng.random::<f64>() - 1.0) * max_abs_hz;
            vec![v; m_count]
        }
        CfoModel::RandomWalk {
            max_abs_hz,
            step_hz,
        } => {
            let mut v = (2.0 * rng.random::<f64>() - 1.0) * max_abs_hz;
            let mut out = Vec::with_capacity(m_count);
            for m in 0..m_count {
                if m > 0 {
                    let step: f64 = rng.sample(StandardNormal);
                    v += step * step_hz;
                }
                out.push(v);
            }
            out
        }
    };
    OffsetTrace {
        timing_offset_s,
        cfo_hz,
    }
}

/// Unit-modulus data symbols `x[m, g]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    packets: usize,
    subcarriers: usize,
    data: Vec<Complex64>,
}

impl SymbolGrid {
    pub fn ones(packets: usize, subcarriers: usize) -> Self {
        Self {
            packets,
            subcarriers,
            data: vec![Complex64::new(1.0, 0.0); packets * subcarriers],
        }
    }

    #[inline]
    pub fn get(&self, m: usize, g: usize) -> Complex64 {
        self.data[m * self.subcarriers + g]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.packets, self.subcarriers)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }
}

/// QPSK symbols, `(+-1 +- j)/sqrt(2)`.
pub fn generate_symbols<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> SymbolGrid {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let n = cfg.num_packets * cfg.num_subcarriers;
    let data = (0..n)
        .map(|_| {
            let bits: u8 = rng.random_range(0..4);
            let re = if bits & 1 == 0 { h } else { -h };
            let im = if bits & 2 == 0 { h } else { -h };
            Complex64::new(re, im)
        })
        .collect();
    SymbolGrid {
        packets: cfg.num_packets,
        subcarriers: cfg.num_subcarriers,
        data,
    }
}

/// Received frequency-domain grid `y[n][m][g]`, shape `N x M x G`.
#[derive(Debug, Clone, PartialEq)]
pub struct RxGrid {
    pub grid: Grid3,
}

impl RxGrid {
    pub fn num_antennas(&self) -> usize {
        self.grid.slices()
    }

    /// Dumps the grid as three little-endian `u64` dimensions `(N, M, G)`
    /// followed by interleaved little-endian `f64` re/im pairs.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let (n, m, g) = self.grid.shape();
        for d in [n, m, g] {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.grid.as_slice().len() * 16);
        for v in self.grid.as_slice() {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut dims = [0usize; 3];
        for d in dims.iter_mut() {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            *d = usize::try_from(u64::from_le_bytes(b))
                .map_err(|_| Error::Shape("dimension overflows usize".into()))?;
        }
        let count = dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]))
            .ok_or_else(|| Error::Shape("grid too large".into()))?;
        let mut raw = vec![0u8; count * 16];
        r.read_exact(&mut raw)?;
        let data = raw
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self {
            grid: Grid3::from_vec(dims[0], dims[1], dims[2], data)?,
        })
    }
}

/// Synthesises
/// `y_n[m,g] = sum_l a_l e^{j n W_l} e^{j 2 pi m T_A (f_l + df(m))} e^{-j 2 pi g (tau_l + dt(m)) / T} x[m,g] + z_n[m,g]`.
pub fn synthesize_rx<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    paths: &[PathParams],
    offsets: &OffsetTrace,
    symbols: &SymbolGrid,
    rng: &mut R,
) -> Result<RxGrid> {
    cfg.validate()?;
    split_los(paths)?;
    for (index, p) in paths.iter().enumerate() {
        if !(p.delay_s >= 0.0 && p.delay_s < cfg.cp_period_s) {
            return Err(Error::DelayOutsideCp {
                index,
                delay_s: p.delay_s,
                cp_s: cfg.cp_period_s,
            });
        }
    }
    let (n_ant, m_count, g_count) = (cfg.num_antennas, cfg.num_packets, cfg.num_subcarriers);
    if offsets.timing_offset_s.len() != m_count || offsets.cfo_hz.len() != m_count {
        return Err(Error::TraceLength {
            expected: m_count,
            got: offsets.timing_offset_s.len().min(offsets.cfo_hz.len()),
        });
    }
    if symbols.shape() != (m_count, g_count) {
        return Err(Error::Shape(format!(
            "symbol grid {:?}, scenario needs ({m_count}, {g_count})",
            symbols.shape()
        )));
    }

    let t_sym = cfg.symbol_period();
    let t_a = cfg.packet_interval_s;
    let mut grid = Grid3::zeros(n_ant, m_count, g_count);

    // Sum over paths of the packet/subcarrier factor, shared by all antennas
    // up to the per-path steering phase.
    let mut row = vec![Complex64::new(0.0, 0.0); g_count];
    for m in 0..m_count {
        let df = offsets.cfo_hz[m];
        let dt = offsets.timing_offset_s[m];
        for n in 0..n_ant {
            row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for p in paths {
                let head = p.gain
                    * Complex64::cis(n as f64 * p.spatial_freq)
                    * Complex64::cis(TAU * m as f64 * t_a * (p.doppler_hz + df));
                let step = -TAU * (p.delay_s + dt) / t_sym;
                for (g, v) in row.iter_mut().enumerate() {
                    *v += head * Complex64::cis(step * g as f64);
                }
            }
            for (g, v) in row.iter().enumerate() {
                grid.set(n, m, g, *v * symbols.get(m, g));
            }
        }
    }

    if cfg.noise_variance > 0.0 {
        let normal = Normal::new(0.0, (cfg.noise_variance / 2.0).sqrt())
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        for v in grid.as_mut_slice() {
            *v += Complex64::new(normal.sample(rng), normal.sample(rng));
        }
    }
    Ok(RxGrid { grid })
}

/// Random target scenes: one LOS path with unit gain and `num_targets` NLOS
/// paths `los_nlos_power_gap_db` weaker with uniform phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSampler {
    pub num_targets: usize,
    /// All path delays are drawn from `[0, delay_max_s)`; the smallest is the LOS.
    pub delay_max_s: f64,
    pub doppler_max_hz: f64,
    /// Targets slower than this are redrawn (they sit inside the high-pass stopband).
    pub min_abs_doppler_hz: f64,
    pub min_rel_delay_s: f64,
    /// Minimum spacing between target `|f_D|` values.
    pub min_doppler_separation_hz: f64,
    /// Minimum spacing between target relative delays.
    pub min_delay_separation_s: f64,
    pub max_attempts: usize,
}

impl Default for SceneSampler {
    fn default() -> Self {
        Self {
            num_targets: 3,
            delay_max_s: 0.36e-6,
            doppler_max_hz: 300.0,
            min_abs_doppler_hz: 20.0,
            min_rel_delay_s: 20e-9,
            min_doppler_separation_hz: 0.0,
            min_delay_separation_s: 0.0,
            max_attempts: 10_000,
        }
    }
}

impl SceneSampler {
    pub fn sample<R: Rng + ?Sized>(
        &self,
        cfg: &ScenarioConfig,
        rng: &mut R,
    ) -> Result<Vec<PathParams>> {
        if self.delay_max_s > cfg.cp_period_s {
            return Err(Error::InvalidConfig(
                "delay_max_s exceeds the cyclic prefix".into(),
            ));
        }
        let nlos_amp = 10f64.powf(-cfg.los_nlos_power_gap_db / 20.0);
        for _ in 0..self.max_attempts.max(1) {
            let mut delays: Vec<f64> = (0..=self.num_targets)
                .map(|_| rng.random::<f64>() * self.delay_max_s)
                .collect();
            delays.sort_by(f64::total_cmp);
            let tau0 = delays[0];
            let dopplers: Vec<f64> = (0..self.num_targets)
                .map(|_| (2.0 * rng.random::<f64>() - 1.0) * self.doppler_max_hz)
                .collect();
            let rel: Vec<f64> = delays[1..].iter().map(|d| d - tau0).collect();
            if !self.admissible(&rel, &dopplers) {
                continue;
            }
            let los_aoa = rng.random::<f64>() * PI;
            let mut paths = vec![PathParams::new(
                cfg,
                Complex64::new(1.0, 0.0),
                tau0,
                0.0,
                los_aoa,
                true,
            )];
            for (d, f) in delays[1..].iter().zip(&dopplers) {
                let gain = Complex64::from_polar(nlos_amp, rng.random::<f64>() * TAU);
                let aoa = rng.random::<f64>() * PI;
                paths.push(PathParams::new(cfg, gain, *d, *f, aoa, false));
            }
            return Ok(paths);
        }
        Err(Error::InvalidConfig(format!(
            "no admissible scene after {} attempts",
            self.max_attempts
        )))
    }

    fn admissible(&self, rel_delays: &[f64], dopplers: &[f64]) -> bool {
        if rel_delays.iter().any(|&d| d < self.min_rel_delay_s) {
            return false;
        }
        if dopplers.iter().any(|f| f.abs() < self.min_abs_doppler_hz) {
            return false;
        }
        for i in 0..dopplers.len() {
            for j in i + 1..dopplers.len() {
                if (dopplers[i].abs() - dopplers[j].abs()).abs() < self.min_doppler_separation_hz {
                    return false;
                }
                if (rel_delays[i] - rel_delays[j]).abs() < self.min_delay_separation_s {
                    return false;
                }
            }
        }
        true
    }
}
