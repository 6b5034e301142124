//! Paired per-target estimates produced by the delay/Doppler and AoA stages.

use std::io::Write;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AoaStatus {
    #[default]
    NotEstimated,
    /// One peak above threshold.
    Unique,
    /// Several peaks; one kept by the separation rule.
    Disambiguated,
    /// No usable peak.
    Unresolved,
}

impl AoaStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            AoaStatus::NotEstimated => "not_estimated",
            AoaStatus::Unique => "unique",
            AoaStatus::Disambiguated => "disambiguated",
            AoaStatus::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetEstimate {
    /// `tau_l - tau_0`.
    pub delay_rel_s: f64,
    pub delay_abs_s: f64,
    /// Signed.
    pub doppler_hz: f64,
    pub aoa_rad: Option<f64>,
    pub aoa_status: AoaStatus,
    /// `|P_xi|` of the chosen pair.
    pub pair_score: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EstimateSet {
    pub targets: Vec<TargetEstimate>,
    /// Fewer Doppler peaks than requested were found.
    pub short_doppler: bool,
    /// Fewer delay peaks than requested were found.
    pub short_delay: bool,
    /// Nothing to estimate (no NLOS energy or zero model order).
    pub empty: bool,
}

impl EstimateSet {
    pub fn empty() -> Self {
        Self {
            empty: true,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "target_id,delay_s,delay_rel_s,doppler_hz,pair_score,aoa_rad,resolution_flag"
        )?;
        for (i, t) in self.targets.iter().enumerate() {
            let aoa = t
                .aoa_rad
                .map_or_else(|| "nan".to_string(), |a| format!("{a:.12e}"));
            writeln!(
                w,
                "{i},{:.12e},{:.12e},{:.12e},{:.12e},{aoa},{}",
                t.delay_abs_s,
                t.delay_rel_s,
                t.doppler_hz,
                t.pair_score,
                t.aoa_status.as_str()
            )?;
        }
        Ok(())
    }
}
