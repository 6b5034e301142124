use std::io::Write;

use crate::error::Result;

use super::metrics::MetricRow;

pub const METRICS_CSV_VERSION: u32 = 1;

const HEADER: &str = "method,sweep,value,trials,targets,estimates,\
nmse_delay_mean,nmse_delay_median,nmse_doppler_mean,nmse_doppler_median,\
aoa_rmse_rad,aoa_median_abs_rad,pd,pfa,candidates_mean,\
pred_nmse_delay,pred_nmse_doppler,pred_aoa_rmse_rad,\
pred_structured_nmse_delay,pred_structured_nmse_doppler,pred_structured_aoa_rmse_rad";

/// Writes a `# uplink-metrics v1` comment line, the header and one line per
/// row. Delays are in NMSE units of `T^2`, Doppler in `1/T_A^2`, angles in
/// radians of spatial frequency.
pub fn write_metrics_csv<W: Write>(rows: &[MetricRow], mut w: W) -> Result<()> {
    writeln!(w, "# uplink-metrics v{METRICS_CSV_VERSION}")?;
    writeln!(w, "{HEADER}")?;
    for r in rows {
        let nums = [
            r.nmse_delay_mean,
            r.nmse_delay_median,
            r.nmse_doppler_mean,
            r.nmse_doppler_median,
            r.aoa_rmse_rad,
            r.aoa_median_abs_rad,
            r.pd,
            r.pfa,
            r.candidates_mean,
            r.pred_nmse_delay,
            r.pred_nmse_doppler,
            r.pred_aoa_rmse_rad,
            r.pred_structured_nmse_delay,
            r.pred_structured_nmse_doppler,
            r.pred_structured_aoa_rmse_rad,
        ];
        write!(
            w,
            "{},{},{},{},{},{}",
            r.method, r.sweep_kind, r.sweep_value, r.trials, r.targets, r.estimates
        )?;
        for v in nums {
            write!(w, ",{v:.9e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
