use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{
    conventional_basis_p, conventional_basis_q, conventional_music, hankel_p, hankel_q, Axis,
};
use crate::error::Result;
use crate::mirrored::{
    assemble_p, assemble_q, basis_p, basis_q, candidate_grid, estimate_delays_rel,
    estimate_dopplers_abs, music_scan, resolve_selection, MirrorConfig, SearchOptions,
};
use crate::model::{generate_offsets, generate_symbols, synthesize_rx};
use crate::pipeline::{prepare, Method};
use crate::subspace::{svd_left, CMatrix};

use super::config::ExperimentSpec;

/// Search cost of one method on one scene. The AMS row uses the
/// conventional search and is not reported separately.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub doppler_candidates: usize,
    pub delay_candidates: usize,
    /// `(rows, cols)` of the matrices decomposed.
    pub p_dims: (usize, usize),
    pub q_dims: (usize, usize),
    /// Median over repeats of the SVDs of both matrices.
    pub svd_wall_s: f64,
    /// Median over repeats of the pseudo-spectrum scan and peak picking on
    /// both axes, SVD excluded.
    pub search_wall_s: f64,
}

impl BenchRow {
    pub fn total_candidates(&self) -> usize {
        self.doppler_candidates + self.delay_candidates
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Candidate counts, SVD sizes and search time of the mirrored and
/// conventional searches on the first scene of `spec` at its first sweep
/// point, at the configured oversampling and without refinement. The scan
/// is timed apart from the SVD, which has the same size for both methods.
pub fn bench_candidate_counts(spec: &ExperimentSpec, repeats: usize) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let point = spec.points().swap_remove(0);
    let scen = &point.scenario;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.master_seed);
    let paths = point.sampler.sample(scen, &mut rng)?;
    let offsets = generate_offsets(scen, spec.offsets.timing, spec.offsets.cfo, &mut rng);
    let symbols = generate_symbols(scen, &mut rng);
    let rx = synthesize_rx(scen, &paths, &offsets, &symbols, &mut rng)?;
    let cfg = &point.pipeline;
    let prepared = prepare(&rx, cfg)?;
    let m = MirrorConfig {
        n0: Some(prepared.n0),
        ..cfg.mirror.clone()
    };
    let sel = resolve_selection(&prepared.xi, &m);
    let l = m.num_targets;
    let (ta, t) = (scen.packet_interval_s, scen.symbol_period());
    let repeats = repeats.max(1);
    let opts = SearchOptions {
        refine: false,
        ..m.search()
    };

    let (p_res, q_res) = (1.0 / (ta * (m.p + 1) as f64), t / (m.q + 1) as f64);

    let mut rows = Vec::new();
    for method in [Method::Mirrored, Method::Conventional] {
        let mirrored = method == Method::Mirrored;
        let (pm, qm) = if mirrored {
            (
                assemble_p(&prepared.xi, sel.n0, sel.g0, m.p)?,
                assemble_q(&prepared.xi, sel.n0, sel.m0, m.q)?,
            )
        } else {
            (
                hankel_p(&prepared.xi, sel.n0, sel.g0, m.p)?,
                hankel_q(&prepared.xi, sel.n0, sel.m0, m.q)?,
            )
        };
        let (d, q) = if mirrored {
            (
                estimate_dopplers_abs(&pm, l, ta, opts)?,
                estimate_delays_rel(&qm, l, t, opts)?,
            )
        } else {
            (
                conventional_music(&pm, Axis::Doppler, 2 * l, scen, opts)?,
                conventional_music(&qm, Axis::Delay, 2 * l, scen, opts)?,
            )
        };
        let rank = if mirrored { l } else { 2 * l };
        let svd = |mat: &CMatrix| svd_left(mat).and_then(|dec| dec.with_rank(rank));
        let (pp, qp) = (svd(&pm)?.projector(), svd(&qm)?.projector());
        let (p_grid, q_grid) = (
            candidate_grid(opts.spacing(p_res), 0.5 / ta, !mirrored),
            candidate_grid(opts.spacing(q_res), 0.5 * t, !mirrored),
        );
        let (p_len, q_len) = (m.p, m.q);

        let mut svd_times = Vec::with_capacity(repeats);
        let mut search_times = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let start = Instant::now();
            svd(&pm)?;
            svd(&qm)?;
            svd_times.push(start.elapsed().as_secs_f64());

            let start = Instant::now();
            if mirrored {
                music_scan(&pp, |f| basis_p(f, p_len, 0, ta), &p_grid, l, 0.0, false);
                music_scan(&qp, |x| basis_q(x, q_len, 0, t), &q_grid, l, 0.0, false);
            } else {
                music_scan(
                    &pp,
                    |f| conventional_basis_p(f, p_len, ta),
                    &p_grid,
                    2 * l,
                    0.0,
                    false,
                );
                music_scan(
                    &qp,
                    |x| conventional_basis_q(x, q_len, t),
                    &q_grid,
                    2 * l,
                    0.0,
                    false,
                );
            }
            search_times.push(start.elapsed().as_secs_f64());
        }
        rows.push(BenchRow {
            method,
            doppler_candidates: d.candidates_evaluated,
            delay_candidates: q.candidates_evaluated,
            p_dims: pm.shape(),
            q_dims: qm.shape(),
            svd_wall_s: median(svd_times),
            search_wall_s: median(search_times),
        });
    }
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], mut w: W) -> Result<()> {
    writeln!(w, "# uplink-bench v1")?;
    writeln!(w, "method,doppler_candidates,delay_candidates,total_candidates,p_rows,p_cols,q_rows,q_cols,svd_wall_s,search_wall_s")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{:.6e},{:.6e}",
            r.method,
            r.doppler_candidates,
            r.delay_candidates,
            r.total_candidates(),
            r.p_dims.0,
            r.p_dims.1,
            r.q_dims.0,
            r.q_dims.1,
            r.svd_wall_s,
            r.search_wall_s
        )?;
    }
    Ok(())
}
