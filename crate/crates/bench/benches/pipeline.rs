use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use uplink_bench::fixture;
use uplink_core::aoa::algorithm2;
use uplink_core::baselines::{conventional_music, hankel_p, hankel_q, Axis};
use uplink_core::cacc::cacc;
use uplink_core::mirrored::{
    assemble_p, assemble_q, estimate_delays_rel, estimate_dopplers_abs, resolve_selection,
    SearchOptions,
};
use uplink_core::pipeline::{estimate, highpass, Method};
use uplink_core::MirrorConfig;

fn front_end(c: &mut Criterion) {
    let f = fixture(1);
    c.bench_function("cacc", |b| {
        b.iter(|| cacc(black_box(&f.scene.rx), f.pipeline.reference).unwrap())
    });
    c.bench_function("highpass", |b| {
        b.iter(|| highpass(black_box(&f.prepared.rho), &f.pipeline).unwrap())
    });
}

/// SVD plus line search on both axes, without refinement.
fn searches(c: &mut Criterion) {
    let f = fixture(1);
    let scen = &f.scene.scenario;
    let m = MirrorConfig {
        n0: Some(f.prepared.n0),
        ..f.pipeline.mirror.clone()
    };
    let sel = resolve_selection(&f.prepared.xi, &m);
    let opts = SearchOptions {
        refine: false,
        ..m.search()
    };
    let (l, ta, t) = (m.num_targets, scen.packet_interval_s, scen.symbol_period());
    let (pm, qm) = (
        assemble_p(&f.prepared.xi, sel.n0, sel.g0, m.p).unwrap(),
        assemble_q(&f.prepared.xi, sel.n0, sel.m0, m.q).unwrap(),
    );
    let (hp, hq) = (
        hankel_p(&f.prepared.xi, sel.n0, sel.g0, m.p).unwrap(),
        hankel_q(&f.prepared.xi, sel.n0, sel.m0, m.q).unwrap(),
    );
    let mut g = c.benchmark_group("search");
    g.bench_function("mirrored", |b| {
        b.iter(|| {
            estimate_dopplers_abs(black_box(&pm), l, ta, opts).unwrap();
            estimate_delays_rel(black_box(&qm), l, t, opts).unwrap();
        })
    });
    g.bench_function("conventional", |b| {
        b.iter(|| {
            conventional_music(black_box(&hp), Axis::Doppler, 2 * l, scen, opts).unwrap();
            conventional_music(black_box(&hq), Axis::Delay, 2 * l, scen, opts).unwrap();
        })
    });
    g.finish();
}

fn end_to_end(c: &mut Criterion) {
    let f = fixture(1);
    let scen = &f.scene.scenario;
    let los = f.scene.los().unwrap();
    let est = estimate(
        Method::Mirrored,
        &f.scene.rx,
        los.spatial_freq,
        los.delay_s,
        scen,
        &f.pipeline,
    )
    .unwrap();
    c.bench_function("algorithm2", |b| {
        b.iter(|| {
            algorithm2(
                black_box(&f.prepared.xi),
                &est.estimates,
                &f.pipeline.aoa,
                scen,
            )
            .unwrap()
        })
    });
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    for method in Method::ALL {
        g.bench_function(method.as_str(), |b| {
            b.iter(|| {
                estimate(
                    method,
                    black_box(&f.scene.rx),
                    los.spatial_freq,
                    los.delay_s,
                    scen,
                    &f.pipeline,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, front_end, searches, end_to_end);
criterion_main!(benches);
