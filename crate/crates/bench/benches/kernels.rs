use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use lipvol::lp::upper_bound_report;
use lipvol::product::ez_chain;
use lipvol::smear::{smear, HaarSampler};
use lipvol::straighten::{homotopy_defect, sparsify};
use lipvol::suite::{random_point, rng};
use lipvol::volume::{pair_dvol, triangle_area, PairingMode};
use lipvol_bench::fixture;

fn geometry(c: &mut Criterion) {
    let f = fixture();
    let mut r = rng(1);
    let pts: Vec<Vec<f64>> = (0..3).map(|_| random_point(&mut r, 3.0).coords).collect();
    c.bench_function("triangle_area", |b| b.iter(|| triangle_area(black_box(&pts[0]), &pts[1], &pts[2])));
    c.bench_function("pair_fan_exact", |b| b.iter(|| pair_dvol(black_box(&f.fan), PairingMode::Exact).unwrap()));
    c.bench_function("pair_fan_quadrature", |b| {
        b.iter(|| pair_dvol(black_box(&f.fan), PairingMode::Quadrature).unwrap())
    });
    let far = random_point(&mut r, 6.0).coords;
    c.bench_function("net_snap", |b| b.iter(|| f.net_n.snap(&f.n, black_box(&far)).unwrap()));
}

fn chains(c: &mut Criterion) {
    let f = fixture();
    let sub = f.fan.subdivide();
    c.bench_function("homotopy_identity_subdivided_fan", |b| b.iter(|| homotopy_defect(black_box(&sub)).unwrap()));
    let prod = ez_chain(&f.fan, &f.fan);
    c.bench_function("sparsify_fan_product", |b| {
        b.iter(|| sparsify(&f.m, &f.net_m, &f.m, &f.net_m, black_box(&prod)).unwrap())
    });
    c.bench_function("lp_round_zero", |b| b.iter(|| upper_bound_report(black_box(&f.m), 0).unwrap()));
}

fn sampling(c: &mut Criterion) {
    let f = fixture();
    let s = HaarSampler::new(7, 1000);
    let mut g = c.benchmark_group("smear");
    g.sample_size(10);
    g.bench_function("smear_1000", |b| b.iter(|| smear(&f.m, &f.n, black_box(&f.fan), &f.net_n, &s).unwrap()));
    g.finish();
}

criterion_group!(benches, geometry, chains, sampling);
criterion_main!(benches);
