use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use semitrace::clifford::{almost_diagonalizer, gammas};
use semitrace::gutzwiller::{trace_compare, AmplitudeOrder, CompareOptions, ModelGeometry};
use semitrace::heatkernel::{arithmetic_progression, eta_smoothed, mehler_kernel, u1_table, HeatParams};
use semitrace::landau::{model_spectrum, truncated_eigen, ModelParams, Pairing};
use semitrace::symplectic::{assemble_normal_form, classify_return_map, SymplecticMatrix};
use semitrace_bench::{chi, elliptic, jet, mixed_decomposition, window};

fn clifford(c: &mut Criterion) {
    let mut g = c.benchmark_group("clifford");
    for m in [1, 2, 3] {
        g.bench_with_input(BenchmarkId::new("gammas", m), &m, |b, &m| b.iter(|| gammas(black_box(m))));
    }
    let theta = [0.3, -0.2, 0.5, 0.1, (1.0f64 - 0.39).sqrt()];
    g.bench_function("almost_diagonalizer_m2", |b| b.iter(|| almost_diagonalizer(black_box(&theta), 0.7, 0.1)));
    g.finish();
}

fn landau(c: &mut Criterion) {
    let mut g = c.benchmark_group("landau");
    let p = ModelParams::new(vec![0.6, 1.1], 0.01).unwrap();
    g.bench_function("model_spectrum_m2", |b| b.iter(|| model_spectrum(black_box(&p), 1.0)));
    for cut in [10, 20, 40] {
        g.bench_with_input(BenchmarkId::new("truncated_eigen_m2", cut), &cut, |b, &cut| {
            b.iter(|| truncated_eigen(&p, cut, Pairing::ComplexPairs))
        });
    }
    g.finish();
}

fn heat(c: &mut Criterion) {
    let mut g = c.benchmark_group("heatkernel");
    let p = HeatParams::new(0.7, vec![1.0, 2.0]).unwrap();
    let x = [0.1, -0.2, 0.3, 0.05, 0.4];
    let y = [0.0, 0.1, -0.1, 0.2, 0.0];
    g.bench_function("mehler_kernel_m2", |b| b.iter(|| mehler_kernel(black_box(&x), black_box(&y), &p)));
    let j = jet(vec![1.0, 1.6]);
    g.bench_function("u1_table_m2", |b| b.iter(|| u1_table(&j, &[0.3, 1.0, 3.0])));
    let spec = arithmetic_progression(1.0, 0.3, 4000);
    g.bench_function("eta_smoothed_8001", |b| b.iter(|| eta_smoothed(black_box(&spec), 2e-3)));
    g.finish();
}

fn symplectic(c: &mut Criterion) {
    let p = SymplecticMatrix::new(assemble_normal_form(&mixed_decomposition()).unwrap()).unwrap();
    c.bench_function("symplectic/classify_m4", |b| b.iter(|| classify_return_map(black_box(&p))));
}

fn trace(c: &mut Criterion) {
    let mut g = c.benchmark_group("trace");
    g.sample_size(10);
    let w = window();
    let circle = ModelGeometry::circle(1.0, 1.0).unwrap();
    let resummed = CompareOptions { order: AmplitudeOrder::Resummed, transverse: None };
    g.bench_function("circle_resummed", |b| b.iter(|| trace_compare(&circle, &w, &[0.05, 0.02, 0.01], &resummed)));
    let leading = CompareOptions { order: AmplitudeOrder::Leading, transverse: Some(chi()) };
    let ell = elliptic();
    g.bench_function("elliptic_leading", |b| b.iter(|| trace_compare(&ell, &w, &[0.05], &leading)));
    g.finish();
}

criterion_group!(benches, clifford, landau, heat, symplectic, trace);
criterion_main!(benches);
