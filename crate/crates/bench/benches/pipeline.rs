use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cstk_bench::{blob_2d, blob_3d, config_2d, config_3d};
use cstk_core::volterra::{kernel_2d_offset, kernel_3d_dk1, solve_second_kind};
use cstk_core::*;

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernel_table");
    for n in [128, 512] {
        let s = Axis::nodes(1.0, 4.0, n);
        g.bench_with_input(BenchmarkId::new("toeplitz_2d", n), &s, |b, s| {
            b.iter(|| KernelTable::toeplitz(*s, |d| kernel_2d_offset(d, 0.7)))
        });
    }
    let s = Axis::nodes(1.21, 4.0, 128);
    g.bench_function("dk1_3d/128", |b| {
        b.iter(|| KernelTable::try_from_fn(s, |si, zk| kernel_3d_dk1(si, zk, 1.3)).unwrap())
    });
    g.finish();
}

fn volterra(c: &mut Criterion) {
    let mut g = c.benchmark_group("volterra_solve");
    for n in [256, 1024] {
        let s = Axis::nodes(1.0, 4.0, n);
        let k = Arc::new(KernelTable::toeplitz(s, |d| kernel_2d_offset(d, 0.7)));
        let rhs: Vec<f64> = s.coords().map(f64::cos).collect();
        let sys = VolterraSystem::new(-0.08, k, rhs).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &sys, |b, sys| {
            b.iter(|| solve_second_kind(black_box(sys)).unwrap())
        });
    }
    g.finish();
}

fn forward(c: &mut Criterion) {
    let mut g = c.benchmark_group("forward");
    g.sample_size(10);
    let p2 = blob_2d();
    let cfg2 = config_2d(64);
    g.bench_function("sinogram_2d/64", |b| b.iter(|| sinogram_2d(&p2, &cfg2).unwrap()));
    let p3 = blob_3d();
    let cfg3 = config_3d(16);
    g.bench_function("sinogram_3d/16", |b| b.iter(|| sinogram_3d(&p3, &cfg3).unwrap()));
    g.finish();
}

fn reconstruct(c: &mut Criterion) {
    let mut g = c.benchmark_group("reconstruct");
    g.sample_size(10);
    for n in [64, 128] {
        let cfg = config_2d(n);
        let sino = sinogram_2d(&blob_2d(), &cfg).unwrap();
        let band = build_stable_band(&cfg, Dim::Two, cfg.taper).unwrap();
        g.bench_with_input(BenchmarkId::new("2d", n), &sino, |b, sino| {
            b.iter(|| reconstruct_2d(sino, &cfg, &band).unwrap())
        });
    }
    let cfg = config_3d(16);
    let sino = sinogram_3d(&blob_3d(), &cfg).unwrap();
    let band = build_stable_band(&cfg, Dim::Three, cfg.taper).unwrap();
    g.bench_function("3d/16", |b| b.iter(|| reconstruct_3d(&sino, &cfg, &band).unwrap()));
    g.finish();
}

criterion_group!(benches, kernels, volterra, forward, reconstruct);
criterion_main!(benches);
