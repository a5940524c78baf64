#![allow(dead_code)]

use cstk_core::{Bounds, Dim, Phantom, Primitive, ScanConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn small_2d() -> ScanConfig {
    ScanConfig {
        delta: 0.0,
        nx: 64,
        nr: 64,
        nz: 64,
        x_range: (-6.0, 6.0),
        ..ScanConfig::default()
    }
}

pub fn small_3d() -> ScanConfig {
    ScanConfig {
        delta: 0.1,
        nx: 24,
        ny: 24,
        nr: 32,
        nz: 32,
        x_range: (-4.5, 4.5),
        y_range: (-4.5, 4.5),
        quadrature: cstk_core::QuadratureOrders::fixed(32, 64),
        ..ScanConfig::default()
    }
}

pub fn gaussian_2d(x: f64, z: f64, sigma: f64) -> Phantom {
    Phantom::new(Dim::Two)
        .with_support(Bounds::planar((-3.0, 3.0), (0.0, 1.0)))
        .with(Primitive::gaussian([x, 0.0, z], sigma, 1.0))
}

pub fn gaussian_3d(c: [f64; 3], sigma: f64) -> Phantom {
    Phantom::new(Dim::Three)
        .with_support(Bounds::new([-3.0, -3.0, 0.0], [3.0, 3.0, 0.9]))
        .with(Primitive::gaussian(c, sigma, 1.0))
}

pub fn white_noise(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, sigma).unwrap();
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

pub fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
