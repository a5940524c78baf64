//! Invariant checks runnable from an installed binary.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use anyhow::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cstk_core::forward::{oracle_integral, Manifold, OracleRule};
use cstk_core::reconstruct::relative_l2;
use cstk_core::spectral::{plancherel_residual, PlaneTransform};
use cstk_core::volterra::{
    bessel_j0, kernel_2d, kernel_2d_abel, kernel_2d_offset, kernel_3d_dk1, kernel_3d_k1, resolvent_neumann,
    ring_phase_integral, ring_points, solve_second_kind, toric_phase_product, toric_phase_sum,
};
use cstk_core::*;

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
}

fn kernel_identity(rng: &mut ChaCha8Rng, n: usize) -> Result<f64> {
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let r = rng.random_range(1.0 + 1e-6..3.0);
        let z = rng.random_range(2.0 - r..=1.0);
        let w = rng.random_range(-20.0..20.0);
        let d = toric_phase_sum(r, z, w)? - Complex64::new(toric_phase_product(r, z, w), 0.0);
        worst = worst.max(d.norm());
    }
    Ok(worst)
}

fn angular_identity(rng: &mut ChaCha8Rng, n: usize) -> f64 {
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let rho = rng.random_range(0.0..4.0);
        let (w1, w2) = (rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0));
        let w = f64::hypot(w1, w2);
        let got = ring_phase_integral(rho, w1, w2, ring_points(rho, w));
        worst = worst.max((got - Complex64::new(2.0 * PI * rho * bessel_j0(w * rho), 0.0)).norm());
    }
    worst
}

fn abel_diagonal() -> Result<f64> {
    let mut worst = 0.0_f64;
    for z in [0.0, 1.0, 2.5] {
        for w in [0.0, 1.0, 5.0] {
            worst = worst.max((kernel_2d_abel(z + 1e-8, z, w)? - PI).abs());
        }
    }
    Ok(worst)
}

fn k2_excess(rng: &mut ChaCha8Rng, n: usize) -> Result<f64> {
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let s = rng.random_range(1.0..9.0);
        let z = rng.random_range(0.0..=s);
        let w = rng.random_range(-60.0..60.0);
        worst = worst.max(kernel_2d(s, z, w)?.abs() - FRAC_PI_2);
    }
    Ok(worst.max(0.0))
}

fn volterra_oracle() -> Result<f64> {
    let axis = Axis::nodes(0.0, 2.0, 1024);
    let k = Arc::new(KernelTable::from_fn(axis, |_, _| 1.0));
    let f = solve_second_kind(&VolterraSystem::new(1.0, k, vec![1.0; 1024])?)?;
    Ok(f.iter()
        .enumerate()
        .map(|(i, v)| (v / (-axis.coord(i)).exp() - 1.0).abs())
        .fold(0.0, f64::max))
}

fn resolvent_agreement(n: usize) -> Result<f64> {
    let s = Axis::nodes(1.0, 4.0, n);
    let k = Arc::new(KernelTable::toeplitz(s, |d| kernel_2d_offset(d, 0.5)));
    let g: Vec<f64> = s.coords().map(|v| (1.3 * v).cos() + 0.2 * v).collect();
    let sys = VolterraSystem::new(1.0, k, g)?;
    let a = solve_second_kind(&sys)?;
    let b = resolvent_neumann(&sys, 30)?;
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale)
}

fn fourier(rng: &mut ChaCha8Rng, sizes: &[usize]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &n in sizes {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        worst = worst.max(plancherel_residual(&v, 0.1)?);
        let t = PlaneTransform::new(&[Axis::new(n, -0.05 * n as f64, 0.1)], 2)?;
        let back = t.inverse(&t.forward_real(&v));
        let err = v.iter().zip(&back).map(|(a, b)| (b - a).norm()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    Ok(worst)
}

fn dk1_differences(rng: &mut ChaCha8Rng, n: usize) -> Result<f64> {
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let z = rng.random_range(1.01..3.5);
        let s = rng.random_range(z + 0.01..4.0);
        let w = rng.random_range(-6.0..6.0);
        let h = 1e-5;
        let fd = (kernel_3d_k1(s + h, z, w)? - kernel_3d_k1(s - h, z, w)?) / (2.0 * h);
        worst = worst.max(((kernel_3d_dk1(s, z, w)? - fd) / fd).abs());
    }
    Ok(worst)
}

fn forward_oracle() -> Result<f64> {
    let p = Phantom::new(Dim::Two)
        .with(Primitive::gaussian([0.2, 0.0, 0.5], 0.15, 1.0))
        .with(Primitive::gaussian([-0.3, 0.0, 0.7], 0.2, 0.5));
    let orders = QuadratureOrders::default();
    let mut worst = 0.0_f64;
    for (x0, r) in [(-1.2, 1.6), (0.0, 1.4), (1.1, 1.9)] {
        let a = toric_transform(&p, x0, r, &orders)?;
        let b = oracle_integral(&p, Manifold::Section { x0, r }, 100_000, OracleRule::Midpoint)?;
        worst = worst.max(((a - b) / b).abs());
    }
    Ok(worst)
}

fn end_to_end(n: usize) -> Result<f64> {
    let cfg = ScanConfig {
        delta: 0.0,
        nx: n,
        nr: n,
        nz: n,
        ..ScanConfig::default()
    };
    let p = Phantom::new(Dim::Two)
        .with_support(Bounds::planar((-3.0, 3.0), (0.0, 1.0)))
        .with(Primitive::gaussian([0.0, 0.0, 0.3], 0.15, 1.0));
    let band = build_stable_band(&cfg, Dim::Two, cfg.taper)?;
    let res = reconstruct_2d(&sinogram_2d(&p, &cfg)?, &cfg, &band)?;
    let reference = band_limited_reference(&sample_grid(&p, &cfg)?, &band)?;
    Ok(relative_l2(&res.grid, &reference)?)
}

/// Runs the checks, writing one line each; returns the failure count.
pub fn run(quick: bool, out: &mut impl Write) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let scale = if quick { 1 } else { 10 };
    let start = Instant::now();
    let mut checks = vec![
        Check { name: "toric phase sum = product form", value: kernel_identity(&mut rng, 1000 * scale)?, limit: 1e-12 },
        Check { name: "ring integral = 2 pi rho J0", value: angular_identity(&mut rng, 100 * scale), limit: 1e-10 },
        Check { name: "Abel kernel diagonal = pi", value: abel_diagonal()?, limit: 1e-6 },
        Check { name: "|K2| - pi/2 excess", value: k2_excess(&mut rng, 1000 * scale)?, limit: 1e-12 },
        Check { name: "Volterra exp(-x) oracle", value: volterra_oracle()?, limit: 1e-6 },
        Check { name: "resolvent vs triangular solve", value: resolvent_agreement(if quick { 128 } else { 512 })?, limit: 1e-8 },
        Check { name: "Plancherel and DFT round trip", value: fourier(&mut rng, &[64, 1000, 4096])?, limit: 1e-12 },
        Check { name: "dK1 vs central differences", value: dk1_differences(&mut rng, 10 * scale)?, limit: 1e-5 },
        Check { name: "toric transform vs oracle", value: forward_oracle()?, limit: 1e-5 },
    ];
    checks.push(Check {
        name: "2-D reconstruction vs band-limited reference",
        value: end_to_end(if quick { 64 } else { 256 })?,
        limit: 0.15,
    });
    let mut failures = 0;
    for c in &checks {
        let pass = c.value < c.limit;
        if !pass {
            failures += 1;
        }
        writeln!(
            out,
            "{} {}: {:.16e} (limit {:e})",
            if pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        )?;
    }
    writeln!(out, "{} of {} checks passed in {:.2} s", checks.len() - failures, checks.len(), start.elapsed().as_secs_f64())?;
    Ok(failures)
}
