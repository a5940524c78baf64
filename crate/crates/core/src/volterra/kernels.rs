//! Kernels of the 2-D and 3-D inversions.
//!
//! Integrals over `u ∈ [0, 1]` with `1/sqrt(u)` or `1/sqrt(1-u)` weights
//! are taken in `θ` with `u = sin²θ`, which removes both endpoint
//! singularities.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::geometry::{toric_branch_x, Branch};
use crate::quadrature::GaussLegendre;

use super::special::{bessel_j01, sinc};

pub const KERNEL_2D_ORDER: usize = 64;
pub const KERNEL_3D_ORDER: usize = 96;
/// Smallest admissible `R = sqrt((z-1) + (s-z)u)` in the 3-D kernels.
pub const RADIUS_FLOOR: f64 = 1e-3;

const DIVIDED_DIFFERENCE_SWITCH: f64 = 0.05;

fn check_triangle(s: f64, z: f64) -> Result<()> {
    if !(z <= s) || !s.is_finite() || !z.is_finite() {
        return Err(domain(format!("kernel needs z <= s, got s = {s}, z = {z}")));
    }
    Ok(())
}

/// `K₂(s, z) = 2 ∫₀^{π/2} sin²θ sinc(ω sinθ sqrt(s - z)) dθ`.
pub fn kernel_2d(s: f64, z: f64, omega: f64) -> Result<f64> {
    check_triangle(s, z)?;
    Ok(kernel_2d_offset(s - z, omega))
}

/// [`kernel_2d`] as a function of `s - z` alone.
pub fn kernel_2d_offset(d: f64, omega: f64) -> f64 {
    let c = omega * d.max(0.0).sqrt();
    let rule = GaussLegendre::cached(KERNEL_2D_ORDER);
    2.0 * rule.integrate(0.0, FRAC_PI_2, |t| {
        let st = t.sin();
        st * st * sinc(c * st)
    })
}

/// `cos(ω sqrt(r - z)) / sqrt(r - z)`.
pub fn kernel_2d_firstkind(r: f64, z: f64, omega: f64) -> Result<f64> {
    if !(z < r) {
        return Err(domain(format!("first-kind kernel needs z < r, got r = {r}, z = {z}")));
    }
    Ok(firstkind_offset(r - z, omega))
}

#[inline]
fn firstkind_offset(d: f64, omega: f64) -> f64 {
    let q = d.sqrt();
    (omega * q).cos() / q
}

/// Abel transform of the first-kind kernel in its first argument,
/// `∫_z^s kernel_2d_firstkind(r, z) / sqrt(s - r) dr`, by quadrature in
/// `r = z + (s - z) sin²θ`. The kernel is evaluated on the offset
/// `r - z` directly so the limit `s → z` stays accurate.
pub fn kernel_2d_abel(s: f64, z: f64, omega: f64) -> Result<f64> {
    if !(z < s) {
        return Err(domain(format!("Abel kernel needs z < s, got s = {s}, z = {z}")));
    }
    let d = s - z;
    let rule = GaussLegendre::cached(KERNEL_2D_ORDER);
    let mut acc = 0.0;
    for (t, w) in rule.mapped(0.0, FRAC_PI_2) {
        let (st, ct) = t.sin_cos();
        let jac = 2.0 * d * st * ct;
        acc += w * firstkind_offset(d * st * st, omega) * jac / (d.sqrt() * ct);
    }
    Ok(acc)
}

fn check_3d(s: f64, z: f64) -> Result<()> {
    check_triangle(s, z)?;
    if !(z >= 1.0) {
        return Err(domain(format!("3-D kernels need z >= 1, got {z}")));
    }
    Ok(())
}

/// `K₁(s, z) = ∫₀¹ H(s, z, u) / (sqrt(u) sqrt(1-u)) du` with
/// `H = 2π Σ± ρ± J₀(|ω| ρ±)`, `ρ± = R ± sqrt(s-z) sqrt(u)`.
pub fn kernel_3d_k1(s: f64, z: f64, omega: f64) -> Result<f64> {
    check_3d(s, z)?;
    let w = omega.abs();
    let sd = (s - z).sqrt();
    let rule = GaussLegendre::cached(KERNEL_3D_ORDER);
    let mut acc = 0.0;
    for (t, wt) in rule.mapped(0.0, FRAC_PI_2) {
        let st = t.sin();
        let u = st * st;
        let big_r = ((z - 1.0) + (s - z) * u).sqrt();
        let a = sd * st;
        let (p, m) = (big_r + a, big_r - a);
        acc += wt * (p * bessel_j01(w * p).0 + m * bessel_j01(w * m).0);
    }
    Ok(4.0 * PI * acc)
}

/// `F(ρ) = d/dρ [ρ J₀(ωρ)]` and its derivative.
#[inline]
fn f_and_derivative(rho: f64, w: f64) -> (f64, f64) {
    let x = w * rho;
    let (j0, j1) = bessel_j01(x);
    (j0 - x * j1, -w * j1 - w * x * j0)
}

/// `∂K₁/∂s`, differentiated under the integral:
/// `∂H/∂s = 2π [ (u / 2R)(F(ρ₊) + F(ρ₋)) + u (F(ρ₊) - F(ρ₋)) / (2a) ]`
/// with `a = sqrt(s-z) sqrt(u)`; the divided difference is integrated
/// from `F'` when `a` is small.
pub fn kernel_3d_dk1(s: f64, z: f64, omega: f64) -> Result<f64> {
    check_3d(s, z)?;
    let floor = (z - 1.0).sqrt();
    if floor < RADIUS_FLOOR {
        return Err(Error::SingularityGuard { radius: floor, floor: RADIUS_FLOOR });
    }
    let w = omega.abs();
    let sd = (s - z).sqrt();
    let rule = GaussLegendre::cached(KERNEL_3D_ORDER);
    let inner = GaussLegendre::cached(8);
    let mut acc = 0.0;
    for (t, wt) in rule.mapped(0.0, FRAC_PI_2) {
        let st = t.sin();
        let u = st * st;
        let big_r = ((z - 1.0) + (s - z) * u).sqrt();
        let a = sd * st;
        let (fp, _) = f_and_derivative(big_r + a, w);
        let (fm, _) = f_and_derivative(big_r - a, w);
        let divided = if a < DIVIDED_DIFFERENCE_SWITCH {
            0.5 * inner.integrate(-1.0, 1.0, |x| f_and_derivative(big_r + x * a, w).1)
        } else {
            (fp - fm) / (2.0 * a)
        };
        acc += wt * (u / (2.0 * big_r) * (fp + fm) + u * divided);
    }
    Ok(4.0 * PI * acc)
}

/// `Σ_j exp(-iω x_j)` over the four branch abscissae at height `z`.
pub fn toric_phase_sum(r: f64, z: f64, omega: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for b in Branch::ALL {
        let x = toric_branch_x(r, z, b)?;
        acc += Complex64::from_polar(1.0, -omega * x);
    }
    Ok(acc)
}

/// `4 cos(ωR) cos(ω sqrt(r² - (z-2)²))`.
pub fn toric_phase_product(r: f64, z: f64, omega: f64) -> f64 {
    let big_r = (r * r - 1.0).sqrt();
    let d = z - 2.0;
    4.0 * (omega * big_r).cos() * (omega * (r * r - d * d).max(0.0).sqrt()).cos()
}

/// `∫₀^{2π} ρ exp(-iρ(ω₁ cos φ + ω₂ sin φ)) dφ` by the periodic
/// trapezoid rule with `n` points.
pub fn ring_phase_integral(rho: f64, w1: f64, w2: f64, n: usize) -> Complex64 {
    let h = 2.0 * PI / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let (sp, cp) = (k as f64 * h).sin_cos();
        acc += Complex64::from_polar(1.0, -rho * (w1 * cp + w2 * sp));
    }
    acc * (rho * h)
}

/// Trapezoid points sufficient for [`ring_phase_integral`] at 1e-14.
pub fn ring_points(rho: f64, w: f64) -> usize {
    2 * ((rho * w).abs().ceil() as usize) + 48
}
