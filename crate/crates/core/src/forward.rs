//! Forward models: toric-section transform (2-D), apple transform (3-D),
//! generalized surfaces of revolution, batched sinograms, and an
//! independent brute-force oracle.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, validation, Result};
use crate::geometry::{Branch, ProfileFamily, QuadratureOrders, ScanConfig, Sheet};
use crate::grid::{Dim, Sinogram2D, Sinogram3D};
use crate::phantom::{Bounds, Density};
use crate::quadrature::GaussLegendre;

fn check_radius(r: f64) -> Result<()> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(domain(format!("radius must be >= 1, got {r}")));
    }
    Ok(())
}

fn check_dim<D: Density + ?Sized>(f: &D, dim: Dim) -> Result<()> {
    if f.dim() != dim {
        return Err(validation(format!(
            "{}-D density passed to a {}-D projector",
            f.dim().count(),
            dim.count()
        )));
    }
    Ok(())
}

/// Repeats `eval` with doubled orders until the relative change drops
/// below the tolerance or the cap is reached.
fn refine<F>(orders: &QuadratureOrders, mut eval: F) -> Result<f64>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    let (mut na, mut np) = (orders.n_alpha, orders.n_phi);
    let mut value = eval(na, np)?;
    if !orders.adaptive {
        return Ok(value);
    }
    while na < orders.cap || np < orders.cap {
        na = (2 * na).min(orders.cap);
        np = (2 * np).min(orders.cap);
        let next = eval(na, np)?;
        let change = (next - value).abs();
        value = next;
        if change <= orders.tolerance * next.abs() || next == 0.0 && change == 0.0 {
            break;
        }
    }
    Ok(value)
}

/// Angular interval `[a0, a1] ⊂ [0, arccos(1/r)]` on which the section
/// height `2 - r cos α` lies in `[zlo, zhi]`.
fn alpha_window(r: f64, zlo: f64, zhi: f64) -> Option<(f64, f64)> {
    let amax = (1.0 / r).acos();
    let lo = ((2.0 - zlo) / r).min(1.0);
    let hi = ((2.0 - zhi) / r).max(-1.0);
    let a0 = lo.acos().max(0.0);
    let a1 = hi.acos().min(amax);
    (a1 > a0).then_some((a0, a1))
}

fn section_integral<D: Density + ?Sized>(f: &D, b: &Bounds, x0: f64, r: f64, n: usize) -> f64 {
    let Some((a0, a1)) = alpha_window(r, b.lo[2], b.hi[2]) else {
        return 0.0;
    };
    let big_r = (r * r - 1.0).max(0.0).sqrt();
    let rule = GaussLegendre::cached(n);
    let mut total = 0.0;
    for branch in Branch::ALL {
        let (sr, sq) = branch.signs();
        // x = x0 + sr R + sq r sin α is monotone in α on [0, π/2).
        let base = x0 + sr * big_r;
        let (mut u0, mut u1) = ((b.lo[0] - base) / (sq * r), (b.hi[0] - base) / (sq * r));
        if u0 > u1 {
            std::mem::swap(&mut u0, &mut u1);
        }
        let lo = if u0 <= 0.0 { a0 } else if u0 >= 1.0 { continue } else { a0.max(u0.asin()) };
        let hi = if u1 <= 0.0 { continue } else if u1 >= 1.0 { a1 } else { a1.min(u1.asin()) };
        if hi <= lo {
            continue;
        }
        let mut acc = 0.0;
        for (a, w) in rule.mapped(lo, hi) {
            let (sa, ca) = a.sin_cos();
            acc += w * f.eval([base + sq * r * sa, 0.0, 2.0 - r * ca]);
        }
        total += acc;
    }
    r * total
}

/// Sum of the line integrals over the four branches of the section of
/// radius `r` translated by `x0`, with arc measure.
pub fn toric_transform<D: Density + ?Sized>(f: &D, x0: f64, r: f64, orders: &QuadratureOrders) -> Result<f64> {
    check_radius(r)?;
    check_dim(f, Dim::Two)?;
    let Some(b) = f.bounds() else {
        return Ok(0.0);
    };
    refine(orders, |na, _| Ok(section_integral(f, &b, x0, r, na)))
}

/// Azimuthal windows of a ring that can meet the density's xy box.
struct RingCull {
    cx: f64,
    cy: f64,
    radius: f64,
}

enum Window {
    Empty,
    Full,
    Nodes(i64, i64),
}

impl RingCull {
    fn new(b: &Bounds) -> Self {
        let (hx, hy) = (0.5 * (b.hi[0] - b.lo[0]), 0.5 * (b.hi[1] - b.lo[1]));
        Self {
            cx: 0.5 * (b.lo[0] + b.hi[0]),
            cy: 0.5 * (b.lo[1] + b.hi[1]),
            radius: hx.hypot(hy) * (1.0 + 1e-12) + 1e-12,
        }
    }

    fn window(&self, x0: f64, y0: f64, rho: f64, n: usize) -> Window {
        let (dx, dy) = (self.cx - x0, self.cy - y0);
        let d = dx.hypot(dy);
        if (d - rho).abs() > self.radius {
            return Window::Empty;
        }
        if d == 0.0 || rho == 0.0 {
            return Window::Full;
        }
        let c = (rho * rho + d * d - self.radius * self.radius) / (2.0 * rho * d);
        if c <= -1.0 {
            return Window::Full;
        }
        let half = c.min(1.0).acos();
        let theta = dy.atan2(dx);
        let h = TAU / n as f64;
        let k0 = ((theta - half) / h).floor() as i64;
        let k1 = ((theta + half) / h).ceil() as i64;
        if k1 - k0 + 1 >= n as i64 {
            Window::Full
        } else {
            Window::Nodes(k0, k1)
        }
    }
}

struct Trig {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Trig {
    fn new(n: usize) -> Self {
        let h = TAU / n as f64;
        let (sin, cos) = (0..n).map(|k| (k as f64 * h).sin_cos()).unzip();
        Self { cos, sin }
    }
}

/// `∫₀^{2π} f(x0 + ρ cos φ, y0 + ρ sin φ, z) dφ` by the periodic
/// trapezoid rule, skipping nodes that cannot meet the support.
fn ring_integral<D: Density + ?Sized>(
    f: &D,
    cull: &RingCull,
    trig: &Trig,
    x0: f64,
    y0: f64,
    rho: f64,
    z: f64,
) -> f64 {
    let n = trig.cos.len();
    let at = |k: usize| f.eval([x0 + rho * trig.cos[k], y0 + rho * trig.sin[k], z]);
    let sum: f64 = match cull.window(x0, y0, rho, n) {
        Window::Empty => return 0.0,
        Window::Full => (0..n).map(at).sum(),
        Window::Nodes(k0, k1) => (k0..=k1).map(|k| at(k.rem_euclid(n as i64) as usize)).sum(),
    };
    sum * TAU / n as f64
}

fn apple_integral<D: Density + ?Sized>(
    f: &D,
    b: &Bounds,
    x0: f64,
    y0: f64,
    r: f64,
    na: usize,
    np: usize,
) -> f64 {
    let Some((a0, a1)) = alpha_window(r, b.lo[2], b.hi[2]) else {
        return 0.0;
    };
    let big_r = (r * r - 1.0).max(0.0).sqrt();
    let cull = RingCull::new(b);
    let trig = Trig::new(np);
    let rule = GaussLegendre::cached(na);
    let mut acc = 0.0;
    for (a, w) in rule.mapped(a0, a1) {
        let (sa, ca) = a.sin_cos();
        let z = 2.0 - r * ca;
        for sheet in Sheet::ALL {
            let rho = big_r + sheet.sign() * r * sa;
            if rho <= 0.0 {
                continue;
            }
            acc += w * rho * ring_integral(f, &cull, &trig, x0, y0, rho, z);
        }
    }
    r * acc
}

/// Sum of the surface integrals over both apple sheets of radius `r`
/// translated by `(x0, y0)`.
pub fn apple_transform<D: Density + ?Sized>(
    f: &D,
    x0: f64,
    y0: f64,
    r: f64,
    orders: &QuadratureOrders,
) -> Result<f64> {
    check_radius(r)?;
    check_dim(f, Dim::Three)?;
    let Some(b) = f.bounds() else {
        return Ok(0.0);
    };
    refine(orders, |na, np| Ok(apple_integral(f, &b, x0, y0, r, na, np)))
}

/// `Σ_j ∫₁^r ∫ sqrt(1 + (∂ρ_j/∂z)²) ρ_j f(ρ_j cos φ + x0, ρ_j sin φ + y0, 2 - z) dφ dz`,
/// integrated in `z = r - (r - 1) w²` to absorb endpoint singularities
/// of the slope at `z = r`.
pub fn generalized_transform<D: Density + ?Sized>(
    f: &D,
    profiles: &ProfileFamily,
    x0: f64,
    y0: f64,
    r: f64,
    orders: &QuadratureOrders,
) -> Result<f64> {
    check_radius(r)?;
    check_dim(f, Dim::Three)?;
    if let Some(j) = profiles.profiles().iter().position(|p| !p.has_derivative()) {
        return Err(validation(format!("profile {j} has no z-derivative")));
    }
    let Some(b) = f.bounds() else {
        return Ok(0.0);
    };
    if r == 1.0 {
        return Ok(0.0);
    }
    let zmin = (2.0 - b.hi[2]).max(1.0);
    let zmax = (2.0 - b.lo[2]).min(r);
    if zmax <= zmin {
        return Ok(0.0);
    }
    let w0 = ((r - zmax) / (r - 1.0)).max(0.0).sqrt();
    let w1 = ((r - zmin) / (r - 1.0)).min(1.0).sqrt();
    let cull = RingCull::new(&b);
    refine(orders, |na, np| {
        let rule = GaussLegendre::cached(na);
        let trig = Trig::new(np);
        let mut acc = 0.0;
        for (w, wt) in rule.mapped(w0, w1) {
            let z = r - (r - 1.0) * w * w;
            let jac = 2.0 * (r - 1.0) * w;
            for p in profiles.profiles() {
                let rho = p.value(r, z);
                if rho <= 0.0 {
                    continue;
                }
                let slope = p.dz(r, z).expect("checked above");
                let measure = (1.0 + slope * slope).sqrt();
                if !measure.is_finite() {
                    continue;
                }
                acc += wt * jac * measure * rho * ring_integral(f, &cull, &trig, x0, y0, rho, 2.0 - z);
            }
        }
        Ok(acc)
    })
}

pub fn sinogram_2d<D: Density + ?Sized>(f: &D, cfg: &ScanConfig) -> Result<Sinogram2D> {
    cfg.validate(Dim::Two)?;
    check_dim(f, Dim::Two)?;
    let (x0, r) = (cfg.x_axis(), cfg.r_axis());
    let values = (0..r.count * x0.count)
        .into_par_iter()
        .map(|i| toric_transform(f, x0.coord(i % x0.count), r.coord(i / x0.count), &cfg.quadrature))
        .collect::<Result<Vec<f64>>>()?;
    Sinogram2D::new(x0, r, values, cfg.r_m, cfg.delta)
}

pub fn sinogram_3d<D: Density + ?Sized>(f: &D, cfg: &ScanConfig) -> Result<Sinogram3D> {
    cfg.validate(Dim::Three)?;
    check_dim(f, Dim::Three)?;
    let (x0, y0, r) = (cfg.x_axis(), cfg.y_axis(), cfg.r_axis());
    let plane = x0.count * y0.count;
    let values = (0..r.count * plane)
        .into_par_iter()
        .map(|i| {
            let (ix, iy, ir) = (i % x0.count, (i / x0.count) % y0.count, i / plane);
            apple_transform(f, x0.coord(ix), y0.coord(iy), r.coord(ir), &cfg.quadrature)
        })
        .collect::<Result<Vec<f64>>>()?;
    Sinogram3D::new(x0, y0, r, values, cfg.r_m, cfg.delta)
}

/// Curve or surface for [`oracle_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Manifold {
    Branch { x0: f64, r: f64, branch: Branch },
    /// All four branches.
    Section { x0: f64, r: f64 },
    Sheet { x0: f64, y0: f64, r: f64, sheet: Sheet },
    /// Both sheets.
    Apple { x0: f64, y0: f64, r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleRule {
    /// Uniform midpoint samples.
    Midpoint,
    MonteCarlo { seed: u64 },
}

pub const ORACLE_MIN_SAMPLES: usize = 1000;

/// Polar-angle range of one branch on its circle centred at height 2.
/// Outer halves face away from the section's axis.
fn branch_arc(r: f64, outer: bool) -> (f64, f64) {
    let beta = (1.0 / r).acos();
    if outer {
        (-FRAC_PI_2, -FRAC_PI_2 + beta)
    } else {
        (-FRAC_PI_2 - beta, -FRAC_PI_2)
    }
}

fn branch_oracle<D: Density + ?Sized>(f: &D, x0: f64, r: f64, branch: Branch, n: usize, rule: OracleRule) -> f64 {
    let big_r = (r * r - 1.0).max(0.0).sqrt();
    let (sr, sq) = branch.signs();
    // Circle centre and which half of it the branch is, seen from its centre.
    let cx = x0 + sr * big_r;
    let (p0, p1) = branch_arc(r, true);
    let flip = sq < 0.0;
    let point = |psi: f64| {
        let (s, c) = psi.sin_cos();
        let c = if flip { -c } else { c };
        f.eval([cx + r * c, 0.0, 2.0 + r * s])
    };
    let len = p1 - p0;
    match rule {
        OracleRule::Midpoint => {
            let h = len / n as f64;
            (0..n).map(|k| point(p0 + (k as f64 + 0.5) * h)).sum::<f64>() * h * r
        }
        OracleRule::MonteCarlo { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| point(p0 + len * rng.random::<f64>())).sum::<f64>() * len * r / n as f64
        }
    }
}

fn sheet_oracle<D: Density + ?Sized>(
    f: &D,
    x0: f64,
    y0: f64,
    r: f64,
    sheet: Sheet,
    n: usize,
    rule: OracleRule,
) -> f64 {
    let big_r = (r * r - 1.0).max(0.0).sqrt();
    let (p0, p1) = branch_arc(r, sheet == Sheet::Outer);
    let len = p1 - p0;
    let sample = |psi: f64, phi: f64| {
        let (s, c) = psi.sin_cos();
        let rho = big_r + r * c;
        if rho <= 0.0 {
            return 0.0;
        }
        let (sp, cp) = phi.sin_cos();
        rho * f.eval([x0 + rho * cp, y0 + rho * sp, 2.0 + r * s])
    };
    match rule {
        OracleRule::Midpoint => {
            let m = (n as f64).sqrt().ceil() as usize;
            let (hp, hf) = (len / m as f64, TAU / m as f64);
            let mut acc = 0.0;
            for i in 0..m {
                let psi = p0 + (i as f64 + 0.5) * hp;
                for k in 0..m {
                    acc += sample(psi, (k as f64 + 0.5) * hf);
                }
            }
            acc * hp * hf * r
        }
        OracleRule::MonteCarlo { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = 0.0;
            for _ in 0..n {
                let psi = p0 + len * rng.random::<f64>();
                acc += sample(psi, TAU * rng.random::<f64>());
            }
            acc * len * TAU * r / n as f64
        }
    }
}

/// Brute-force integral over a section branch or apple sheet, sampled
/// uniformly in the polar angle about the generating circle's centre.
pub fn oracle_integral<D: Density + ?Sized>(f: &D, manifold: Manifold, n: usize, rule: OracleRule) -> Result<f64> {
    if n < ORACLE_MIN_SAMPLES {
        return Err(validation(format!("oracle needs >= {ORACLE_MIN_SAMPLES} samples, got {n}")));
    }
    match manifold {
        Manifold::Branch { x0, r, branch } => {
            check_radius(r)?;
            Ok(branch_oracle(f, x0, r, branch, n, rule))
        }
        Manifold::Section { x0, r } => {
            check_radius(r)?;
            Ok(Branch::ALL
                .iter()
                .enumerate()
                .map(|(j, &b)| branch_oracle(f, x0, r, b, n, reseed(rule, j)))
                .sum())
        }
        Manifold::Sheet { x0, y0, r, sheet } => {
            check_radius(r)?;
            check_dim(f, Dim::Three)?;
            Ok(sheet_oracle(f, x0, y0, r, sheet, n, rule))
        }
        Manifold::Apple { x0, y0, r } => {
            check_radius(r)?;
            check_dim(f, Dim::Three)?;
            Ok(Sheet::ALL
                .iter()
                .enumerate()
                .map(|(j, &s)| sheet_oracle(f, x0, y0, r, s, n, reseed(rule, j)))
                .sum())
        }
    }
}

fn reseed(rule: OracleRule, j: usize) -> OracleRule {
    match rule {
        OracleRule::MonteCarlo { seed } => OracleRule::MonteCarlo {
            seed: seed.wrapping_add(0x9e37_79b9 * (j as u64 + 1)),
        },
        other => other,
    }
}

/// Closed-form total length of a toric section, `4 r arccos(1/r)`.
pub fn section_length(r: f64) -> f64 {
    4.0 * r * (1.0 / r).acos()
}

/// Closed-form apple area, `4π R r arccos(1/r)`.
pub fn apple_area(r: f64) -> f64 {
    4.0 * PI * (r * r - 1.0).sqrt() * r * (1.0 / r).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{Phantom, Primitive};

    fn unit_box_2d() -> Phantom {
        Phantom::new(Dim::Two).with(Primitive::cuboid([0.0, 0.0, 0.5], [20.0, 1.0, 3.0], 1.0))
    }

    fn unit_box_3d() -> Phantom {
        Phantom::new(Dim::Three).with(Primitive::cuboid([0.0, 0.0, 0.5], [20.0, 20.0, 3.0], 1.0))
    }

    #[test]
    fn zero_density() {
        let o = QuadratureOrders::default();
        assert_eq!(toric_transform(&Phantom::new(Dim::Two), 0.3, 1.5, &o).unwrap(), 0.0);
        assert_eq!(apple_transform(&Phantom::new(Dim::Three), 0.3, 0.1, 1.5, &o).unwrap(), 0.0);
        let fam = ProfileFamily::apple(2.0).unwrap();
        assert_eq!(generalized_transform(&Phantom::new(Dim::Three), &fam, 0.0, 0.0, 1.5, &o).unwrap(), 0.0);
        let m = Manifold::Section { x0: 0.0, r: 1.5 };
        assert_eq!(oracle_integral(&Phantom::new(Dim::Two), m, 1000, OracleRule::Midpoint).unwrap(), 0.0);
    }

    #[test]
    fn constant_density_lengths() {
        let o = QuadratureOrders::default();
        let t = toric_transform(&unit_box_2d(), 0.0, 2.0, &o).unwrap();
        assert!((t - 8.377_580_409_572_781).abs() < 1e-10, "{t}");
        assert!((section_length(2.0) - 8.377_580_409_572_781).abs() < 1e-13);
        let a = apple_transform(&unit_box_3d(), 0.0, 0.0, 2.0, &o).unwrap();
        assert!((a - 45.585_750_062_112_45).abs() < 1e-9, "{a}");
        assert!((apple_area(2.0) - 45.585_750_062_112_45).abs() < 1e-12);
        let m = Manifold::Branch { x0: 0.0, r: 2.0, branch: Branch::LeftInner };
        let b = oracle_integral(&unit_box_2d(), m, 100_000, OracleRule::Midpoint).unwrap();
        assert!((b - 2.0 * (0.5f64).acos()).abs() < 1e-8);
        let mc = oracle_integral(&unit_box_2d(), m, 10_000, OracleRule::MonteCarlo { seed: 1 }).unwrap();
        assert!((mc - b).abs() / b < 1.0 / 100.0);
        let m = Manifold::Apple { x0: 0.0, y0: 0.0, r: 2.0 };
        let area = oracle_integral(&unit_box_3d(), m, 1_000_000, OracleRule::Midpoint).unwrap();
        assert!((area - apple_area(2.0)).abs() / apple_area(2.0) < 1e-6);
        assert!(oracle_integral(&unit_box_3d(), m, 999, OracleRule::Midpoint).is_err());
    }

    #[test]
    fn gaussian_matches_oracle() {
        let p = Phantom::new(Dim::Two).with(Primitive::gaussian([0.1, 0.0, 0.55], 0.12, 1.3));
        let o = QuadratureOrders::default();
        let t = toric_transform(&p, 0.3, 1.5, &o).unwrap();
        let m = Manifold::Section { x0: 0.3, r: 1.5 };
        let want = oracle_integral(&p, m, 1_000_000, OracleRule::Midpoint).unwrap();
        assert!(((t - want) / want).abs() < 1e-6, "{t} {want}");

        let p3 = Phantom::new(Dim::Three).with(Primitive::gaussian([0.3, -0.2, 0.6], 0.15, 1.0));
        let a = apple_transform(&p3, 0.2, -0.1, 1.5, &o).unwrap();
        let m = Manifold::Apple { x0: 0.2, y0: -0.1, r: 1.5 };
        let want = oracle_integral(&p3, m, 4_000_000, OracleRule::Midpoint).unwrap();
        assert!(((a - want) / want).abs() < 1e-5, "{a} {want}");
    }

    #[test]
    fn generalized_matches_apple() {
        let o = QuadratureOrders {
            tolerance: 1e-11,
            ..QuadratureOrders::default()
        };
        let p = Phantom::new(Dim::Three)
            .with(Primitive::gaussian([0.3, 0.1, 0.5], 0.2, 1.0))
            .with(Primitive::gaussian([-0.4, 0.2, 0.3], 0.12, 0.5));
        let fam = ProfileFamily::apple(2.0).unwrap();
        for &(x0, y0, r) in &[(0.0, 0.0, 1.6), (0.4, -0.3, 1.9), (-0.2, 0.5, 1.3)] {
            let a = apple_transform(&p, x0, y0, r, &o).unwrap();
            let g = generalized_transform(&p, &fam, x0, y0, r, &o).unwrap();
            assert!(((a - g) / a).abs() < 1e-8, "{a} {g}");
        }
    }

    #[test]
    fn cone_area() {
        let beta = 0.4_f64;
        let fam = ProfileFamily::cone(beta, 2.0).unwrap();
        let o = QuadratureOrders::default();
        let r = 1.8;
        let v = generalized_transform(&unit_box_3d(), &fam, 0.0, 0.0, r, &o).unwrap();
        let want = PI * (r - 1.0_f64).powi(2) * beta.tan() / beta.cos();
        assert!(((v - want) / want).abs() < 1e-12);
        let no_slope = ProfileFamily::new(vec![crate::geometry::Profile::without_derivative(|_, z| z - 1.0)], 2.0).unwrap();
        assert!(generalized_transform(&unit_box_3d(), &no_slope, 0.0, 0.0, r, &o).is_err());
    }

    #[test]
    fn sinogram_entries_match_single_calls() {
        let cfg = ScanConfig {
            nx: 8,
            nr: 16,
            x_range: (-1.0, 1.0),
            ..ScanConfig::default()
        };
        let p = Phantom::new(Dim::Two).with(Primitive::gaussian([0.1, 0.0, 0.5], 0.1, 1.0));
        let s = sinogram_2d(&p, &cfg).unwrap();
        let (x0, r) = (cfg.x_axis(), cfg.r_axis());
        let v = toric_transform(&p, x0.coord(3), r.coord(11), &cfg.quadrature).unwrap();
        assert_eq!(s.get(11, 3), v);
        let z = sinogram_2d(&Phantom::new(Dim::Two), &cfg).unwrap();
        assert!(z.values.iter().all(|v| *v == 0.0));
        assert!(sinogram_3d(&p, &cfg).is_err());
    }

    #[test]
    fn radius_domain() {
        let o = QuadratureOrders::default();
        assert!(toric_transform(&unit_box_2d(), 0.0, 0.9, &o).is_err());
        assert!(apple_transform(&unit_box_3d(), 0.0, 0.0, f64::NAN, &o).is_err());
        assert_eq!(toric_transform(&unit_box_2d(), 0.0, 1.0, &o).unwrap(), 0.0);
    }
}
