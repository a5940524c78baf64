//! Analytic test densities and their sampling onto grids.
//!
//! Primitives live in 3-D space; 2-D phantoms are evaluated in the
//! `y = 0` plane with coordinates `(x, z)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{validation, Result};
use crate::geometry::ScanConfig;
use crate::grid::{Axis, DensityGrid, Dim};

pub use crate::spectral::band_limited_reference;

/// Gaussians are cut off at this many standard deviations.
pub const GAUSSIAN_CUTOFF: f64 = 6.0;

/// Axis-aligned box `lo ≤ p ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Bounds {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Self {
        Self { lo, hi }
    }

    /// 2-D bounds over `(x, z)`, unbounded in y.
    pub fn planar(x: (f64, f64), z: (f64, f64)) -> Self {
        Self::new([x.0, f64::NEG_INFINITY, z.0], [x.1, f64::INFINITY, z.1])
    }

    pub fn union(&self, o: &Bounds) -> Bounds {
        Bounds::new(
            [0, 1, 2].map(|i| self.lo[i].min(o.lo[i])),
            [0, 1, 2].map(|i| self.hi[i].max(o.hi[i])),
        )
    }

    pub fn intersect(&self, o: &Bounds) -> Option<Bounds> {
        let b = Bounds::new(
            [0, 1, 2].map(|i| self.lo[i].max(o.lo[i])),
            [0, 1, 2].map(|i| self.hi[i].min(o.hi[i])),
        );
        (0..3).all(|i| b.lo[i] <= b.hi[i]).then_some(b)
    }

    #[inline]
    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|i| p[i] >= self.lo[i] && p[i] <= self.hi[i])
    }

    #[inline]
    fn strictly_contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|i| p[i] > self.lo[i] && p[i] < self.hi[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveKind {
    Gaussian,
    Ball,
    Box,
}

impl PrimitiveKind {
    pub fn name(self) -> &'static str {
        match self {
            PrimitiveKind::Gaussian => "gaussian",
            PrimitiveKind::Ball => "ball",
            PrimitiveKind::Box => "box",
        }
    }
}

/// One term of a phantom. `size` is `[σ, σ, σ]` for gaussians,
/// `[a, a, a]` for balls of radius `a`, and the full edge lengths of a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub kind: PrimitiveKind,
    pub center: [f64; 3],
    pub size: [f64; 3],
    pub amplitude: f64,
}

impl Primitive {
    pub fn gaussian(center: [f64; 3], sigma: f64, amplitude: f64) -> Self {
        Self {
            kind: PrimitiveKind::Gaussian,
            center,
            size: [sigma; 3],
            amplitude,
        }
    }

    pub fn ball(center: [f64; 3], radius: f64, amplitude: f64) -> Self {
        Self {
            kind: PrimitiveKind::Ball,
            center,
            size: [radius; 3],
            amplitude,
        }
    }

    pub fn cuboid(center: [f64; 3], widths: [f64; 3], amplitude: f64) -> Self {
        Self {
            kind: PrimitiveKind::Box,
            center,
            size: widths,
            amplitude,
        }
    }

    #[inline]
    pub fn eval(&self, p: [f64; 3]) -> f64 {
        let d = [0, 1, 2].map(|i| p[i] - self.center[i]);
        match self.kind {
            PrimitiveKind::Gaussian => {
                let s = self.size[0];
                let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                if r2 > GAUSSIAN_CUTOFF * GAUSSIAN_CUTOFF * s * s {
                    0.0
                } else {
                    self.amplitude * (-r2 / (2.0 * s * s)).exp()
                }
            }
            PrimitiveKind::Ball => {
                let a = self.size[0];
                if d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= a * a {
                    self.amplitude
                } else {
                    0.0
                }
            }
            PrimitiveKind::Box => {
                if (0..3).all(|i| d[i].abs() <= 0.5 * self.size[i]) {
                    self.amplitude
                } else {
                    0.0
                }
            }
        }
    }

    /// Region outside which the primitive vanishes.
    pub fn bounds(&self) -> Bounds {
        let half = match self.kind {
            PrimitiveKind::Gaussian => [GAUSSIAN_CUTOFF * self.size[0]; 3],
            PrimitiveKind::Ball => [self.size[0]; 3],
            PrimitiveKind::Box => self.size.map(|w| 0.5 * w),
        };
        Bounds::new(
            [0, 1, 2].map(|i| self.center[i] - half[i]),
            [0, 1, 2].map(|i| self.center[i] + half[i]),
        )
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitude: self.amplitude * factor,
            ..*self
        }
    }

    pub fn translated(&self, shift: [f64; 3]) -> Self {
        Self {
            center: [0, 1, 2].map(|i| self.center[i] + shift[i]),
            ..*self
        }
    }
}

/// Anything a projector can integrate.
pub trait Density: Sync {
    fn dim(&self) -> Dim;
    fn eval(&self, p: [f64; 3]) -> f64;
    /// Box outside which the density vanishes; `None` if identically zero.
    fn bounds(&self) -> Option<Bounds>;
}

/// Sum of primitives, hard-truncated to an optional declared support.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub dim: Dim,
    pub primitives: Vec<Primitive>,
    pub support: Option<Bounds>,
}

impl Phantom {
    pub fn new(dim: Dim) -> Self {
        Self {
            dim,
            primitives: Vec::new(),
            support: None,
        }
    }

    pub fn with_support(mut self, support: Bounds) -> Self {
        self.support = Some(support);
        self
    }

    pub fn with(mut self, p: Primitive) -> Self {
        self.primitives.push(p);
        self
    }

    pub fn push(&mut self, p: Primitive) {
        self.primitives.push(p);
    }

    /// Every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            primitives: self.primitives.iter().map(|p| p.scaled(factor)).collect(),
            ..self.clone()
        }
    }

    /// Primitives and support shifted by `shift`.
    pub fn translated(&self, shift: [f64; 3]) -> Self {
        Self {
            dim: self.dim,
            primitives: self.primitives.iter().map(|p| p.translated(shift)).collect(),
            support: self.support.map(|b| {
                Bounds::new(
                    [0, 1, 2].map(|i| b.lo[i] + shift[i]),
                    [0, 1, 2].map(|i| b.hi[i] + shift[i]),
                )
            }),
        }
    }

    /// Union of both phantoms' primitives; supports are merged.
    pub fn combined(&self, other: &Phantom) -> Self {
        let support = match (self.support, other.support) {
            (Some(a), Some(b)) => Some(a.union(&b)),
            _ => None,
        };
        let mut primitives = self.primitives.clone();
        primitives.extend_from_slice(&other.primitives);
        Self {
            dim: self.dim,
            primitives,
            support,
        }
    }

    fn primitive_bounds(&self) -> Option<Bounds> {
        let mut it = self.primitives.iter().map(|p| p.bounds());
        let first = it.next()?;
        let mut b = it.fold(first, |a, b| a.union(&b));
        if self.dim == Dim::Two {
            b.lo[1] = f64::NEG_INFINITY;
            b.hi[1] = f64::INFINITY;
        }
        Some(b)
    }

    /// Declared support, or the primitives' extent when none was declared.
    pub fn effective_support(&self) -> Option<Bounds> {
        match self.support {
            Some(s) => Some(s),
            None => self.primitive_bounds(),
        }
    }

    /// Checks the support lies in the strip `2 - r_m ≤ z ≤ 1 - δ`.
    pub fn validate_strip(&self, r_m: f64, delta: f64) -> Result<()> {
        let Some(b) = self.effective_support() else {
            return Ok(());
        };
        let (zlo, zhi) = (2.0 - r_m, 1.0 - delta);
        let tol = 1e-12;
        if b.lo[2] < zlo - tol || b.hi[2] > zhi + tol {
            return Err(validation(format!(
                "support z range [{}, {}] leaves the scanning strip [{zlo}, {zhi}]",
                b.lo[2], b.hi[2]
            )));
        }
        Ok(())
    }

    /// `count` gaussians with `σ` and amplitude drawn uniformly from the
    /// given ranges, centred so that their `6σ` balls fit in `support`.
    pub fn random_gaussians(
        dim: Dim,
        support: Bounds,
        count: usize,
        sigma: (f64, f64),
        amplitude: (f64, f64),
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let axes: &[usize] = match dim {
            Dim::Two => &[0, 2],
            Dim::Three => &[0, 1, 2],
        };
        let mut phantom = Phantom::new(dim).with_support(support);
        for _ in 0..count {
            let s = if sigma.1 > sigma.0 { rng.random_range(sigma.0..sigma.1) } else { sigma.0 };
            let a = if amplitude.1 > amplitude.0 {
                rng.random_range(amplitude.0..amplitude.1)
            } else {
                amplitude.0
            };
            let m = GAUSSIAN_CUTOFF * s;
            let mut c = [0.0; 3];
            for &i in axes {
                let (lo, hi) = (support.lo[i] + m, support.hi[i] - m);
                if !(hi > lo) {
                    return Err(validation(format!(
                        "support too small for sigma {s} along axis {i}"
                    )));
                }
                c[i] = rng.random_range(lo..hi);
            }
            phantom.push(Primitive::gaussian(c, s, a));
        }
        Ok(phantom)
    }
}

impl Density for Phantom {
    fn dim(&self) -> Dim {
        self.dim
    }

    #[inline]
    fn eval(&self, p: [f64; 3]) -> f64 {
        let p = match self.dim {
            Dim::Two => [p[0], 0.0, p[2]],
            Dim::Three => p,
        };
        if let Some(s) = &self.support {
            let inside = match self.dim {
                Dim::Two => p[0] > s.lo[0] && p[0] < s.hi[0] && p[2] > s.lo[2] && p[2] < s.hi[2],
                Dim::Three => s.strictly_contains(p),
            };
            if !inside {
                return 0.0;
            }
        }
        self.primitives.iter().map(|q| q.eval(p)).sum()
    }

    fn bounds(&self) -> Option<Bounds> {
        let b = self.primitive_bounds()?;
        match &self.support {
            Some(s) => b.intersect(s),
            None => Some(b),
        }
    }
}

/// Multilinear interpolation of a sampled grid between cell centres,
/// zero outside the outermost centres.
#[derive(Debug, Clone)]
pub struct GridDensity<'a> {
    grid: &'a DensityGrid,
}

impl<'a> GridDensity<'a> {
    pub fn new(grid: &'a DensityGrid) -> Self {
        Self { grid }
    }
}

#[inline]
fn locate(a: &Axis, x: f64) -> Option<(usize, f64)> {
    let t = (x - a.origin) / a.spacing;
    let n = a.count;
    if !(t >= 0.0 && t <= (n - 1) as f64) {
        return None;
    }
    if n == 1 {
        return Some((0, 0.0));
    }
    let i = (t.floor() as usize).min(n - 2);
    Some((i, t - i as f64))
}

impl Density for GridDensity<'_> {
    fn dim(&self) -> Dim {
        self.grid.dim
    }

    fn eval(&self, p: [f64; 3]) -> f64 {
        let g = self.grid;
        let nx = g.axes[0].count;
        let Some((ix, tx)) = locate(&g.axes[0], p[0]) else {
            return 0.0;
        };
        let x1 = if nx > 1 { 1 } else { 0 };
        match g.dim {
            Dim::Two => {
                let Some((iz, tz)) = locate(&g.axes[1], p[2]) else {
                    return 0.0;
                };
                let z1 = if g.axes[1].count > 1 { nx } else { 0 };
                let b = iz * nx + ix;
                let v = |o: usize| g.values[b + o];
                (1.0 - tz) * ((1.0 - tx) * v(0) + tx * v(x1)) + tz * ((1.0 - tx) * v(z1) + tx * v(z1 + x1))
            }
            Dim::Three => {
                let ny = g.axes[1].count;
                let (Some((iy, ty)), Some((iz, tz))) = (locate(&g.axes[1], p[1]), locate(&g.axes[2], p[2])) else {
                    return 0.0;
                };
                let y1 = if ny > 1 { nx } else { 0 };
                let z1 = if g.axes[2].count > 1 { nx * ny } else { 0 };
                let b = (iz * ny + iy) * nx + ix;
                let v = |o: usize| g.values[b + o];
                let plane = |o: usize| {
                    (1.0 - ty) * ((1.0 - tx) * v(o) + tx * v(o + x1)) + ty * ((1.0 - tx) * v(o + y1) + tx * v(o + y1 + x1))
                };
                (1.0 - tz) * plane(0) + tz * plane(z1)
            }
        }
    }

    fn bounds(&self) -> Option<Bounds> {
        let g = self.grid;
        let span = |a: &Axis| (a.origin.min(a.last()), a.origin.max(a.last()));
        let (x, z) = (span(g.x_axis()), span(g.z_axis()));
        let y = g.y_axis().map(span).unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        Some(Bounds::new([x.0, y.0, z.0], [x.1, y.1, z.1]))
    }
}

/// Samples `phantom` at the cell centres of the configured density grid.
pub fn sample_grid(phantom: &Phantom, cfg: &ScanConfig) -> Result<DensityGrid> {
    phantom.validate_strip(cfg.r_m, cfg.delta)?;
    let axes = cfg.density_axes(phantom.dim);
    if let Some(b) = phantom.effective_support() {
        let x = cfg.x_range;
        let tol = 1e-12;
        let mut ok = b.lo[0] >= x.0 - tol && b.hi[0] <= x.1 + tol;
        if phantom.dim == Dim::Three {
            let y = cfg.y_range;
            ok &= b.lo[1] >= y.0 - tol && b.hi[1] <= y.1 + tol;
        }
        if !ok {
            return Err(validation("phantom support extends beyond the translation window"));
        }
    }
    let mut grid = DensityGrid::zeros(phantom.dim, axes, cfg.r_m, cfg.delta);
    for i in 0..grid.values.len() {
        grid.values[i] = phantom.eval(grid.cell_point(i));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eval_examples() {
        let empty = Phantom::new(Dim::Three);
        assert_eq!(empty.eval([0.1, 0.2, 0.3]), 0.0);
        let ball = Phantom::new(Dim::Three).with(Primitive::ball([0.0, 0.0, 0.5], 0.2, 3.0));
        assert_eq!(ball.eval([0.0, 0.0, 0.5]), 3.0);
        let g = Phantom::new(Dim::Three).with(Primitive::gaussian([0.0, 0.0, 0.5], 0.1, 1.0));
        assert!((g.eval([0.1, 0.0, 0.5]) - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(g.eval([0.61, 0.0, 0.5]), 0.0);
    }

    #[test]
    fn support_truncates() {
        let p = Phantom::new(Dim::Two)
            .with(Primitive::gaussian([0.0, 0.0, 0.3], 0.15, 1.0))
            .with_support(Bounds::planar((-1.0, 1.0), (0.0, 1.0)));
        assert!(p.eval([0.0, 0.0, 0.01]) > 0.0);
        assert_eq!(p.eval([0.0, 0.0, -0.01]), 0.0);
        let b = p.bounds().unwrap();
        assert_eq!(b.lo[2], 0.0);
        assert!((b.hi[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ball_norm_converges() {
        let cfg = ScanConfig {
            nx: 256,
            nz: 256,
            x_range: (-1.0, 1.0),
            delta: 0.0,
            ..ScanConfig::default()
        };
        // 2-D "ball" is a disc; radius 0.2 spans 25 cells per axis.
        let p = Phantom::new(Dim::Two).with(Primitive::ball([0.0, 0.0, 0.5], 0.2, 1.0));
        let g = sample_grid(&p, &cfg).unwrap();
        let want = (PI * 0.04_f64).sqrt();
        assert!(((g.l2_norm() - want) / want).abs() < 0.02);
    }

    #[test]
    fn sampling_is_linear_and_respects_strip() {
        let cfg = ScanConfig {
            nx: 64,
            nz: 64,
            x_range: (-2.0, 2.0),
            ..ScanConfig::default()
        };
        let a = Primitive::gaussian([0.2, 0.0, 0.4], 0.05, 1.0);
        let b = Primitive::ball([-0.5, 0.0, 0.6], 0.2, 2.0);
        let ga = sample_grid(&Phantom::new(Dim::Two).with(a), &cfg).unwrap();
        let gb = sample_grid(&Phantom::new(Dim::Two).with(b), &cfg).unwrap();
        let gab = sample_grid(&Phantom::new(Dim::Two).with(a).with(b), &cfg).unwrap();
        for i in 0..gab.values.len() {
            assert!((gab.values[i] - ga.values[i] - gb.values[i]).abs() < 1e-15);
        }
        let zero = sample_grid(&Phantom::new(Dim::Two), &cfg).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));

        let high = Phantom::new(Dim::Two).with(Primitive::ball([0.0, 0.0, 0.85], 0.1, 1.0));
        assert!(sample_grid(&high, &cfg).is_err());
        let wide = Phantom::new(Dim::Two).with(Primitive::ball([1.95, 0.0, 0.5], 0.1, 1.0));
        assert!(sample_grid(&wide, &cfg).is_err());
    }

    #[test]
    fn random_gaussians_fit() {
        let support = Bounds::new([-1.0, -1.0, 0.1], [1.0, 1.0, 0.8]);
        let p = Phantom::random_gaussians(Dim::Three, support, 20, (0.02, 0.05), (0.5, 1.5), 9).unwrap();
        for q in &p.primitives {
            let b = q.bounds();
            assert!(support.contains(b.lo) && support.contains(b.hi));
        }
        let again = Phantom::random_gaussians(Dim::Three, support, 20, (0.02, 0.05), (0.5, 1.5), 9).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn grid_density_interpolates() {
        let ax = Axis::cell_centered(0.0, 1.0, 4);
        let az = Axis::cell_centered(0.0, 1.0, 3);
        let mut g = DensityGrid::zeros(Dim::Two, vec![ax, az], 2.0, 0.0);
        for i in 0..12 {
            let p = g.cell_point(i);
            g.values[i] = 2.0 * p[0] - p[2] + 0.5;
        }
        let d = GridDensity::new(&g);
        for &(x, z) in &[(0.2, 0.3), (0.6, 0.7), (0.125, 1.0 / 6.0)] {
            assert!((d.eval([x, 0.0, z]) - (2.0 * x - z + 0.5)).abs() < 1e-14);
        }
        assert_eq!(d.eval([0.05, 0.0, 0.5]), 0.0);
    }
}
