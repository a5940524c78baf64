//! Toric sections, apples and generalized surfaces of revolution in the
//! translational scanning geometry.
//!
//! Source and detector lines sit at heights 2 and 1; a toric section of
//! radius `r` is the union of two circles of radius `r` centred at
//! `(±R, 2)` with `R = sqrt(r² - 1)`, restricted to `2 - r < z < 1`.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::error::{domain, validation, Result};
use crate::grid::{Axis, Dim};
use crate::volterra::first_j0_root;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusParams {
    /// Tube radius `r`.
    pub radius: f64,
    /// Distance from the torus axis to the tube centre, `sqrt(r² - 1)`.
    pub center_offset: f64,
    /// Lowest height reached, `2 - r`.
    pub lowest_z: f64,
}

pub fn torus_params(r: f64) -> Result<TorusParams> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(domain(format!("torus radius must be >= 1, got {r}")));
    }
    Ok(TorusParams {
        radius: r,
        center_offset: (r * r - 1.0).sqrt(),
        lowest_z: 2.0 - r,
    })
}

/// The four semicircular branches of a toric section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `x₁ = R + sqrt(r² - (z-2)²)`
    RightOuter,
    /// `x₂ = R - sqrt(r² - (z-2)²)`
    RightInner,
    /// `x₃ = -R + sqrt(r² - (z-2)²)`
    LeftInner,
    /// `x₄ = -R - sqrt(r² - (z-2)²)`
    LeftOuter,
}

impl Branch {
    pub const ALL: [Branch; 4] = [
        Branch::RightOuter,
        Branch::RightInner,
        Branch::LeftInner,
        Branch::LeftOuter,
    ];

    /// 1-based index used in the literature.
    pub fn from_index(j: usize) -> Option<Branch> {
        Branch::ALL.get(j.checked_sub(1)?).copied()
    }

    /// (sign of R, sign of the square root).
    #[inline]
    pub fn signs(self) -> (f64, f64) {
        match self {
            Branch::RightOuter => (1.0, 1.0),
            Branch::RightInner => (1.0, -1.0),
            Branch::LeftInner => (-1.0, 1.0),
            Branch::LeftOuter => (-1.0, -1.0),
        }
    }
}

/// The two sheets of an apple: surfaces of revolution of the outer and
/// inner halves of the right-hand circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sheet {
    Outer,
    Inner,
}

impl Sheet {
    pub const ALL: [Sheet; 2] = [Sheet::Outer, Sheet::Inner];

    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Sheet::Outer => 1.0,
            Sheet::Inner => -1.0,
        }
    }
}

fn check_section_height(r: f64, z: f64) -> Result<()> {
    if !(z >= 2.0 - r && z <= 1.0) {
        return Err(domain(format!(
            "height {z} outside the section range [{}, 1] for r = {r}",
            2.0 - r
        )));
    }
    Ok(())
}

fn half_width(r: f64, z: f64) -> f64 {
    let d = z - 2.0;
    (r * r - d * d).max(0.0).sqrt()
}

pub fn toric_branch_x(r: f64, z: f64, branch: Branch) -> Result<f64> {
    let t = torus_params(r)?;
    check_section_height(r, z)?;
    let (sr, sq) = branch.signs();
    Ok(sr * t.center_offset + sq * half_width(r, z))
}

/// Point `(x, y)` of an apple sheet at height `z` and azimuth `phi`.
pub fn apple_point(r: f64, z: f64, phi: f64, sheet: Sheet) -> Result<(f64, f64)> {
    let t = torus_params(r)?;
    check_section_height(r, z)?;
    let rho = t.center_offset + sheet.sign() * half_width(r, z);
    Ok((rho * phi.cos(), rho * phi.sin()))
}

/// Line density `ds/dz = r / sqrt(r² - (z-2)²)`.
pub fn arc_measure(r: f64, z: f64) -> Result<f64> {
    let d = z - 2.0;
    if !((d.abs()) < r) {
        return Err(domain(format!(
            "arc measure undefined at |z - 2| = {} >= r = {r}",
            d.abs()
        )));
    }
    Ok(r / (r * r - d * d).sqrt())
}

/// Area density `dA/(dz dφ) = arc_measure · ρ_sheet`.
pub fn surface_measure(r: f64, z: f64, sheet: Sheet) -> Result<f64> {
    let arc = arc_measure(r, z)?;
    let t = torus_params(r)?;
    Ok(arc * (t.center_offset + sheet.sign() * half_width(r, z)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandMode {
    TwoD,
    ThreeD,
    /// Generalized surfaces with profile bound `M`.
    Generalized { bound: f64 },
}

/// Largest translation frequency |ω| recoverable without analytic
/// continuation.
pub fn stable_band_limit(r_m: f64, mode: BandMode) -> Result<f64> {
    if !(r_m > 1.0) {
        return Err(domain(format!("r_m must exceed 1, got {r_m}")));
    }
    let depth = (r_m * r_m - 1.0).sqrt();
    match mode {
        BandMode::TwoD => Ok(FRAC_PI_2 / depth),
        BandMode::ThreeD => Ok(first_j0_root() / depth),
        BandMode::Generalized { bound } => {
            if !(bound > 0.0) {
                return Err(domain(format!("profile bound must be positive, got {bound}")));
            }
            Ok(first_j0_root() / bound)
        }
    }
}

/// Quadrature orders for the forward projectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOrders {
    /// Gauss–Legendre points per branch in the angular variable.
    pub n_alpha: usize,
    /// Periodic trapezoid points in azimuth.
    pub n_phi: usize,
    /// Double both orders until the relative change drops below
    /// `tolerance`, up to `cap` points.
    pub adaptive: bool,
    pub tolerance: f64,
    pub cap: usize,
}

impl Default for QuadratureOrders {
    fn default() -> Self {
        Self {
            n_alpha: 64,
            n_phi: 128,
            adaptive: true,
            tolerance: 1e-8,
            cap: 1024,
        }
    }
}

impl QuadratureOrders {
    pub fn fixed(n_alpha: usize, n_phi: usize) -> Self {
        Self {
            n_alpha,
            n_phi,
            adaptive: false,
            ..Self::default()
        }
    }
}

/// Scan geometry and discretization shared by projection and
/// reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub r_m: f64,
    /// Standoff of the support below the detector line `z = 1`.
    pub delta: f64,
    /// Translation window `[lo, hi]` in x (cell-centred samples).
    pub x_range: (f64, f64),
    pub nx: usize,
    pub y_range: (f64, f64),
    pub ny: usize,
    pub nr: usize,
    /// Cells of the density grid along z on `[2 - r_m, 1]`.
    pub nz: usize,
    /// Points of the squared-radius grid; `2 * nr` when unset.
    pub ns: Option<usize>,
    /// Offset of the first radius above the degenerate `r = 1`.
    pub eps_r: f64,
    pub quadrature: QuadratureOrders,
    pub taper: f64,
    pub eps_norm: f64,
    /// Zero padding factor applied to translation axes before the DFT.
    pub pad_factor: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            r_m: 2.0,
            delta: 0.1,
            x_range: (-6.0, 6.0),
            nx: 256,
            y_range: (-6.0, 6.0),
            ny: 256,
            nr: 256,
            nz: 256,
            ns: None,
            eps_r: 1e-6,
            quadrature: QuadratureOrders {
                adaptive: false,
                ..QuadratureOrders::default()
            },
            taper: 0.2,
            eps_norm: 0.1,
            pad_factor: 4,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self, dim: Dim) -> Result<()> {
        if !(self.r_m > 1.0) {
            return Err(validation(format!("r_m must exceed 1, got {}", self.r_m)));
        }
        if !(self.delta >= 0.0) {
            return Err(validation(format!("delta must be >= 0, got {}", self.delta)));
        }
        if dim == Dim::Three && !(self.delta > 0.0 && self.delta < self.r_m - 1.0) {
            return Err(validation(format!(
                "3-D inversion needs 0 < delta < r_m - 1, got delta = {}",
                self.delta
            )));
        }
        if !(self.x_range.1 > self.x_range.0) || self.nx < 2 {
            return Err(validation("x window must be non-empty with at least 2 cells"));
        }
        if dim == Dim::Three && (!(self.y_range.1 > self.y_range.0) || self.ny < 2) {
            return Err(validation("y window must be non-empty with at least 2 cells"));
        }
        if self.nr < 16 || self.nz < 2 || self.ns_count() < 16 {
            return Err(validation("need nr >= 16, ns >= 16 and nz >= 2"));
        }
        if !(self.eps_r > 0.0 && self.eps_r < self.r_m - 1.0) {
            return Err(validation(format!("eps_r out of range: {}", self.eps_r)));
        }
        if !(0.0..=1.0).contains(&self.taper) {
            return Err(validation(format!("taper must lie in [0, 1], got {}", self.taper)));
        }
        if !(self.eps_norm >= 0.0) {
            return Err(validation("eps_norm must be >= 0"));
        }
        if self.pad_factor < 1 {
            return Err(validation("pad factor must be >= 1"));
        }
        if self.quadrature.n_alpha < 2 || self.quadrature.n_phi < 4 {
            return Err(validation("quadrature orders too small"));
        }
        Ok(())
    }

    pub fn x_axis(&self) -> Axis {
        Axis::cell_centered(self.x_range.0, self.x_range.1, self.nx)
    }

    pub fn y_axis(&self) -> Axis {
        Axis::cell_centered(self.y_range.0, self.y_range.1, self.ny)
    }

    /// Radii from `1 + eps_r` to `r_m` inclusive.
    pub fn r_axis(&self) -> Axis {
        Axis::nodes(1.0 + self.eps_r, self.r_m, self.nr)
    }

    /// Density-grid heights, cell-centred on `[2 - r_m, 1]`.
    pub fn z_axis(&self) -> Axis {
        Axis::cell_centered(2.0 - self.r_m, 1.0, self.nz)
    }

    pub fn ns_count(&self) -> usize {
        self.ns.unwrap_or(2 * self.nr)
    }

    /// Squared-radius grid for the Volterra stage.
    pub fn s_axis(&self, dim: Dim) -> Axis {
        let start = match dim {
            Dim::Two => 1.0 + self.eps_r,
            Dim::Three => 1.0 + self.delta,
        };
        Axis::nodes(start * start, self.r_m * self.r_m, self.ns_count())
    }

    pub fn density_axes(&self, dim: Dim) -> Vec<Axis> {
        match dim {
            Dim::Two => vec![self.x_axis(), self.z_axis()],
            Dim::Three => vec![self.x_axis(), self.y_axis(), self.z_axis()],
        }
    }
}

pub type ProfileFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Radial profile `ρ(r, z)` of a surface of revolution, with its partial
/// derivative in `z` at fixed `r`.
#[derive(Clone)]
pub struct Profile {
    value: ProfileFn,
    dz: Option<ProfileFn>,
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Profile")
            .field("has_derivative", &self.dz.is_some())
            .finish()
    }
}

impl Profile {
    pub fn new(
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dz: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            dz: Some(Arc::new(dz)),
        }
    }

    pub fn without_derivative(value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(value),
            dz: None,
        }
    }

    #[inline]
    pub fn value(&self, r: f64, z: f64) -> f64 {
        (self.value)(r, z)
    }

    #[inline]
    pub fn dz(&self, r: f64, z: f64) -> Option<f64> {
        self.dz.as_ref().map(|d| d(r, z))
    }

    pub fn has_derivative(&self) -> bool {
        self.dz.is_some()
    }
}

/// Finite family of profiles with sampled upper bounds `M_j`.
#[derive(Debug, Clone)]
pub struct ProfileFamily {
    profiles: Vec<Profile>,
    bounds: Vec<f64>,
    r_m: f64,
}

const PROFILE_SAMPLES: usize = 512;
const PROFILE_SAFETY: f64 = 1.01;

impl ProfileFamily {
    /// Estimates each `M_j` on a 512×512 sample of `1 ≤ z ≤ r ≤ r_m`
    /// with a 1% margin; fails on negative or non-finite samples.
    pub fn new(profiles: Vec<Profile>, r_m: f64) -> Result<Self> {
        if profiles.is_empty() {
            return Err(validation("profile family is empty"));
        }
        if !(r_m > 1.0) {
            return Err(domain(format!("r_m must exceed 1, got {r_m}")));
        }
        let step = (r_m - 1.0) / (PROFILE_SAMPLES - 1) as f64;
        let mut bounds = Vec::with_capacity(profiles.len());
        for (j, p) in profiles.iter().enumerate() {
            let mut max = 0.0_f64;
            for ir in 0..PROFILE_SAMPLES {
                let r = 1.0 + ir as f64 * step;
                for iz in 0..=ir {
                    let z = 1.0 + iz as f64 * step;
                    let v = p.value(r, z);
                    if !v.is_finite() || v < -1e-12 {
                        return Err(validation(format!(
                            "profile {j} is {v} at (r, z) = ({r}, {z}); profiles must be finite and >= 0"
                        )));
                    }
                    max = max.max(v);
                }
            }
            bounds.push(PROFILE_SAFETY * max);
        }
        Ok(Self {
            profiles,
            bounds,
            r_m,
        })
    }

    /// The two apple sheets written as profiles over the reflected height:
    /// `ρ± = sqrt(r² - 1) ± sqrt(r² - z²)`.
    pub fn apple(r_m: f64) -> Result<Self> {
        let outer = Profile::new(
            |r, z| (r * r - 1.0).sqrt() + (r * r - z * z).max(0.0).sqrt(),
            |r, z| -z / (r * r - z * z).sqrt(),
        );
        let inner = Profile::new(
            |r, z| ((r * r - 1.0).sqrt() - (r * r - z * z).max(0.0).sqrt()).max(0.0),
            |r, z| z / (r * r - z * z).sqrt(),
        );
        Self::new(vec![outer, inner], r_m)
    }

    /// Cone `ρ = (z - 1) tan β`.
    pub fn cone(beta: f64, r_m: f64) -> Result<Self> {
        let t = beta.tan();
        Self::new(vec![Profile::new(move |_, z| (z - 1.0) * t, move |_, _| t)], r_m)
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    /// `M = max_j M_j`.
    pub fn bound(&self) -> f64 {
        self.bounds.iter().copied().fold(0.0, f64::max)
    }

    pub fn r_m(&self) -> f64 {
        self.r_m
    }
}
