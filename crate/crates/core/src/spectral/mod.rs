//! Translation-frequency transforms of sinograms, the square-radius
//! substitution and its inverse, and the height reflection.

pub mod band;
pub mod fourier;
pub mod resample;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::grid::{Axis, DensityGrid, Sinogram2D, Sinogram3D};
use crate::volterra::Scalar;

pub use band::{band_limited_reference, build_stable_band, taper_weight, StableBand};
pub use fourier::{frequency_axis, plancherel_residual, PlaneTransform};
pub use resample::{BelowRange, Resampler};

/// Sinogram after the DFT over its translation axes.
/// `values[radial][ω₂][ω₁]`, `ω₁` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSinogram {
    pub omega: Vec<Axis>,
    /// Unpadded translation axes, used to invert the transform.
    pub translation: Vec<Axis>,
    /// Radius `r` or squared radius `s`.
    pub radial: Axis,
    pub values: Vec<Complex64>,
    pub r_m: f64,
    pub delta: f64,
}

impl SpectralSinogram {
    pub fn plane_len(&self) -> usize {
        self.omega.iter().map(|a| a.count).product()
    }

    pub fn plane(&self, i: usize) -> &[Complex64] {
        let n = self.plane_len();
        &self.values[i * n..(i + 1) * n]
    }

    /// All radial samples at frequency index `k`.
    pub fn column(&self, k: usize) -> Vec<Complex64> {
        let n = self.plane_len();
        (0..self.radial.count).map(|i| self.values[i * n + k]).collect()
    }

    pub fn set_column(&mut self, k: usize, col: &[Complex64]) {
        let n = self.plane_len();
        for (i, v) in col.iter().enumerate() {
            self.values[i * n + k] = *v;
        }
    }

    /// `(ω₁, ω₂)` at flat frequency index `k`.
    pub fn frequency(&self, k: usize) -> (f64, f64) {
        let wx = &self.omega[0];
        match self.omega.get(1) {
            None => (wx.coord(k), 0.0),
            Some(wy) => (wx.coord(k % wx.count), wy.coord(k / wx.count)),
        }
    }

    fn transform(&self) -> Result<PlaneTransform> {
        let pad = band::pad_for(&self.translation[0], &self.omega[0])?;
        PlaneTransform::new(&self.translation, pad)
    }

    /// Applies `f` to every frequency column in parallel.
    pub fn map_columns<F>(&self, radial: Axis, f: F) -> Result<SpectralSinogram>
    where
        F: Fn(&[Complex64]) -> Result<Vec<Complex64>> + Sync,
    {
        let n = self.plane_len();
        let cols: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|k| f(&self.column(k)))
            .collect::<Result<_>>()?;
        let mut values = vec![Complex64::new(0.0, 0.0); radial.count * n];
        for (k, col) in cols.iter().enumerate() {
            if col.len() != radial.count {
                return Err(Error::ShapeMismatch("column map changed the radial length".into()));
            }
            for (i, v) in col.iter().enumerate() {
                values[i * n + k] = *v;
            }
        }
        Ok(SpectralSinogram {
            omega: self.omega.clone(),
            translation: self.translation.clone(),
            radial,
            values,
            r_m: self.r_m,
            delta: self.delta,
        })
    }
}

fn dft_planes(planes: &[f64], t: &PlaneTransform) -> Vec<Complex64> {
    let n = t.space_len();
    planes
        .par_chunks(n)
        .flat_map_iter(|p| t.forward_real(p))
        .collect()
}

pub fn dft_translations_2d(sino: &Sinogram2D, pad: usize) -> Result<SpectralSinogram> {
    let t = PlaneTransform::new(&[sino.x0], pad)?;
    Ok(SpectralSinogram {
        omega: t.omega_axes(),
        translation: t.space_axes(),
        radial: sino.r,
        values: dft_planes(&sino.values, &t),
        r_m: sino.r_m,
        delta: sino.delta,
    })
}

pub fn dft_translations_3d(sino: &Sinogram3D, pad: usize) -> Result<SpectralSinogram> {
    let t = PlaneTransform::new(&[sino.x0, sino.y0], pad)?;
    Ok(SpectralSinogram {
        omega: t.omega_axes(),
        translation: t.space_axes(),
        radial: sino.r,
        values: dft_planes(&sino.values, &t),
        r_m: sino.r_m,
        delta: sino.delta,
    })
}

/// Inverse DFT of every radial plane, cropped to the translation axes.
pub fn idft_planes(spec: &SpectralSinogram) -> Result<Vec<Complex64>> {
    let t = spec.transform()?;
    let n = spec.plane_len();
    Ok(spec
        .values
        .par_chunks(n)
        .flat_map_iter(|p| t.inverse(p))
        .collect())
}

fn real_parts(v: Vec<Complex64>) -> Vec<f64> {
    v.into_iter().map(|c| c.re).collect()
}

pub fn idft_translations_2d(spec: &SpectralSinogram) -> Result<Sinogram2D> {
    if spec.translation.len() != 1 {
        return Err(Error::ShapeMismatch("expected one translation axis".into()));
    }
    let values = real_parts(idft_planes(spec)?);
    Sinogram2D::new(spec.translation[0], spec.radial, values, spec.r_m, spec.delta)
}

pub fn idft_translations_3d(spec: &SpectralSinogram) -> Result<Sinogram3D> {
    if spec.translation.len() != 2 {
        return Err(Error::ShapeMismatch("expected two translation axes".into()));
    }
    let values = real_parts(idft_planes(spec)?);
    Sinogram3D::new(
        spec.translation[0],
        spec.translation[1],
        spec.radial,
        values,
        spec.r_m,
        spec.delta,
    )
}

/// Which divisor the square substitution applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substitution {
    /// `ĥ(s) = T̂(√s) / (4√s)`.
    TwoD,
    /// `ĝ(s) = Â(√s) / √s`.
    ThreeD,
}

/// Linear map from samples on the `r` grid to `ĥ` on the `s` grid.
#[derive(Debug, Clone)]
pub struct SquareSubstitution {
    pub resampler: Resampler,
    pub scale: Vec<f64>,
}

impl SquareSubstitution {
    pub fn new(r: &Axis, s: &Axis, kind: Substitution) -> Result<Self> {
        let (lo, hi) = (r.origin * r.origin, r.last() * r.last());
        let tol = 1e-12 * hi;
        if s.origin < lo - tol || s.last() > hi + tol {
            return Err(domain(format!(
                "s grid [{}, {}] outside the squared radius range [{lo}, {hi}]",
                s.origin,
                s.last()
            )));
        }
        let targets: Vec<f64> = s.coords().map(|v| v.sqrt().clamp(r.origin, r.last())).collect();
        let resampler = Resampler::hermite(r, &targets, BelowRange::Error)?;
        let c = match kind {
            Substitution::TwoD => 4.0,
            Substitution::ThreeD => 1.0,
        };
        let scale = s.coords().map(|v| 1.0 / (c * v.sqrt())).collect();
        Ok(Self { resampler, scale })
    }

    pub fn apply<T: Scalar>(&self, column: &[T]) -> Vec<T> {
        let mut out = self.resampler.apply(column);
        for (v, c) in out.iter_mut().zip(&self.scale) {
            *v = *v * *c;
        }
        out
    }

    pub fn norm2_bound(&self) -> f64 {
        self.resampler.norm2_bound() * self.scale.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

fn substitute(spec: &SpectralSinogram, s: &Axis, kind: Substitution) -> Result<SpectralSinogram> {
    let sub = SquareSubstitution::new(&spec.radial, s, kind)?;
    spec.map_columns(*s, |col| Ok(sub.apply(col)))
}

pub fn substitute_square_2d(spec: &SpectralSinogram, s: &Axis) -> Result<SpectralSinogram> {
    substitute(spec, s, Substitution::TwoD)
}

pub fn substitute_square_3d(spec: &SpectralSinogram, s: &Axis) -> Result<SpectralSinogram> {
    substitute(spec, s, Substitution::ThreeD)
}

/// Linear map `f̂₂` on the `s` grid → `f̂₁(ζ) = 2ζ f̂₂(ζ²)` on the `ζ`
/// grid. Heights with `ζ²` below the `s` range map to zero (the density
/// vanishes inside the standoff); heights above it are an error.
#[derive(Debug, Clone)]
pub struct Unsubstitution {
    pub resampler: Resampler,
    pub scale: Vec<f64>,
}

impl Unsubstitution {
    pub fn new(s: &Axis, zeta: &Axis) -> Result<Self> {
        let hi = s.last();
        let targets: Vec<f64> = zeta
            .coords()
            .map(|z| {
                let t = z * z;
                if t > hi && t <= hi * (1.0 + 1e-12) {
                    hi
                } else {
                    t
                }
            })
            .collect();
        let resampler = Resampler::hermite(s, &targets, BelowRange::Zero)?;
        let scale = zeta.coords().map(|z| 2.0 * z).collect();
        Ok(Self { resampler, scale })
    }

    pub fn apply<T: Scalar>(&self, column: &[T]) -> Vec<T> {
        let mut out = self.resampler.apply(column);
        for (v, c) in out.iter_mut().zip(&self.scale) {
            *v = *v * *c;
        }
        out
    }

    pub fn norm2_bound(&self) -> f64 {
        self.resampler.norm2_bound() * self.scale.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

/// Samples of `f̂₂` on `s` mapped to `f̂₁` on `zeta`.
pub fn unsubstitute<T: Scalar>(values: &[T], s: &Axis, zeta: &Axis) -> Result<Vec<T>> {
    if values.len() != s.count {
        return Err(Error::ShapeMismatch(format!(
            "{} samples on a {}-point s grid",
            values.len(),
            s.count
        )));
    }
    Ok(Unsubstitution::new(s, zeta)?.apply(values))
}

/// `f₁(x, ·, z) = f(x, ·, 2 - z)`: reverses the z index and maps the z
/// axis to its mirror image about `z = 1`.
pub fn reflect_z(grid: &DensityGrid) -> DensityGrid {
    let z = *grid.z_axis();
    let slice = grid.slice_len();
    let mut values = Vec::with_capacity(grid.values.len());
    for iz in (0..z.count).rev() {
        values.extend_from_slice(&grid.values[iz * slice..(iz + 1) * slice]);
    }
    let mut axes = grid.axes.clone();
    *axes.last_mut().expect("grid has axes") = Axis::new(z.count, 2.0 - z.last(), z.spacing);
    DensityGrid {
        dim: grid.dim,
        axes,
        values,
        r_m: grid.r_m,
        delta: grid.delta,
    }
}
