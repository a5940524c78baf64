//! Fourier–Abel–Volterra inversion of toric-section and apple sinograms,
//! restricted to the stable translation-frequency band, with
//! per-frequency diagnostics, a deterministic noise-amplification bound
//! and comparison metrics.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::diff::fd4_stencil;
use crate::error::{validation, Error, Result};
use crate::geometry::ScanConfig;
use crate::grid::{Axis, DensityGrid, Dim, Sinogram2D, Sinogram3D};
use crate::spectral::{
    band_limited_reference, dft_translations_2d, dft_translations_3d, idft_planes, reflect_z,
    SpectralSinogram, SquareSubstitution, StableBand, Substitution, Unsubstitution,
};
use crate::volterra::{
    abel_apply, abel_derivative, abel_matrix, bessel_j0, kernel_2d_offset, kernel_3d_dk1,
    matrix_norms, solve_second_kind, system_inverse, DerivativeScale, KernelTable, VolterraSystem,
};

/// `cos(ω √(s - 1))`.
pub fn normalizer_2d(omega: f64, s: f64) -> f64 {
    (omega * (s - 1.0).max(0.0).sqrt()).cos()
}

/// `2 √(s - 1) J₀(|ω| √(s - 1))`.
pub fn normalizer_3d(omega_mag: f64, s: f64) -> f64 {
    let q = (s - 1.0).max(0.0).sqrt();
    2.0 * q * bessel_j0(omega_mag * q)
}

/// Outcome of one translation frequency with nonzero band weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDiagnostic {
    pub omega: (f64, f64),
    pub weight: f64,
    /// False when the normalizer fell to `eps_norm` or below somewhere
    /// on the s grid; the frequency is then zeroed.
    pub retained: bool,
    pub normalizer_min: f64,
    /// Relative residual of the discrete Volterra solve (NaN if dropped).
    pub residual: f64,
    /// Bound on the 2-norm gain from the sinogram column to the weighted
    /// density column (0 if dropped).
    pub amplification: f64,
}

impl FrequencyDiagnostic {
    pub fn omega_abs(&self) -> f64 {
        self.omega.0.hypot(self.omega.1)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timing {
    pub total: Duration,
    pub stages: Vec<(&'static str, Duration)>,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub grid: DensityGrid,
    pub band: StableBand,
    pub diagnostics: Vec<FrequencyDiagnostic>,
    pub timing: Timing,
}

impl ReconstructionResult {
    pub fn dropped(&self) -> impl Iterator<Item = &FrequencyDiagnostic> {
        self.diagnostics.iter().filter(|d| !d.retained)
    }

    /// Largest per-frequency amplification over retained frequencies.
    pub fn stability_bound(&self) -> f64 {
        self.diagnostics
            .iter()
            .filter(|d| d.retained)
            .fold(0.0, |m, d| m.max(d.amplification))
    }

    /// Upper bound on the change of `band_rmse` caused by additive
    /// sinogram noise with Euclidean norm `noise_l2`.
    pub fn noise_bound(&self, noise_l2: f64) -> f64 {
        self.stability_bound() * noise_l2 / (self.grid.values.len() as f64).sqrt()
    }
}

struct Stopwatch {
    start: Instant,
    last: Instant,
    timing: Timing,
}

impl Stopwatch {
    fn new() -> Self {
        let now = Instant::now();
        Self {
            start: now,
            last: now,
            timing: Timing::default(),
        }
    }

    fn lap(&mut self, name: &'static str) {
        let now = Instant::now();
        self.timing.stages.push((name, now - self.last));
        self.last = now;
    }

    fn finish(mut self) -> Timing {
        self.timing.total = self.start.elapsed();
        self.timing
    }
}

fn check_axis(name: &str, got: &Axis, want: &Axis) -> Result<()> {
    if got.matches(want, 1e-9 * want.spacing.abs()) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "sinogram {name} axis ({} points from {}) does not match the configuration ({} points from {})",
            got.count, got.origin, want.count, want.origin
        )))
    }
}

fn check_scan(r_m: f64, r: &Axis, cfg: &ScanConfig) -> Result<()> {
    if (r_m - cfg.r_m).abs() > 1e-12 * cfg.r_m {
        return Err(validation(format!("sinogram r_m {r_m} differs from configured {}", cfg.r_m)));
    }
    check_axis("r", r, &cfg.r_axis())
}

/// Operator pieces shared by every frequency column.
struct Stages {
    s: Axis,
    zeta: Axis,
    sub: SquareSubstitution,
    unsub: Unsubstitution,
    sub_norm: f64,
    unsub_norm: f64,
    /// 2-norm bound of `scale · D · A` (derivative after Abel).
    abel_norm: f64,
    scale: DerivativeScale,
}

impl Stages {
    fn new(r: &Axis, cfg: &ScanConfig, dim: Dim) -> Result<Self> {
        let s = cfg.s_axis(dim);
        let z = cfg.z_axis();
        let zeta = Axis::new(z.count, 2.0 - z.last(), z.spacing);
        let kind = match dim {
            Dim::Two => Substitution::TwoD,
            Dim::Three => Substitution::ThreeD,
        };
        let scale = match dim {
            Dim::Two => DerivativeScale::InversePi,
            Dim::Three => DerivativeScale::Unit,
        };
        let sub = SquareSubstitution::new(r, &s, kind)?;
        let unsub = Unsubstitution::new(&s, &zeta)?;
        Ok(Self {
            sub_norm: sub.norm2_bound(),
            unsub_norm: unsub.norm2_bound(),
            abel_norm: abel_derivative_norm(&s, scale),
            s,
            zeta,
            sub,
            unsub,
            scale,
        })
    }

    fn normalizer_min(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.s.coords().map(f).fold(f64::INFINITY, f64::min)
    }
}

fn norm2(a: &[f64], n: usize) -> f64 {
    let (one, inf) = matrix_norms(a, n, n);
    (one * inf).sqrt()
}

/// `√(‖B‖₁‖B‖∞)` for `B = scale · D · A` with the banded fourth-order
/// derivative `D`.
fn abel_derivative_norm(s: &Axis, scale: DerivativeScale) -> f64 {
    let n = s.count;
    let a = abel_matrix(n, s.spacing);
    let c = scale.factor() / (12.0 * s.spacing);
    let b: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (start, w) = fd4_stencil(i, n);
            let mut row = vec![0.0; n];
            for (k, wk) in w.iter().enumerate() {
                if *wk != 0.0 {
                    let src = &a[(start + k) * n..(start + k + 1) * n];
                    row.iter_mut().zip(src).for_each(|(o, v)| *o += c * wk * v);
                }
            }
            row
        })
        .collect();
    norm2(&b, n)
}

/// Volterra system for one `|ω|`: kernel table, coupling, and the
/// 2-norm bound of the discrete inverse.
struct SolverEntry {
    kernel: Arc<KernelTable>,
    lambda: f64,
    inverse_norm: f64,
}

impl SolverEntry {
    fn new(kernel: KernelTable, lambda: f64) -> Result<Self> {
        let n = kernel.size();
        let inv = system_inverse(lambda, &kernel)?;
        Ok(Self {
            inverse_norm: norm2(&inv, n),
            kernel: Arc::new(kernel),
            lambda,
        })
    }
}

/// Groups equal `|ω|` so each kernel table is built once.
fn magnitude_key(w: f64, unit: f64) -> i64 {
    (w / unit * 1e6).round() as i64
}

struct Column {
    values: Vec<Complex64>,
    diag: FrequencyDiagnostic,
}

fn dropped(omega: (f64, f64), weight: f64, normalizer_min: f64, n: usize) -> Column {
    Column {
        values: vec![Complex64::new(0.0, 0.0); n],
        diag: FrequencyDiagnostic {
            omega,
            weight,
            retained: false,
            normalizer_min,
            residual: f64::NAN,
            amplification: 0.0,
        },
    }
}

fn check_band(band: &StableBand, spec: &SpectralSinogram) -> Result<()> {
    if band.matches(&spec.omega) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(
            "stable band was built for a different frequency grid (check the pad factor)".into(),
        ))
    }
}

/// Inverse DFT of the recovered `f̂₁(ω, ζ)` and reflection back to `z`.
fn assemble(
    spec: &SpectralSinogram,
    zeta: Axis,
    columns: Vec<(usize, Column)>,
    cfg: &ScanConfig,
    dim: Dim,
) -> Result<(DensityGrid, Vec<FrequencyDiagnostic>)> {
    let n = spec.plane_len();
    let mut out = SpectralSinogram {
        omega: spec.omega.clone(),
        translation: spec.translation.clone(),
        radial: zeta,
        values: vec![Complex64::new(0.0, 0.0); zeta.count * n],
        r_m: spec.r_m,
        delta: spec.delta,
    };
    let mut diags = Vec::with_capacity(columns.len());
    for (k, col) in columns {
        out.set_column(k, &col.values);
        diags.push(col.diag);
    }
    let values = idft_planes(&out)?.into_iter().map(|c| c.re).collect();
    let mut axes = spec.translation.clone();
    axes.push(zeta);
    let reflected = DensityGrid::new(dim, axes, values, cfg.r_m, cfg.delta)?;
    Ok((reflect_z(&reflected), diags))
}

/// Inverts a toric-section sinogram on the stable band.
pub fn reconstruct_2d(sino: &Sinogram2D, cfg: &ScanConfig, band: &StableBand) -> Result<ReconstructionResult> {
    cfg.validate(Dim::Two)?;
    check_scan(sino.r_m, &sino.r, cfg)?;
    check_axis("x0", &sino.x0, &cfg.x_axis())?;
    let mut clock = Stopwatch::new();

    let spec = dft_translations_2d(sino, cfg.pad_factor)?;
    check_band(band, &spec)?;
    let st = Stages::new(&sino.r, cfg, Dim::Two)?;
    clock.lap("setup");

    let support = band.support();
    let unit = spec.omega[0].spacing.abs();
    let mut solvers: HashMap<i64, SolverEntry> = HashMap::new();
    let keys: Vec<(i64, f64)> = {
        let mut seen = HashMap::new();
        for &k in &support {
            let w = band.frequency(k).0.abs();
            seen.entry(magnitude_key(w, unit)).or_insert(w);
        }
        seen.into_iter().collect()
    };
    let built: Vec<(i64, SolverEntry)> = keys
        .par_iter()
        .map(|&(key, w)| {
            let kernel = KernelTable::toeplitz(st.s, |d| kernel_2d_offset(d, w));
            Ok((key, SolverEntry::new(kernel, -w * w / (2.0 * PI))?))
        })
        .collect::<Result<_>>()?;
    solvers.extend(built);
    clock.lap("kernels");

    let columns: Vec<(usize, Column)> = support
        .par_iter()
        .map(|&k| {
            let (w, _) = band.frequency(k);
            let weight = band.weights[k];
            let nmin = st.normalizer_min(|s| normalizer_2d(w, s));
            if !(nmin > cfg.eps_norm) {
                return Ok((k, dropped((w, 0.0), weight, nmin, st.zeta.count)));
            }
            let mut h = st.sub.apply(&spec.column(k));
            for (v, s) in h.iter_mut().zip(st.s.coords()) {
                *v /= normalizer_2d(w, s);
            }
            let g = abel_derivative(&abel_apply(&h, &st.s)?, st.s.spacing, st.scale)?;
            let entry = &solvers[&magnitude_key(w.abs(), unit)];
            let sys = VolterraSystem::new(entry.lambda, entry.kernel.clone(), g)?;
            let f2 = solve_second_kind(&sys)?;
            let residual = sys.residual(&f2);
            let values = st.unsub.apply(&f2).into_iter().map(|v| v * weight).collect();
            let amplification =
                weight * st.sub_norm / nmin * st.abel_norm * entry.inverse_norm * st.unsub_norm;
            Ok((
                k,
                Column {
                    values,
                    diag: FrequencyDiagnostic {
                        omega: (w, 0.0),
                        weight,
                        retained: true,
                        normalizer_min: nmin,
                        residual,
                        amplification,
                    },
                },
            ))
        })
        .collect::<Result<_>>()?;
    clock.lap("solve");

    let (grid, diagnostics) = assemble(&spec, st.zeta, columns, cfg, Dim::Two)?;
    clock.lap("inverse");
    Ok(ReconstructionResult {
        grid,
        band: band.clone(),
        diagnostics,
        timing: clock.finish(),
    })
}

/// Inverts an apple sinogram on the (radial) stable band.
pub fn reconstruct_3d(sino: &Sinogram3D, cfg: &ScanConfig, band: &StableBand) -> Result<ReconstructionResult> {
    cfg.validate(Dim::Three)?;
    check_scan(sino.r_m, &sino.r, cfg)?;
    check_axis("x0", &sino.x0, &cfg.x_axis())?;
    check_axis("y0", &sino.y0, &cfg.y_axis())?;
    if (sino.delta - cfg.delta).abs() > 1e-12 {
        return Err(validation(format!(
            "sinogram standoff {} differs from configured {}",
            sino.delta, cfg.delta
        )));
    }
    let mut clock = Stopwatch::new();

    let spec = dft_translations_3d(sino, cfg.pad_factor)?;
    check_band(band, &spec)?;
    let st = Stages::new(&sino.r, cfg, Dim::Three)?;
    clock.lap("setup");

    let support = band.support();
    let unit = spec.omega[0].spacing.abs().min(spec.omega[1].spacing.abs());
    let omega_abs = |k: usize| {
        let (a, b) = band.frequency(k);
        a.hypot(b)
    };
    // Normalizer check first so dropped magnitudes build no kernel.
    let nmins: HashMap<i64, (f64, f64)> = support
        .iter()
        .map(|&k| {
            let w = omega_abs(k);
            (magnitude_key(w, unit), w)
        })
        .collect::<HashMap<_, _>>()
        .into_iter()
        .map(|(key, w)| (key, (w, st.normalizer_min(|s| normalizer_3d(w, s)))))
        .collect();
    let wanted: Vec<(i64, f64, f64)> = nmins
        .iter()
        .filter(|(_, (_, m))| *m > cfg.eps_norm)
        .map(|(&key, &(w, m))| (key, w, m))
        .collect();
    let built: Vec<(i64, SolverEntry)> = wanted
        .par_iter()
        .map(|&(key, w, _)| {
            let mut kernel = KernelTable::try_from_fn(st.s, |s, z| kernel_3d_dk1(s, z, w))?;
            let scale: Vec<f64> = st.s.coords().map(|s| 1.0 / (2.0 * PI * PI * normalizer_3d(w, s))).collect();
            kernel.scale_rows(&scale);
            Ok((key, SolverEntry::new(kernel, 1.0)?))
        })
        .collect::<Result<_>>()?;
    let solvers: HashMap<i64, SolverEntry> = built.into_iter().collect();
    clock.lap("kernels");

    let columns: Vec<(usize, Column)> = support
        .par_iter()
        .map(|&k| {
            let omega = band.frequency(k);
            let w = omega.0.hypot(omega.1);
            let weight = band.weights[k];
            let key = magnitude_key(w, unit);
            let nmin = nmins[&key].1;
            let Some(entry) = solvers.get(&key) else {
                return Ok((k, dropped(omega, weight, nmin, st.zeta.count)));
            };
            let h = st.sub.apply(&spec.column(k));
            let mut g = abel_derivative(&abel_apply(&h, &st.s)?, st.s.spacing, st.scale)?;
            for (v, s) in g.iter_mut().zip(st.s.coords()) {
                *v /= 2.0 * PI * PI * normalizer_3d(w, s);
            }
            let sys = VolterraSystem::new(entry.lambda, entry.kernel.clone(), g)?;
            let f2 = solve_second_kind(&sys)?;
            let residual = sys.residual(&f2);
            let values = st.unsub.apply(&f2).into_iter().map(|v| v * weight).collect();
            let amplification = weight * st.sub_norm * st.abel_norm / (2.0 * PI * PI * nmin)
                * entry.inverse_norm
                * st.unsub_norm;
            Ok((
                k,
                Column {
                    values,
                    diag: FrequencyDiagnostic {
                        omega,
                        weight,
                        retained: true,
                        normalizer_min: nmin,
                        residual,
                        amplification,
                    },
                },
            ))
        })
        .collect::<Result<_>>()?;
    clock.lap("solve");

    let (grid, diagnostics) = assemble(&spec, st.zeta, columns, cfg, Dim::Three)?;
    clock.lap("inverse");
    Ok(ReconstructionResult {
        grid,
        band: band.clone(),
        diagnostics,
        timing: clock.finish(),
    })
}

/// Comparison of a reconstruction with a reference grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub rmse: f64,
    /// `10 log₁₀(peak² / MSE)` with `peak = max |reference|`;
    /// `f64::MAX` when the grids are identical.
    pub psnr: f64,
    /// RMSE against the band-limited reference, if a band was given. The
    /// reconstruction is compared as is since it already lies in the band.
    pub band_rmse: Option<f64>,
}

pub fn rmse(a: &DensityGrid, b: &DensityGrid) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch("grids differ in shape".into()));
    }
    let n = a.values.len();
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sum / n as f64).sqrt())
}

pub fn metrics(recon: &DensityGrid, reference: &DensityGrid, band: Option<&StableBand>) -> Result<Metrics> {
    let e = rmse(recon, reference)?;
    let peak = reference.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let psnr = if e == 0.0 {
        f64::MAX
    } else {
        10.0 * (peak * peak / (e * e)).log10()
    };
    let band_rmse = match band {
        None => None,
        Some(b) => Some(rmse(recon, &band_limited_reference(reference, b)?)?),
    };
    Ok(Metrics {
        rmse: e,
        psnr,
        band_rmse,
    })
}

/// `‖a - b‖ / ‖b‖` over all cells (0 when both vanish).
pub fn relative_l2(a: &DensityGrid, b: &DensityGrid) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch("grids differ in shape".into()));
    }
    let num: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.values.iter().map(|y| y * y).sum();
    Ok(if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    })
}
