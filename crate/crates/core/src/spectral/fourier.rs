//! Continuum-scaled DFT over uniform translation axes.
//!
//! `F(ω) ≈ (2π)^{-1/2} ∫ f(x) e^{-iωx} dx` per axis, evaluated as
//! `Δx (2π)^{-1/2} e^{-iω x_origin} DFT[f]` on a zero-padded grid with
//! `ω_m = (m - N/2) 2π/(N Δx)` stored in centred order.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{validation, Result};
use crate::grid::Axis;

/// Centred angular-frequency axis conjugate to `x` padded by `pad`.
pub fn frequency_axis(x: &Axis, pad: usize) -> Axis {
    let n = x.count * pad;
    let dw = 2.0 * PI / (n as f64 * x.spacing);
    Axis::new(n, -((n / 2) as f64) * dw, dw)
}

fn check_axis(a: &Axis) -> Result<()> {
    if a.count == 0 || !(a.spacing > 0.0) || !a.spacing.is_finite() || !a.origin.is_finite() {
        return Err(validation(format!(
            "translation axis must be uniform with positive spacing (count {}, spacing {})",
            a.count, a.spacing
        )));
    }
    Ok(())
}

struct AxisPlan {
    space: Axis,
    omega: Axis,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `Δx (2π)^{-1/2} e^{-iω x_origin}` per centred index.
    phase: Vec<Complex64>,
}

impl AxisPlan {
    fn new(space: Axis, pad: usize, planner: &mut FftPlanner<f64>) -> Self {
        let omega = frequency_axis(&space, pad);
        let scale = space.spacing / (2.0 * PI).sqrt();
        let phase = omega
            .coords()
            .map(|w| Complex64::from_polar(scale, -w * space.origin))
            .collect();
        Self {
            space,
            omega,
            forward: planner.plan_fft_forward(omega.count),
            inverse: planner.plan_fft_inverse(omega.count),
            phase,
        }
    }

    #[inline]
    fn fft_index(&self, m: usize) -> usize {
        let n = self.omega.count;
        (m + n - n / 2) % n
    }

    /// `input` holds `space.count` samples; `out` receives `omega.count`.
    fn forward_line(&self, input: &[Complex64], out: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = self.omega.count;
        scratch.clear();
        scratch.extend_from_slice(input);
        scratch.resize(n, Complex64::new(0.0, 0.0));
        self.forward.process(scratch);
        for m in 0..n {
            out[m] = scratch[self.fft_index(m)] * self.phase[m];
        }
    }

    fn inverse_line(&self, input: &[Complex64], out: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = self.omega.count;
        scratch.clear();
        scratch.resize(n, Complex64::new(0.0, 0.0));
        // Inverse of phase·DFT: multiply by conj(phase)/|phase|², then IDFT/N.
        let norm = 1.0 / (n as f64 * self.phase[0].norm_sqr());
        for m in 0..n {
            scratch[self.fft_index(m)] = input[m] * self.phase[m].conj() * norm;
        }
        self.inverse.process(scratch);
        out.copy_from_slice(&scratch[..self.space.count]);
    }
}

/// Separable transform over one or two translation axes (x fastest).
pub struct PlaneTransform {
    plans: Vec<AxisPlan>,
}

impl std::fmt::Debug for PlaneTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlaneTransform")
            .field("space", &self.space_axes())
            .field("omega", &self.omega_axes())
            .finish()
    }
}

impl PlaneTransform {
    pub fn new(axes: &[Axis], pad: usize) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(validation("translation plane must have one or two axes"));
        }
        if pad == 0 {
            return Err(validation("pad factor must be >= 1"));
        }
        let mut planner = FftPlanner::new();
        let mut plans = Vec::with_capacity(axes.len());
        for a in axes {
            check_axis(a)?;
            plans.push(AxisPlan::new(*a, pad, &mut planner));
        }
        Ok(Self { plans })
    }

    pub fn space_axes(&self) -> Vec<Axis> {
        self.plans.iter().map(|p| p.space).collect()
    }

    pub fn omega_axes(&self) -> Vec<Axis> {
        self.plans.iter().map(|p| p.omega).collect()
    }

    pub fn space_len(&self) -> usize {
        self.plans.iter().map(|p| p.space.count).product()
    }

    pub fn omega_len(&self) -> usize {
        self.plans.iter().map(|p| p.omega.count).product()
    }

    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let c: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&c)
    }

    pub fn forward(&self, data: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(data.len(), self.space_len(), "plane size mismatch");
        let px = &self.plans[0];
        let (nx, mx) = (px.space.count, px.omega.count);
        let mut scratch = Vec::new();
        match self.plans.get(1) {
            None => {
                let mut out = vec![Complex64::new(0.0, 0.0); mx];
                px.forward_line(data, &mut out, &mut scratch);
                out
            }
            Some(py) => {
                let (ny, my) = (py.space.count, py.omega.count);
                let mut rows = vec![Complex64::new(0.0, 0.0); ny * mx];
                for iy in 0..ny {
                    px.forward_line(&data[iy * nx..(iy + 1) * nx], &mut rows[iy * mx..(iy + 1) * mx], &mut scratch);
                }
                let mut out = vec![Complex64::new(0.0, 0.0); my * mx];
                let mut col = vec![Complex64::new(0.0, 0.0); ny];
                let mut res = vec![Complex64::new(0.0, 0.0); my];
                for k in 0..mx {
                    for iy in 0..ny {
                        col[iy] = rows[iy * mx + k];
                    }
                    py.forward_line(&col, &mut res, &mut scratch);
                    for m in 0..my {
                        out[m * mx + k] = res[m];
                    }
                }
                out
            }
        }
    }

    /// Inverse transform cropped to the unpadded spatial grid.
    pub fn inverse(&self, spec: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(spec.len(), self.omega_len(), "spectrum size mismatch");
        let px = &self.plans[0];
        let (nx, mx) = (px.space.count, px.omega.count);
        let mut scratch = Vec::new();
        match self.plans.get(1) {
            None => {
                let mut out = vec![Complex64::new(0.0, 0.0); nx];
                px.inverse_line(spec, &mut out, &mut scratch);
                out
            }
            Some(py) => {
                let (ny, my) = (py.space.count, py.omega.count);
                let mut cols = vec![Complex64::new(0.0, 0.0); ny * mx];
                let mut col = vec![Complex64::new(0.0, 0.0); my];
                let mut res = vec![Complex64::new(0.0, 0.0); ny];
                for k in 0..mx {
                    for m in 0..my {
                        col[m] = spec[m * mx + k];
                    }
                    py.inverse_line(&col, &mut res, &mut scratch);
                    for iy in 0..ny {
                        cols[iy * mx + k] = res[iy];
                    }
                }
                let mut out = vec![Complex64::new(0.0, 0.0); ny * nx];
                for iy in 0..ny {
                    px.inverse_line(&cols[iy * mx..(iy + 1) * mx], &mut out[iy * nx..(iy + 1) * nx], &mut scratch);
                }
                out
            }
        }
    }
}

/// `| ‖f‖ - ‖F‖ | / ‖f‖` in the continuum-scaled norms (`Σ|f|²Δx`,
/// `Σ|F|²Δω`); zero input gives 0.
pub fn plancherel_residual(values: &[f64], dx: f64) -> Result<f64> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(validation("Plancherel check needs finite values"));
    }
    let axis = Axis::new(values.len(), 0.0, dx);
    let t = PlaneTransform::new(&[axis], 1)?;
    let spec = t.forward_real(values);
    let fx = (values.iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
    if fx == 0.0 {
        return Ok(0.0);
    }
    let dw = t.omega_axes()[0].spacing;
    let fw = (spec.iter().map(|c| c.norm_sqr()).sum::<f64>() * dw).sqrt();
    Ok((fx - fw).abs() / fx)
}
