//! Abel operator `G(s) = ∫_a^s g(r) / sqrt(s - r) dr` by product
//! integration against the piecewise-linear interpolant of `g`, and the
//! smoothed derivative that follows it in the inversion.

use crate::diff::fd4_stencil;
use crate::error::{validation, Result};
use crate::grid::Axis;

use super::Scalar;

const MIN_ABEL_POINTS: usize = 16;

/// Weights for the two end values of a cell `m` cells below the
/// evaluation node: `(lower end, upper end)`.
fn cell_weights(m: usize, h: f64) -> (f64, f64) {
    let a = m as f64 * h;
    let b = a + h;
    let (sa, sb) = (a.sqrt(), b.sqrt());
    // sqrt(b) - sqrt(a) without cancellation.
    let d = h / (sa + sb);
    let upper = d * (4.0 * b - 2.0 * a - 2.0 * sa * sb) / (3.0 * h);
    let lower = 2.0 * d - upper;
    (lower, upper)
}

fn weight_table(n: usize, h: f64) -> Vec<(f64, f64)> {
    (0..n).map(|m| cell_weights(m, h)).collect()
}

pub fn abel_apply<T: Scalar>(g: &[T], axis: &Axis) -> Result<Vec<T>> {
    let n = g.len();
    if n < MIN_ABEL_POINTS || n != axis.count {
        return Err(validation(format!(
            "Abel transform needs >= {MIN_ABEL_POINTS} samples matching the grid (got {n}, grid {})",
            axis.count
        )));
    }
    let w = weight_table(n, axis.spacing);
    Ok((0..n)
        .map(|i| {
            let mut acc = T::zero();
            // Cell [k, k+1] lies m = i - k - 1 cells below node i.
            for k in 0..i {
                let (lo, hi) = w[i - k - 1];
                acc = acc + g[k] * lo + g[k + 1] * hi;
            }
            acc
        })
        .collect())
}

/// Dense row-major matrix of [`abel_apply`] on an `n`-point grid.
pub fn abel_matrix(n: usize, h: f64) -> Vec<f64> {
    let w = weight_table(n, h);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..i {
            let (lo, hi) = w[i - k - 1];
            a[i * n + k] += lo;
            a[i * n + k + 1] += hi;
        }
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeScale {
    /// Multiply by `1/π`.
    InversePi,
    Unit,
}

impl DerivativeScale {
    pub fn factor(self) -> f64 {
        match self {
            DerivativeScale::InversePi => std::f64::consts::FRAC_1_PI,
            DerivativeScale::Unit => 1.0,
        }
    }
}

/// Fourth-order finite-difference derivative, one-sided at the ends.
pub fn abel_derivative<T: Scalar>(values: &[T], spacing: f64, scale: DerivativeScale) -> Result<Vec<T>> {
    let n = values.len();
    if n < 5 {
        return Err(validation(format!("derivative needs at least 5 samples, got {n}")));
    }
    let c = scale.factor() / (12.0 * spacing);
    Ok((0..n)
        .map(|i| {
            let (start, w) = fd4_stencil(i, n);
            let mut acc = T::zero();
            for (k, wk) in w.iter().enumerate() {
                if *wk != 0.0 {
                    acc = acc + values[start + k] * *wk;
                }
            }
            acc * c
        })
        .collect())
}

/// Dense row-major matrix of [`abel_derivative`].
pub fn derivative_matrix(n: usize, spacing: f64, scale: DerivativeScale) -> Vec<f64> {
    let c = scale.factor() / (12.0 * spacing);
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let (start, w) = fd4_stencil(i, n);
        for (k, wk) in w.iter().enumerate() {
            d[i * n + start + k] += c * wk;
        }
    }
    d
}
