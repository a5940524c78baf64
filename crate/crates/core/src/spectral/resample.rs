//! Linear resampling operators between uniform grids.
//!
//! Cubic Hermite interpolation with node slopes from fourth-order finite
//! differences. The operator is linear in the data, so it is stored as a
//! sparse matrix whose norms can be bounded.

use crate::diff::fd4_stencil;
use crate::error::{domain, validation, Result};
use crate::grid::Axis;
use crate::volterra::Scalar;

/// Behaviour for targets below the source range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BelowRange {
    Error,
    /// The function is known to vanish there.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampler {
    n_in: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    weights: Vec<f64>,
}

impl Resampler {
    pub fn hermite(src: &Axis, targets: &[f64], below: BelowRange) -> Result<Self> {
        let n = src.count;
        if n < 5 {
            return Err(validation(format!("resampling needs >= 5 source points, got {n}")));
        }
        let h = src.spacing;
        let (lo, hi) = (src.origin, src.last());
        let tol = 1e-9 * h.abs();
        let mut indptr = Vec::with_capacity(targets.len() + 1);
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        indptr.push(0);
        let mut row = Vec::<(usize, f64)>::with_capacity(12);
        for &t in targets {
            row.clear();
            if t < lo - tol {
                if below == BelowRange::Error {
                    return Err(domain(format!("target {t} below the source range [{lo}, {hi}]")));
                }
            } else if t > hi + tol || !t.is_finite() {
                return Err(domain(format!("target {t} above the source range [{lo}, {hi}]")));
            } else {
                let x = ((t - lo) / h).clamp(0.0, (n - 1) as f64);
                let j = (x.floor() as usize).min(n - 2);
                let u = x - j as f64;
                let (u2, u3) = (u * u, u * u * u);
                let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
                let h10 = u3 - 2.0 * u2 + u;
                let h01 = -2.0 * u3 + 3.0 * u2;
                let h11 = u3 - u2;
                row.push((j, h00));
                row.push((j + 1, h01));
                // Slopes d_j·h = Σ w f / 12.
                for (node, c) in [(j, h10), (j + 1, h11)] {
                    let (start, w) = fd4_stencil(node, n);
                    for (k, wk) in w.iter().enumerate() {
                        if *wk != 0.0 {
                            row.push((start + k, c * wk / 12.0));
                        }
                    }
                }
                row.sort_by_key(|e| e.0);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
                for &(i, w) in row.iter() {
                    match merged.last_mut() {
                        Some(last) if last.0 == i => last.1 += w,
                        _ => merged.push((i, w)),
                    }
                }
                for (i, w) in merged {
                    if w != 0.0 {
                        indices.push(i);
                        weights.push(w);
                    }
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            n_in: n,
            indptr,
            indices,
            weights,
        })
    }

    pub fn input_len(&self) -> usize {
        self.n_in
    }

    pub fn output_len(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn apply<T: Scalar>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.n_in, "resampler input length");
        (0..self.output_len())
            .map(|r| {
                let mut acc = T::zero();
                for e in self.indptr[r]..self.indptr[r + 1] {
                    acc = acc + input[self.indices[e]] * self.weights[e];
                }
                acc
            })
            .collect()
    }

    /// `(‖A‖₁, ‖A‖∞)`.
    pub fn norms(&self) -> (f64, f64) {
        let mut cols = vec![0.0; self.n_in];
        let mut row_max = 0.0_f64;
        for r in 0..self.output_len() {
            let mut s = 0.0;
            for e in self.indptr[r]..self.indptr[r + 1] {
                let w = self.weights[e].abs();
                s += w;
                cols[self.indices[e]] += w;
            }
            row_max = row_max.max(s);
        }
        (cols.into_iter().fold(0.0, f64::max), row_max)
    }

    /// Upper bound on the spectral norm, `sqrt(‖A‖₁ ‖A‖∞)`.
    pub fn norm2_bound(&self) -> f64 {
        let (a, b) = self.norms();
        (a * b).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_and_nodes() {
        let src = Axis::nodes(0.0, 2.0, 21);
        let f = |x: f64| 0.3 - x + 2.0 * x * x - 0.7 * x * x * x;
        let data: Vec<f64> = src.coords().map(f).collect();
        let targets: Vec<f64> = (0..57).map(|i| i as f64 * 2.0 / 56.0).collect();
        let r = Resampler::hermite(&src, &targets, BelowRange::Error).unwrap();
        for (t, v) in targets.iter().zip(r.apply(&data)) {
            assert!((v - f(*t)).abs() < 1e-12);
        }
        let at_nodes = Resampler::hermite(&src, &src.coords().collect::<Vec<_>>(), BelowRange::Error).unwrap();
        for (a, b) in at_nodes.apply(&data).iter().zip(&data) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |n: usize| {
            let src = Axis::nodes(0.0, 3.0, n);
            let data: Vec<f64> = src.coords().map(|x| (2.0 * x).sin()).collect();
            let targets: Vec<f64> = (0..300).map(|i| 0.005 + i as f64 * 0.0099).collect();
            let r = Resampler::hermite(&src, &targets, BelowRange::Error).unwrap();
            r.apply(&data)
                .iter()
                .zip(&targets)
                .map(|(v, t)| (v - (2.0 * t).sin()).abs())
                .fold(0.0, f64::max)
        };
        let (a, b) = (err(33), err(65));
        assert!(a / b > 12.0, "ratio {}", a / b);
    }

    #[test]
    fn range_handling() {
        let src = Axis::nodes(1.0, 2.0, 10);
        assert!(Resampler::hermite(&src, &[2.1], BelowRange::Zero).is_err());
        assert!(Resampler::hermite(&src, &[0.5], BelowRange::Error).is_err());
        let r = Resampler::hermite(&src, &[0.5, 1.5], BelowRange::Zero).unwrap();
        let out = r.apply(&[1.0; 10]);
        assert_eq!(out[0], 0.0);
        assert!((out[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn norms_are_bounds() {
        let src = Axis::nodes(0.0, 1.0, 16);
        let targets: Vec<f64> = (0..40).map(|i| i as f64 / 39.0).collect();
        let r = Resampler::hermite(&src, &targets, BelowRange::Error).unwrap();
        let (n1, ninf) = r.norms();
        assert!(n1 >= 1.0 && ninf >= 1.0);
        let x: Vec<f64> = (0..16).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let y = r.apply(&x);
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(ny <= r.norm2_bound() * nx + 1e-12);
    }
}
