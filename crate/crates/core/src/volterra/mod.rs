//! Second-kind Volterra equations `f(s) + λ ∫ K(s, z) f(z) dz = g(s)` on a
//! uniform grid, plus the special functions, Abel operators and kernels
//! used by the inversion pipelines.

pub mod abel;
pub mod kernels;
pub mod special;

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Axis;

pub use abel::{abel_apply, abel_derivative, abel_matrix, DerivativeScale};
pub use kernels::*;
pub use special::{bessel_j0, bessel_j01, bessel_j1, first_j0_root, sinc};

/// Scalars the solvers operate on: `f64` and `Complex64`.
pub trait Scalar:
    Copy + Send + Sync + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn abs2(self) -> f64;
    fn scale_div(self, d: f64) -> Self {
        self * (1.0 / d)
    }
}

impl Scalar for f64 {
    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }
    #[inline]
    fn scale_div(self, d: f64) -> Self {
        self / d
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    #[inline]
    fn scale_div(self, d: f64) -> Self {
        self / d
    }
}

pub(crate) fn l2<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.abs2()).sum::<f64>().sqrt()
}

/// Lower-triangular samples `K(s_i, s_k)`, `k <= i`, packed by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    axis: Axis,
    data: Vec<f64>,
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl KernelTable {
    pub fn from_fn<F>(axis: Axis, kernel: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        Self::try_from_fn(axis, |s, z| Ok(kernel(s, z))).expect("infallible kernel")
    }

    /// Rows are evaluated in parallel.
    pub fn try_from_fn<F>(axis: Axis, kernel: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64> + Sync,
    {
        let rows: Vec<Vec<f64>> = (0..axis.count)
            .into_par_iter()
            .map(|i| {
                let s = axis.coord(i);
                (0..=i).map(|k| kernel(s, axis.coord(k))).collect()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            axis,
            data: rows.concat(),
        })
    }

    /// Kernel depending only on `s - z`, sampled once per offset.
    pub fn toeplitz<F>(axis: Axis, kernel: F) -> Self
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let n = axis.count;
        let diag: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|m| kernel(m as f64 * axis.spacing))
            .collect();
        let mut data = Vec::with_capacity(row_start(n));
        for i in 0..n {
            data.extend((0..=i).map(|k| diag[i - k]));
        }
        Self { axis, data }
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn size(&self) -> usize {
        self.axis.count
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[row_start(i)..row_start(i + 1)]
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        debug_assert!(k <= i);
        self.data[row_start(i) + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Multiplies row `i` by `scale[i]`.
    pub fn scale_rows(&mut self, scale: &[f64]) {
        assert_eq!(scale.len(), self.axis.count);
        for (i, &c) in scale.iter().enumerate() {
            let (a, b) = (row_start(i), row_start(i + 1));
            self.data[a..b].iter_mut().for_each(|v| *v *= c);
        }
    }
}

/// Discretized second-kind equation on the kernel's grid.
#[derive(Debug, Clone)]
pub struct VolterraSystem<T> {
    pub lambda: f64,
    pub kernel: Arc<KernelTable>,
    pub rhs: Vec<T>,
}

const SINGULAR_DIAGONAL: f64 = 1e-8;

impl<T: Scalar> VolterraSystem<T> {
    pub fn new(lambda: f64, kernel: Arc<KernelTable>, rhs: Vec<T>) -> Result<Self> {
        if rhs.len() != kernel.size() {
            return Err(Error::ShapeMismatch(format!(
                "right-hand side has {} samples, kernel grid {}",
                rhs.len(),
                kernel.size()
            )));
        }
        Ok(Self { lambda, kernel, rhs })
    }

    fn step(&self) -> f64 {
        self.kernel.axis().spacing
    }

    /// `f + λ ∫ K f` with the trapezoid rule on each `[s_0, s_i]`.
    pub fn apply(&self, f: &[T]) -> Vec<T> {
        let h = self.step();
        (0..f.len())
            .map(|i| {
                if i == 0 {
                    return f[0];
                }
                let k = self.kernel.row(i);
                let mut acc = f[0] * (0.5 * k[0]) + f[i] * (0.5 * k[i]);
                for j in 1..i {
                    acc = acc + f[j] * k[j];
                }
                f[i] + acc * (self.lambda * h)
            })
            .collect()
    }

    /// `‖apply(f) - g‖ / ‖g‖`, or the absolute norm when `g = 0`.
    pub fn residual(&self, f: &[T]) -> f64 {
        let af = self.apply(f);
        let diff: Vec<T> = af.iter().zip(&self.rhs).map(|(&a, &b)| a - b).collect();
        let g = l2(&self.rhs);
        let d = l2(&diff);
        if g > 0.0 {
            d / g
        } else {
            d
        }
    }
}

/// Forward substitution for the trapezoid discretization.
pub fn solve_second_kind<T: Scalar>(sys: &VolterraSystem<T>) -> Result<Vec<T>> {
    let n = sys.rhs.len();
    let h = sys.step();
    let lh = sys.lambda * h;
    let mut f: Vec<T> = Vec::with_capacity(n);
    for i in 0..n {
        if i == 0 {
            f.push(sys.rhs[0]);
            continue;
        }
        let k = sys.kernel.row(i);
        let diagonal = 1.0 + 0.5 * lh * k[i];
        if diagonal.abs() < SINGULAR_DIAGONAL {
            return Err(Error::NearSingular { row: i, diagonal: diagonal.abs() });
        }
        let mut acc = f[0] * (0.5 * k[0]);
        for j in 1..i {
            acc = acc + f[j] * k[j];
        }
        f.push((sys.rhs[i] - acc * lh).scale_div(diagonal));
    }
    Ok(f)
}

/// Dense inverse of the (real) trapezoid system matrix, row-major.
pub fn system_inverse(lambda: f64, kernel: &KernelTable) -> Result<Vec<f64>> {
    let n = kernel.size();
    let h = kernel.axis().spacing;
    let lh = lambda * h;
    // Column j of the inverse solves A x = e_j; x vanishes above row j.
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut x = vec![0.0; n];
            for i in j..n {
                let rhs = if i == j { 1.0 } else { 0.0 };
                if i == 0 {
                    x[0] = rhs;
                    continue;
                }
                let k = kernel.row(i);
                let diagonal = 1.0 + 0.5 * lh * k[i];
                if diagonal.abs() < SINGULAR_DIAGONAL {
                    return Err(Error::NearSingular { row: i, diagonal: diagonal.abs() });
                }
                let mut acc = 0.5 * k[0] * x[0];
                for m in j.max(1)..i {
                    acc += k[m] * x[m];
                }
                x[i] = (rhs - lh * acc) / diagonal;
            }
            Ok(x)
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; n * n];
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            out[i * n + j] = *v;
        }
    }
    Ok(out)
}

/// `(‖A‖₁, ‖A‖∞)` of a dense row-major `rows × cols` matrix.
pub fn matrix_norms(a: &[f64], rows: usize, cols: usize) -> (f64, f64) {
    let mut col_sums = vec![0.0; cols];
    let mut row_max = 0.0_f64;
    for i in 0..rows {
        let mut r = 0.0;
        for j in 0..cols {
            let v = a[i * cols + j].abs();
            r += v;
            col_sums[j] += v;
        }
        row_max = row_max.max(r);
    }
    (col_sums.into_iter().fold(0.0, f64::max), row_max)
}

/// Solution through the truncated resolvent series: iterated kernels
/// `K_{ν+1}(x, y) = ∫_y^x K(x, z) K_ν(z, y) dz` are built on the grid and
/// `f = g - λ ∫ Σ_{ν<depth} (-λ)^ν K_{ν+1} g`.
///
/// Every integral uses the trapezoid weights of [`solve_second_kind`]
/// (half weight at `s_0` and at the row's own node), so the series is the
/// Neumann series of the discrete system and converges to its solution.
pub fn resolvent_neumann<T: Scalar>(sys: &VolterraSystem<T>, depth: usize) -> Result<Vec<T>> {
    if depth == 0 {
        return Err(crate::error::validation("resolvent depth must be >= 1"));
    }
    let table = &sys.kernel;
    let n = table.size();
    let h = table.axis().spacing;
    let lambda = sys.lambda;

    // Weighted kernel, dense row-major; row 0 and the upper triangle stay
    // zero since f(s_0) = g(s_0).
    let mut weighted = vec![0.0; n * n];
    for i in 1..n {
        let row = table.row(i);
        for (j, &k) in row.iter().enumerate() {
            let w = if j == 0 || j == i { 0.5 } else { 1.0 };
            weighted[i * n + j] = w * k;
        }
    }
    let mut resolvent = weighted.clone();
    let mut current = weighted.clone();
    let mut coeff = 1.0;
    for _ in 1..depth {
        let next: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut out = vec![0.0; n];
                let ki = &weighted[i * n..i * n + i + 1];
                for (k, &c) in ki.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    let row = &current[k * n..k * n + k + 1];
                    for (o, &v) in out[..=k].iter_mut().zip(row) {
                        *o += c * v;
                    }
                }
                out.iter_mut().for_each(|v| *v *= h);
                out
            })
            .collect();
        coeff *= -lambda;
        for (r, v) in resolvent.iter_mut().zip(&next) {
            *r += coeff * v;
        }
        current = next;
    }

    let g = &sys.rhs;
    Ok((0..n)
        .map(|i| {
            let row = &resolvent[i * n..i * n + i + 1];
            let mut acc = T::zero();
            for (j, &r) in row.iter().enumerate() {
                acc = acc + g[j] * r;
            }
            g[i] - acc * (lambda * h)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_system(n: usize, g: f64) -> VolterraSystem<f64> {
        let axis = Axis::nodes(0.0, 2.0, n);
        let k = Arc::new(KernelTable::from_fn(axis, |_, _| 1.0));
        VolterraSystem::new(1.0, k, vec![g; n]).unwrap()
    }

    #[test]
    fn zero_kernel_is_identity() {
        let axis = Axis::nodes(1.0, 3.0, 50);
        let k = Arc::new(KernelTable::from_fn(axis, |_, _| 0.0));
        let g: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let sys = VolterraSystem::new(2.5, k, g.clone()).unwrap();
        assert_eq!(solve_second_kind(&sys).unwrap(), g);
    }

    #[test]
    fn exponential_oracle() {
        let sys = unit_system(1024, 1.0);
        let f = solve_second_kind(&sys).unwrap();
        let axis = *sys.kernel.axis();
        let err = f
            .iter()
            .enumerate()
            .map(|(i, v)| ((v - (-axis.coord(i)).exp()) / (-axis.coord(i)).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        assert!(sys.residual(&f) < 1e-12);
    }

    #[test]
    fn matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 128;
        let axis = Axis::nodes(0.0, 1.0, n);
        let vals: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let k = Arc::new(KernelTable::from_fn(axis, |s, z| {
            let i = ((s - axis.origin) / axis.spacing).round() as usize;
            let j = ((z - axis.origin) / axis.spacing).round() as usize;
            vals[i * n + j]
        }));
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sys = VolterraSystem::new(0.8, k.clone(), g.clone()).unwrap();
        let f = solve_second_kind(&sys).unwrap();
        let inv = system_inverse(0.8, &k).unwrap();
        for i in 0..n {
            let dense: f64 = (0..n).map(|j| inv[i * n + j] * g[j]).sum();
            assert!((dense - f[i]).abs() < 1e-12 * (1.0 + f[i].abs()));
        }
        // Both column and row structure of the inverse: A·A⁻¹ = I.
        for j in [0, 5, 77] {
            let col: Vec<f64> = (0..n).map(|i| inv[i * n + j]).collect();
            let back = sys.apply(&col);
            for (i, v) in back.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn complex_rhs() {
        let axis = Axis::nodes(0.0, 1.0, 64);
        let k = Arc::new(KernelTable::from_fn(axis, |s, z| (s - z).cos()));
        let g: Vec<Complex64> = (0..64).map(|i| Complex64::new(1.0, i as f64 * 0.01)).collect();
        let sys = VolterraSystem::new(-0.7, k, g.clone()).unwrap();
        let f = solve_second_kind(&sys).unwrap();
        assert!(sys.residual(&f) < 1e-13);
        let re = VolterraSystem::new(-0.7, sys.kernel.clone(), g.iter().map(|c| c.re).collect()).unwrap();
        let fr = solve_second_kind(&re).unwrap();
        for (a, b) in f.iter().zip(&fr) {
            assert!((a.re - b).abs() < 1e-14);
        }
    }

    #[test]
    fn near_singular_guard() {
        let axis = Axis::nodes(0.0, 1.0, 3);
        let k = Arc::new(KernelTable::from_fn(axis, |_, _| 1.0));
        let lambda = -2.0 / axis.spacing;
        let sys = VolterraSystem::new(lambda, k, vec![1.0; 3]).unwrap();
        let err = solve_second_kind(&sys).unwrap_err();
        assert!(err.is_numerical_guard());
    }

    #[test]
    fn resolvent_depth_one() {
        let axis = Axis::nodes(0.0, 1.5, 40);
        let k = Arc::new(KernelTable::from_fn(axis, |s, z| 1.0 + s * z));
        let g: Vec<f64> = (0..40).map(|i| 1.0 + (i as f64).sqrt()).collect();
        let sys = VolterraSystem::new(0.3, k, g.clone()).unwrap();
        let f = resolvent_neumann(&sys, 1).unwrap();
        let zero = VolterraSystem::new(0.3, sys.kernel.clone(), vec![0.0; 40]).unwrap();
        // apply(g) - g = λ∫Kg, so depth 1 gives g - (apply(g) - g).
        let kg: Vec<f64> = zero.apply(&g).iter().zip(&g).map(|(a, b)| a - b).collect();
        for i in 0..40 {
            assert!((f[i] - (g[i] - kg[i])).abs() < 1e-13);
        }
    }

    #[test]
    fn resolvent_exponential_oracle() {
        let sys = unit_system(1024, 1.0);
        let f = resolvent_neumann(&sys, 20).unwrap();
        let axis = *sys.kernel.axis();
        let err = f
            .iter()
            .enumerate()
            .map(|(i, v)| ((v - (-axis.coord(i)).exp()) / (-axis.coord(i)).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn resolvent_converges_to_discrete_solution() {
        let axis = Axis::nodes(1.0, 4.0, 200);
        let k = Arc::new(KernelTable::from_fn(axis, |s, z| (s - z).cos() + 0.3 * z));
        let g: Vec<f64> = axis.coords().map(|s| (2.0 * s).sin()).collect();
        let sys = VolterraSystem::new(0.9, k, g).unwrap();
        let direct = solve_second_kind(&sys).unwrap();
        let series = resolvent_neumann(&sys, 40).unwrap();
        for (a, b) in direct.iter().zip(&series) {
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
        let short = resolvent_neumann(&sys, 3).unwrap();
        assert!(direct.iter().zip(&short).any(|(a, b)| (a - b).abs() > 1e-3));
    }

    #[test]
    fn toeplitz_matches_direct() {
        let axis = Axis::nodes(1.0, 2.0, 30);
        let a = KernelTable::toeplitz(axis, |d| (1.0 + d).ln());
        let b = KernelTable::from_fn(axis, |s, z| (1.0 + (s - z)).ln());
        for i in 0..30 {
            for k in 0..=i {
                assert!((a.get(i, k) - b.get(i, k)).abs() < 1e-14);
            }
        }
    }
}
