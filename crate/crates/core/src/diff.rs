//! Five-point fourth-order finite-difference stencils on uniform grids.

/// First index and weights (to be divided by `12 h`) of the stencil for
/// the derivative at node `i` of an `n`-point grid. Needs `n >= 5`.
#[inline]
pub(crate) fn fd4_stencil(i: usize, n: usize) -> (usize, [f64; 5]) {
    debug_assert!(n >= 5 && i < n);
    if i == 0 {
        (0, [-25.0, 48.0, -36.0, 16.0, -3.0])
    } else if i == 1 {
        (0, [-3.0, -10.0, 18.0, -6.0, 1.0])
    } else if i == n - 2 {
        (n - 5, [-1.0, 6.0, -18.0, 10.0, 3.0])
    } else if i == n - 1 {
        (n - 5, [3.0, -16.0, 36.0, -48.0, 25.0])
    } else {
        (i - 2, [1.0, -8.0, 0.0, 8.0, -1.0])
    }
}
