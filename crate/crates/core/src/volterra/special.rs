//! Bessel functions of the first kind (orders 0 and 1) and the
//! unnormalized sinc.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

const SERIES_LIMIT: f64 = 8.0;
const RECURRENCE_LIMIT: f64 = 50.0;

/// J₀(x). Absolute error below 1e-12 for |x| ≤ 50.
pub fn bessel_j0(x: f64) -> f64 {
    bessel_j01(x).0
}

/// J₁(x).
pub fn bessel_j1(x: f64) -> f64 {
    bessel_j01(x).1
}

/// (J₀(x), J₁(x)) evaluated together.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (j0, j1) = if ax < SERIES_LIMIT {
        series(ax)
    } else if ax <= RECURRENCE_LIMIT {
        miller(ax)
    } else {
        hankel_asymptotic(ax)
    };
    (j0, if x < 0.0 { -j1 } else { j1 })
}

fn series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    let mut s0 = 1.0;
    let mut s1 = 1.0;
    for k in 1..64 {
        let kf = k as f64;
        t0 *= -q / (kf * kf);
        t1 *= -q / (kf * (kf + 1.0));
        s0 += t0;
        s1 += t1;
        if t0.abs() < 1e-18 && t1.abs() < 1e-18 {
            break;
        }
    }
    (s0, 0.5 * x * s1)
}

// Backward recurrence normalized with J₀ + 2ΣJ_{2k} = 1.
fn miller(x: f64) -> (f64, f64) {
    let start = 2 * ((x as usize + 40) / 2);
    let mut next = 0.0; // J_{n+1}
    let mut cur = 1e-30; // J_n
    let mut norm = 0.0;
    let mut j0 = 0.0;
    let mut j1 = 0.0;
    for n in (1..=start).rev() {
        let prev = 2.0 * n as f64 / x * cur - next; // J_{n-1}
        next = cur;
        cur = prev;
        let m = n - 1;
        if m > 0 && m % 2 == 0 {
            norm += 2.0 * cur;
        }
        if m == 1 {
            j1 = cur;
        }
        if m == 0 {
            j0 = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm)
}

fn hankel_asymptotic(x: f64) -> (f64, f64) {
    let amp = (2.0 / (PI * x)).sqrt();
    let (p0, q0) = pq(0.0, x);
    let (p1, q1) = pq(4.0, x);
    let c0 = x - FRAC_PI_4;
    let c1 = x - 3.0 * FRAC_PI_4;
    (
        amp * (p0 * c0.cos() - q0 * c0.sin()),
        amp * (p1 * c1.cos() - q1 * c1.sin()),
    )
}

// Hankel P, Q series with mu = 4ν².
fn pq(mu: f64, x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let eight_x = 8.0 * x;
    for k in 1..30 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * eight_x);
        if k % 2 == 1 {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            q += sign * term;
        } else {
            let sign = if (k / 2) % 2 == 1 { -1.0 } else { 1.0 };
            p += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

/// First positive root of J₀, computed once by bisection then polished
/// with Newton steps.
pub fn first_j0_root() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if bessel_j0(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..3 {
            let (j0, j1) = bessel_j01(t);
            if j1 != 0.0 {
                t += j0 / j1;
            }
        }
        t
    })
}

/// sin(x)/x, with sinc(0) = 1.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}
