//! Stable-band masks on the translation-frequency grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{stable_band_limit, BandMode, ScanConfig};
use crate::grid::{Axis, DensityGrid, Dim};

use super::fourier::{frequency_axis, PlaneTransform};

/// Raised-cosine taper: 1 up to `(1-τ)Ω`, 0 from `Ω` on.
pub fn taper_weight(omega_abs: f64, omega_max: f64, taper: f64) -> f64 {
    let w = omega_abs.abs();
    if w >= omega_max {
        return 0.0;
    }
    let knee = (1.0 - taper) * omega_max;
    if w <= knee {
        return 1.0;
    }
    0.5 * (1.0 + (std::f64::consts::PI * (w - knee) / (taper * omega_max)).cos())
}

/// Mask weights on a centred frequency grid, radial in 3-D.
#[derive(Debug, Clone, PartialEq)]
pub struct StableBand {
    pub omega: Vec<Axis>,
    pub omega_max: f64,
    pub taper: f64,
    pub weights: Vec<f64>,
}

impl StableBand {
    pub fn new(omega: Vec<Axis>, omega_max: f64, taper: f64) -> Self {
        let weights = match omega.as_slice() {
            [wx] => wx.coords().map(|w| taper_weight(w, omega_max, taper)).collect(),
            [wx, wy] => wy
                .coords()
                .flat_map(|w2| wx.coords().map(move |w1| taper_weight(w1.hypot(w2), omega_max, taper)))
                .collect(),
            _ => panic!("band needs one or two frequency axes"),
        };
        Self {
            omega,
            omega_max,
            taper,
            weights,
        }
    }

    pub fn all_pass(omega: Vec<Axis>) -> Self {
        Self::new(omega, f64::INFINITY, 0.0)
    }

    pub fn all_stop(omega: Vec<Axis>) -> Self {
        Self::new(omega, 0.0, 0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(ω₁, ω₂)` of flat index `k` (`ω₂ = 0` in 2-D).
    pub fn frequency(&self, k: usize) -> (f64, f64) {
        let wx = &self.omega[0];
        match self.omega.get(1) {
            None => (wx.coord(k), 0.0),
            Some(wy) => (wx.coord(k % wx.count), wy.coord(k / wx.count)),
        }
    }

    /// Indices with nonzero weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.weights[k] > 0.0).collect()
    }

    pub fn matches(&self, omega: &[Axis]) -> bool {
        self.omega.len() == omega.len()
            && self
                .omega
                .iter()
                .zip(omega)
                .all(|(a, b)| a.matches(b, 1e-9 * a.spacing.abs()))
    }
}

pub fn build_stable_band(cfg: &ScanConfig, dim: Dim, taper: f64) -> Result<StableBand> {
    let (mode, axes) = match dim {
        Dim::Two => (BandMode::TwoD, vec![cfg.x_axis()]),
        Dim::Three => (BandMode::ThreeD, vec![cfg.x_axis(), cfg.y_axis()]),
    };
    let omega_max = stable_band_limit(cfg.r_m, mode)?;
    let omega = axes.iter().map(|a| frequency_axis(a, cfg.pad_factor)).collect();
    Ok(StableBand::new(omega, omega_max, taper))
}

/// Pad factor relating a translation axis to a band's frequency axis.
pub(crate) fn pad_for(space: &Axis, omega: &Axis) -> Result<usize> {
    if !omega.count.is_multiple_of(space.count) {
        return Err(Error::ShapeMismatch(format!(
            "frequency grid of {} points does not pad a {}-point axis",
            omega.count, space.count
        )));
    }
    let pad = omega.count / space.count;
    let expect = frequency_axis(space, pad);
    if !expect.matches(omega, 1e-9 * expect.spacing) {
        return Err(Error::ShapeMismatch(
            "frequency grid spacing does not match the translation axis".into(),
        ));
    }
    Ok(pad)
}

/// Filters each z-slice of `grid` by the mask in the translation
/// frequencies; z is untouched.
pub fn band_limited_reference(grid: &DensityGrid, band: &StableBand) -> Result<DensityGrid> {
    let space: Vec<Axis> = grid.axes[..grid.axes.len() - 1].to_vec();
    if space.len() != band.omega.len() {
        return Err(Error::ShapeMismatch(format!(
            "{}-D grid against a band with {} frequency axes",
            grid.dim.count(),
            band.omega.len()
        )));
    }
    let pad = pad_for(&space[0], &band.omega[0])?;
    if let (Some(sy), Some(wy)) = (space.get(1), band.omega.get(1)) {
        if pad_for(sy, wy)? != pad {
            return Err(Error::ShapeMismatch("unequal pad factors across axes".into()));
        }
    }
    let t = PlaneTransform::new(&space, pad)?;
    let slice = grid.slice_len();
    let mut out = grid.clone();
    for (src, dst) in grid.values.chunks(slice).zip(out.values.chunks_mut(slice)) {
        let mut spec = t.forward_real(src);
        for (c, w) in spec.iter_mut().zip(&band.weights) {
            *c *= *w;
        }
        let back: Vec<Complex64> = t.inverse(&spec);
        for (d, b) in dst.iter_mut().zip(back) {
            *d = b.re;
        }
    }
    Ok(out)
}
