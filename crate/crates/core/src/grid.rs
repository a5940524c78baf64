//! Uniform axes and the sampled containers shared by every stage:
//! density grids and 2-D / 3-D sinograms. Storage is row-major with the
//! first axis (x or x₀) fastest.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn count(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn from_count(n: usize) -> Option<Dim> {
        match n {
            2 => Some(Dim::Two),
            3 => Some(Dim::Three),
            _ => None,
        }
    }
}

/// Uniformly spaced samples `origin + i * spacing`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub count: usize,
    pub origin: f64,
    pub spacing: f64,
}

impl Axis {
    pub fn new(count: usize, origin: f64, spacing: f64) -> Self {
        Self {
            count,
            origin,
            spacing,
        }
    }

    /// `count` cell centres tiling `[lo, hi]`.
    pub fn cell_centered(lo: f64, hi: f64, count: usize) -> Self {
        let spacing = (hi - lo) / count as f64;
        Self::new(count, lo + 0.5 * spacing, spacing)
    }

    /// `count` nodes with both end points included.
    pub fn nodes(lo: f64, hi: f64, count: usize) -> Self {
        assert!(count >= 2, "node axis needs at least two points");
        Self::new(count, lo, (hi - lo) / (count - 1) as f64)
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn last(&self) -> f64 {
        self.coord(self.count - 1)
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.coord(i))
    }

    /// Same count and spacing/origin within `tol` (absolute).
    pub fn matches(&self, other: &Axis, tol: f64) -> bool {
        self.count == other.count
            && (self.origin - other.origin).abs() <= tol
            && (self.spacing - other.spacing).abs() <= tol
    }
}

/// Discrete representative of a density on a cell-centred grid.
/// Axes are `(x, z)` in 2-D and `(x, y, z)` in 3-D.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub dim: Dim,
    pub axes: Vec<Axis>,
    pub values: Vec<f64>,
    pub r_m: f64,
    pub delta: f64,
}

impl DensityGrid {
    pub fn new(dim: Dim, axes: Vec<Axis>, values: Vec<f64>, r_m: f64, delta: f64) -> Result<Self> {
        if axes.len() != dim.count() {
            return Err(Error::ShapeMismatch(format!(
                "{}-D grid needs {} axes, got {}",
                dim.count(),
                dim.count(),
                axes.len()
            )));
        }
        let n: usize = axes.iter().map(|a| a.count).product();
        if n != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "axes describe {n} cells but {} values were given",
                values.len()
            )));
        }
        Ok(Self {
            dim,
            axes,
            values,
            r_m,
            delta,
        })
    }

    pub fn zeros(dim: Dim, axes: Vec<Axis>, r_m: f64, delta: f64) -> Self {
        let n = axes.iter().map(|a| a.count).product();
        Self::new(dim, axes, vec![0.0; n], r_m, delta).expect("consistent by construction")
    }

    pub fn x_axis(&self) -> &Axis {
        &self.axes[0]
    }

    pub fn y_axis(&self) -> Option<&Axis> {
        match self.dim {
            Dim::Two => None,
            Dim::Three => Some(&self.axes[1]),
        }
    }

    pub fn z_axis(&self) -> &Axis {
        self.axes.last().expect("grid has axes")
    }

    /// Number of cells in one z-slice.
    pub fn slice_len(&self) -> usize {
        self.axes[..self.axes.len() - 1]
            .iter()
            .map(|a| a.count)
            .product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing).product()
    }

    /// Discrete L² norm, `sqrt(Σ v² · cell volume)`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.cell_volume()).sqrt()
    }

    pub fn same_shape(&self, other: &DensityGrid) -> bool {
        self.dim == other.dim
            && self
                .axes
                .iter()
                .zip(&other.axes)
                .all(|(a, b)| a.matches(b, 1e-9 * a.spacing.abs().max(1.0)))
    }

    /// Centre coordinates `(x, y, z)` of cell `index` (y = 0 in 2-D).
    pub fn cell_point(&self, index: usize) -> [f64; 3] {
        let nx = self.axes[0].count;
        let ix = index % nx;
        match self.dim {
            Dim::Two => {
                let iz = index / nx;
                [self.axes[0].coord(ix), 0.0, self.axes[1].coord(iz)]
            }
            Dim::Three => {
                let ny = self.axes[1].count;
                let iy = (index / nx) % ny;
                let iz = index / (nx * ny);
                [
                    self.axes[0].coord(ix),
                    self.axes[1].coord(iy),
                    self.axes[2].coord(iz),
                ]
            }
        }
    }
}

/// Toric-section data `values[r][x₀]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram2D {
    pub x0: Axis,
    pub r: Axis,
    pub values: Vec<f64>,
    pub r_m: f64,
    pub delta: f64,
}

impl Sinogram2D {
    pub fn new(x0: Axis, r: Axis, values: Vec<f64>, r_m: f64, delta: f64) -> Result<Self> {
        if x0.count * r.count != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "sinogram {}x{} but {} values",
                r.count,
                x0.count,
                values.len()
            )));
        }
        Ok(Self {
            x0,
            r,
            values,
            r_m,
            delta,
        })
    }

    #[inline]
    pub fn get(&self, ir: usize, ix: usize) -> f64 {
        self.values[ir * self.x0.count + ix]
    }

    pub fn row(&self, ir: usize) -> &[f64] {
        let n = self.x0.count;
        &self.values[ir * n..(ir + 1) * n]
    }
}

/// Apple data `values[r][y₀][x₀]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram3D {
    pub x0: Axis,
    pub y0: Axis,
    pub r: Axis,
    pub values: Vec<f64>,
    pub r_m: f64,
    pub delta: f64,
}

impl Sinogram3D {
    pub fn new(x0: Axis, y0: Axis, r: Axis, values: Vec<f64>, r_m: f64, delta: f64) -> Result<Self> {
        if x0.count * y0.count * r.count != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "sinogram {}x{}x{} but {} values",
                r.count,
                y0.count,
                x0.count,
                values.len()
            )));
        }
        Ok(Self {
            x0,
            y0,
            r,
            values,
            r_m,
            delta,
        })
    }

    #[inline]
    pub fn get(&self, ir: usize, iy: usize, ix: usize) -> f64 {
        self.values[(ir * self.y0.count + iy) * self.x0.count + ix]
    }

    /// The `(y₀, x₀)` plane at radius index `ir`.
    pub fn plane(&self, ir: usize) -> &[f64] {
        let n = self.x0.count * self.y0.count;
        &self.values[ir * n..(ir + 1) * n]
    }
}
