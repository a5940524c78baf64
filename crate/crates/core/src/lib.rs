//! Toric-section (2-D) and apple (3-D) Radon transforms of translational
//! Compton scattering tomography: forward projection, Fourier–Abel–Volterra
//! inversion on the stable frequency band, and file formats.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod diff;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod phantom;
pub mod quadrature;
pub mod reconstruct;
pub mod spectral;
pub mod volterra;

pub use error::{Error, Result};
pub use forward::{
    apple_transform, generalized_transform, oracle_integral, sinogram_2d, sinogram_3d, toric_transform, Manifold,
    OracleRule,
};
pub use geometry::{stable_band_limit, BandMode, Branch, ProfileFamily, QuadratureOrders, ScanConfig, Sheet};
pub use grid::{Axis, DensityGrid, Dim, Sinogram2D, Sinogram3D};
pub use phantom::{sample_grid, Bounds, Density, GridDensity, Phantom, Primitive};
pub use reconstruct::{
    metrics, reconstruct_2d, reconstruct_3d, FrequencyDiagnostic, Metrics, ReconstructionResult,
};
pub use spectral::{band_limited_reference, build_stable_band, SpectralSinogram, StableBand};
pub use volterra::{KernelTable, VolterraSystem};
