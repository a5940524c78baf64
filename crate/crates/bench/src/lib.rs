//! Shared fixtures for the benchmarks.

use cstk_core::{Bounds, Dim, Phantom, Primitive, QuadratureOrders, ScanConfig};

pub fn config_2d(n: usize) -> ScanConfig {
    ScanConfig {
        delta: 0.0,
        nx: n,
        nr: n,
        nz: n,
        ..ScanConfig::default()
    }
}

pub fn config_3d(n: usize) -> ScanConfig {
    ScanConfig {
        delta: 0.1,
        nx: n,
        ny: n,
        nr: 2 * n,
        nz: 2 * n,
        x_range: (-4.5, 4.5),
        y_range: (-4.5, 4.5),
        quadrature: QuadratureOrders::fixed(32, 64),
        ..ScanConfig::default()
    }
}

pub fn blob_2d() -> Phantom {
    Phantom::new(Dim::Two)
        .with_support(Bounds::planar((-3.0, 3.0), (0.0, 1.0)))
        .with(Primitive::gaussian([0.0, 0.0, 0.3], 0.15, 1.0))
}

pub fn blob_3d() -> Phantom {
    Phantom::new(Dim::Three)
        .with_support(Bounds::new([-3.0, -3.0, 0.0], [3.0, 3.0, 0.9]))
        .with(Primitive::gaussian([0.0, 0.0, 0.45], 0.15, 1.0))
}
