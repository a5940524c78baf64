mod common;

use common::*;
use cstk_core::reconstruct::{normalizer_2d, normalizer_3d, relative_l2, rmse};
use cstk_core::volterra::first_j0_root;
use cstk_core::*;

#[test]
fn normalizer_examples() {
    assert_eq!(normalizer_2d(0.0, 3.0), 1.0);
    assert!(normalizer_2d(std::f64::consts::FRAC_PI_2, 2.0).abs() < 1e-16);
    assert!((normalizer_2d(0.5, 2.0) - 0.877_582_561_890_372_8).abs() < 1e-15);
    assert_eq!(normalizer_3d(0.7, 1.0), 0.0);
    assert_eq!(normalizer_3d(0.0, 2.0), 2.0);
    assert!(normalizer_3d(first_j0_root(), 2.0).abs() < 1e-13);
}

#[test]
fn zero_sinograms_give_zero_grids() {
    let cfg = small_2d();
    let band = build_stable_band(&cfg, Dim::Two, cfg.taper).unwrap();
    let sino = sinogram_2d(&Phantom::new(Dim::Two), &cfg).unwrap();
    let res = reconstruct_2d(&sino, &cfg, &band).unwrap();
    assert!(res.grid.values.iter().all(|v| *v == 0.0));
    assert!(res.grid.same_shape(&DensityGrid::zeros(Dim::Two, cfg.density_axes(Dim::Two), 2.0, 0.0)));

    let cfg = small_3d();
    let band = build_stable_band(&cfg, Dim::Three, cfg.taper).unwrap();
    let sino = sinogram_3d(&Phantom::new(Dim::Three), &cfg).unwrap();
    let res = reconstruct_3d(&sino, &cfg, &band).unwrap();
    assert!(res.grid.values.iter().all(|v| *v == 0.0));
}

#[test]
fn pipeline_is_linear() {
    let cfg = small_2d();
    let band = build_stable_band(&cfg, Dim::Two, cfg.taper).unwrap();
    let a = sinogram_2d(&gaussian_2d(0.3, 0.4, 0.15), &cfg).unwrap();
    let mut b = a.clone();
    let noise = white_noise(b.values.len(), 0.05, 3);
    b.values.iter_mut().zip(&noise).for_each(|(v, n)| *v = *n);
    let mut sum = a.clone();
    sum.values.iter_mut().zip(&b.values).for_each(|(v, w)| *v = 2.0 * *v - 0.5 * w);
    let ra = reconstruct_2d(&a, &cfg, &band).unwrap().grid;
    let rb = reconstruct_2d(&b, &cfg, &band).unwrap().grid;
    let rs = reconstruct_2d(&sum, &cfg, &band).unwrap().grid;
    let scale = max_abs(&rs.values);
    for i in 0..rs.values.len() {
        let want = 2.0 * ra.values[i] - 0.5 * rb.values[i];
        assert!((rs.values[i] - want).abs() <= 1e-8 * scale);
    }
}

#[test]
fn shifted_sinogram_shifts_reconstruction() {
    let cfg = small_2d();
    let band = build_stable_band(&cfg, Dim::Two, cfg.taper).unwrap();
    // Sinogram support |x0| < 4.4 stays inside the window after the shift.
    let sino = sinogram_2d(&gaussian_2d(0.0, 0.5, 0.1), &cfg).unwrap();
    let k = 5;
    let nx = cfg.nx;
    let mut shifted = sino.clone();
    for ir in 0..cfg.nr {
        for ix in 0..nx {
            shifted.values[ir * nx + ix] = if ix >= k { sino.values[ir * nx + ix - k] } else { 0.0 };
        }
    }
    let a = reconstruct_2d(&sino, &cfg, &band).unwrap().grid;
    let b = reconstruct_2d(&shifted, &cfg, &band).unwrap().grid;
    let scale = max_abs(&a.values);
    for iz in 0..cfg.nz {
        for ix in k..nx {
            let d = b.values[iz * nx + ix] - a.values[iz * nx + ix - k];
            assert!(d.abs() < 1e-6 * scale, "{d}");
        }
    }
}

#[test]
fn point_symmetry_survives_3d_pipeline() {
    let cfg = small_3d();
    let band = build_stable_band(&cfg, Dim::Three, cfg.taper).unwrap();
    let p = Phantom::new(Dim::Three)
        .with_support(Bounds::new([-3.0, -3.0, 0.0], [3.0, 3.0, 0.9]))
        .with(Primitive::gaussian([0.8, 0.4, 0.5], 0.25, 1.0))
        .with(Primitive::gaussian([-0.8, -0.4, 0.5], 0.25, 1.0));
    let sino = sinogram_3d(&p, &cfg).unwrap();
    let g = reconstruct_3d(&sino, &cfg, &band).unwrap().grid;
    // Cell centres are symmetric about 0 in x and y.
    let (nx, ny) = (cfg.nx, cfg.ny);
    let scale = max_abs(&g.values);
    for iz in 0..cfg.nz {
        for iy in 0..ny {
            for ix in 0..nx {
                let a = g.values[(iz * ny + iy) * nx + ix];
                let b = g.values[(iz * ny + ny - 1 - iy) * nx + nx - 1 - ix];
                assert!((a - b).abs() <= 1e-8 * scale);
            }
        }
    }
}

#[test]
fn noise_growth_stays_under_reported_bound() {
    let cfg = small_2d();
    let band = build_stable_band(&cfg, Dim::Two, cfg.taper).unwrap();
    let p = gaussian_2d(0.2, 0.35, 0.15);
    let sino = sinogram_2d(&p, &cfg).unwrap();
    let reference = sample_grid(&p, &cfg).unwrap();
    let clean = reconstruct_2d(&sino, &cfg, &band).unwrap();
    let base = metrics(&clean.grid, &reference, Some(&band)).unwrap().band_rmse.unwrap();
    let data_norm = l2(&sino.values);
    for seed in 0..5 {
        let unit = white_noise(sino.values.len(), 1.0, 100 + seed);
        let unit_norm = l2(&unit);
        let mut last = 0.0;
        for eta in [0.0025, 0.005, 0.01] {
            let mut noisy = sino.clone();
            let c = eta * data_norm / unit_norm;
            noisy.values.iter_mut().zip(&unit).for_each(|(v, n)| *v += c * n);
            let res = reconstruct_2d(&noisy, &cfg, &band).unwrap();
            let e = metrics(&res.grid, &reference, Some(&band)).unwrap().band_rmse.unwrap();
            let growth = (e - base).abs();
            let bound = clean.noise_bound(eta * data_norm);
            assert!(growth <= bound, "seed {seed} eta {eta}: {growth} > {bound}");
            last = growth;
        }
        assert!(last > 0.0);
    }
}

#[test]
fn out_of_band_columns_are_dropped_or_zero() {
    let cfg = ScanConfig {
        eps_norm: 0.5,
        ..small_2d()
    };
    let band = build_stable_band(&cfg, Dim::Two, 0.0).unwrap();
    let sino = sinogram_2d(&gaussian_2d(0.0, 0.4, 0.2), &cfg).unwrap();
    let res = reconstruct_2d(&sino, &cfg, &band).unwrap();
    assert!(res.dropped().count() > 0);
    for d in res.dropped() {
        assert!(d.normalizer_min <= 0.5);
        assert!(d.residual.is_nan());
    }
    for d in res.diagnostics.iter().filter(|d| d.retained) {
        assert!(d.normalizer_min > 0.5 && d.residual < 1e-10 && d.amplification > 0.0);
    }
}

#[test]
fn mismatched_inputs_are_rejected() {
    let cfg = small_2d();
    let sino = sinogram_2d(&gaussian_2d(0.0, 0.4, 0.2), &cfg).unwrap();
    let band = build_stable_band(&cfg, Dim::Two, cfg.taper).unwrap();
    let other = ScanConfig { nx: 32, ..cfg.clone() };
    assert!(reconstruct_2d(&sino, &other, &band).is_err());
    let padded = ScanConfig { pad_factor: 2, ..cfg.clone() };
    let band2 = build_stable_band(&padded, Dim::Two, cfg.taper).unwrap();
    assert!(reconstruct_2d(&sino, &cfg, &band2).is_err());

    let cfg3 = small_3d();
    let no_standoff = ScanConfig { delta: 0.0, ..cfg3.clone() };
    let sino3 = sinogram_3d(&gaussian_3d([0.0, 0.0, 0.4], 0.2), &cfg3).unwrap();
    let band3 = build_stable_band(&cfg3, Dim::Three, cfg3.taper).unwrap();
    assert!(matches!(reconstruct_3d(&sino3, &no_standoff, &band3), Err(Error::Validation(_))));
}

#[test]
fn metric_examples() {
    let axes = vec![Axis::new(4, 0.0, 1.0), Axis::new(4, 0.0, 1.0)];
    let zero = DensityGrid::zeros(Dim::Two, axes.clone(), 2.0, 0.0);
    let m = metrics(&zero, &zero, None).unwrap();
    assert_eq!(m.rmse, 0.0);
    assert_eq!(m.psnr, f64::MAX);
    let mut imp = zero.clone();
    imp.values[5] = 1.0;
    assert!((rmse(&imp, &zero).unwrap() - 0.25).abs() < 1e-16);
    let m = metrics(&zero, &imp, None).unwrap();
    assert!((m.psnr - 10.0 * 16f64.log10()).abs() < 1e-12);
    assert_eq!(relative_l2(&zero, &imp).unwrap(), 1.0);
    let bigger = DensityGrid::zeros(Dim::Two, vec![Axis::new(5, 0.0, 1.0), Axis::new(4, 0.0, 1.0)], 2.0, 0.0);
    assert!(metrics(&bigger, &zero, None).is_err());
}
