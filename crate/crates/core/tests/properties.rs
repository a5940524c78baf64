use std::sync::Arc;

use cstk_core::geometry::{arc_measure, toric_branch_x};
use cstk_core::io::{format_config, parse_config, read_dataset, write_dataset, Dataset};
use cstk_core::spectral::{reflect_z, taper_weight, PlaneTransform};
use cstk_core::volterra::{kernel_2d, solve_second_kind};
use cstk_core::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn branches_lie_on_their_circles(r in 1.0001f64..4.0, t in 0.0f64..1.0, j in 0usize..4) {
        let z = (2.0 - r) + t * (r - 1.0);
        let b = Branch::ALL[j];
        let x = toric_branch_x(r, z, b).unwrap();
        let (sr, _) = b.signs();
        let cx = sr * (r * r - 1.0).sqrt();
        let d2 = (x - cx).powi(2) + (z - 2.0).powi(2);
        prop_assert!((d2 - r * r).abs() < 1e-11 * r * r);
        prop_assert!(arc_measure(r, z.min(1.0 - 1e-12)).unwrap() >= 1.0);
    }

    #[test]
    fn k2_stays_within_half_pi(s in 1.0f64..16.0, t in 0.0f64..1.0, w in -80.0f64..80.0) {
        let z = t * s;
        prop_assert!(kernel_2d(s, z, w).unwrap().abs() <= std::f64::consts::FRAC_PI_2 + 1e-12);
    }

    #[test]
    fn volterra_solution_has_small_residual(
        lambda in -1.0f64..1.0,
        a in -0.5f64..0.5,
        c in 0.1f64..3.0,
        n in 16usize..200,
    ) {
        let axis = Axis::nodes(1.0, 4.0, n);
        let k = Arc::new(KernelTable::from_fn(axis, |s, z| (c * (s - z)).cos() + a * z));
        let g: Vec<f64> = axis.coords().map(|s| (s * c).sin() + a).collect();
        let sys = VolterraSystem::new(lambda, k, g).unwrap();
        let f = solve_second_kind(&sys).unwrap();
        prop_assert!(sys.residual(&f) < 1e-12);
    }

    #[test]
    fn dft_round_trip(values in prop::collection::vec(-10.0f64..10.0, 2..300), dx in 0.01f64..2.0, pad in 1usize..5) {
        let axis = Axis::new(values.len(), -3.0, dx);
        let t = PlaneTransform::new(&[axis], pad).unwrap();
        let back = t.inverse(&t.forward_real(&values));
        let scale = values.iter().fold(1e-300_f64, |m, v| m.max(v.abs()));
        for (a, b) in values.iter().zip(&back) {
            prop_assert!((a - b.re).abs() <= 1e-12 * scale && b.im.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn reflection_is_an_involution(nx in 2usize..8, nz in 2usize..8, seed in any::<u64>()) {
        let cfg = ScanConfig { nx, nz, ..ScanConfig::default() };
        let axes = cfg.density_axes(Dim::Two);
        let values: Vec<f64> = (0..nx * nz).map(|i| ((i as u64 ^ seed) % 97) as f64).collect();
        let g = DensityGrid::new(Dim::Two, axes, values, cfg.r_m, cfg.delta).unwrap();
        let once = reflect_z(&g);
        prop_assert!((once.z_axis().origin - (2.0 - g.z_axis().last())).abs() < 1e-12);
        let twice = reflect_z(&once);
        prop_assert_eq!(&twice.values, &g.values);
        prop_assert!(twice.z_axis().matches(g.z_axis(), 1e-12));
    }

    #[test]
    fn taper_is_monotone(a in 0.0f64..3.0, b in 0.0f64..3.0, om in 0.1f64..2.0, tau in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (wl, wh) = (taper_weight(lo, om, tau), taper_weight(hi, om, tau));
        prop_assert!(wh <= wl && (0.0..=1.0).contains(&wh));
    }

    #[test]
    fn larger_depth_narrows_band(r1 in 1.01f64..5.0, r2 in 1.01f64..5.0) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        for mode in [BandMode::TwoD, BandMode::ThreeD] {
            prop_assert!(stable_band_limit(hi, mode).unwrap() <= stable_band_limit(lo, mode).unwrap());
        }
    }

    #[test]
    fn phantom_evaluation_is_linear(
        cx in -2.0f64..2.0, cz in 0.0f64..1.0, s in 0.05f64..0.5,
        k in -3.0f64..3.0, px in -2.0f64..2.0, pz in 0.0f64..1.0,
    ) {
        let a = Phantom::new(Dim::Two).with(Primitive::gaussian([cx, 0.0, cz], s, 1.0));
        let b = Phantom::new(Dim::Two).with(Primitive::cuboid([0.0, 0.0, 0.5], [1.0, 1.0, 0.4], 2.0));
        let sum = a.scaled(k).combined(&b);
        let p = [px, 0.0, pz];
        prop_assert!((sum.eval(p) - (k * a.eval(p) + b.eval(p))).abs() < 1e-12);
    }

    #[test]
    fn datasets_round_trip(nx in 1usize..6, nr in 1usize..6, seed in any::<u64>()) {
        let values: Vec<f64> = (0..nx * nr).map(|i| f64::from_bits(seed.rotate_left(i as u32) & 0x7fef_ffff_ffff_ffff)).collect();
        let sino = Sinogram2D::new(Axis::new(nx, -1.0, 0.25), Axis::new(nr, 1.0, 0.1), values, 2.0, 0.0).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &Dataset::Sinogram2D(sino.clone())).unwrap();
        match read_dataset(buf.as_slice()).unwrap() {
            Dataset::Sinogram2D(back) => prop_assert_eq!(back, sino),
            other => prop_assert!(false, "wrong kind {:?}", other.kind()),
        }
    }

    #[test]
    fn configs_round_trip(r_m in 1.1f64..4.0, nx in 2usize..512, taper in 0.0f64..1.0, pad in 1usize..8) {
        let cfg = ScanConfig { r_m, nx, taper, pad_factor: pad, ..ScanConfig::default() };
        prop_assert_eq!(parse_config(&format_config(&cfg)).unwrap(), cfg);
    }
}
