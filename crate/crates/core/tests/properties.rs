use proptest::prelude::*;

use grt_dtb::analysis::compare;
use grt_dtb::dtb::DtbCurve;
use grt_dtb::geometry::wrap_angle;
use grt_dtb::sampling::{keys_kernel, upsample, KernelSpec, Sinogram, SinogramGrid};

fn kernel_moment(k: KernelSpec, u: f64, m: i32) -> f64 {
    (-6..=6).map(|j| f64::from(j).powi(m) * k.eval(u - f64::from(j))).sum()
}

fn ramp_curve() -> DtbCurve {
    let r_values: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.1).collect();
    let upsilon: Vec<f64> = r_values.iter().map(|r| 0.5 * (r / 2.0).tanh()).collect();
    DtbCurve {
        per_tangency: vec![upsilon.clone()],
        r_values,
        upsilon,
        tangencies: Vec::new(),
    }
}

proptest! {
    #[test]
    fn keys_reproduces_constants_and_lines(u in -3.0f64..3.0) {
        prop_assert!((kernel_moment(KernelSpec::Keys, u, 0) - 1.0).abs() < 1e-12);
        prop_assert!((kernel_moment(KernelSpec::Keys, u, 1) - u).abs() < 1e-12);
    }

    #[test]
    fn every_kernel_is_even(u in -3.0f64..3.0) {
        for k in [KernelSpec::Keys, KernelSpec::Linear, KernelSpec::CubicBspline] {
            prop_assert!((k.eval(u) - k.eval(-u)).abs() < 1e-14);
        }
        prop_assert_eq!(keys_kernel(u), KernelSpec::Keys.eval(u));
    }

    #[test]
    fn wrapped_angles_are_in_range(a in -100.0f64..100.0) {
        let w = wrap_angle(a);
        prop_assert!((0.0..std::f64::consts::TAU).contains(&w));
        let turns = (a - w) / std::f64::consts::TAU;
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn upsample_is_linear(
        g1 in prop::collection::vec(-1.0f64..1.0, 12 * 10),
        g2 in prop::collection::vec(-1.0f64..1.0, 12 * 10),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let coarse = SinogramGrid::full_scan(12, 10, -1.0, 1.0).unwrap();
        let dense = SinogramGrid::full_scan(30, 23, -1.0, 1.0).unwrap();
        let up = |v: Vec<f64>| {
            upsample(&Sinogram { grid: coarse, values: v }, KernelSpec::Keys, KernelSpec::Keys, &dense)
                .unwrap()
                .values
        };
        let mixed: Vec<f64> = g1.iter().zip(&g2).map(|(x, y)| a * x + b * y).collect();
        let lhs = up(mixed);
        let (u1, u2) = (up(g1), up(g2));
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - (a * u1[i] + b * u2[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn compare_ignores_constant_offsets(c in -5.0f64..5.0, noise in prop::collection::vec(-0.1f64..0.1, 41)) {
        let curve = ramp_curve();
        let xs: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.2).collect();
        let measured: Vec<f64> = xs.iter().zip(&noise).map(|(&x, n)| 0.3 - curve.value_at(x) + n).collect();
        let shifted: Vec<f64> = measured.iter().map(|v| v + c).collect();
        let a = compare(&xs, &measured, &curve, -1.0, (-3.0, 3.0));
        let b = compare(&xs, &shifted, &curve, -1.0, (-3.0, 3.0));
        prop_assert!((a.rms_dev - b.rms_dev).abs() < 1e-12);
        prop_assert!((a.max_abs_dev - b.max_abs_dev).abs() < 1e-12);
        prop_assert!((b.baseline - a.baseline - c).abs() < 1e-12);
    }
}
