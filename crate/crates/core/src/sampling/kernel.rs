//! Interpolation kernels built from cardinal B-splines.

use serde::{Deserialize, Serialize};

/// Cardinal B-spline of degree `n` supported on `[0, n+1]` (Cox–de Boor).
pub fn bspline(n: u32, t: f64) -> f64 {
    if t < 0.0 || t >= (n + 1) as f64 {
        return 0.0;
    }
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    (t * bspline(n - 1, t) + (nf + 1.0 - t) * bspline(n - 1, t - 1.0)) / nf
}

/// Keys cubic convolution kernel `3B₃(t+2) − (B₂(t+2) + B₂(t+1))`.
pub fn keys_kernel(t: f64) -> f64 {
    // evaluate on |t| so the kernel is even to the last bit
    let t = t.abs();
    3.0 * bspline(3, t + 2.0) - (bspline(2, t + 2.0) + bspline(2, t + 1.0))
}

/// Interpolation kernels available for upsampling and DTB prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KernelSpec {
    /// Keys cubic convolution (`a = −1/2`), support `[−2, 2]`, `C¹` with
    /// bounded second derivative.
    #[default]
    Keys,
    /// Centered hat `B₁(t+1)`, support `[−1, 1]`.
    Linear,
    /// Centered cubic B-spline `B₃(t+2)`: exact to order one but not
    /// interpolating.
    CubicBspline,
}

impl KernelSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            KernelSpec::Keys => keys_kernel(t),
            KernelSpec::Linear => bspline(1, t.abs() + 1.0),
            KernelSpec::CubicBspline => bspline(3, t.abs() + 2.0),
        }
    }

    pub fn support_radius(&self) -> f64 {
        match self {
            KernelSpec::Keys | KernelSpec::CubicBspline => 2.0,
            KernelSpec::Linear => 1.0,
        }
    }

    /// Claimed `C^k` class.
    pub fn smoothness(&self) -> u32 {
        match self {
            KernelSpec::Keys => 1,
            KernelSpec::Linear => 0,
            KernelSpec::CubicBspline => 2,
        }
    }

    /// Integer points where the kernel is only piecewise smooth.
    pub fn knots(&self) -> impl Iterator<Item = f64> {
        let r = self.support_radius() as i32;
        (-r..=r).map(f64::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn cubic_bspline_values() {
        assert!((bspline(3, 2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((bspline(3, 1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(bspline(3, 0.0), 0.0);
        assert_eq!(bspline(3, 4.0), 0.0);
        assert_eq!(bspline(2, -0.1), 0.0);
    }

    #[test]
    fn bspline_partition_of_unity() {
        for n in 0..4 {
            for k in 0..20 {
                let t = 0.05 * k as f64 + 0.013;
                let s: f64 = (-5..6).map(|j| bspline(n, t - j as f64)).sum();
                assert!((s - 1.0).abs() < 1e-14, "n = {n}, t = {t}");
            }
        }
    }

    #[test]
    fn cubic_bspline_integral() {
        let mut s = 0.0;
        for piece in 0..4 {
            s += crate::quadrature::gl4(piece as f64, piece as f64 + 1.0, |t| bspline(3, t));
        }
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn keys_node_values() {
        assert!((keys_kernel(0.0) - 1.0).abs() < 1e-15);
        for t in [-2.0, -1.0, 1.0, 2.0, 2.5, -3.0] {
            assert!(keys_kernel(t).abs() < 1e-15, "t = {t}");
        }
    }

    #[test]
    fn keys_matches_piecewise_cubic_form() {
        // Keys (1981) with a = −1/2
        let explicit = |t: f64| {
            let t = t.abs();
            if t <= 1.0 {
                1.5 * t * t * t - 2.5 * t * t + 1.0
            } else if t < 2.0 {
                -0.5 * t * t * t + 2.5 * t * t - 4.0 * t + 2.0
            } else {
                0.0
            }
        };
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..500 {
            let t: f64 = rng.gen_range(-3.0..3.0);
            assert!((keys_kernel(t) - explicit(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn keys_first_moment_at_037() {
        let s: f64 = (-4..=4).map(|j| j as f64 * keys_kernel(0.37 - j as f64)).sum();
        assert!((s - 0.37).abs() < 1e-14);
    }

    #[test]
    fn other_kernels_are_exact_to_order_one() {
        for k in [KernelSpec::Linear, KernelSpec::CubicBspline] {
            for i in 0..50 {
                let u = -2.0 + 0.0817 * i as f64;
                let s0: f64 = (-6..=6).map(|j| k.eval(u - j as f64)).sum();
                let s1: f64 = (-6..=6).map(|j| j as f64 * k.eval(u - j as f64)).sum();
                assert!((s0 - 1.0).abs() < 1e-13 && (s1 - u).abs() < 1e-13, "{k:?}");
            }
        }
    }
}
