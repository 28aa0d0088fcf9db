//! Edge profiles of a reconstruction and their comparison with the
//! predicted transition curve.

use crate::dtb::DtbCurve;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::recon::Image;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReport {
    /// Signed distance from `x0` along `Θ₀`, in units of `ε`.
    pub x_check: Vec<f64>,
    pub measured: Vec<f64>,
    pub predicted: Vec<f64>,
    /// Measured value at `x̌ = 0`.
    pub baseline: f64,
    pub delta_f: f64,
    pub window: (f64, f64),
    pub max_abs_dev: f64,
    pub rms_dev: f64,
}

impl ProfileReport {
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("baseline", format!("{:.12e}", self.baseline)),
            ("delta_f", format!("{:.12e}", self.delta_f)),
            ("window_lo", format!("{}", self.window.0)),
            ("window_hi", format!("{}", self.window.1)),
            ("max_abs_dev", format!("{:.12e}", self.max_abs_dev)),
            ("rms_dev", format!("{:.12e}", self.rms_dev)),
            ("max_abs_dev_rel", format!("{:.12e}", self.max_abs_dev / self.delta_f.abs())),
            ("rms_dev_rel", format!("{:.12e}", self.rms_dev / self.delta_f.abs())),
        ]
    }

    pub fn summary(&self) -> String {
        format!(
            "profile comparison over x̌ ∈ [{}, {}]\n  baseline f(x0) = {:.6}\n  Δf            = {:.6}\n  max |dev|     = {:.6} ({:.4} |Δf|)\n  rms dev       = {:.6} ({:.4} |Δf|)\n",
            self.window.0,
            self.window.1,
            self.baseline,
            self.delta_f,
            self.max_abs_dev,
            self.max_abs_dev / self.delta_f.abs(),
            self.rms_dev,
            self.rms_dev / self.delta_f.abs(),
        )
    }
}

/// Bilinear samples of `img` at `x0 + ε x̌ Θ₀`.
pub fn extract_profile(img: &Image, x0: Vec2, theta0: Vec2, epsilon: f64, x_check: &[f64]) -> Result<Vec<f64>> {
    x_check
        .iter()
        .map(|&s| {
            let p = x0 + theta0 * (epsilon * s);
            img.sample(p).ok_or(Error::OutOfGrid { x: p.x, y: p.y })
        })
        .collect()
}

/// Samples of `img` at `n` equispaced points from `a` to `b`, as
/// `(arc length, value)`; points outside the grid are skipped.
pub fn line_profile(img: &Image, a: Vec2, b: Vec2, n: usize) -> Vec<(f64, f64)> {
    let len = (b - a).norm();
    (0..n)
        .filter_map(|i| {
            let s = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let p = a + (b - a) * s;
            img.sample(p).map(|v| (s * len, v))
        })
        .collect()
}

fn value_at_zero(x_check: &[f64], measured: &[f64]) -> f64 {
    if let Some(i) = x_check.iter().position(|&x| x == 0.0) {
        return measured[i];
    }
    let i = x_check.partition_point(|&x| x < 0.0);
    if i == 0 {
        return measured[0];
    }
    if i == x_check.len() {
        return measured[i - 1];
    }
    let s = -x_check[i - 1] / (x_check[i] - x_check[i - 1]);
    measured[i - 1] * (1.0 - s) + measured[i] * s
}

/// Aligns `baseline + Δf·Υ(x̌)` with the measured profile and reports the
/// deviation over `window`.
pub fn compare(
    x_check: &[f64],
    measured: &[f64],
    curve: &DtbCurve,
    delta_f: f64,
    window: (f64, f64),
) -> ProfileReport {
    assert_eq!(x_check.len(), measured.len(), "profile length mismatch");
    let baseline = value_at_zero(x_check, measured);
    let predicted: Vec<f64> = x_check
        .iter()
        .map(|&x| if x == 0.0 { baseline } else { baseline + delta_f * curve.value_at(x) })
        .collect();
    let (mut max_abs, mut sq, mut n) = (0.0_f64, 0.0, 0usize);
    for i in 0..x_check.len() {
        if x_check[i] >= window.0 && x_check[i] <= window.1 {
            let d = measured[i] - predicted[i];
            max_abs = max_abs.max(d.abs());
            sq += d * d;
            n += 1;
        }
    }
    ProfileReport {
        x_check: x_check.to_vec(),
        measured: measured.to_vec(),
        predicted,
        baseline,
        delta_f,
        window,
        max_abs_dev: max_abs,
        rms_dev: if n > 0 { (sq / n as f64).sqrt() } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtb::uniform_grid;
    use crate::recon::ImageGrid;

    fn tanh_curve() -> DtbCurve {
        let r_values = uniform_grid(-8.0, 8.0, 0.05);
        let upsilon = r_values.iter().map(|r| 0.5 * (r * 0.8_f64).tanh()).collect();
        DtbCurve {
            r_values,
            upsilon,
            per_tangency: vec![],
            tangencies: vec![],
        }
    }

    #[test]
    fn exact_match_gives_zero_metrics() {
        let curve = tanh_curve();
        let xs = uniform_grid(-6.0, 6.0, 0.25);
        let measured: Vec<f64> = xs.iter().map(|&x| 0.4 - curve.value_at(x)).collect();
        let rep = compare(&xs, &measured, &curve, -1.0, (-6.0, 6.0));
        assert!(rep.max_abs_dev < 1e-15);
        assert_eq!(rep.predicted[24], rep.baseline);
    }

    #[test]
    fn translation_changes_only_baseline() {
        let curve = tanh_curve();
        let xs = uniform_grid(-6.0, 6.0, 0.5);
        let measured: Vec<f64> = xs.iter().map(|&x| (x * 0.3).sin()).collect();
        let shifted: Vec<f64> = measured.iter().map(|m| m + 3.0).collect();
        let a = compare(&xs, &measured, &curve, -1.0, (-5.0, 5.0));
        let b = compare(&xs, &shifted, &curve, -1.0, (-5.0, 5.0));
        assert!((b.baseline - a.baseline - 3.0).abs() < 1e-15);
        assert!((a.rms_dev - b.rms_dev).abs() < 1e-14);
        assert!((a.max_abs_dev - b.max_abs_dev).abs() < 1e-14);
    }

    #[test]
    fn window_at_zero_only() {
        let curve = tanh_curve();
        let rep = compare(&[0.0], &[0.7], &curve, -1.0, (0.0, 0.0));
        assert_eq!((rep.rms_dev, rep.max_abs_dev), (0.0, 0.0));
    }

    #[test]
    fn constant_image_and_out_of_grid() {
        let g = ImageGrid::square(21, 1.0);
        let mut img = Image::zeros(g);
        img.values.iter_mut().for_each(|v| *v = 2.5);
        let xs = [-2.0, 0.0, 3.0];
        let prof = extract_profile(&img, Vec2::new(0.1, 0.2), Vec2::new(0.6, 0.8), 0.1, &xs).unwrap();
        assert!(prof.iter().all(|&v| (v - 2.5).abs() < 1e-14));
        let err = extract_profile(&img, Vec2::new(0.9, 0.0), Vec2::new(1.0, 0.0), 0.1, &xs);
        assert!(matches!(err, Err(Error::OutOfGrid { .. })));
    }
}
