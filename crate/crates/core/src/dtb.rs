//! Predicted discrete transition behavior (DTB) of a reconstructed edge.
//!
//! For a tangency fan `{y_l}` at `x0` the predicted edge profile is
//!
//! ```text
//! Σ_l ν_l Υ_l(r) / Σ_l ν_l,
//! Υ_l(r) = ∫ h_l(u) ∫_{u_l}^{u_l + r} R(t) dt du,   u_l = u / |∂ₓΦ(x0, α_l)|
//! h_l(u) = ∫ φ_α(s) φ_p(μ s Φ′_α(x0, α_l) + u) ds
//! R(t)   = (1/π) ∫_0^∞ cos(λt) / (1 + c λ³) dλ,    c = κ / (2π Σ_l ν_l)
//! ```
//!
//! `R` is normalized so that `∫R = 1`. Its λ-integral is split at
//! `Λ`: Gauss–Legendre panels below, and above the leading term
//! `1/(cλ³)` integrated in closed form through the cosine integral.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Tangency;
use crate::quadrature::{cos_over_cube_tail, push_gl4_panels, sin_over_quartic_tail, GL4_NODES, GL4_WEIGHTS};
use crate::sampling::KernelSpec;

/// Bound on the neglected part of the λ-integral of `R`.
pub const LAMBDA_TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtbConfig {
    pub kappa: f64,
    pub mu: f64,
    pub kernel_alpha: KernelSpec,
    pub kernel_p: KernelSpec,
    /// Split point of the λ-integral; raised automatically if the
    /// remainder bound would exceed [`LAMBDA_TAIL_TOL`].
    pub lambda_max: f64,
    /// Panels per unit length in every quadrature.
    pub quad_points: usize,
    pub r_grid: Vec<f64>,
}

impl DtbConfig {
    pub fn new(kappa: f64, mu: f64) -> Self {
        DtbConfig {
            kappa,
            mu,
            kernel_alpha: KernelSpec::Keys,
            kernel_p: KernelSpec::Keys,
            lambda_max: 400.0,
            quad_points: 64,
            r_grid: uniform_grid(-8.0, 8.0, 0.05),
        }
    }
}

/// `[lo, hi]` with the given step, endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// `∫ φ_α(s) φ_p(slope·s + u) ds`, integrated exactly piece by piece.
pub fn transition_kernel(u: f64, slope: f64, kernel_alpha: KernelSpec, kernel_p: KernelSpec) -> f64 {
    let ra = kernel_alpha.support_radius();
    let rp = kernel_p.support_radius();
    let mut cuts: Vec<f64> = kernel_alpha.knots().collect();
    if slope != 0.0 {
        for k in kernel_p.knots() {
            let s = (k - u) / slope;
            if s > -ra && s < ra {
                cuts.push(s);
            }
        }
    } else if u.abs() >= rp {
        return 0.0;
    }
    cuts.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for q in 0..4 {
            let s = mid + half * GL4_NODES[q];
            sum += half * GL4_WEIGHTS[q] * kernel_alpha.eval(s) * kernel_p.eval(slope * s + u);
        }
    }
    sum
}

/// `h_l(u)` for one tangency.
pub fn h_l(u: f64, t: &Tangency, cfg: &DtbConfig) -> f64 {
    transition_kernel(u, cfg.mu * t.dalpha, cfg.kernel_alpha, cfg.kernel_p)
}

/// Half-width of the support of `h_l`.
pub fn h_support(slope: f64, cfg: &DtbConfig) -> f64 {
    cfg.kernel_p.support_radius() + slope.abs() * cfg.kernel_alpha.support_radius()
}

/// Quadrature nodes and weights for `∫ h(u) … du`, aligned with every
/// point where `h` changes polynomial piece.
pub fn h_quadrature_nodes(slope: f64, cfg: &DtbConfig) -> (Vec<f64>, Vec<f64>) {
    let umax = h_support(slope, cfg);
    let mut cuts = vec![-umax, umax];
    for k1 in cfg.kernel_alpha.knots() {
        for k2 in cfg.kernel_p.knots() {
            let u = k2 - slope * k1;
            if u > -umax && u < umax {
                cuts.push(u);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let (mut nodes, mut weights) = (Vec::new(), Vec::new());
    let panel = 1.0 / cfg.quad_points as f64;
    for w in cuts.windows(2) {
        push_gl4_panels(w[0], w[1], panel, &mut nodes, &mut weights);
    }
    (nodes, weights)
}

/// The kernel `R(t)` for a fixed `c = κ/(2πρ_eff)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RKernel {
    pub c: f64,
    pub lambda_split: f64,
    pub quad_points: usize,
}

impl RKernel {
    pub fn new(rho_eff: f64, kappa: f64, lambda_max: f64, quad_points: usize) -> Self {
        let c = kappa / (2.0 * PI * rho_eff);
        // ∫_Λ^∞ |R̃ − 1/(cλ³)| dλ ≤ 1/(5c²Λ⁵)
        let needed = (1.0 / (5.0 * c * c * LAMBDA_TAIL_TOL)).powf(0.2);
        RKernel {
            c,
            lambda_split: lambda_max.max(needed),
            quad_points,
        }
    }

    /// Bound on the error left by replacing `R̃` with `1/(cλ³)` past the split.
    pub fn tail_bound(&self) -> f64 {
        1.0 / (5.0 * self.c * self.c * self.lambda_split.powi(5))
    }

    pub fn symbol(&self, lambda: f64) -> f64 {
        1.0 / (1.0 + self.c * lambda.abs().powi(3))
    }

    fn panel_for(&self, t_abs: f64) -> f64 {
        let p = 1.0 / self.quad_points as f64;
        if t_abs > 0.0 {
            p.min(PI / (4.0 * t_abs))
        } else {
            p
        }
    }

    fn tail_cos(&self, t: f64) -> f64 {
        let t = t.abs();
        let a = self.lambda_split * t;
        if a == 0.0 {
            1.0 / (2.0 * self.c * self.lambda_split * self.lambda_split)
        } else {
            t * t * cos_over_cube_tail(a) / self.c
        }
    }

    fn tail_sin_over_lambda(&self, t: f64) -> f64 {
        let a = self.lambda_split * t.abs();
        if a == 0.0 {
            0.0
        } else {
            t.signum() * t.abs().powi(3) * sin_over_quartic_tail(a) / self.c
        }
    }

    /// `R(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        let mut nodes = Vec::new();
        let mut w = Vec::new();
        push_gl4_panels(0.0, self.lambda_split, self.panel_for(t.abs()), &mut nodes, &mut w);
        let body: f64 = nodes
            .iter()
            .zip(&w)
            .map(|(&l, &wt)| wt * self.symbol(l) * (l * t).cos())
            .sum();
        (body + self.tail_cos(t)) / PI
    }

    /// `∫_0^t R`.
    pub fn cumulative(&self, t: f64) -> f64 {
        let mut nodes = Vec::new();
        let mut w = Vec::new();
        push_gl4_panels(0.0, self.lambda_split, self.panel_for(t.abs()), &mut nodes, &mut w);
        let body: f64 = nodes
            .iter()
            .zip(&w)
            .map(|(&l, &wt)| wt * self.symbol(l) * (l * t).sin() / l)
            .sum();
        (body + self.tail_sin_over_lambda(t)) / PI
    }

    /// `R` and `∫_0^t R` on `t_m = m/quad_points`, `0 ≤ t_m ≤ t_max`.
    pub fn table(&self, t_max: f64) -> RTable {
        let h = 1.0 / self.quad_points as f64;
        let m = (t_max / h).ceil() as usize + 1;
        let t_top = (m - 1) as f64 * h;
        let mut nodes = Vec::new();
        let mut w = Vec::new();
        push_gl4_panels(0.0, self.lambda_split, self.panel_for(t_top), &mut nodes, &mut w);

        // Each λ node contributes along t by a rotation recurrence.
        let chunk = 4096;
        let partial: Vec<(Vec<f64>, Vec<f64>)> = nodes
            .par_chunks(chunk)
            .zip(w.par_chunks(chunk))
            .map(|(ls, ws)| {
                let mut r = vec![0.0; m];
                let mut cum = vec![0.0; m];
                for (&l, &wt) in ls.iter().zip(ws) {
                    let a = wt * self.symbol(l);
                    let b = a / l;
                    let rot = Complex64::from_polar(1.0, l * h);
                    let mut z = Complex64::new(1.0, 0.0);
                    for i in 0..m {
                        r[i] += a * z.re;
                        cum[i] += b * z.im;
                        z *= rot;
                    }
                }
                (r, cum)
            })
            .collect();
        let mut r = vec![0.0; m];
        let mut cum = vec![0.0; m];
        for (pr, pc) in &partial {
            for i in 0..m {
                r[i] += pr[i];
                cum[i] += pc[i];
            }
        }
        for i in 0..m {
            let t = i as f64 * h;
            r[i] = (r[i] + self.tail_cos(t)) / PI;
            cum[i] = (cum[i] + self.tail_sin_over_lambda(t)) / PI;
        }
        RTable { h, r, cum }
    }
}

/// `R(t)` with the default quadrature settings.
pub fn r_kernel(t: f64, rho_eff: f64, kappa: f64) -> f64 {
    RKernel::new(rho_eff, kappa, 400.0, 64).eval(t)
}

/// Tabulated `R` and its primitive on `t ≥ 0`; extended to `t < 0` by
/// evenness of `R`.
#[derive(Debug, Clone)]
pub struct RTable {
    pub h: f64,
    pub r: Vec<f64>,
    pub cum: Vec<f64>,
}

impl RTable {
    pub fn t_max(&self) -> f64 {
        (self.r.len() - 1) as f64 * self.h
    }

    /// `∫_0^t R` by cubic Hermite interpolation (`C′ = R` at the nodes).
    pub fn cumulative(&self, t: f64) -> f64 {
        let ta = t.abs();
        let x = ta / self.h;
        let last = self.r.len() - 1;
        let v = if x >= last as f64 {
            self.cum[last]
        } else {
            let i = x as usize;
            let s = x - i as f64;
            let (c0, c1) = (self.cum[i], self.cum[i + 1]);
            let (d0, d1) = (self.r[i] * self.h, self.r[i + 1] * self.h);
            let s2 = s * s;
            let s3 = s2 * s;
            (2.0 * s3 - 3.0 * s2 + 1.0) * c0
                + (s3 - 2.0 * s2 + s) * d0
                + (-2.0 * s3 + 3.0 * s2) * c1
                + (s3 - s2) * d1
        };
        if t < 0.0 {
            -v
        } else {
            v
        }
    }
}

/// Per-tangency data entering the combined curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencySummary {
    pub alpha: f64,
    pub p: f64,
    pub nu: f64,
    pub grad_norm: f64,
    pub dalpha: f64,
}

impl From<&Tangency> for TangencySummary {
    fn from(t: &Tangency) -> Self {
        TangencySummary {
            alpha: t.alpha,
            p: t.p,
            nu: t.nu,
            grad_norm: t.grad_norm,
            dalpha: t.dalpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtbCurve {
    pub r_values: Vec<f64>,
    pub upsilon: Vec<f64>,
    /// `Υ_l` on `r_values`, one vector per tangency.
    pub per_tangency: Vec<Vec<f64>>,
    pub tangencies: Vec<TangencySummary>,
}

impl DtbCurve {
    /// Linear interpolation in `r`; clamps outside the sampled range.
    pub fn value_at(&self, r: f64) -> f64 {
        let xs = &self.r_values;
        if r <= xs[0] {
            return self.upsilon[0];
        }
        if r >= xs[xs.len() - 1] {
            return self.upsilon[xs.len() - 1];
        }
        let i = xs.partition_point(|&x| x <= r) - 1;
        let s = (r - xs[i]) / (xs[i + 1] - xs[i]);
        self.upsilon[i] * (1.0 - s) + self.upsilon[i + 1] * s
    }
}

struct Term {
    nu: f64,
    inv_grad: f64,
    nodes: Vec<f64>,
    weighted_h: Vec<f64>,
}

/// Precomputed predictor for one tangency fan.
pub struct DtbPredictor {
    terms: Vec<Term>,
    fan: Vec<Tangency>,
    kernel: RKernel,
    table: RTable,
}

impl DtbPredictor {
    /// Builds a predictor valid for `|r| ≤ r_extent`, with `ρ_eff = Σν_l`.
    pub fn new(fan: &[Tangency], cfg: &DtbConfig, r_extent: f64) -> Result<Self> {
        let rho_eff: f64 = fan.iter().map(|t| t.nu).sum();
        Self::with_rho(fan, cfg, r_extent, rho_eff)
    }

    /// As [`DtbPredictor::new`] with an explicit `ρ_eff`.
    pub fn with_rho(fan: &[Tangency], cfg: &DtbConfig, r_extent: f64, rho_eff: f64) -> Result<Self> {
        if fan.is_empty() {
            return Err(Error::EmptyFan);
        }
        if !(rho_eff > 0.0) {
            return Err(Error::config("dtb", "ρ_eff must be positive"));
        }
        let kernel = RKernel::new(rho_eff, cfg.kappa, cfg.lambda_max, cfg.quad_points);
        let mut terms = Vec::with_capacity(fan.len());
        let mut t_need: f64 = 0.0;
        for t in fan {
            let slope = cfg.mu * t.dalpha;
            let (nodes, weights) = h_quadrature_nodes(slope, cfg);
            let weighted_h = nodes
                .iter()
                .zip(&weights)
                .map(|(&u, &w)| w * transition_kernel(u, slope, cfg.kernel_alpha, cfg.kernel_p))
                .collect();
            let inv_grad = 1.0 / t.grad_norm;
            t_need = t_need.max(h_support(slope, cfg) * inv_grad);
            terms.push(Term {
                nu: t.nu,
                inv_grad,
                nodes,
                weighted_h,
            });
        }
        let table = kernel.table(r_extent.abs() + t_need + 1.0);
        Ok(DtbPredictor {
            terms,
            fan: fan.to_vec(),
            kernel,
            table,
        })
    }

    pub fn kernel(&self) -> &RKernel {
        &self.kernel
    }

    pub fn table(&self) -> &RTable {
        &self.table
    }

    pub fn fan(&self) -> &[Tangency] {
        &self.fan
    }

    /// `Υ_l(r)`.
    pub fn upsilon_l(&self, l: usize, r: f64) -> f64 {
        let term = &self.terms[l];
        let mut s = 0.0;
        for (&u, &wh) in term.nodes.iter().zip(&term.weighted_h) {
            let ul = u * term.inv_grad;
            s += wh * (self.table.cumulative(ul + r) - self.table.cumulative(ul));
        }
        s
    }

    /// `Σ ν_l Υ_l(r) / Σ ν_l`.
    pub fn combined(&self, r: f64) -> f64 {
        let total: f64 = self.terms.iter().map(|t| t.nu).sum();
        (0..self.terms.len())
            .map(|l| self.terms[l].nu * self.upsilon_l(l, r))
            .sum::<f64>()
            / total
    }

    pub fn curve(&self, r_values: &[f64]) -> DtbCurve {
        let per_tangency: Vec<Vec<f64>> = (0..self.terms.len())
            .map(|l| r_values.par_iter().map(|&r| self.upsilon_l(l, r)).collect())
            .collect();
        let total: f64 = self.terms.iter().map(|t| t.nu).sum();
        let upsilon = (0..r_values.len())
            .map(|i| {
                self.terms
                    .iter()
                    .zip(&per_tangency)
                    .map(|(t, v)| t.nu * v[i])
                    .sum::<f64>()
                    / total
            })
            .collect();
        DtbCurve {
            r_values: r_values.to_vec(),
            upsilon,
            per_tangency,
            tangencies: self.fan.iter().map(TangencySummary::from).collect(),
        }
    }
}

/// `Υ_l(r)` for a single tangency with an explicit `ρ_eff`.
pub fn upsilon_l(r: f64, t: &Tangency, rho_eff: f64, cfg: &DtbConfig) -> Result<f64> {
    Ok(DtbPredictor::with_rho(std::slice::from_ref(t), cfg, r.abs(), rho_eff)?.upsilon_l(0, r))
}

/// The ν-weighted transition curve of a fan on `cfg.r_grid`.
pub fn combined_dtb(fan: &[Tangency], cfg: &DtbConfig) -> Result<DtbCurve> {
    let extent = cfg.r_grid.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    Ok(DtbPredictor::new(fan, cfg, extent)?.curve(&cfg.r_grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    fn tangency(dalpha: f64, nu: f64, grad_norm: f64) -> Tangency {
        Tangency {
            alpha: 0.0,
            p: 0.0,
            theta: Vec2::new(1.0, 0.0),
            orientation: 1.0,
            grad_norm,
            dalpha,
            delta_phi: grad_norm / nu,
            nu,
        }
    }

    #[test]
    fn zero_slope_reduces_to_kernel() {
        for &u in &[-1.7, -0.4, 0.0, 0.25, 1.3] {
            let h = transition_kernel(u, 0.0, KernelSpec::Keys, KernelSpec::Keys);
            assert!((h - KernelSpec::Keys.eval(u)).abs() < 1e-14);
        }
    }

    #[test]
    fn h_is_even_and_normalized() {
        let cfg = DtbConfig::new(0.5, 0.9006);
        for &a in &[0.0, 0.3, 1.7, -2.9] {
            let slope = cfg.mu * a;
            for &u in &[0.1, 0.77, 1.9] {
                let p = transition_kernel(u, slope, cfg.kernel_alpha, cfg.kernel_p);
                let m = transition_kernel(-u, slope, cfg.kernel_alpha, cfg.kernel_p);
                assert!((p - m).abs() < 1e-14);
            }
            let (nodes, w) = h_quadrature_nodes(slope, &cfg);
            let total: f64 = nodes
                .iter()
                .zip(&w)
                .map(|(&u, &w)| w * transition_kernel(u, slope, cfg.kernel_alpha, cfg.kernel_p))
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "slope {slope}: {total}");
        }
    }

    #[test]
    fn r_kernel_even_and_table_consistent() {
        let k = RKernel::new(2.0, 0.5, 400.0, 64);
        for &t in &[0.0, 0.3, 1.1, 4.0] {
            assert!((k.eval(t) - k.eval(-t)).abs() < 1e-12);
        }
        let tab = k.table(3.0);
        for &i in &[0usize, 5, 64, 150] {
            let t = i as f64 * tab.h;
            assert!((tab.r[i] - k.eval(t)).abs() < 1e-10, "t = {t}");
            assert!((tab.cum[i] - k.cumulative(t)).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn lambda_split_grows_for_small_kappa() {
        let k = RKernel::new(1.0, 0.005, 400.0, 64);
        assert!(k.tail_bound() <= LAMBDA_TAIL_TOL * (1.0 + 1e-12));
        let k = RKernel::new(2.0, 0.5, 400.0, 64);
        assert_eq!(k.lambda_split, 400.0);
    }

    #[test]
    fn upsilon_vanishes_at_zero() {
        let cfg = DtbConfig::new(0.5, 0.9);
        let t = tangency(1.3, 1.0, 1.0);
        let pred = DtbPredictor::new(&[t], &cfg, 2.0).unwrap();
        assert_eq!(pred.upsilon_l(0, 0.0), 0.0);
    }

    #[test]
    fn empty_fan_is_an_error() {
        let cfg = DtbConfig::new(0.5, 0.9);
        assert!(matches!(combined_dtb(&[], &cfg), Err(Error::EmptyFan)));
    }

    #[test]
    fn curve_interpolation() {
        let c = DtbCurve {
            r_values: vec![-1.0, 0.0, 1.0],
            upsilon: vec![-0.4, 0.0, 0.4],
            per_tangency: vec![],
            tangencies: vec![],
        };
        assert!((c.value_at(0.5) - 0.2).abs() < 1e-15);
        assert_eq!(c.value_at(3.0), 0.4);
    }
}
