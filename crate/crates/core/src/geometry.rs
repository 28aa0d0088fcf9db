//! GRT models, differential quantities and tangency fans.
//!
//! A model integrates over the level curves `S_(α,p) = {x : Φ(x,α) = p}`
//! with weight `W`. The angle `α` lives on the circle `[0, 2π)`.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use log::warn;

use crate::error::{Error, Result};
use crate::phantom::Phantom;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector `(cos a, sin a)`.
    pub fn polar(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Vec2::new(c, s)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// `det [self; o]`
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise rotation by π/2: `(x, y) -> (-y, x)`.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Vec2 {
        self * (1.0 / self.norm())
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// Axis-aligned closed rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn square(half_width: f64) -> Self {
        Rect {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Continuous function that is negative inside, positive outside.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        let dx = (self.x_min - p.x).max(p.x - self.x_max);
        let dy = (self.y_min - p.y).max(p.y - self.y_max);
        dx.max(dy)
    }

    pub fn diagonal(&self) -> f64 {
        (self.x_max - self.x_min).hypot(self.y_max - self.y_min)
    }
}

/// An integration curve with an explicit parameterization.
///
/// Circles are parameterized by the polar angle `θ` around the center
/// (arc length `radius·dθ`), lines by the signed arc length `s` from the
/// foot point along `dir`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Circle { center: Vec2, radius: f64 },
    Line { point: Vec2, dir: Vec2 },
}

impl Curve {
    pub fn point_at(&self, t: f64) -> Vec2 {
        match *self {
            Curve::Circle { center, radius } => center + Vec2::polar(t) * radius,
            Curve::Line { point, dir } => point + dir * t,
        }
    }

    /// Arc length per unit parameter.
    pub fn speed(&self) -> f64 {
        match *self {
            Curve::Circle { radius, .. } => radius,
            Curve::Line { .. } => 1.0,
        }
    }

    /// Parameter intervals `(t0, t1)`, `t0 < t1`, on which the curve lies
    /// inside `rect`. Circle intervals may extend past `2π`.
    pub fn intervals_in_rect(&self, rect: &Rect) -> Vec<(f64, f64)> {
        match *self {
            Curve::Line { point, dir } => {
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for (p, d, a, b) in [
                    (point.x, dir.x, rect.x_min, rect.x_max),
                    (point.y, dir.y, rect.y_min, rect.y_max),
                ] {
                    if d.abs() < 1e-300 {
                        if p < a || p > b {
                            return Vec::new();
                        }
                    } else {
                        let (t0, t1) = ((a - p) / d, (b - p) / d);
                        lo = lo.max(t0.min(t1));
                        hi = hi.min(t0.max(t1));
                    }
                }
                if hi > lo {
                    vec![(lo, hi)]
                } else {
                    Vec::new()
                }
            }
            Curve::Circle { center, radius } => {
                let mut cuts: Vec<f64> = Vec::with_capacity(8);
                // vertical edges: cx + ρ cos θ = x_e, θ = ±acos(·)
                for xe in [rect.x_min, rect.x_max] {
                    let c = (xe - center.x) / radius;
                    if c.abs() <= 1.0 {
                        let a = c.acos();
                        for theta in [a, -a] {
                            let y = center.y + radius * theta.sin();
                            if y >= rect.y_min - 1e-12 && y <= rect.y_max + 1e-12 {
                                cuts.push(wrap_angle(theta));
                            }
                        }
                    }
                }
                // horizontal edges: cy + ρ sin θ = y_e, θ = asin(·) or π − asin(·)
                for ye in [rect.y_min, rect.y_max] {
                    let s = (ye - center.y) / radius;
                    if s.abs() <= 1.0 {
                        let a = s.asin();
                        for theta in [a, PI - a] {
                            let x = center.x + radius * theta.cos();
                            if x >= rect.x_min - 1e-12 && x <= rect.x_max + 1e-12 {
                                cuts.push(wrap_angle(theta));
                            }
                        }
                    }
                }
                arcs_from_cuts(cuts, |theta| {
                    rect.signed_distance(center + Vec2::polar(theta) * radius) <= 0.0
                })
            }
        }
    }

    /// Parameter intervals on which the curve lies inside the closed disk.
    pub fn intervals_in_disk(&self, disk_center: Vec2, disk_radius: f64) -> Vec<(f64, f64)> {
        match *self {
            Curve::Line { point, dir } => {
                let s0 = (disk_center - point).dot(dir);
                let foot = point + dir * s0;
                let d2 = (disk_center - foot).dot(disk_center - foot);
                let h2 = disk_radius * disk_radius - d2;
                if h2 <= 0.0 {
                    Vec::new()
                } else {
                    let h = h2.sqrt();
                    vec![(s0 - h, s0 + h)]
                }
            }
            Curve::Circle { center, radius } => {
                let d = (disk_center - center).norm();
                if d + radius <= disk_radius {
                    return vec![(0.0, TAU)];
                }
                if d >= radius + disk_radius || d + disk_radius <= radius {
                    return Vec::new();
                }
                let phi = (disk_center - center).angle();
                let c = ((radius * radius + d * d - disk_radius * disk_radius) / (2.0 * radius * d))
                    .clamp(-1.0, 1.0);
                let gamma = c.acos();
                vec![(phi - gamma, phi + gamma)]
            }
        }
    }
}

/// Builds arcs from sorted cut angles by testing each arc's midpoint.
fn arcs_from_cuts(mut cuts: Vec<f64>, inside: impl Fn(f64) -> bool) -> Vec<(f64, f64)> {
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    if cuts.is_empty() {
        return if inside(0.0) { vec![(0.0, TAU)] } else { Vec::new() };
    }
    let n = cuts.len();
    let mut arcs: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let a = cuts[i];
        let b = if i + 1 < n { cuts[i + 1] } else { cuts[0] + TAU };
        if b - a <= 1e-14 {
            continue;
        }
        if inside(0.5 * (a + b)) {
            match arcs.last_mut() {
                Some(last) if (last.1 - a).abs() < 1e-14 => last.1 = b,
                _ => arcs.push((a, b)),
            }
        }
    }
    // join the wrap-around piece with the first one
    if arcs.len() > 1 {
        let first = arcs[0];
        let last = *arcs.last().unwrap();
        if (last.1 - (first.0 + TAU)).abs() < 1e-14 {
            arcs.pop();
            arcs[0] = (last.0 - TAU, first.1);
        }
    }
    arcs
}

/// A family of integration curves `{x : Φ(x,α) = p}` with weight `W`.
///
/// Implementations supply `Φ` and its analytic first derivatives. Second
/// derivatives are taken numerically where needed.
pub trait GrtModel: Sync {
    fn phi(&self, x: Vec2, alpha: f64) -> f64;
    fn weight(&self, x: Vec2, alpha: f64, p: f64) -> f64;
    fn grad_x_phi(&self, x: Vec2, alpha: f64) -> Vec2;
    fn dalpha_phi(&self, x: Vec2, alpha: f64) -> f64;
    fn grad_x_dalpha_phi(&self, x: Vec2, alpha: f64) -> Vec2;

    /// Open interval of admissible `p`.
    fn p_domain(&self) -> (f64, f64);

    /// The curve `S_(α,p)`, or `None` if it is empty.
    fn curve(&self, alpha: f64, p: f64) -> Option<Curve>;

    /// Whether `W ≡ 1`, letting projectors skip weight evaluation.
    fn has_unit_weight(&self) -> bool {
        false
    }

    /// Whether a quarter turn of `x` is undone by `α ↦ α + π/2`, for both
    /// `Φ` and `W`.
    fn quarter_turn_symmetric(&self) -> bool {
        false
    }

    /// Closed-form tangency angles at `x0` for a boundary with unit normal
    /// `normal`, when the model admits one.
    fn tangency_angles(&self, _x0: Vec2, _normal: Vec2) -> Option<Vec<f64>> {
        None
    }
}

/// Circles of radius `ρ = p` centered at `R·(cos α, sin α)`; `W ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularGrt {
    pub radius: f64,
}

impl CircularGrt {
    pub fn new(radius: f64) -> Self {
        CircularGrt { radius }
    }

    pub fn center(&self, alpha: f64) -> Vec2 {
        Vec2::polar(alpha) * self.radius
    }
}

impl GrtModel for CircularGrt {
    fn phi(&self, x: Vec2, alpha: f64) -> f64 {
        (x - self.center(alpha)).norm()
    }

    fn weight(&self, _x: Vec2, _alpha: f64, _p: f64) -> f64 {
        1.0
    }

    fn grad_x_phi(&self, x: Vec2, alpha: f64) -> Vec2 {
        (x - self.center(alpha)).normalized()
    }

    // d/dα |x − Rα⃗| = −R Θ·α⃗⊥
    fn dalpha_phi(&self, x: Vec2, alpha: f64) -> f64 {
        let theta = self.grad_x_phi(x, alpha);
        -self.radius * theta.dot(Vec2::polar(alpha).perp())
    }

    fn grad_x_dalpha_phi(&self, x: Vec2, alpha: f64) -> Vec2 {
        let d = x - self.center(alpha);
        let rho = d.norm();
        let theta = d * (1.0 / rho);
        let aperp = Vec2::polar(alpha).perp();
        let k = self.radius / rho;
        aperp * (-k) + theta * (k * theta.dot(aperp))
    }

    fn p_domain(&self) -> (f64, f64) {
        (0.0, 2.0 * self.radius)
    }

    fn has_unit_weight(&self) -> bool {
        true
    }

    fn quarter_turn_symmetric(&self) -> bool {
        true
    }

    fn curve(&self, alpha: f64, p: f64) -> Option<Curve> {
        (p > 0.0).then(|| Curve::Circle {
            center: self.center(alpha),
            radius: p,
        })
    }

    /// Centers `Rα⃗` on the normal line `x0 + s·n`: `|x0 + s n| = R`.
    fn tangency_angles(&self, x0: Vec2, normal: Vec2) -> Option<Vec<f64>> {
        let b = x0.dot(normal);
        let c = x0.dot(x0) - self.radius * self.radius;
        let disc = b * b - c;
        if disc < 0.0 {
            return Some(Vec::new());
        }
        let sq = disc.sqrt();
        let roots = [-b + sq, -b - sq];
        Some(
            roots
                .iter()
                .map(|&s| wrap_angle((x0 + normal * s).angle()))
                .collect(),
        )
    }
}

/// Straight lines `α⃗·x = p`; `W ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassicalRadon {
    /// Half-width of the admissible `p` range.
    pub p_extent: f64,
}

impl ClassicalRadon {
    pub fn new(p_extent: f64) -> Self {
        ClassicalRadon { p_extent }
    }
}

impl GrtModel for ClassicalRadon {
    fn phi(&self, x: Vec2, alpha: f64) -> f64 {
        Vec2::polar(alpha).dot(x)
    }

    fn weight(&self, _x: Vec2, _alpha: f64, _p: f64) -> f64 {
        1.0
    }

    fn grad_x_phi(&self, _x: Vec2, alpha: f64) -> Vec2 {
        Vec2::polar(alpha)
    }

    fn dalpha_phi(&self, x: Vec2, alpha: f64) -> f64 {
        Vec2::polar(alpha).perp().dot(x)
    }

    fn grad_x_dalpha_phi(&self, _x: Vec2, alpha: f64) -> Vec2 {
        Vec2::polar(alpha).perp()
    }

    fn p_domain(&self) -> (f64, f64) {
        (-self.p_extent, self.p_extent)
    }

    fn has_unit_weight(&self) -> bool {
        true
    }

    fn quarter_turn_symmetric(&self) -> bool {
        true
    }

    fn curve(&self, alpha: f64, p: f64) -> Option<Curve> {
        let a = Vec2::polar(alpha);
        Some(Curve::Line {
            point: a * p,
            dir: a.perp(),
        })
    }
}

/// Closed set of models selectable from configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Circular(CircularGrt),
    ClassicalRadon(ClassicalRadon),
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Model::Circular($m) => $e,
            Model::ClassicalRadon($m) => $e,
        }
    };
}

impl GrtModel for Model {
    fn phi(&self, x: Vec2, alpha: f64) -> f64 {
        dispatch!(self, m => m.phi(x, alpha))
    }
    fn weight(&self, x: Vec2, alpha: f64, p: f64) -> f64 {
        dispatch!(self, m => m.weight(x, alpha, p))
    }
    fn grad_x_phi(&self, x: Vec2, alpha: f64) -> Vec2 {
        dispatch!(self, m => m.grad_x_phi(x, alpha))
    }
    fn dalpha_phi(&self, x: Vec2, alpha: f64) -> f64 {
        dispatch!(self, m => m.dalpha_phi(x, alpha))
    }
    fn grad_x_dalpha_phi(&self, x: Vec2, alpha: f64) -> Vec2 {
        dispatch!(self, m => m.grad_x_dalpha_phi(x, alpha))
    }
    fn p_domain(&self) -> (f64, f64) {
        dispatch!(self, m => m.p_domain())
    }
    fn curve(&self, alpha: f64, p: f64) -> Option<Curve> {
        dispatch!(self, m => m.curve(alpha, p))
    }
    fn has_unit_weight(&self) -> bool {
        dispatch!(self, m => m.has_unit_weight())
    }
    fn quarter_turn_symmetric(&self) -> bool {
        dispatch!(self, m => m.quarter_turn_symmetric())
    }
    fn tangency_angles(&self, x0: Vec2, normal: Vec2) -> Option<Vec<f64>> {
        dispatch!(self, m => m.tangency_angles(x0, normal))
    }
}

/// `det [∂ₓΦ; ∂ₓΦ′_α]` at `(x, α)`.
pub fn delta_phi<M: GrtModel + ?Sized>(model: &M, x: Vec2, alpha: f64) -> f64 {
    model
        .grad_x_phi(x, alpha)
        .cross(model.grad_x_dalpha_phi(x, alpha))
}

/// Central-difference step for second derivatives at `x`.
pub fn hessian_step(x: Vec2) -> f64 {
    1e-5 * x.norm().max(1.0)
}

/// `D²F(x)(e,e)` from central differences of an analytic gradient.
pub fn second_directional<F: Fn(Vec2) -> Vec2>(grad: F, x: Vec2, e: Vec2) -> f64 {
    let h = hessian_step(x);
    (grad(x + e * h) - grad(x - e * h)).dot(e) / (2.0 * h)
}

/// Signed curvature `−∂ₓ²Φ(e,e)/|∂ₓΦ|` of the curve `S_(α, Φ(x,α))` at `x`.
pub fn curvature_of_curve<M: GrtModel + ?Sized>(model: &M, x: Vec2, alpha: f64) -> Result<f64> {
    let g = model.grad_x_phi(x, alpha);
    let gn = g.norm();
    if gn < 1e-12 {
        return Err(Error::Degenerate(format!(
            "|∂ₓΦ| = {gn:e} at ({}, {}), α = {alpha}",
            x.x, x.y
        )));
    }
    let e = (g * (1.0 / gn)).perp();
    let d2 = second_directional(|p| model.grad_x_phi(p, alpha), x, e);
    Ok(-d2 / gn)
}

/// A data point `y_l = (α_l, p_l)` whose curve is tangent to `S` at `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangency {
    pub alpha: f64,
    pub p: f64,
    /// `±∂ₓΦ/|∂ₓΦ|` oriented so that `theta · ∂ₓH(x0) > 0`.
    pub theta: Vec2,
    /// `+1` if `∂ₓΦ` already points along `∂ₓH`, `-1` if `Φ` was flipped.
    pub orientation: f64,
    pub grad_norm: f64,
    /// `Φ′_α(x0, α_l)` of the unflipped model.
    pub dalpha: f64,
    pub delta_phi: f64,
    /// Redundancy weight `W²|∂ₓΦ|/|Δ_Φ|`.
    pub nu: f64,
}

impl Tangency {
    /// Evaluates all derived quantities of the tangency at `alpha`.
    pub fn at<M: GrtModel + ?Sized>(model: &M, phantom: &Phantom, x0: Vec2, alpha: f64) -> Self {
        let alpha = wrap_angle(alpha);
        let g = model.grad_x_phi(x0, alpha);
        let grad_norm = g.norm();
        let orientation = if g.dot(phantom.grad_h(x0)) >= 0.0 { 1.0 } else { -1.0 };
        let p = model.phi(x0, alpha);
        let delta = delta_phi(model, x0, alpha);
        let w = model.weight(x0, alpha, p);
        Tangency {
            alpha,
            p,
            theta: g * (orientation / grad_norm),
            orientation,
            grad_norm,
            dalpha: model.dalpha_phi(x0, alpha),
            delta_phi: delta,
            nu: w * w * grad_norm / delta.abs(),
        }
    }
}

/// Number of α samples in the generic tangency scan.
pub const TANGENCY_SCAN_STEPS: usize = 4096;

/// Finds every `y_l` whose curve is tangent to the phantom boundary at `x0`.
///
/// Uses the model's closed form when it has one and the α-scan otherwise.
pub fn find_tangencies<M: GrtModel + ?Sized>(
    model: &M,
    phantom: &Phantom,
    x0: Vec2,
) -> Result<Vec<Tangency>> {
    check_on_boundary(phantom, x0)?;
    let normal = phantom.grad_h(x0).normalized();
    let alphas = match model.tangency_angles(x0, normal) {
        Some(a) => a,
        None => scan_tangency_angles(model, x0, normal),
    };
    finish_fan(model, phantom, x0, alphas)
}

/// Model-agnostic tangency search: sign changes of `Θ(α)·e` on a uniform
/// α grid, refined by bisection.
pub fn find_tangencies_scan<M: GrtModel + ?Sized>(
    model: &M,
    phantom: &Phantom,
    x0: Vec2,
) -> Result<Vec<Tangency>> {
    check_on_boundary(phantom, x0)?;
    let normal = phantom.grad_h(x0).normalized();
    let alphas = scan_tangency_angles(model, x0, normal);
    finish_fan(model, phantom, x0, alphas)
}

fn check_on_boundary(phantom: &Phantom, x0: Vec2) -> Result<()> {
    let h = phantom.h(x0);
    if h.abs() >= 1e-10 {
        return Err(Error::Degenerate(format!(
            "x0 = ({}, {}) is not on the boundary (H = {h:e})",
            x0.x, x0.y
        )));
    }
    Ok(())
}

fn finish_fan<M: GrtModel + ?Sized>(
    model: &M,
    phantom: &Phantom,
    x0: Vec2,
    alphas: Vec<f64>,
) -> Result<Vec<Tangency>> {
    let (p_lo, p_hi) = model.p_domain();
    let mut fan: Vec<Tangency> = Vec::new();
    for a in alphas {
        if fan.iter().any(|t| angular_distance(t.alpha, a) < 1e-9) {
            continue;
        }
        let t = Tangency::at(model, phantom, x0, a);
        if t.p > p_lo && t.p < p_hi {
            fan.push(t);
        }
    }
    if fan.is_empty() {
        return Err(Error::NoTangency { x: x0.x, y: x0.y });
    }
    fan.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    Ok(fan)
}

fn scan_tangency_angles<M: GrtModel + ?Sized>(model: &M, x0: Vec2, normal: Vec2) -> Vec<f64> {
    let e = normal.perp();
    let residual = |a: f64| model.grad_x_phi(x0, a).normalized().dot(e);
    let step = TAU / TANGENCY_SCAN_STEPS as f64;
    let mut roots = Vec::new();
    let mut a0 = 0.0;
    let mut r0 = residual(a0);
    for k in 1..=TANGENCY_SCAN_STEPS {
        let a1 = k as f64 * step;
        let r1 = residual(a1);
        if r0 == 0.0 {
            roots.push(a0);
        } else if r0 * r1 < 0.0 {
            let (mut lo, mut hi, mut rlo) = (a0, a1, r0);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                let rm = residual(mid);
                if rm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if rm * rlo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    rlo = rm;
                }
            }
            roots.push(wrap_angle(0.5 * (lo + hi)));
        }
        a0 = a1;
        r0 = r1;
    }
    roots
}

/// `κ_S(x0) − κ_{S_y}(x0)` with consistent orientation.
///
/// Both curvatures are first oriented so that `∂ₓH·∂ₓΦ > 0`. If the gap
/// is negative, `H` and `Φ` are both flipped, which negates it, so a valid
/// simple tangency always yields a positive value. A gap below `1e-8` in
/// magnitude means tangency of order higher than one and is an error.
pub fn check_curvature_gap<M: GrtModel + ?Sized>(
    model: &M,
    phantom: &Phantom,
    t: &Tangency,
    x0: Vec2,
) -> Result<f64> {
    let kappa_s = phantom.curvature(x0)?;
    let kappa_y = t.orientation * curvature_of_curve(model, x0, t.alpha)?;
    let gap = kappa_s - kappa_y;
    if gap.abs() < 1e-8 {
        return Err(Error::Degenerate(format!(
            "curvature gap {gap:e} at α = {}: tangency of order > 1",
            t.alpha
        )));
    }
    if gap < 0.0 {
        Ok(-gap)
    } else {
        Ok(gap)
    }
}

/// Warns when `μΦ′_α` is close to a rational with a small denominator.
pub fn warn_if_near_rational(mu: f64, fan: &[Tangency]) {
    for t in fan {
        let v = mu * t.dalpha;
        if let Some((num, den)) = near_rational(v, 10, 1e-6) {
            warn!(
                "μΦ′_α = {v:.9} at α = {:.6} is within 1e-6 of {num}/{den}; \
                 the predicted transition may be inaccurate",
                t.alpha
            );
        }
    }
}

/// Returns `(p, q)` with `q ≤ max_den` and `|v − p/q| < tol`, if any.
pub fn near_rational(v: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    (1..=max_den).find_map(|q| {
        let p = (v * q as f64).round();
        ((v - p / q as f64).abs() < tol).then_some((p as i64, q))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_delta_phi_at_origin() {
        let m = CircularGrt::new(10.0);
        let d = delta_phi(&m, Vec2::new(0.0, 0.0), 0.0);
        assert!((d.abs() - 1.0).abs() < 1e-14);
        // rows Θ = (−1,0) and −(R/ρ)α⃗⊥ = (0,−1)
        assert!((d - 1.0).abs() < 1e-14);
    }

    #[test]
    fn classical_delta_phi_is_one() {
        let m = ClassicalRadon::new(5.0);
        for &(x, y, a) in &[(0.3, -1.2, 0.1), (2.0, 2.0, 4.0), (-1.0, 0.5, 2.5)] {
            assert!((delta_phi(&m, Vec2::new(x, y), a) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn circle_curvature_is_inverse_radius() {
        let m = CircularGrt::new(10.0);
        let x = Vec2::new(1.0, -0.5);
        let rho = m.phi(x, 0.7);
        let k = curvature_of_curve(&m, x, 0.7).unwrap();
        assert!((k.abs() - 1.0 / rho).abs() < 1e-8, "{k} vs {}", 1.0 / rho);
    }

    #[test]
    fn line_curvature_is_zero() {
        let m = ClassicalRadon::new(5.0);
        let k = curvature_of_curve(&m, Vec2::new(0.4, 1.1), 1.3).unwrap();
        assert!(k.abs() < 1e-12);
    }

    #[test]
    fn rect_intervals_line() {
        let c = Curve::Line {
            point: Vec2::new(0.0, 0.5),
            dir: Vec2::new(1.0, 0.0),
        };
        let iv = c.intervals_in_rect(&Rect::square(1.0));
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 + 1.0).abs() < 1e-15 && (iv[0].1 - 1.0).abs() < 1e-15);
        let miss = Curve::Line {
            point: Vec2::new(0.0, 1.5),
            dir: Vec2::new(1.0, 0.0),
        };
        assert!(miss.intervals_in_rect(&Rect::square(1.0)).is_empty());
    }

    #[test]
    fn rect_intervals_circle_inside_and_crossing() {
        let inside = Curve::Circle {
            center: Vec2::new(0.0, 0.0),
            radius: 0.5,
        };
        let iv = inside.intervals_in_rect(&Rect::square(1.0));
        assert_eq!(iv.len(), 1);
        assert!((iv[0].1 - iv[0].0 - TAU).abs() < 1e-14);

        // unit circle centered at (1,0) against [-1,1]²: inside for θ in (π/2, 3π/2)
        let crossing = Curve::Circle {
            center: Vec2::new(1.0, 0.0),
            radius: 1.0,
        };
        let iv = crossing.intervals_in_rect(&Rect::square(1.0));
        let total: f64 = iv.iter().map(|(a, b)| b - a).sum();
        assert!((total - PI).abs() < 1e-12, "{iv:?}");
    }

    #[test]
    fn disk_intervals_circle() {
        let c = Curve::Circle {
            center: Vec2::new(0.0, 0.0),
            radius: 1.0,
        };
        // disk of radius 1 at (1,0): chord angles ±π/3
        let iv = c.intervals_in_disk(Vec2::new(1.0, 0.0), 1.0);
        assert_eq!(iv.len(), 1);
        assert!((iv[0].1 - iv[0].0 - 2.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn near_rational_detection() {
        assert_eq!(near_rational(0.5 + 1e-8, 10, 1e-6), Some((1, 2)));
        assert_eq!(near_rational(std::f64::consts::SQRT_2 / 3.0, 10, 1e-6), None);
    }
}
