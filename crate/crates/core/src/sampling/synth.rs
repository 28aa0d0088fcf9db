//! GRT data of analytic phantoms.
//!
//! The phantom is `f = inside` on the disk and `outside` on the rest of the
//! reconstruction region `U_b`, zero beyond. Both routes below integrate
//! `f·W` along `S_(α,p)` in arc length.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Curve, GrtModel, Rect};
use crate::phantom::Phantom;
use crate::quadrature::gl4;
use crate::sampling::{Sinogram, SinogramGrid};

/// Exact-geometry GRT data: the curve is split at its exact intersections
/// with the disk and the region, and `W` is integrated on each piece.
pub fn synthesize_sinogram<M: GrtModel>(
    model: &M,
    phantom: &Phantom,
    grid: &SinogramGrid,
    region: &Rect,
) -> Result<Sinogram> {
    check_support(phantom, region)?;
    let mut sino = Sinogram::zeros(*grid);
    sino.values
        .par_chunks_mut(grid.n_p)
        .enumerate()
        .for_each(|(j, row)| {
            let alpha = grid.alpha(j);
            for (k, v) in row.iter_mut().enumerate() {
                *v = ray_integral_exact(model, phantom, region, alpha, grid.p(k));
            }
        });
    Ok(sino)
}

/// Integral of the phantom along a single curve, exact geometry.
pub fn ray_integral_exact<M: GrtModel>(
    model: &M,
    phantom: &Phantom,
    region: &Rect,
    alpha: f64,
    p: f64,
) -> f64 {
    let Some(curve) = model.curve(alpha, p) else {
        return 0.0;
    };
    let in_region = curve.intervals_in_rect(region);
    if in_region.is_empty() {
        return 0.0;
    }
    let in_disk = intersect_intervals(
        &curve.intervals_in_disk(phantom.center, phantom.radius),
        &in_region,
        matches!(curve, Curve::Circle { .. }),
    );
    let weighted_len = |ivs: &[(f64, f64)]| -> f64 {
        ivs.iter()
            .map(|&(a, b)| {
                gl4(a, b, |t| model.weight(curve.point_at(t), alpha, p)) * curve.speed()
            })
            .sum()
    };
    let disk_part = weighted_len(&in_disk);
    let mut v = phantom.inside_value * disk_part;
    if phantom.outside_value != 0.0 {
        v += phantom.outside_value * (weighted_len(&in_region) - disk_part);
    }
    v
}

/// Intersection of two interval lists; for periodic parameters the second
/// list is also tried shifted by `±2π`.
fn intersect_intervals(a: &[(f64, f64)], b: &[(f64, f64)], periodic: bool) -> Vec<(f64, f64)> {
    let shifts: &[f64] = if periodic { &[-TAU, 0.0, TAU] } else { &[0.0] };
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            for &s in shifts {
                let lo = a0.max(b0 + s);
                let hi = a1.min(b1 + s);
                if hi > lo {
                    out.push((lo, hi));
                }
            }
        }
    }
    out
}

fn check_support(phantom: &Phantom, region: &Rect) -> Result<()> {
    let c = phantom.center;
    let r = phantom.radius;
    if c.x - r < region.x_min || c.x + r > region.x_max || c.y - r < region.y_min || c.y + r > region.y_max
    {
        return Err(Error::config(
            "phantom",
            "disk must lie inside the reconstruction region",
        ));
    }
    Ok(())
}

/// Sampled-curve quadrature. Discontinuities are located by bisection on
/// sign changes of `H` and of the region's signed distance along the curve,
/// sampled with arc-length step at most `max_step`; each smooth piece is
/// integrated with Gauss–Legendre.
pub fn synthesize_sinogram_quadrature<M: GrtModel>(
    model: &M,
    phantom: &Phantom,
    grid: &SinogramGrid,
    region: &Rect,
    max_step: f64,
) -> Result<Sinogram> {
    check_support(phantom, region)?;
    let mut sino = Sinogram::zeros(*grid);
    sino.values
        .par_chunks_mut(grid.n_p)
        .enumerate()
        .for_each(|(j, row)| {
            let alpha = grid.alpha(j);
            for (k, v) in row.iter_mut().enumerate() {
                *v = ray_integral_quadrature(model, phantom, region, alpha, grid.p(k), max_step);
            }
        });
    Ok(sino)
}

pub fn ray_integral_quadrature<M: GrtModel>(
    model: &M,
    phantom: &Phantom,
    region: &Rect,
    alpha: f64,
    p: f64,
    max_step: f64,
) -> f64 {
    let Some(curve) = model.curve(alpha, p) else {
        return 0.0;
    };
    let (t_lo, t_hi) = match curve {
        Curve::Circle { .. } => (0.0, TAU),
        Curve::Line { point, dir } => {
            let mid = 0.5 * (region.x_min + region.x_max);
            let mid_y = 0.5 * (region.y_min + region.y_max);
            let s_c = (crate::geometry::Vec2::new(mid, mid_y) - point).dot(dir);
            let d = region.diagonal();
            (s_c - d, s_c + d)
        }
    };
    let speed = curve.speed();
    let n = ((t_hi - t_lo) * speed / max_step).ceil().max(1.0) as usize;
    let dt = (t_hi - t_lo) / n as f64;
    let levels = |t: f64| {
        let x = curve.point_at(t);
        [phantom.h(x), region.signed_distance(x)]
    };
    let mut breaks = vec![t_lo];
    let mut prev = levels(t_lo);
    for i in 1..=n {
        let t1 = t_lo + i as f64 * dt;
        let cur = levels(t1);
        for lvl in 0..2 {
            if prev[lvl] * cur[lvl] < 0.0 {
                let (mut a, mut b) = (t1 - dt, t1);
                let fa = prev[lvl];
                while b - a > 1e-14 * (1.0 + a.abs()) {
                    let m = 0.5 * (a + b);
                    if levels(m)[lvl] * fa < 0.0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                breaks.push(0.5 * (a + b));
            }
        }
        prev = cur;
    }
    breaks.push(t_hi);
    breaks.sort_by(f64::total_cmp);

    let mut sum = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let xm = curve.point_at(0.5 * (a + b));
        if region.signed_distance(xm) > 0.0 {
            continue;
        }
        let f = phantom.value(xm);
        if f == 0.0 {
            continue;
        }
        // pieces can be long; split so the rule resolves smooth weights
        let pieces = ((b - a) * speed / max_step).ceil().max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        for q in 0..pieces {
            let lo = a + q as f64 * h;
            sum += f * gl4(lo, lo + h, |t| model.weight(curve.point_at(t), alpha, p)) * speed;
        }
    }
    sum
}
