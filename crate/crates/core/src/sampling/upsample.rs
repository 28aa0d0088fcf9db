use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sampling::{KernelSpec, Sinogram, SinogramGrid};

/// Tensor-product interpolation of coarse data onto `dense`:
///
/// `g_ε(α,p) = Σ_j φ_α((α−α_j)/Δα) φ_p((p−p_j)/Δp) g_j`
///
/// `α` taps wrap around the circle when the coarse grid covers it; `p`
/// taps outside the coarse grid contribute zero.
pub fn upsample(
    coarse: &Sinogram,
    kernel_alpha: KernelSpec,
    kernel_p: KernelSpec,
    dense: &SinogramGrid,
) -> Result<Sinogram> {
    let cg = coarse.grid;
    if coarse.values.len() != cg.len() {
        return Err(Error::GridMismatch(format!(
            "coarse sinogram has {} values, grid expects {}",
            coarse.values.len(),
            cg.len()
        )));
    }
    let periodic = cg.is_full_circle();
    let ra = kernel_alpha.support_radius().ceil() as i64;
    let rp = kernel_p.support_radius().ceil() as i64;

    let mut out = Sinogram::zeros(*dense);
    out.values
        .par_chunks_mut(dense.n_p)
        .enumerate()
        .for_each(|(jd, row)| {
            let ua = (dense.alpha(jd) - cg.alpha0) / cg.d_alpha;
            let ja = ua.floor() as i64;
            // α taps and weights for this row
            let mut taps: Vec<(usize, f64)> = Vec::with_capacity((2 * ra + 2) as usize);
            for j in (ja - ra)..=(ja + ra + 1) {
                let w = kernel_alpha.eval(ua - j as f64);
                if w == 0.0 {
                    continue;
                }
                let idx = if periodic {
                    j.rem_euclid(cg.n_alpha as i64)
                } else if j >= 0 && (j as usize) < cg.n_alpha {
                    j
                } else {
                    continue;
                };
                taps.push((idx as usize, w));
            }
            for (kd, v) in row.iter_mut().enumerate() {
                let up = (dense.p(kd) - cg.p0) / cg.d_p;
                let kp = up.floor() as i64;
                let mut acc = 0.0;
                for k in (kp - rp)..=(kp + rp + 1) {
                    if k < 0 || k as usize >= cg.n_p {
                        continue;
                    }
                    let wp = kernel_p.eval(up - k as f64);
                    if wp == 0.0 {
                        continue;
                    }
                    let mut col = 0.0;
                    for &(j, wa) in &taps {
                        col += wa * coarse.values[j * cg.n_p + k as usize];
                    }
                    acc += wp * col;
                }
                *v = acc;
            }
        });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn coarse_grid() -> SinogramGrid {
        SinogramGrid::full_scan(24, 30, 1.0, 4.0).unwrap()
    }

    fn filled(grid: SinogramGrid, mut f: impl FnMut(f64, f64) -> f64) -> Sinogram {
        let mut s = Sinogram::zeros(grid);
        for j in 0..grid.n_alpha {
            for k in 0..grid.n_p {
                s.values[j * grid.n_p + k] = f(grid.alpha(j), grid.p(k));
            }
        }
        s
    }

    #[test]
    fn identity_on_same_grid() {
        let g = coarse_grid();
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let s = filled(g, |_, _| rng.gen_range(-1.0..1.0));
        let u = upsample(&s, KernelSpec::Keys, KernelSpec::Keys, &g).unwrap();
        for (a, b) in s.values.iter().zip(&u.values) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn affine_in_p_reproduced_in_interior() {
        let g = coarse_grid();
        let s = filled(g, |_, p| 0.7 - 1.3 * p);
        let dense = SinogramGrid::full_scan(64, 91, 1.0, 4.0).unwrap();
        let u = upsample(&s, KernelSpec::Keys, KernelSpec::Keys, &dense).unwrap();
        for j in 0..dense.n_alpha {
            for k in 0..dense.n_p {
                let p = dense.p(k);
                // two coarse cells away from the p boundary all taps exist
                if p < 1.0 + 2.0 * g.d_p || p > 4.0 - 2.0 * g.d_p {
                    continue;
                }
                assert!((u.get(j, k) - (0.7 - 1.3 * p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_stays_constant_and_alpha_wraps() {
        let g = coarse_grid();
        let s = filled(g, |_, _| 2.5);
        let dense = SinogramGrid {
            alpha0: -0.05,
            ..SinogramGrid::full_scan(50, 40, 1.5, 3.5).unwrap()
        };
        let u = upsample(&s, KernelSpec::Keys, KernelSpec::Keys, &dense).unwrap();
        assert!(u.values.iter().all(|v| (v - 2.5).abs() < 1e-13));
    }

    #[test]
    fn periodic_in_alpha() {
        let g = coarse_grid();
        let s = filled(g, |a, _| a.cos());
        let dense = SinogramGrid::full_scan(96, 10, 2.0, 3.0).unwrap();
        let u = upsample(&s, KernelSpec::Keys, KernelSpec::Keys, &dense).unwrap();
        // cubic convolution error for cos at Δα = 2π/24 stays small everywhere
        for j in 0..dense.n_alpha {
            assert!((u.get(j, 3) - dense.alpha(j).cos()).abs() < 5e-3);
        }
    }

    #[test]
    fn linear_in_data() {
        let g = coarse_grid();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let a = filled(g, |_, _| rng.gen_range(-1.0..1.0));
        let b = filled(g, |_, _| rng.gen_range(-1.0..1.0));
        let comb = Sinogram {
            grid: g,
            values: a.values.iter().zip(&b.values).map(|(x, y)| 2.0 * x - 0.5 * y).collect(),
        };
        let dense = SinogramGrid::full_scan(40, 47, 1.0, 4.0).unwrap();
        let ua = upsample(&a, KernelSpec::Keys, KernelSpec::Keys, &dense).unwrap();
        let ub = upsample(&b, KernelSpec::Keys, KernelSpec::Keys, &dense).unwrap();
        let uc = upsample(&comb, KernelSpec::Keys, KernelSpec::Keys, &dense).unwrap();
        for i in 0..uc.values.len() {
            let expect = 2.0 * ua.values[i] - 0.5 * ub.values[i];
            assert!((uc.values[i] - expect).abs() < 1e-13);
        }
    }
}
