//! Discrete GRT on a node grid and its exact transpose.
//!
//! Every ray is sampled at arc-length midpoints inside the image rectangle
//! with step at most half the smaller pixel size; each sample gathers the
//! image bilinearly. The adjoint replays the same samples and scatters with
//! the same weights, rescaled by the ratio of the data and image measures.
//!
//! When it fits in [`MATRIX_BUDGET_BYTES`] the samples of each ray are
//! merged once into a sparse row of node weights. For quarter-turn
//! symmetric models on a centered square grid with `4 | n_alpha`, only the
//! first quarter of the angles is stored: ray `j + n_alpha/4` is ray `j`
//! turned by `π/2`, which permutes the nodes exactly.

use rayon::prelude::*;

use crate::geometry::{Curve, GrtModel};
use crate::recon::{Image, ImageGrid};
use crate::sampling::{Sinogram, SinogramGrid};

/// Number of independent accumulation buffers in the matrix-free adjoint.
/// Fixed so that the merge order, and hence the result, does not depend on
/// the thread count.
const ADJOINT_CHUNKS: usize = 8;

/// Memory limit for the precomputed ray matrix.
pub const MATRIX_BUDGET_BYTES: usize = 7 << 29;

/// Merged node weights of the stored rays, row `j·n_p + k`.
struct RayMatrix {
    turns: usize,
    base_rows: usize,
    offsets: Vec<usize>,
    index: Vec<u32>,
    weight: Vec<f32>,
}

pub struct Projector<'m, M: GrtModel> {
    model: &'m M,
    image: ImageGrid,
    data: SinogramGrid,
    step: f64,
    unit_weight: bool,
    matrix: Option<RayMatrix>,
}

/// `dst[p] = src[turn(p)]`, where `turn` rotates a node by `+π/2` about
/// the grid center.
fn pull_turn(n: usize, src: &[f64], dst: &mut [f64]) {
    for iy in 0..n {
        for ix in 0..n {
            dst[iy * n + ix] = src[ix * n + (n - 1 - iy)];
        }
    }
}

/// `dst[turn(p)] = src[p]`.
fn push_turn(n: usize, src: &[f64], dst: &mut [f64]) {
    for iy in 0..n {
        for ix in 0..n {
            dst[ix * n + (n - 1 - iy)] = src[iy * n + ix];
        }
    }
}

impl<'m, M: GrtModel> Projector<'m, M> {
    /// Precomputes the ray matrix when it fits in the memory budget.
    pub fn new(model: &'m M, image: ImageGrid, data: SinogramGrid) -> Self {
        let mut p = Self::matrix_free(model, image, data);
        let turns = p.symmetry_turns();
        let bytes = p.estimated_matrix_bytes(turns);
        if bytes <= MATRIX_BUDGET_BYTES {
            let m = p.build_matrix(turns);
            log::info!("ray matrix: {} nonzeros, {turns} symmetric copies", m.index.len());
            p.matrix = Some(m);
        } else {
            log::info!("ray matrix needs about {} MiB; running matrix-free", bytes >> 20);
        }
        p
    }

    /// Recomputes every sample on each application.
    pub fn matrix_free(model: &'m M, image: ImageGrid, data: SinogramGrid) -> Self {
        let step = 0.5 * image.dx().min(image.dy());
        let unit_weight = model.has_unit_weight();
        Projector {
            model,
            image,
            data,
            step,
            unit_weight,
            matrix: None,
        }
    }

    pub fn has_matrix(&self) -> bool {
        self.matrix.is_some()
    }

    /// Number of stored nonzeros, if a matrix was built.
    pub fn matrix_nonzeros(&self) -> Option<usize> {
        self.matrix.as_ref().map(|m| m.index.len())
    }

    fn symmetry_turns(&self) -> usize {
        let g = &self.image;
        let tol = 1e-12 * g.x_max.abs().max(1.0);
        let centered_square = g.n_x == g.n_y
            && (g.x_min + g.x_max).abs() < tol
            && (g.y_min + g.y_max).abs() < tol
            && (g.x_max - g.y_max).abs() < tol;
        let quarter = self.data.n_alpha.is_multiple_of(4)
            && self.data.is_full_circle()
            && (self.data.d_alpha * (self.data.n_alpha / 4) as f64 - std::f64::consts::FRAC_PI_2).abs() < 1e-12;
        if centered_square && quarter && self.model.quarter_turn_symmetric() {
            4
        } else {
            1
        }
    }

    fn estimated_matrix_bytes(&self, turns: usize) -> usize {
        let base = self.data.n_alpha / turns;
        let rect = self.image.rect();
        let mut samples = 0.0;
        for j in 0..base {
            for k in 0..self.data.n_p {
                if let Some(c) = self.model.curve(self.data.alpha(j), self.data.p(k)) {
                    let len: f64 = c.intervals_in_rect(&rect).iter().map(|(a, b)| b - a).sum();
                    samples += len * c.speed() / self.step + 1.0;
                }
            }
        }
        // about 1.3 distinct nodes per sample at half-pixel steps
        (samples * 1.5 * 8.0) as usize
    }

    fn build_matrix(&self, turns: usize) -> RayMatrix {
        let base_rows = self.data.n_alpha / turns;
        let n_p = self.data.n_p;
        let nx = self.image.n_x;
        let n_img = self.image.len();
        let rows: Vec<(Vec<u32>, Vec<f32>, Vec<usize>)> = (0..base_rows)
            .into_par_iter()
            .map_init(
                || (vec![0.0f64; n_img], vec![false; n_img], Vec::<usize>::new()),
                |(acc, seen, touched), j| {
                    let mut index = Vec::new();
                    let mut weight = Vec::new();
                    let mut counts = Vec::with_capacity(n_p);
                    for k in 0..n_p {
                        let mut add = |i: usize, w: f64| {
                            if !seen[i] {
                                seen[i] = true;
                                touched.push(i);
                            }
                            acc[i] += w;
                        };
                        self.for_each_sample(j, k, |i, tx, ty, w| {
                            let b = w * ty;
                            let a = w - b;
                            add(i, a * (1.0 - tx));
                            add(i + 1, a * tx);
                            add(i + nx, b * (1.0 - tx));
                            add(i + nx + 1, b * tx);
                        });
                        let start = index.len();
                        for &i in touched.iter() {
                            if acc[i] != 0.0 {
                                index.push(i as u32);
                                weight.push(acc[i] as f32);
                            }
                            acc[i] = 0.0;
                            seen[i] = false;
                        }
                        touched.clear();
                        counts.push(index.len() - start);
                    }
                    (index, weight, counts)
                },
            )
            .collect();
        let nnz: usize = rows.iter().map(|r| r.0.len()).sum();
        let mut offsets = Vec::with_capacity(base_rows * n_p + 1);
        let mut index = Vec::with_capacity(nnz);
        let mut weight = Vec::with_capacity(nnz);
        offsets.push(0);
        for (ri, rw, counts) in rows {
            index.extend_from_slice(&ri);
            weight.extend_from_slice(&rw);
            for c in counts {
                offsets.push(offsets.last().unwrap() + c);
            }
        }
        RayMatrix {
            turns,
            base_rows,
            offsets,
            index,
            weight,
        }
    }

    pub fn image_grid(&self) -> ImageGrid {
        self.image
    }

    pub fn data_grid(&self) -> SinogramGrid {
        self.data
    }

    pub fn quadrature_step(&self) -> f64 {
        self.step
    }

    /// Calls `f(node_index, tx, ty, weight)` for every sample of ray `(j, k)`.
    #[inline]
    fn for_each_sample<F: FnMut(usize, f64, f64, f64)>(&self, j: usize, k: usize, mut f: F) {
        let alpha = self.data.alpha(j);
        let p = self.data.p(k);
        let Some(curve) = self.model.curve(alpha, p) else {
            return;
        };
        let g = &self.image;
        let inv_dx = 1.0 / g.dx();
        let inv_dy = 1.0 / g.dy();
        let (mx, my) = ((g.n_x - 1) as f64, (g.n_y - 1) as f64);
        let mut emit = |x: f64, y: f64, w: f64| {
            let fx = (x - g.x_min) * inv_dx;
            let fy = (y - g.y_min) * inv_dy;
            if fx >= 0.0 && fx <= mx && fy >= 0.0 && fy <= my {
                let ix = (fx as usize).min(g.n_x - 2);
                let iy = (fy as usize).min(g.n_y - 2);
                let w = if self.unit_weight {
                    w
                } else {
                    w * self.model.weight(crate::geometry::Vec2::new(x, y), alpha, p)
                };
                f(iy * g.n_x + ix, fx - ix as f64, fy - iy as f64, w);
            }
        };
        for (t0, t1) in curve.intervals_in_rect(&g.rect()) {
            let len = (t1 - t0) * curve.speed();
            let n = (len / self.step).ceil().max(1.0) as usize;
            let dt = (t1 - t0) / n as f64;
            let dl = len / n as f64;
            match curve {
                Curve::Circle { center, radius } => {
                    let (s0, c0) = (t0 + 0.5 * dt).sin_cos();
                    let (sd, cd) = dt.sin_cos();
                    let (mut c, mut s) = (c0, s0);
                    for _ in 0..n {
                        emit(center.x + radius * c, center.y + radius * s, dl);
                        let cn = c * cd - s * sd;
                        s = s * cd + c * sd;
                        c = cn;
                    }
                }
                Curve::Line { point, dir } => {
                    for i in 0..n {
                        let t = t0 + (i as f64 + 0.5) * dt;
                        emit(point.x + dir.x * t, point.y + dir.y * t, dl);
                    }
                }
            }
        }
    }

    pub fn forward_into(&self, img: &[f64], out: &mut [f64]) {
        match &self.matrix {
            Some(m) => self.forward_matrix(m, img, out),
            None => self.forward_free(img, out),
        }
    }

    pub fn adjoint_into(&self, data: &[f64], out: &mut [f64]) {
        match &self.matrix {
            Some(m) => self.adjoint_matrix(m, data, out),
            None => self.adjoint_free(data, out),
        }
        let scale = self.data.cell_measure() / self.image.pixel_measure();
        out.iter_mut().for_each(|v| *v *= scale);
    }

    fn forward_matrix(&self, m: &RayMatrix, img: &[f64], out: &mut [f64]) {
        match m.turns {
            4 => self.forward_matrix_t::<4>(m, img, out),
            _ => self.forward_matrix_t::<1>(m, img, out),
        }
    }

    /// Rotated copies interleaved as `il[i * T + q]`, so one gather reads all `T` values.
    fn interleave_turns<const T: usize>(&self, img: &[f64]) -> Vec<f64> {
        let n = self.image.n_x;
        let mut il = vec![0.0; T * img.len()];
        let mut cur = img.to_vec();
        let mut next = vec![0.0; img.len()];
        for q in 0..T {
            if q > 0 {
                pull_turn(n, &cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
            }
            for (i, &v) in cur.iter().enumerate() {
                il[i * T + q] = v;
            }
        }
        il
    }

    fn forward_matrix_t<const T: usize>(&self, m: &RayMatrix, img: &[f64], out: &mut [f64]) {
        let n_p = self.data.n_p;
        let il = self.interleave_turns::<T>(img);
        let rows: Vec<Vec<[f64; T]>> = (0..m.base_rows)
            .into_par_iter()
            .map(|j0| {
                (0..n_p)
                    .map(|k| {
                        let r = j0 * n_p + k;
                        let (a, b) = (m.offsets[r], m.offsets[r + 1]);
                        let mut s = [0.0; T];
                        for (&i, &w) in m.index[a..b].iter().zip(&m.weight[a..b]) {
                            let src = &il[i as usize * T..][..T];
                            let w = w as f64;
                            for q in 0..T {
                                s[q] += w * src[q];
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        for (j0, row) in rows.iter().enumerate() {
            for (k, s) in row.iter().enumerate() {
                for q in 0..T {
                    out[(q * m.base_rows + j0) * n_p + k] = s[q];
                }
            }
        }
    }

    fn adjoint_matrix(&self, m: &RayMatrix, data: &[f64], out: &mut [f64]) {
        match m.turns {
            4 => self.adjoint_matrix_t::<4>(m, data, out),
            _ => self.adjoint_matrix_t::<1>(m, data, out),
        }
    }

    fn adjoint_matrix_t<const T: usize>(&self, m: &RayMatrix, data: &[f64], out: &mut [f64]) {
        let n = self.image.n_x;
        let n_p = self.data.n_p;
        let len = self.image.len();
        let per_chunk = m.base_rows.div_ceil(ADJOINT_CHUNKS);
        let partials: Vec<Vec<f64>> = (0..ADJOINT_CHUNKS)
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![0.0; T * len];
                for j0 in (c * per_chunk)..((c + 1) * per_chunk).min(m.base_rows) {
                    for k in 0..n_p {
                        let mut g = [0.0; T];
                        for (q, gq) in g.iter_mut().enumerate() {
                            *gq = data[(q * m.base_rows + j0) * n_p + k];
                        }
                        if g.iter().all(|&v| v == 0.0) {
                            continue;
                        }
                        let r = j0 * n_p + k;
                        let (a, b) = (m.offsets[r], m.offsets[r + 1]);
                        for (&i, &w) in m.index[a..b].iter().zip(&m.weight[a..b]) {
                            let dst = &mut acc[i as usize * T..][..T];
                            let w = w as f64;
                            for q in 0..T {
                                dst[q] += w * g[q];
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        let mut acc = vec![vec![0.0; len]; T];
        for part in &partials {
            for i in 0..len {
                for q in 0..T {
                    acc[q][i] += part[i * T + q];
                }
            }
        }
        // out = acc₀ + T(acc₁ + T(acc₂ + T(acc₃))) with T the quarter-turn push
        let mut total = acc.pop().unwrap_or_default();
        let mut tmp = vec![0.0; len];
        for a in acc.iter().rev() {
            push_turn(n, &total, &mut tmp);
            for (t, (x, y)) in total.iter_mut().zip(tmp.iter().zip(a)) {
                *t = x + y;
            }
        }
        out.copy_from_slice(&total);
    }

    fn forward_free(&self, img: &[f64], out: &mut [f64]) {
        let n_p = self.data.n_p;
        let nx = self.image.n_x;
        out.par_chunks_mut(n_p).enumerate().for_each(|(j, row)| {
            for (k, v) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                self.for_each_sample(j, k, |i, tx, ty, w| {
                    let lo = (1.0 - tx) * img[i] + tx * img[i + 1];
                    let hi = (1.0 - tx) * img[i + nx] + tx * img[i + nx + 1];
                    acc += w * ((1.0 - ty) * lo + ty * hi);
                });
                *v = acc;
            }
        });
    }

    fn adjoint_free(&self, data: &[f64], out: &mut [f64]) {
        let n_alpha = self.data.n_alpha;
        let n_p = self.data.n_p;
        let nx = self.image.n_x;
        let per_chunk = n_alpha.div_ceil(ADJOINT_CHUNKS);
        let partials: Vec<Vec<f64>> = (0..ADJOINT_CHUNKS)
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![0.0; self.image.len()];
                let rows = (c * per_chunk).min(n_alpha)..((c + 1) * per_chunk).min(n_alpha);
                for j in rows {
                    for k in 0..n_p {
                        let g = data[j * n_p + k];
                        if g == 0.0 {
                            continue;
                        }
                        self.for_each_sample(j, k, |i, tx, ty, w| {
                            let gw = g * w;
                            let b = gw * ty;
                            let a = gw - b;
                            acc[i] += a * (1.0 - tx);
                            acc[i + 1] += a * tx;
                            acc[i + nx] += b * (1.0 - tx);
                            acc[i + nx + 1] += b * tx;
                        });
                    }
                }
                acc
            })
            .collect();
        out.iter_mut().for_each(|v| *v = 0.0);
        for part in &partials {
            for (o, p) in out.iter_mut().zip(part) {
                *o += p;
            }
        }
    }

    pub fn forward(&self, img: &Image) -> Sinogram {
        let mut s = Sinogram::zeros(self.data);
        self.forward_into(&img.values, &mut s.values);
        s
    }

    pub fn adjoint(&self, sino: &Sinogram) -> Image {
        let mut img = Image::zeros(self.image);
        self.adjoint_into(&sino.values, &mut img.values);
        img
    }
}

/// `R f` on `dense`.
pub fn forward<M: GrtModel>(model: &M, img: &Image, dense: &SinogramGrid) -> Sinogram {
    Projector::new(model, img.grid, *dense).forward(img)
}

/// Matched adjoint of [`forward`].
pub fn adjoint<M: GrtModel>(model: &M, sino: &Sinogram, grid: &ImageGrid) -> Image {
    Projector::new(model, *grid, sino.grid).adjoint(sino)
}
