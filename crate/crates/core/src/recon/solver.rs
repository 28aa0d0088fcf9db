//! Gradient descent on the Tikhonov functional
//! `Ψ(f) = ‖Rf − g‖²_V + κε³‖∂ₓf‖²_U` over images vanishing on the
//! boundary ring.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::geometry::GrtModel;
use crate::recon::{Image, ImageGrid, Projector};
use crate::sampling::{Sinogram, SinogramGrid};

/// A linear map from images to data with its transpose under the weighted
/// inner products `⟨·,·⟩_U` and `⟨·,·⟩_V`.
pub trait LinearOperator: Sync {
    fn image_grid(&self) -> ImageGrid;
    fn data_len(&self) -> usize;
    /// Weight of one data cell in `⟨·,·⟩_V`.
    fn data_measure(&self) -> f64;
    fn apply(&self, img: &[f64], out: &mut [f64]);
    fn apply_adjoint(&self, data: &[f64], out: &mut [f64]);
}

impl<M: GrtModel> LinearOperator for Projector<'_, M> {
    fn image_grid(&self) -> ImageGrid {
        Projector::image_grid(self)
    }
    fn data_len(&self) -> usize {
        self.data_grid().len()
    }
    fn data_measure(&self) -> f64 {
        self.data_grid().cell_measure()
    }
    fn apply(&self, img: &[f64], out: &mut [f64]) {
        self.forward_into(img, out)
    }
    fn apply_adjoint(&self, data: &[f64], out: &mut [f64]) {
        self.adjoint_into(data, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepRule {
    Fixed { step: f64 },
    InverseLipschitz { power_iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub kappa: f64,
    /// Data step `ε` entering the weight `κε³`.
    pub epsilon: f64,
    pub step_rule: StepRule,
    pub stop_tol: f64,
    pub stop_consecutive: usize,
    pub max_iters: usize,
}

impl SolverConfig {
    pub fn new(kappa: f64, epsilon: f64) -> Self {
        SolverConfig {
            kappa,
            epsilon,
            step_rule: StepRule::InverseLipschitz {
                power_iterations: 30,
            },
            stop_tol: 1e-6,
            stop_consecutive: 3,
            max_iters: 2000,
        }
    }

    pub fn reg_weight(&self) -> f64 {
        self.kappa * self.epsilon.powi(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// `Ψ` at the iterate before the update.
    pub cost: f64,
    pub update_linf: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub image: Image,
    pub log: Vec<IterationRecord>,
    pub converged: bool,
    pub step: f64,
}

impl Solution {
    pub fn iterations(&self) -> usize {
        self.log.len()
    }

    pub fn cost_is_monotone(&self) -> bool {
        self.log.windows(2).all(|w| w[1].cost <= w[0].cost)
    }
}

/// `−Δ_h f` with zero Dirichlet values outside the interior; boundary ring
/// of the output is zero.
pub fn neg_laplacian(grid: &ImageGrid, f: &[f64], out: &mut [f64]) {
    let (nx, ny) = (grid.n_x, grid.n_y);
    let (ax, ay) = (1.0 / (grid.dx() * grid.dx()), 1.0 / (grid.dy() * grid.dy()));
    out.iter_mut().for_each(|v| *v = 0.0);
    for iy in 1..ny - 1 {
        for ix in 1..nx - 1 {
            let i = iy * nx + ix;
            out[i] = ax * (2.0 * f[i] - f[i - 1] - f[i + 1]) + ay * (2.0 * f[i] - f[i - nx] - f[i + nx]);
        }
    }
}

/// `‖∂ₓf‖²_U` from forward differences over every grid edge.
pub fn gradient_energy(grid: &ImageGrid, f: &[f64]) -> f64 {
    let (nx, ny) = (grid.n_x, grid.n_y);
    let (dx, dy) = (grid.dx(), grid.dy());
    let mut sx = 0.0;
    let mut sy = 0.0;
    for iy in 0..ny {
        for ix in 0..nx {
            let i = iy * nx + ix;
            if ix + 1 < nx {
                let d = f[i + 1] - f[i];
                sx += d * d;
            }
            if iy + 1 < ny {
                let d = f[i + nx] - f[i];
                sy += d * d;
            }
        }
    }
    (sx / (dx * dx) + sy / (dy * dy)) * dx * dy
}

fn zero_ring(grid: &ImageGrid, v: &mut [f64]) {
    let (nx, ny) = (grid.n_x, grid.n_y);
    for ix in 0..nx {
        v[ix] = 0.0;
        v[(ny - 1) * nx + ix] = 0.0;
    }
    for iy in 0..ny {
        v[iy * nx] = 0.0;
        v[iy * nx + nx - 1] = 0.0;
    }
}

struct Workspace {
    residual: Vec<f64>,
    back: Vec<f64>,
    lap: Vec<f64>,
}

impl Workspace {
    fn new<O: LinearOperator + ?Sized>(op: &O) -> Self {
        let n = op.image_grid().len();
        Workspace {
            residual: vec![0.0; op.data_len()],
            back: vec![0.0; n],
            lap: vec![0.0; n],
        }
    }
}

/// Evaluates `Ψ(f)` and writes its `⟨·,·⟩_U`-gradient into `grad`.
fn cost_and_gradient<O: LinearOperator + ?Sized>(
    op: &O,
    f: &[f64],
    data: &[f64],
    cfg: &SolverConfig,
    ws: &mut Workspace,
    grad: &mut [f64],
) -> f64 {
    let grid = op.image_grid();
    op.apply(f, &mut ws.residual);
    for (r, g) in ws.residual.iter_mut().zip(data) {
        *r -= g;
    }
    let data_term = op.data_measure() * ws.residual.iter().map(|r| r * r).sum::<f64>();
    let reg = cfg.reg_weight();
    let cost = data_term + reg * gradient_energy(&grid, f);
    op.apply_adjoint(&ws.residual, &mut ws.back);
    neg_laplacian(&grid, f, &mut ws.lap);
    for ((g, b), l) in grad.iter_mut().zip(&ws.back).zip(&ws.lap) {
        *g = 2.0 * (b + reg * l);
    }
    zero_ring(&grid, grad);
    cost
}

/// `Ψ(f)`.
pub fn cost<O: LinearOperator + ?Sized>(op: &O, img: &Image, data: &[f64], cfg: &SolverConfig) -> f64 {
    let mut ws = Workspace::new(op);
    op.apply(&img.values, &mut ws.residual);
    let d: f64 = ws
        .residual
        .iter()
        .zip(data)
        .map(|(r, g)| (r - g) * (r - g))
        .sum();
    op.data_measure() * d + cfg.reg_weight() * gradient_energy(&img.grid, &img.values)
}

/// `2(R*(Rf − g) + κε³(−Δ_h)f)`, zero on the boundary ring.
pub fn gradient<O: LinearOperator + ?Sized>(
    op: &O,
    img: &Image,
    data: &[f64],
    cfg: &SolverConfig,
) -> Image {
    let mut ws = Workspace::new(op);
    let mut g = Image::zeros(img.grid);
    cost_and_gradient(op, &img.values, data, cfg, &mut ws, &mut g.values);
    g
}

/// Largest eigenvalue of `v ↦ 2(R*Rv + κε³(−Δ_h)v)` by power iteration.
pub fn lipschitz_estimate<O: LinearOperator + ?Sized>(
    op: &O,
    cfg: &SolverConfig,
    iterations: usize,
) -> f64 {
    let grid = op.image_grid();
    let n = grid.len();
    let mut v = vec![1.0; n];
    zero_ring(&grid, &mut v);
    let mut av = vec![0.0; n];
    let mut tmp = vec![0.0; op.data_len()];
    let mut lap = vec![0.0; n];
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut lambda = 0.0;
    for it in 0..iterations.max(1) {
        let nv = norm(&v);
        v.iter_mut().for_each(|a| *a /= nv);
        op.apply(&v, &mut tmp);
        op.apply_adjoint(&tmp, &mut av);
        neg_laplacian(&grid, &v, &mut lap);
        let reg = cfg.reg_weight();
        for (a, l) in av.iter_mut().zip(&lap) {
            *a = 2.0 * (*a + reg * l);
        }
        zero_ring(&grid, &mut av);
        // Rayleigh quotient; the pixel measure cancels
        lambda = v.iter().zip(&av).map(|(a, b)| a * b).sum::<f64>();
        debug!("power iteration {it}: λ ≈ {lambda:.6e}");
        std::mem::swap(&mut v, &mut av);
    }
    lambda
}

/// Plain gradient descent from `f = 0`.
///
/// Stops once the L∞ norm of the update stays below `stop_tol` for
/// `stop_consecutive` consecutive iterations, or after `max_iters`.
pub fn solve<O: LinearOperator + ?Sized>(op: &O, data: &[f64], cfg: &SolverConfig) -> Solution {
    let grid = op.image_grid();
    let step = match cfg.step_rule {
        StepRule::Fixed { step } => step,
        StepRule::InverseLipschitz { power_iterations } => {
            let l = lipschitz_estimate(op, cfg, power_iterations);
            info!("Lipschitz estimate L = {l:.6e}, step = {:.6e}", 1.0 / l);
            1.0 / l
        }
    };
    let mut f = vec![0.0; grid.len()];
    let mut grad = vec![0.0; grid.len()];
    let mut ws = Workspace::new(op);
    let mut log = Vec::new();
    let mut quiet = 0;
    let mut converged = false;
    for iter in 0..cfg.max_iters {
        let cost = cost_and_gradient(op, &f, data, cfg, &mut ws, &mut grad);
        let mut linf: f64 = 0.0;
        for (x, g) in f.iter_mut().zip(&grad) {
            let u = step * g;
            *x -= u;
            linf = linf.max(u.abs());
        }
        log.push(IterationRecord {
            iter,
            cost,
            update_linf: linf,
            step,
        });
        debug!("iter {iter}: cost {cost:.9e}, |update|∞ {linf:.3e}");
        quiet = if linf < cfg.stop_tol { quiet + 1 } else { 0 };
        if quiet >= cfg.stop_consecutive {
            converged = true;
            break;
        }
    }
    Solution {
        image: Image { grid, values: f },
        log,
        converged,
        step,
    }
}

/// Reconstructs from data on `dense` with the matched projector pair.
pub fn reconstruct<M: GrtModel>(
    model: &M,
    data: &Sinogram,
    grid: &ImageGrid,
    cfg: &SolverConfig,
) -> Solution {
    let proj = Projector::new(model, *grid, data.grid);
    solve(&proj, &data.values, cfg)
}

/// Dense-grid projector helper for callers holding only grids.
pub fn projector<'m, M: GrtModel>(model: &'m M, grid: ImageGrid, dense: SinogramGrid) -> Projector<'m, M> {
    Projector::new(model, grid, dense)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Identity from a 4×4 image to a 4×4 "sinogram" with matching measures.
    struct Identity(ImageGrid);

    impl LinearOperator for Identity {
        fn image_grid(&self) -> ImageGrid {
            self.0
        }
        fn data_len(&self) -> usize {
            self.0.len()
        }
        fn data_measure(&self) -> f64 {
            self.0.pixel_measure()
        }
        fn apply(&self, img: &[f64], out: &mut [f64]) {
            out.copy_from_slice(img);
        }
        fn apply_adjoint(&self, data: &[f64], out: &mut [f64]) {
            out.copy_from_slice(data);
        }
    }

    fn toy() -> (Identity, Vec<f64>) {
        let grid = ImageGrid::square(4, 1.5);
        let mut data = vec![0.0; 16];
        data[5] = 1.0;
        data[6] = -2.0;
        data[9] = 0.5;
        data[10] = 3.0;
        (Identity(grid), data)
    }

    #[test]
    fn identity_toy_converges_in_one_step() {
        let (op, data) = toy();
        let cfg = SolverConfig {
            step_rule: StepRule::Fixed { step: 0.5 },
            ..SolverConfig::new(0.0, 0.1)
        };
        let sol = solve(&op, &data, &cfg);
        assert!(sol.converged);
        assert_eq!(sol.image.values, data);
        assert!(sol.log[1..].iter().all(|r| r.update_linf == 0.0));
        assert_eq!(sol.iterations(), 4);
    }

    #[test]
    fn lipschitz_of_identity() {
        let (op, _) = toy();
        let cfg = SolverConfig::new(0.0, 0.1);
        assert!((lipschitz_estimate(&op, &cfg, 30) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_iterations_reports_nonconvergence() {
        let (op, data) = toy();
        let cfg = SolverConfig {
            max_iters: 0,
            ..SolverConfig::new(0.5, 0.1)
        };
        let sol = solve(&op, &data, &cfg);
        assert!(!sol.converged);
        assert!(sol.image.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cost_at_zero_is_data_norm() {
        let (op, data) = toy();
        let cfg = SolverConfig::new(0.5, 0.1);
        let c = cost(&op, &Image::zeros(op.0), &data, &cfg);
        let expect = op.0.pixel_measure() * data.iter().map(|d| d * d).sum::<f64>();
        assert!((c - expect).abs() < 1e-14);
    }

    #[test]
    fn laplacian_is_adjoint_of_differences() {
        // ⟨−Δf, f⟩_U equals the forward-difference energy for ring-zero f
        let grid = ImageGrid::square(9, 1.0);
        let mut f = vec![0.0; grid.len()];
        for iy in 1..8 {
            for ix in 1..8 {
                f[iy * 9 + ix] = ((ix * 7 + iy * 3) % 5) as f64 - 2.0;
            }
        }
        let mut lap = vec![0.0; grid.len()];
        neg_laplacian(&grid, &f, &mut lap);
        let lhs: f64 = grid.pixel_measure() * lap.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>();
        assert!((lhs - gradient_energy(&grid, &f)).abs() < 1e-10);
    }
}
