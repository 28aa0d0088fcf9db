use std::f64::consts::SQRT_2;

use grt_dtb::phantom::disk_phantom;
use grt_dtb::recon::{gradient, solve, Image, ImageGrid, Projector, SolverConfig, StepRule};
use grt_dtb::sampling::{synthesize_sinogram, SinogramGrid};
use grt_dtb::{CircularGrt, Vec2};

const HALF_WIDTH: f64 = 3.7;

fn instance(model: &CircularGrt) -> (ImageGrid, SinogramGrid, Vec<f64>) {
    let grid = ImageGrid::square(33, HALF_WIDTH);
    let reach = HALF_WIDTH * SQRT_2;
    let data_grid = SinogramGrid::full_scan(64, 48, 10.0 - reach, 10.0 + reach).unwrap();
    let phantom = disk_phantom(Vec2::new(1.0, 1.0), 2.0, 1.0, 0.0).unwrap();
    let sino = synthesize_sinogram(model, &phantom, &data_grid, &grid.rect()).unwrap();
    (grid, data_grid, sino.values)
}

fn ring_is_zero(img: &Image) -> bool {
    let (nx, ny) = (img.grid.n_x, img.grid.n_y);
    (0..nx).all(|i| img.values[i] == 0.0 && img.values[(ny - 1) * nx + i] == 0.0)
        && (0..ny).all(|j| img.values[j * nx] == 0.0 && img.values[j * nx + nx - 1] == 0.0)
}

#[test]
fn cost_is_monotone_and_boundary_stays_zero() {
    let model = CircularGrt::new(10.0);
    let (grid, data_grid, data) = instance(&model);
    let proj = Projector::new(&model, grid, data_grid);
    let mut cfg = SolverConfig::new(0.5, data_grid.epsilon());
    cfg.max_iters = 300;
    let sol = solve(&proj, &data, &cfg);
    assert!(sol.cost_is_monotone());
    assert!(ring_is_zero(&sol.image));
    for k in [1, 2, 7] {
        cfg.max_iters = k;
        let partial = solve(&proj, &data, &cfg);
        assert_eq!(partial.iterations(), k);
        assert!(ring_is_zero(&partial.image));
    }
}

#[test]
fn converged_solution_has_small_gradient() {
    let model = CircularGrt::new(10.0);
    let (grid, data_grid, data) = instance(&model);
    let proj = Projector::new(&model, grid, data_grid);
    let mut cfg = SolverConfig::new(0.5, data_grid.epsilon());
    cfg.stop_tol = 1e-9;
    cfg.max_iters = 20000;
    let sol = solve(&proj, &data, &cfg);
    assert!(sol.converged);
    let g = gradient(&proj, &sol.image, &data, &cfg);
    let g0 = gradient(&proj, &Image::zeros(grid), &data, &cfg);
    let linf = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    assert!(linf(&g.values) < 1e-5 * linf(&g0.values));
}

#[test]
fn stronger_regularization_shrinks_the_solution() {
    let model = CircularGrt::new(10.0);
    let (grid, data_grid, data) = instance(&model);
    let proj = Projector::new(&model, grid, data_grid);
    let mut last = f64::INFINITY;
    for kappa in [1e2, 1e4, 1e6, 1e8] {
        let mut cfg = SolverConfig::new(kappa, data_grid.epsilon());
        cfg.stop_tol = 1e-10;
        cfg.max_iters = 20000;
        let sol = solve(&proj, &data, &cfg);
        assert!(sol.converged, "κ = {kappa}");
        let linf = sol.image.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        assert!(linf < last, "κ = {kappa}: {linf} ≥ {last}");
        last = linf;
    }
}

#[test]
fn fixed_step_is_used_verbatim() {
    let model = CircularGrt::new(10.0);
    let (grid, data_grid, data) = instance(&model);
    let proj = Projector::new(&model, grid, data_grid);
    let mut cfg = SolverConfig::new(0.5, data_grid.epsilon());
    cfg.step_rule = StepRule::Fixed { step: 1e-3 };
    cfg.max_iters = 5;
    let sol = solve(&proj, &data, &cfg);
    assert_eq!(sol.step, 1e-3);
    assert!(sol.log.iter().all(|r| r.step == 1e-3));
    assert!(!sol.converged);
}

#[test]
fn zero_data_gives_zero_image() {
    let model = CircularGrt::new(10.0);
    let (grid, data_grid, data) = instance(&model);
    let proj = Projector::new(&model, grid, data_grid);
    let cfg = SolverConfig::new(0.5, data_grid.epsilon());
    let zero = vec![0.0; data.len()];
    let sol = solve(&proj, &zero, &cfg);
    assert!(sol.converged);
    assert!(sol.image.values.iter().all(|&v| v == 0.0));
}
