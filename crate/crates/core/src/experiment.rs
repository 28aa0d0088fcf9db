//! The simulate → reconstruct → predict → compare pipeline.
//!
//! Every command writes its artifacts into an output directory together
//! with the effective configuration it ran with.

use std::path::{Path, PathBuf};

use log::info;

use crate::analysis::{compare, extract_profile, line_profile, ProfileReport};
use crate::config::{ExperimentConfig, Synthesis};
use crate::dtb::{combined_dtb, DtbCurve};
use crate::error::{Error, Result};
use crate::geometry::{check_curvature_gap, find_tangencies, warn_if_near_rational};
use crate::io;
use crate::recon::{reconstruct, Image, Solution};
use crate::sampling::{synthesize_sinogram, synthesize_sinogram_quadrature, upsample, Sinogram, SinogramGrid};

pub const SINOGRAM_FILE: &str = "sinogram.bin";
pub const SINOGRAM_CSV: &str = "sinogram.csv";
pub const IMAGE_FILE: &str = "image.bin";
pub const ITERATION_LOG: &str = "iterations.csv";
pub const DTB_FILE: &str = "dtb.csv";
pub const TANGENCY_FILE: &str = "tangencies.csv";
pub const PROFILE_FILE: &str = "profile.csv";
pub const METRICS_FILE: &str = "metrics.txt";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const GLOBAL_PROFILE_FILE: &str = "global_profile.csv";
pub const EFFECTIVE_CONFIG: &str = "effective_config.toml";

pub fn write_effective_config(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let mut eff = cfg.effective();
    eff.output.dir = out.to_path_buf();
    io::write_text(&out.join(EFFECTIVE_CONFIG), &eff.to_toml_string())
}

/// Coarse GRT data of the configured phantom.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Sinogram> {
    let model = cfg.model();
    let phantom = cfg.phantom()?;
    let grid = cfg.coarse_grid()?;
    let region = cfg.image_grid().rect();
    match cfg.sampling.synthesis {
        Synthesis::Exact => synthesize_sinogram(&model, &phantom, &grid, &region),
        Synthesis::Quadrature => {
            let step = 0.25 * cfg.image_grid().dx();
            synthesize_sinogram_quadrature(&model, &phantom, &grid, &region, step)
        }
    }
}

pub struct SimulateOutput {
    pub path: PathBuf,
    pub grid: SinogramGrid,
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<SimulateOutput> {
    let sino = simulate(cfg)?;
    let path = out.join(SINOGRAM_FILE);
    io::write_sinogram(&path, &sino)?;
    io::write_sinogram_csv(&out.join(SINOGRAM_CSV), &sino)?;
    write_effective_config(cfg, out)?;
    info!(
        "wrote {} ({}×{}, ε = {:.6}, μ = {:.6})",
        path.display(),
        sino.grid.n_alpha,
        sino.grid.n_p,
        sino.grid.epsilon(),
        sino.grid.mu()
    );
    Ok(SimulateOutput { path, grid: sino.grid })
}

/// Upsamples coarse data to the dense grid and solves.
pub fn reconstruct_from(cfg: &ExperimentConfig, coarse: &Sinogram) -> Result<Solution> {
    let expected = cfg.coarse_grid()?;
    if !coarse.grid.same_as(&expected) {
        return Err(Error::GridMismatch(format!(
            "sinogram grid {:?} does not match the configured grid {:?}",
            coarse.grid, expected
        )));
    }
    let dense = upsample(
        coarse,
        cfg.sampling.kernel_alpha,
        cfg.sampling.kernel_p,
        &cfg.dense_grid()?,
    )?;
    let model = cfg.model();
    Ok(reconstruct(&model, &dense, &cfg.image_grid(), &cfg.solver_config()?))
}

pub struct ReconstructOutput {
    pub image_path: PathBuf,
    pub solution: Solution,
}

/// Writes the image and iteration log even when the solver did not converge.
pub fn cmd_reconstruct(cfg: &ExperimentConfig, sinogram: &Path, out: &Path) -> Result<ReconstructOutput> {
    let coarse = io::read_sinogram(sinogram)?;
    let solution = reconstruct_from(cfg, &coarse)?;
    let image_path = out.join(IMAGE_FILE);
    io::write_image(&image_path, &solution.image)?;
    io::write_iteration_log(&out.join(ITERATION_LOG), &solution.log)?;
    write_effective_config(cfg, out)?;
    info!(
        "{} after {} iterations (step {:.4e})",
        if solution.converged { "converged" } else { "not converged" },
        solution.iterations(),
        solution.step
    );
    Ok(ReconstructOutput { image_path, solution })
}

/// Tangency fan at `x0` and the predicted transition curve.
pub fn predict(cfg: &ExperimentConfig) -> Result<DtbCurve> {
    let model = cfg.model();
    let phantom = cfg.phantom()?;
    let x0 = cfg.x0()?;
    let fan = find_tangencies(&model, &phantom, x0)?;
    for t in &fan {
        check_curvature_gap(&model, &phantom, t, x0)?;
    }
    let dcfg = cfg.dtb_config()?;
    warn_if_near_rational(dcfg.mu, &fan);
    combined_dtb(&fan, &dcfg)
}

pub fn cmd_predict(cfg: &ExperimentConfig, out: &Path) -> Result<DtbCurve> {
    let curve = predict(cfg)?;
    io::write_dtb_csv(&out.join(DTB_FILE), &curve)?;
    io::write_tangency_csv(&out.join(TANGENCY_FILE), &curve)?;
    write_effective_config(cfg, out)?;
    Ok(curve)
}

/// Edge profile at `x0` along the outward normal, compared with `curve`.
pub fn compare_image(cfg: &ExperimentConfig, img: &Image, curve: &DtbCurve) -> Result<ProfileReport> {
    if !img.grid.same_as(&cfg.image_grid()) {
        return Err(Error::GridMismatch(format!(
            "image grid {:?} does not match the configured grid {:?}",
            img.grid,
            cfg.image_grid()
        )));
    }
    let phantom = cfg.phantom()?;
    let x0 = cfg.x0()?;
    let theta0 = phantom.grad_h(x0).normalized();
    let xs = cfg.x_check_grid();
    let measured = extract_profile(img, x0, theta0, cfg.epsilon()?, &xs)?;
    let window = (cfg.compare.window_lo, cfg.compare.window_hi);
    Ok(compare(&xs, &measured, curve, phantom.jump(), window))
}

/// Profile through the disk center along the direction of `x0`.
pub fn global_profile(cfg: &ExperimentConfig, img: &Image) -> Result<Vec<(f64, f64)>> {
    let phantom = cfg.phantom()?;
    let dir = phantom.grad_h(cfg.x0()?).normalized();
    let hw = cfg.image.half_width;
    let reach = 2.0 * hw * 2f64.sqrt();
    let rows = line_profile(img, phantom.center - dir * reach, phantom.center + dir * reach, 2 * cfg.image.n);
    // arc length measured from the disk center
    Ok(rows.into_iter().map(|(s, v)| (s - reach, v)).collect())
}

pub fn cmd_compare(cfg: &ExperimentConfig, image: &Path, out: &Path, plot: bool) -> Result<ProfileReport> {
    let img = io::read_image(image)?;
    let curve = predict(cfg)?;
    let report = compare_image(cfg, &img, &curve)?;
    io::write_profile_csv(&out.join(PROFILE_FILE), &report)?;
    io::write_key_values(&out.join(METRICS_FILE), &report.key_values())?;
    io::write_text(&out.join(SUMMARY_FILE), &report.summary())?;
    let global = global_profile(cfg, &img)?;
    io::write_xy_csv(&out.join(GLOBAL_PROFILE_FILE), ["s", "value"], &global)?;
    write_effective_config(cfg, out)?;
    if plot || cfg.output.plot {
        plot::profile(&out.join("profile.png"), &report)?;
        plot::global(&out.join("global_profile.png"), &global)?;
    }
    Ok(report)
}

pub struct RunOutput {
    pub grid: SinogramGrid,
    pub solution: Solution,
    pub curve: DtbCurve,
    pub report: ProfileReport,
}

pub fn cmd_run(cfg: &ExperimentConfig, out: &Path, plot: bool) -> Result<RunOutput> {
    let sim = cmd_simulate(cfg, out)?;
    let rec = cmd_reconstruct(cfg, &sim.path, out)?;
    let curve = cmd_predict(cfg, out)?;
    let report = cmd_compare(cfg, &rec.image_path, out, plot)?;
    Ok(RunOutput {
        grid: sim.grid,
        solution: rec.solution,
        curve,
        report,
    })
}

mod plot {
    use std::path::Path;

    use plotters::coord::types::RangedCoordf64;
    use plotters::prelude::*;

    use crate::analysis::ProfileReport;
    use crate::error::{Error, Result};

    fn err(path: &Path, e: impl std::fmt::Display) -> Error {
        Error::Format {
            path: path.to_path_buf(),
            reason: format!("plot rendering failed: {e}"),
        }
    }

    fn bounds<'a>(ys: impl Iterator<Item = &'a f64>) -> (f64, f64) {
        let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
        let pad = 0.05 * (hi - lo).max(1e-6);
        (lo - pad, hi + pad)
    }

    type Chart<'a> = ChartContext<'a, BitMapBackend<'a>, Cartesian2d<RangedCoordf64, RangedCoordf64>>;

    /// Grid lines only; no text, so no font backend is needed.
    fn mesh(path: &Path, chart: &mut Chart<'_>) -> Result<()> {
        chart
            .configure_mesh()
            .x_labels(0)
            .y_labels(0)
            .light_line_style(RGBColor(230, 230, 230))
            .draw()
            .map_err(|e| err(path, e))
    }

    pub fn profile(path: &Path, rep: &ProfileReport) -> Result<()> {
        let root = BitMapBackend::new(path, (800, 500)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| err(path, e))?;
        let xs = &rep.x_check;
        let (ylo, yhi) = bounds(rep.measured.iter().chain(&rep.predicted));
        let mut chart = ChartBuilder::on(&root)
            .margin(15)
            .build_cartesian_2d(xs[0]..xs[xs.len() - 1], ylo..yhi)
            .map_err(|e| err(path, e))?;
        mesh(path, &mut chart)?;
        chart
            .draw_series(LineSeries::new(xs.iter().copied().zip(rep.measured.iter().copied()), &GREEN))
            .map_err(|e| err(path, e))?;
        chart
            .draw_series(LineSeries::new(xs.iter().copied().zip(rep.predicted.iter().copied()), &BLUE))
            .map_err(|e| err(path, e))?;
        root.present().map_err(|e| err(path, e))
    }

    pub fn global(path: &Path, rows: &[(f64, f64)]) -> Result<()> {
        if rows.len() < 2 {
            return Ok(());
        }
        let root = BitMapBackend::new(path, (800, 500)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| err(path, e))?;
        let (ylo, yhi) = bounds(rows.iter().map(|r| &r.1));
        let mut chart = ChartBuilder::on(&root)
            .margin(15)
            .build_cartesian_2d(rows[0].0..rows[rows.len() - 1].0, ylo..yhi)
            .map_err(|e| err(path, e))?;
        mesh(path, &mut chart)?;
        chart
            .draw_series(LineSeries::new(rows.iter().copied(), &BLACK))
            .map_err(|e| err(path, e))?;
        root.present().map_err(|e| err(path, e))
    }
}

