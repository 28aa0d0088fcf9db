//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dtb::{uniform_grid, DtbConfig};
use crate::error::{Error, Result};
use crate::geometry::{CircularGrt, ClassicalRadon, Model, Vec2};
use crate::phantom::{disk_phantom, Phantom};
use crate::recon::{ImageGrid, SolverConfig, StepRule};
use crate::sampling::{KernelSpec, SinogramGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    Circular { radius: f64 },
    ClassicalRadon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomConfig {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default = "one")]
    pub inside: f64,
    #[serde(default)]
    pub outside: f64,
    /// Boundary point `x0 = center + radius·(cos β₀, sin β₀)`, `β₀` in units of π.
    pub beta0_over_pi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Synthesis {
    #[default]
    Exact,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub n_alpha: usize,
    pub n_p: usize,
    /// Dense working grid; defaults to `8/3` times the coarse spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_n_alpha: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_n_p: Option<usize>,
    #[serde(default)]
    pub kernel_alpha: KernelSpec,
    #[serde(default)]
    pub kernel_p: KernelSpec,
    #[serde(default)]
    pub synthesis: Synthesis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageConfig {
    pub n: usize,
    /// `R_rec`: the region is `[−R_rec, R_rec]²`.
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub kappa: f64,
    #[serde(default = "default_step_rule")]
    pub step_rule: StepRule,
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
    #[serde(default = "default_stop_consecutive")]
    pub stop_consecutive: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtbSection {
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
    #[serde(default = "default_quad_points")]
    pub quad_points: usize,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_r_step")]
    pub r_step: f64,
}

impl Default for DtbSection {
    fn default() -> Self {
        DtbSection {
            lambda_max: default_lambda_max(),
            quad_points: default_quad_points(),
            r_min: default_r_min(),
            r_max: default_r_max(),
            r_step: default_r_step(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    /// Metrics are taken over `window_lo ≤ x̌ ≤ window_hi`.
    #[serde(default = "default_window_lo")]
    pub window_lo: f64,
    #[serde(default = "default_window_hi")]
    pub window_hi: f64,
    /// Sampled profile `x̌ ∈ [x_min, x_max]` with step `x_step`.
    #[serde(default = "default_r_min")]
    pub x_min: f64,
    #[serde(default = "default_r_max")]
    pub x_max: f64,
    #[serde(default = "default_x_step")]
    pub x_step: f64,
}

impl Default for CompareSection {
    fn default() -> Self {
        CompareSection {
            window_lo: default_window_lo(),
            window_hi: default_window_hi(),
            x_min: default_r_min(),
            x_max: default_r_max(),
            x_step: default_x_step(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    #[serde(default)]
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub phantom: PhantomConfig,
    pub sampling: SamplingConfig,
    pub image: ImageConfig,
    pub solver: SolverSection,
    #[serde(default)]
    pub dtb: DtbSection,
    #[serde(default)]
    pub compare: CompareSection,
    pub output: OutputSection,
}

fn one() -> f64 {
    1.0
}
fn default_step_rule() -> StepRule {
    StepRule::InverseLipschitz { power_iterations: 30 }
}
fn default_stop_tol() -> f64 {
    1e-6
}
fn default_stop_consecutive() -> usize {
    3
}
fn default_max_iters() -> usize {
    2000
}
fn default_lambda_max() -> f64 {
    400.0
}
fn default_quad_points() -> usize {
    64
}
fn default_r_min() -> f64 {
    -8.0
}
fn default_r_max() -> f64 {
    8.0
}
fn default_r_step() -> f64 {
    0.05
}
fn default_x_step() -> f64 {
    0.1
}
fn default_window_lo() -> f64 {
    -6.0
}
fn default_window_hi() -> f64 {
    6.0
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be a positive number, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config("toml", e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    /// The configuration with every default made explicit.
    pub fn effective(&self) -> Self {
        let mut c = self.clone();
        let d = self.dense_grid_sizes();
        c.sampling.dense_n_alpha = Some(d.0);
        c.sampling.dense_n_p = Some(d.1);
        c
    }

    pub fn validate(&self) -> Result<()> {
        if let ModelConfig::Circular { radius } = self.model {
            positive("model.radius", radius)?;
            let reach = self.image.half_width * 2f64.sqrt();
            if reach >= radius {
                return Err(Error::config(
                    "image.half_width",
                    format!("region diagonal {reach} must stay inside the circle of centers (R = {radius})"),
                ));
            }
        }
        positive("phantom.radius", self.phantom.radius)?;
        if !self.phantom.beta0_over_pi.is_finite() {
            return Err(Error::config("phantom.beta0_over_pi", "must be finite"));
        }
        positive("image.half_width", self.image.half_width)?;
        if self.image.n < 3 {
            return Err(Error::config("image.n", "need at least 3 nodes per axis"));
        }
        let [cx, cy] = self.phantom.center;
        let hw = self.image.half_width;
        let r = self.phantom.radius;
        if cx - r <= -hw || cx + r >= hw || cy - r <= -hw || cy + r >= hw {
            return Err(Error::config("phantom", "disk must lie strictly inside the image region"));
        }
        if self.sampling.n_alpha == 0 {
            return Err(Error::config("sampling.n_alpha", "must be positive"));
        }
        if self.sampling.n_p < 2 {
            return Err(Error::config("sampling.n_p", "must be at least 2"));
        }
        let (da, dp) = self.dense_grid_sizes();
        if da < self.sampling.n_alpha {
            return Err(Error::config("sampling.dense_n_alpha", "dense grid must not be coarser than the data"));
        }
        if dp < self.sampling.n_p {
            return Err(Error::config("sampling.dense_n_p", "dense grid must not be coarser than the data"));
        }
        positive("solver.kappa", self.solver.kappa)?;
        positive("solver.stop_tol", self.solver.stop_tol)?;
        if self.solver.stop_consecutive == 0 {
            return Err(Error::config("solver.stop_consecutive", "must be at least 1"));
        }
        match self.solver.step_rule {
            StepRule::Fixed { step } => positive("solver.step_rule.step", step)?,
            StepRule::InverseLipschitz { power_iterations: 0 } => {
                return Err(Error::config("solver.step_rule.power_iterations", "must be at least 1"))
            }
            _ => {}
        }
        positive("dtb.lambda_max", self.dtb.lambda_max)?;
        if self.dtb.quad_points == 0 {
            return Err(Error::config("dtb.quad_points", "must be positive"));
        }
        positive("dtb.r_step", self.dtb.r_step)?;
        if self.dtb.r_max <= self.dtb.r_min {
            return Err(Error::config("dtb.r_max", "must exceed dtb.r_min"));
        }
        positive("compare.x_step", self.compare.x_step)?;
        let c = &self.compare;
        if c.x_max < c.x_min || c.window_hi < c.window_lo {
            return Err(Error::config("compare", "empty profile range or window"));
        }
        if c.window_lo < c.x_min || c.window_hi > c.x_max {
            return Err(Error::config("compare.window", "window must lie inside [x_min, x_max]"));
        }
        if c.x_min < self.dtb.r_min || c.x_max > self.dtb.r_max {
            return Err(Error::config("compare", "profile range must lie inside the DTB r-grid"));
        }
        Ok(())
    }

    pub fn model(&self) -> Model {
        let reach = self.image.half_width * 2f64.sqrt();
        match self.model {
            ModelConfig::Circular { radius } => Model::Circular(CircularGrt::new(radius)),
            ModelConfig::ClassicalRadon => Model::ClassicalRadon(ClassicalRadon::new(reach * 1.01)),
        }
    }

    pub fn phantom(&self) -> Result<Phantom> {
        let p = &self.phantom;
        disk_phantom(Vec2::new(p.center[0], p.center[1]), p.radius, p.inside, p.outside)
    }

    pub fn x0(&self) -> Result<Vec2> {
        Ok(self.phantom()?.boundary_point(self.phantom.beta0_over_pi * std::f64::consts::PI))
    }

    /// `[p_min, p_max]` covering every curve through the region.
    pub fn p_range(&self) -> (f64, f64) {
        let reach = self.image.half_width * 2f64.sqrt();
        match self.model {
            ModelConfig::Circular { radius } => (radius - reach, radius + reach),
            ModelConfig::ClassicalRadon => (-reach, reach),
        }
    }

    pub fn coarse_grid(&self) -> Result<SinogramGrid> {
        let (lo, hi) = self.p_range();
        SinogramGrid::full_scan(self.sampling.n_alpha, self.sampling.n_p, lo, hi)
    }

    pub fn dense_grid_sizes(&self) -> (usize, usize) {
        let s = &self.sampling;
        let na = s
            .dense_n_alpha
            .unwrap_or_else(|| (s.n_alpha * 8).div_ceil(3));
        let np = s
            .dense_n_p
            .unwrap_or_else(|| ((s.n_p - 1) * 8).div_ceil(3) + 1);
        (na, np)
    }

    pub fn dense_grid(&self) -> Result<SinogramGrid> {
        let (lo, hi) = self.p_range();
        let (na, np) = self.dense_grid_sizes();
        SinogramGrid::full_scan(na, np, lo, hi)
    }

    pub fn image_grid(&self) -> ImageGrid {
        ImageGrid::square(self.image.n, self.image.half_width)
    }

    pub fn epsilon(&self) -> Result<f64> {
        Ok(self.coarse_grid()?.epsilon())
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let s = &self.solver;
        Ok(SolverConfig {
            kappa: s.kappa,
            epsilon: self.epsilon()?,
            step_rule: s.step_rule,
            stop_tol: s.stop_tol,
            stop_consecutive: s.stop_consecutive,
            max_iters: s.max_iters,
        })
    }

    pub fn dtb_config(&self) -> Result<DtbConfig> {
        let g = self.coarse_grid()?;
        Ok(DtbConfig {
            kappa: self.solver.kappa,
            mu: g.mu(),
            kernel_alpha: self.sampling.kernel_alpha,
            kernel_p: self.sampling.kernel_p,
            lambda_max: self.dtb.lambda_max,
            quad_points: self.dtb.quad_points,
            r_grid: uniform_grid(self.dtb.r_min, self.dtb.r_max, self.dtb.r_step),
        })
    }

    pub fn x_check_grid(&self) -> Vec<f64> {
        uniform_grid(self.compare.x_min, self.compare.x_max, self.compare.x_step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[model]
kind = "circular"
radius = 10.0

[phantom]
center = [1.0, 1.0]
radius = 2.0
beta0_over_pi = -0.17

[sampling]
n_alpha = 300
n_p = 451

[image]
n = 801
half_width = 3.7

[solver]
kappa = 0.5

[output]
dir = "out"
"#;

    #[test]
    fn defaults_and_derived_grids() {
        let c = ExperimentConfig::from_toml_str(FULL).unwrap();
        assert_eq!(c.dense_grid_sizes(), (800, 1201));
        let eps = c.epsilon().unwrap();
        assert!((eps - 2.0 * 3.7 * 2f64.sqrt() / 450.0).abs() < 1e-15);
        assert_eq!(c.solver.max_iters, 2000);
        assert_eq!(c.dtb_config().unwrap().r_grid.len(), 321);
    }

    #[test]
    fn effective_config_round_trips() {
        let c = ExperimentConfig::from_toml_str(FULL).unwrap().effective();
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = FULL.replace("kappa = 0.5", "kappa = -1.0");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap_err();
        assert!(err.to_string().contains("solver.kappa"), "{err}");
        let bad = FULL.replace("radius = 2.0", "radius = 3.0");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap_err();
        assert!(err.to_string().contains("phantom"), "{err}");
        let bad = FULL.replace("n = 801", "n = 801\nextra = 1");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }
}
