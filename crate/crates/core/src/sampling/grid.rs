use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on the data domain:
/// `α_j = alpha0 + j·d_alpha`, `p_k = p0 + k·d_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinogramGrid {
    pub n_alpha: usize,
    pub n_p: usize,
    pub alpha0: f64,
    pub d_alpha: f64,
    pub p0: f64,
    pub d_p: f64,
}

impl SinogramGrid {
    /// Full angular scan `α ∈ [0, 2π)` with `n_p` nodes spanning
    /// `[p_min, p_max]` inclusive.
    pub fn full_scan(n_alpha: usize, n_p: usize, p_min: f64, p_max: f64) -> Result<Self> {
        if n_alpha == 0 {
            return Err(Error::config("n_alpha", "must be positive"));
        }
        if n_p < 2 {
            return Err(Error::config("n_p", "must be at least 2"));
        }
        if !(p_max > p_min) {
            return Err(Error::config("p range", "p_max must exceed p_min"));
        }
        Ok(SinogramGrid {
            n_alpha,
            n_p,
            alpha0: 0.0,
            d_alpha: TAU / n_alpha as f64,
            p0: p_min,
            d_p: (p_max - p_min) / (n_p - 1) as f64,
        })
    }

    /// Native resolution `ε = Δp`.
    pub fn epsilon(&self) -> f64 {
        self.d_p
    }

    /// `μ = Δα/ε`.
    pub fn mu(&self) -> f64 {
        self.d_alpha / self.d_p
    }

    pub fn alpha(&self, j: usize) -> f64 {
        self.alpha0 + j as f64 * self.d_alpha
    }

    pub fn p(&self, k: usize) -> f64 {
        self.p0 + k as f64 * self.d_p
    }

    pub fn p_max(&self) -> f64 {
        self.p(self.n_p - 1)
    }

    pub fn len(&self) -> usize {
        self.n_alpha * self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether the angular nodes tile the full circle.
    pub fn is_full_circle(&self) -> bool {
        (self.d_alpha * self.n_alpha as f64 - TAU).abs() < 1e-9
    }

    /// Quadrature weight of one cell, `Δα·Δp`.
    pub fn cell_measure(&self) -> f64 {
        self.d_alpha * self.d_p
    }

    pub fn same_as(&self, other: &SinogramGrid) -> bool {
        self.n_alpha == other.n_alpha
            && self.n_p == other.n_p
            && (self.alpha0 - other.alpha0).abs() < 1e-12
            && (self.d_alpha - other.d_alpha).abs() < 1e-12
            && (self.p0 - other.p0).abs() < 1e-12
            && (self.d_p - other.d_p).abs() < 1e-12
    }
}

/// Sampled GRT data, row-major: `values[j·n_p + k]` at `(α_j, p_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    pub grid: SinogramGrid,
    pub values: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(grid: SinogramGrid) -> Self {
        Sinogram {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.grid.n_p + k]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.grid.n_p..(j + 1) * self.grid.n_p]
    }

    /// `⟨a, b⟩_V = Σ ΔαΔp a b`.
    pub fn dot(&self, other: &Sinogram) -> f64 {
        self.grid.cell_measure()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_scale_constants() {
        let r_rec = 3.7_f64;
        let g = SinogramGrid::full_scan(300, 451, 10.0 - r_rec * 2f64.sqrt(), 10.0 + r_rec * 2f64.sqrt())
            .unwrap();
        // ε = 2·3.7·√2 / 450, μ = (2π/300)/ε
        let eps = 2.0 * r_rec * 2f64.sqrt() / 450.0;
        assert!((g.epsilon() - eps).abs() < 1e-15);
        assert!((g.epsilon() - 0.023256).abs() < 1e-6);
        assert!((g.mu() - 0.9006).abs() < 1e-4);
        assert!((g.mu() * g.epsilon() - g.d_alpha).abs() < 1e-15);
        assert!(g.is_full_circle());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SinogramGrid::full_scan(0, 10, 0.0, 1.0).is_err());
        assert!(SinogramGrid::full_scan(10, 1, 0.0, 1.0).is_err());
        assert!(SinogramGrid::full_scan(10, 10, 1.0, 1.0).is_err());
    }
}
