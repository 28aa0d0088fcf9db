use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Rect, Vec2};

/// Node grid on `[x_min, x_max] × [y_min, y_max]`; the outermost ring of
/// nodes lies on the boundary of `U_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageGrid {
    pub n_x: usize,
    pub n_y: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl ImageGrid {
    /// `n × n` nodes on `[−half_width, half_width]²`.
    pub fn square(n: usize, half_width: f64) -> Self {
        ImageGrid {
            n_x: n,
            n_y: n,
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x < 3 || self.n_y < 3 {
            return Err(Error::config("image.n", "need at least 3 nodes per axis"));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(Error::config("image", "empty extent"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        if self.n_x > 1 {
            (self.x_max - self.x_min) / (self.n_x - 1) as f64
        } else {
            0.0
        }
    }

    pub fn dy(&self) -> f64 {
        if self.n_y > 1 {
            (self.y_max - self.y_min) / (self.n_y - 1) as f64
        } else {
            0.0
        }
    }

    /// Quadrature weight of one node, `Δx₁Δx₂`.
    pub fn pixel_measure(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.x_min + ix as f64 * self.dx(),
            self.y_min + iy as f64 * self.dy(),
        )
    }

    pub fn rect(&self) -> Rect {
        Rect {
            x_min: self.x_min,
            x_max: self.x_max,
            y_min: self.y_min,
            y_max: self.y_max,
        }
    }

    pub fn is_boundary(&self, ix: usize, iy: usize) -> bool {
        ix == 0 || iy == 0 || ix + 1 == self.n_x || iy + 1 == self.n_y
    }

    /// Bilinear interpolation weights at `p`: index of the lower-left node
    /// and fractional offsets, or `None` outside the grid.
    #[inline]
    pub fn locate(&self, p: Vec2) -> Option<(usize, f64, f64)> {
        let fx = (p.x - self.x_min) / self.dx();
        let fy = (p.y - self.y_min) / self.dy();
        let (mx, my) = ((self.n_x - 1) as f64, (self.n_y - 1) as f64);
        if !(fx >= 0.0 && fx <= mx && fy >= 0.0 && fy <= my) {
            return None;
        }
        let ix = (fx as usize).min(self.n_x - 2);
        let iy = (fy as usize).min(self.n_y - 2);
        Some((iy * self.n_x + ix, fx - ix as f64, fy - iy as f64))
    }

    pub fn same_as(&self, o: &ImageGrid) -> bool {
        self.n_x == o.n_x
            && self.n_y == o.n_y
            && (self.x_min - o.x_min).abs() < 1e-12
            && (self.x_max - o.x_max).abs() < 1e-12
            && (self.y_min - o.y_min).abs() < 1e-12
            && (self.y_max - o.y_max).abs() < 1e-12
    }
}

/// Node values, row-major in `y`: `values[iy·n_x + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub grid: ImageGrid,
    pub values: Vec<f64>,
}

impl Image {
    pub fn zeros(grid: ImageGrid) -> Self {
        Image {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.n_x + ix]
    }

    /// Bilinear sample; `None` outside the grid.
    pub fn sample(&self, p: Vec2) -> Option<f64> {
        let (i, tx, ty) = self.grid.locate(p)?;
        let nx = self.grid.n_x;
        let v = &self.values;
        Some(
            (1.0 - ty) * ((1.0 - tx) * v[i] + tx * v[i + 1])
                + ty * ((1.0 - tx) * v[i + nx] + tx * v[i + nx + 1]),
        )
    }

    /// `⟨a, b⟩_U = Σ Δx₁Δx₂ a b`.
    pub fn dot(&self, other: &Image) -> f64 {
        self.grid.pixel_measure()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest magnitude on the outermost ring of nodes.
    pub fn boundary_max_abs(&self) -> f64 {
        let g = self.grid;
        let mut m: f64 = 0.0;
        for iy in 0..g.n_y {
            for ix in 0..g.n_x {
                if g.is_boundary(ix, iy) {
                    m = m.max(self.get(ix, iy).abs());
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_reproduces_affine() {
        let g = ImageGrid::square(11, 1.0);
        let mut img = Image::zeros(g);
        for iy in 0..g.n_y {
            for ix in 0..g.n_x {
                let p = g.node(ix, iy);
                img.values[iy * g.n_x + ix] = 2.0 * p.x - 3.0 * p.y + 0.5;
            }
        }
        for &(x, y) in &[(0.13, -0.77), (1.0, 1.0), (-1.0, 0.3), (0.999, -0.999)] {
            let v = img.sample(Vec2::new(x, y)).unwrap();
            assert!((v - (2.0 * x - 3.0 * y + 0.5)).abs() < 1e-13);
        }
        assert!(img.sample(Vec2::new(1.01, 0.0)).is_none());
    }
}
