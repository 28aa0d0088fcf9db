//! Piecewise-constant disk phantoms.

use crate::error::{Error, Result};
use crate::geometry::{second_directional, Vec2};
use crate::recon::{Image, ImageGrid};

/// `f = inside` on `{H < 0}`, `outside` on `{H > 0}`, with
/// `H(x) = |x − center| − radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phantom {
    pub center: Vec2,
    pub radius: f64,
    pub inside_value: f64,
    pub outside_value: f64,
}

/// Builds a disk phantom; `radius` must be positive.
pub fn disk_phantom(center: Vec2, radius: f64, inside: f64, outside: f64) -> Result<Phantom> {
    if !(radius > 0.0) {
        return Err(Error::config("phantom.radius", "must be positive"));
    }
    Ok(Phantom {
        center,
        radius,
        inside_value: inside,
        outside_value: outside,
    })
}

impl Phantom {
    pub fn h(&self, x: Vec2) -> f64 {
        (x - self.center).norm() - self.radius
    }

    pub fn grad_h(&self, x: Vec2) -> Vec2 {
        (x - self.center).normalized()
    }

    /// Value change across `S` in the `+∂ₓH` direction.
    pub fn jump(&self) -> f64 {
        self.outside_value - self.inside_value
    }

    pub fn value(&self, x: Vec2) -> f64 {
        let h = self.h(x);
        if h < 0.0 {
            self.inside_value
        } else if h > 0.0 {
            self.outside_value
        } else {
            0.5 * (self.inside_value + self.outside_value)
        }
    }

    /// `center + radius·(cos β, sin β)`.
    pub fn boundary_point(&self, beta: f64) -> Vec2 {
        self.center + Vec2::polar(beta) * self.radius
    }

    /// Signed curvature `−∂ₓ²H(e,e)/|∂ₓH|` of `S` at `x`.
    pub fn curvature(&self, x: Vec2) -> Result<f64> {
        let g = self.grad_h(x);
        let gn = g.norm();
        if !(gn > 1e-12) {
            return Err(Error::Degenerate(format!(
                "|∂ₓH| vanishes at ({}, {})",
                x.x, x.y
            )));
        }
        let e = (g * (1.0 / gn)).perp();
        Ok(-second_directional(|p| self.grad_h(p), x, e) / gn)
    }

    /// Samples the phantom at pixel centers.
    pub fn rasterize(&self, grid: &ImageGrid) -> Image {
        let mut img = Image::zeros(*grid);
        for iy in 0..grid.n_y {
            for ix in 0..grid.n_x {
                let v = self.value(grid.node(ix, iy));
                img.values[iy * grid.n_x + ix] = v;
            }
        }
        img
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sec9_disk() -> Phantom {
        disk_phantom(Vec2::new(1.0, 1.0), 2.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn jump_and_values() {
        let p = sec9_disk();
        assert_eq!(p.jump(), -1.0);
        assert_eq!(p.value(p.center), 1.0);
        let b = p.center + Vec2::new(2.0, 0.0);
        assert_eq!(p.h(b), 0.0);
        assert_eq!(p.value(b), 0.5);
        assert_eq!(p.value(Vec2::new(5.0, 5.0)), 0.0);
    }

    #[test]
    fn rejects_nonpositive_radius() {
        assert!(disk_phantom(Vec2::new(0.0, 0.0), 0.0, 1.0, 0.0).is_err());
        assert!(disk_phantom(Vec2::new(0.0, 0.0), -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn boundary_points_and_normals() {
        let p = sec9_disk();
        for k in 0..64 {
            let beta = -PI + k as f64 * PI / 32.0;
            let x = p.boundary_point(beta);
            assert!(p.h(x).abs() < 1e-12);
            let n = p.grad_h(x);
            assert!((n - Vec2::polar(beta)).norm() < 1e-12);
        }
    }

    #[test]
    fn boundary_curvature() {
        let p = sec9_disk();
        let k = p.curvature(p.boundary_point(-0.17 * PI)).unwrap();
        assert!((k.abs() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn rasterized_area() {
        let p = sec9_disk();
        let grid = ImageGrid::square(801, 3.7);
        let img = p.rasterize(&grid);
        let area: f64 = img.values.iter().sum::<f64>() * grid.dx() * grid.dy();
        assert!((area - 4.0 * PI).abs() / (4.0 * PI) < 0.02, "area {area}");
    }

    #[test]
    fn zero_jump_is_constant() {
        let p = disk_phantom(Vec2::new(0.0, 0.0), 1.0, 0.25, 0.25).unwrap();
        let img = p.rasterize(&ImageGrid::square(33, 2.0));
        assert!(img.values.iter().all(|&v| v == 0.25));
    }

    #[test]
    fn single_pixel_grid() {
        let p = sec9_disk();
        let grid = ImageGrid {
            n_x: 1,
            n_y: 1,
            x_min: 1.0,
            x_max: 1.0,
            y_min: 1.0,
            y_max: 1.0,
        };
        assert_eq!(p.rasterize(&grid).values, vec![1.0]);
    }
}
