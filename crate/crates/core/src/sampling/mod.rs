//! Sinogram grids, data synthesis, interpolation kernels and upsampling.

mod grid;
mod kernel;
mod synth;
mod upsample;

pub use grid::{Sinogram, SinogramGrid};
pub use kernel::{bspline, keys_kernel, KernelSpec};
pub use synth::{
    ray_integral_exact, ray_integral_quadrature, synthesize_sinogram,
    synthesize_sinogram_quadrature,
};
pub use upsample::upsample;
