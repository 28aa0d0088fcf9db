//! Discrete generalized Radon transform (GRT) toolkit.
//!
//! The crate covers the whole pipeline used to study how a jump
//! discontinuity is resolved by Tikhonov-regularized reconstruction from
//! discretely sampled GRT data:
//!
//! * [`geometry`]: GRT models (circular and classical Radon), the
//!   determinant `Δ_Φ`, curvatures and tangency fans at a boundary point.
//! * [`phantom`]: piecewise-constant disk phantoms.
//! * [`sampling`]: sinogram grids, analytic data synthesis, interpolation
//!   kernels and upsampling to a dense working grid.
//! * [`recon`]: matched forward/adjoint projectors and gradient descent.
//! * [`dtb`]: the predicted discrete transition behavior of an edge.
//! * [`analysis`]: edge profile extraction and comparison.
//! * [`experiment`]: config-driven orchestration used by the CLI.

pub mod analysis;
pub mod config;
pub mod dtb;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod io;
pub mod phantom;
pub mod quadrature;
pub mod recon;
pub mod sampling;

pub use error::{Error, Result};
pub use geometry::{CircularGrt, ClassicalRadon, GrtModel, Model, Tangency, Vec2};
pub use phantom::Phantom;
