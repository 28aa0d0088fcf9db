//! Discretized forward operator, matched adjoint and the Tikhonov solver.

mod image;
mod projector;
mod solver;

pub use image::{Image, ImageGrid};
pub use projector::{adjoint, forward, Projector};
pub use solver::{
    cost, gradient, gradient_energy, lipschitz_estimate, neg_laplacian, projector, reconstruct,
    solve, IterationRecord, LinearOperator, Solution, SolverConfig, StepRule,
};
