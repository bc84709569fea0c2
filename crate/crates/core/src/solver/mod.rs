//! Solvers for the coupled `(u, v)` boundary value problem on `(0, R)`.
//!
//! The discrete system is the exact Euler-Lagrange system of
//! [`discrete_energy`]: residual rows are `-dE/dx_i / w_i`. Newton and the
//! projected gradient minimiser therefore share their fixed points.

mod energy;
mod infinite;
mod newton;
mod profile;
mod residual;
mod scalar;

use thiserror::Error;

use crate::grid::GridError;

pub use energy::{discrete_energy, energy_gradient, minimize_energy, renormalized_energy, EnergyMinimization, StepRule};
pub use infinite::{b_zero_drift, ladder_radii, solve_infinite, DriftSample, MIN_INFINITE_RADIUS};
pub use newton::{default_initial_guess, solve_finite, solve_finite_with, solve_with_outer, NewtonSettings};
pub use profile::{BcMode, Boundary, Method, ProfilePair};
pub use residual::{ode_jacobian, ode_residual, ode_residual_with, unknown_index, OdeResidual};
pub use scalar::{solve_scalar, solve_scalar_problem, ScalarKind, ScalarNonlinearity, ScalarProfile};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("no convergence after {iterations} iterations (last residual {last_norm:e})")]
    NoConvergence { iterations: usize, last_norm: f64 },
    #[error("converged branch violates u > 0, v < 0 at node {node} (r = {radius}, u = {u}, v = {v})")]
    SignViolation { node: usize, radius: f64, u: f64, v: f64 },
    #[error("singular Jacobian at iteration {0}")]
    SingularJacobian(usize),
    #[error("request refused: {0}")]
    Refused(String),
    #[error("ladder rung R = {radius} failed: {source}")]
    Rung { radius: f64, source: Box<SolverError> },
    #[error("invalid initial profile: {0}")]
    InvalidInit(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl SolverError {
    /// Innermost error, looking through ladder rungs.
    pub fn root_cause(&self) -> &SolverError {
        match self {
            SolverError::Rung { source, .. } => source.root_cause(),
            other => other,
        }
    }
}
