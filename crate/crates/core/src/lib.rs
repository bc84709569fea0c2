//! Radial profiles of k-radially symmetric point defects in the two-dimensional
//! Landau-de Gennes model.
//!
//! A k-radially symmetric critical point has the form `Q = v(r) E0 + u(r) E1(phi)`
//! where `(u, v)` solve a coupled radial system. This crate discretises that
//! system, solves it on finite and (emulated) infinite domains, checks the
//! qualitative bounds and the far-field `r^-2` law, and evaluates the second
//! variation along the out-of-plane mode.

pub mod analysis;
pub mod grid;
pub mod linalg;
pub mod params;
pub mod solver;
pub mod stability;
pub mod tensor;

pub use analysis::{decoupled_tail_check, fit_tail, predicted_tail_coeffs, verify_bounds, AnalysisError, BoundsReport, TailFit};
pub use grid::{apply_radial_laplacian, build_grid, quadrature, Grading, GridError, RadialGrid};
pub use params::{
    bulk_density, bulk_gradient, bulk_hessian, classify_regime, derive_constants, DerivedConstants, MaterialParams, ParamError,
    Regime, RegimeTag,
};
pub use solver::{
    discrete_energy, minimize_energy, ode_residual, solve_finite, solve_infinite, solve_scalar, BcMode, Boundary, Method,
    ProfilePair, ScalarKind, ScalarProfile, SolverError,
};
pub use stability::{minimize_rayleigh, w_form, xi_form, StabilityError, StabilityReport};
pub use tensor::{reconstruct, QField};
