//! Checks on computed profiles: pointwise bounds, far-field tail fits and the
//! decoupled `X`, `Y` combinations of the linearised tail.

mod bounds;
mod tail;

use thiserror::Error;

use crate::params::{sqrt3, MaterialParams};
use crate::solver::SolverError;

pub use bounds::{verify_bounds, verify_bounds_as, BoundName, BoundRecord, BoundsReport};
pub use tail::{decoupled_tail_check, fit_tail, DecoupledTailReport, TailFit, MIN_TAIL_NODES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("profile parameters {found:?} differ from the requested {expected:?}")]
    RegimeMismatch { expected: MaterialParams, found: MaterialParams },
    #[error("tail coefficients are undefined for b2 = 0")]
    BZero,
    #[error("window [{lo}, {hi}] holds {nodes} nodes, at least {MIN_TAIL_NODES} required")]
    WindowTooSmall { lo: f64, hi: f64, nodes: usize },
    #[error("window [{lo}, {hi}] is not inside the domain [0, {radius}]")]
    WindowOutsideDomain { lo: f64, hi: f64, radius: f64 },
    #[error("comparison solve failed: {0}")]
    Comparison(#[from] SolverError),
}

/// `(A_u, A_v)` with `u ~ u_inf - A_u / r^2`, `v ~ v_inf - A_v / r^2` as `r -> inf`.
pub fn predicted_tail_coeffs(p: &MaterialParams) -> Result<(f64, f64), AnalysisError> {
    let b2 = p.b2();
    if b2 == 0.0 {
        return Err(AnalysisError::BZero);
    }
    let c2s = p.c2() * p.constants().s_plus;
    let denom = b2 * (4.0 * c2s - b2);
    let k2 = p.k2();
    let a_u = std::f64::consts::SQRT_2 * k2 / 2.0 * (2.0 * b2 + c2s) / denom;
    let a_v = 6f64.sqrt() * k2 / 2.0 * (c2s - b2) / denom;
    Ok((a_u, a_v))
}

/// Coefficients of `X = u_hat + sqrt3 v_hat ~ -x / r^2` and `Y = sqrt3 u_hat - v_hat ~ -y / r^2`.
pub fn predicted_decoupled_coeffs(p: &MaterialParams) -> Result<(f64, f64), AnalysisError> {
    let b2 = p.b2();
    if b2 == 0.0 {
        return Err(AnalysisError::BZero);
    }
    let k2 = p.k2();
    let root = 4.0 * p.c2() * p.constants().s_plus - b2;
    let x = k2 / (std::f64::consts::SQRT_2 * b2);
    let y = 3.0 * sqrt3() * k2 / (std::f64::consts::SQRT_2 * root);
    Ok((x, y))
}
