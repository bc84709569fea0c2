//! Emulation of the problem on `(0, inf)` by continuation over growing domains.

use serde::{Deserialize, Serialize};

use super::newton::{solve_bvp, NewtonSettings};
use super::profile::{BcMode, Boundary, ProfilePair};
use super::SolverError;
use crate::grid::{build_grid, Grading};
use crate::params::MaterialParams;

pub const MIN_INFINITE_RADIUS: f64 = 50.0;

/// `[R/8, R/4, R/2, R]`.
pub fn ladder_radii(r_max: f64) -> [f64; 4] {
    [r_max / 8.0, r_max / 4.0, r_max / 2.0, r_max]
}

/// Solves on each rung of [`ladder_radii`] with a composite grid of `n` intervals,
/// starting every rung from the previous profile extended by its far-field expansion.
pub fn solve_infinite(
    p: &MaterialParams,
    r_max: f64,
    n: usize,
    bc_mode: BcMode,
    tol: f64,
) -> Result<ProfilePair, SolverError> {
    if p.b2() == 0.0 && !p.is_diagnostic() {
        return Err(SolverError::Refused("b2 = 0 on the infinite domain has no solution; diagnostic mode required".into()));
    }
    if !(r_max >= MIN_INFINITE_RADIUS) {
        return Err(SolverError::Refused(format!("R_max = {r_max} is below {MIN_INFINITE_RADIUS}")));
    }
    let settings = NewtonSettings::with_tol(tol, super::DEFAULT_MAX_ITER);
    let mut previous: Option<ProfilePair> = None;
    for radius in ladder_radii(r_max) {
        let rung = |source| SolverError::Rung { radius, source: Box::new(source) };
        let g = build_grid(radius, n, Grading::Composite).map_err(|e| rung(e.into()))?;
        let boundary = Boundary::TruncatedInfinite { radius, bc_mode };
        let start = previous.as_ref().map(|prof| prof.transfer_to(&g));
        previous = Some(solve_bvp(p, &g, start, boundary, settings).map_err(rung)?);
    }
    Ok(previous.expect("ladder has four rungs"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSample {
    pub r_max: f64,
    /// `max |v|` over `[0, R_max/2]`, absent when the rung failed.
    pub max_abs_v_inner: Option<f64>,
    pub error: Option<String>,
}

/// Report-only run for `b2 = 0`: how `max |v|` on the inner half moves as the domain grows.
pub fn b_zero_drift(p: &MaterialParams, radii: &[f64], n: usize, tol: f64) -> Vec<DriftSample> {
    radii
        .iter()
        .map(|&r_max| match solve_infinite(p, r_max, n, BcMode::DirichletConst, tol) {
            Ok(prof) => {
                let inner = prof.nodes().iter().zip(&prof.v).filter(|(r, _)| **r <= r_max / 2.0);
                let m = inner.fold(0.0f64, |m, (_, v)| m.max(v.abs()));
                DriftSample { r_max, max_abs_v_inner: Some(m), error: None }
            }
            Err(e) => DriftSample { r_max, max_abs_v_inner: None, error: Some(e.to_string()) },
        })
        .collect()
}
