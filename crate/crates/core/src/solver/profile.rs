use serde::{Deserialize, Serialize};

use crate::analysis::predicted_tail_coeffs;
use crate::grid::RadialGrid;
use crate::params::MaterialParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Newton,
    EnergyMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcMode {
    /// `u(R) = u_inf`, `v(R) = v_inf`.
    DirichletConst,
    /// Outer values shifted by the `r^-2` far-field correction.
    AsymptoticCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    Finite { radius: f64 },
    TruncatedInfinite { radius: f64, bc_mode: BcMode },
}

impl Boundary {
    pub fn radius(&self) -> f64 {
        match *self {
            Boundary::Finite { radius } | Boundary::TruncatedInfinite { radius, .. } => radius,
        }
    }

    /// Dirichlet values `(u(R), v(R))`.
    pub fn outer_values(&self, p: &MaterialParams) -> (f64, f64) {
        let d = p.constants();
        match *self {
            Boundary::Finite { .. } | Boundary::TruncatedInfinite { bc_mode: BcMode::DirichletConst, .. } => {
                (d.u_inf, d.v_inf)
            }
            Boundary::TruncatedInfinite { radius, bc_mode: BcMode::AsymptoticCorrected } => {
                match predicted_tail_coeffs(p) {
                    Ok((a_u, a_v)) => {
                        let r2 = radius * radius;
                        (d.u_inf - a_u / r2, d.v_inf - a_v / r2)
                    }
                    Err(_) => (d.u_inf, d.v_inf),
                }
            }
        }
    }
}

/// Discrete `(u, v)` on a grid plus how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePair {
    pub grid: RadialGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub params: MaterialParams,
    /// Newton: max-norm of the collocated residual at non-Dirichlet rows.
    /// Energy minimisation: max-norm of the preconditioned projected gradient.
    pub residual_norm: f64,
    pub method: Method,
    pub boundary: Boundary,
    pub iterations: usize,
}

impl ProfilePair {
    pub fn radius(&self) -> f64 {
        self.grid.radius()
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    /// Samples of this profile on another grid. Outside the current domain the
    /// far-field expansion `u_inf - A_u/r^2`, `v_inf - A_v/r^2` is used.
    pub fn transfer_to(&self, target: &RadialGrid) -> (Vec<f64>, Vec<f64>) {
        let d = self.params.constants();
        let (a_u, a_v) = predicted_tail_coeffs(&self.params).unwrap_or((0.0, 0.0));
        let r_max = self.radius();
        target
            .nodes()
            .iter()
            .map(|&r| {
                if r <= r_max {
                    (self.grid.interpolate(&self.u, r), self.grid.interpolate(&self.v, r))
                } else {
                    // Blend from the last sample into the expansion so the transfer is continuous.
                    let (u_end, v_end) = (*self.u.last().unwrap(), *self.v.last().unwrap());
                    let s = (r_max / r).powi(2);
                    let r2 = r * r;
                    let tail_u = d.u_inf - a_u / r2 + s * (u_end - (d.u_inf - a_u / (r_max * r_max)));
                    let tail_v = d.v_inf - a_v / r2 + s * (v_end - (d.v_inf - a_v / (r_max * r_max)));
                    (tail_u, tail_v)
                }
            })
            .unzip()
    }
}
