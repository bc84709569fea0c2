//! Scalar comparison problems `w'' + w'/r - k^2 w / r^2 = N(w)`, `w(0) = 0`, `w(R) = w_R`.

use serde::{Deserialize, Serialize};

use super::{SolverError, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::grid::RadialGrid;
use crate::linalg::BandMatrix;
use crate::params::MaterialParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScalarKind {
    /// `N(w) = w [-a^2 - (sqrt 2/3) b^2 w + (4c^2/3) w^2]`.
    UI,
    /// `N(w) = c^2 w (w^2 - s_+^2/2)`.
    UII,
    /// `N(w) = mu c^2 w (w^2 - s_+^2/2)`.
    UIII,
}

/// `N(w) = w (linear + quadratic w + cubic w^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarNonlinearity {
    pub linear: f64,
    pub quadratic: f64,
    pub cubic: f64,
}

impl ScalarNonlinearity {
    pub fn for_kind(p: &MaterialParams, kind: ScalarKind) -> Self {
        let d = p.constants();
        let half_s2 = 0.5 * d.s_plus * d.s_plus;
        match kind {
            ScalarKind::UI => Self {
                linear: -p.a2(),
                quadratic: -std::f64::consts::SQRT_2 / 3.0 * p.b2(),
                cubic: 4.0 * p.c2() / 3.0,
            },
            ScalarKind::UII => Self { linear: -p.c2() * half_s2, quadratic: 0.0, cubic: p.c2() },
            ScalarKind::UIII => {
                let c2 = d.mu * p.c2();
                Self { linear: -c2 * half_s2, quadratic: 0.0, cubic: c2 }
            }
        }
    }

    pub fn value(&self, w: f64) -> f64 {
        w * (self.linear + w * (self.quadratic + w * self.cubic))
    }

    pub fn derivative(&self, w: f64) -> f64 {
        self.linear + w * (2.0 * self.quadratic + 3.0 * w * self.cubic)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarProfile {
    pub grid: RadialGrid,
    pub w: Vec<f64>,
    pub kind: ScalarKind,
    pub params: MaterialParams,
    pub residual_norm: f64,
}

/// Comparison profile of the given kind with `w(R) = s_+/sqrt 2`.
pub fn solve_scalar(p: &MaterialParams, g: &RadialGrid, kind: ScalarKind) -> Result<ScalarProfile, SolverError> {
    let nl = ScalarNonlinearity::for_kind(p, kind);
    let (w, residual_norm) = solve_scalar_problem(g, p.k(), p.constants().u_inf, nl, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    Ok(ScalarProfile { grid: g.clone(), w, kind, params: *p, residual_norm })
}

fn residual(g: &RadialGrid, k2: f64, boundary: f64, nl: &ScalarNonlinearity, w: &[f64]) -> Vec<f64> {
    let n = g.intervals();
    let r = g.nodes();
    let wt = g.weights();
    let flux = |e: usize| g.edge_conductance(e) * (w[e + 1] - w[e]);
    let mut res = vec![0.0; n + 1];
    res[0] = w[0];
    for i in 1..n {
        res[i] = (flux(i) - flux(i - 1)) / wt[i] - k2 * w[i] / (r[i] * r[i]) - nl.value(w[i]);
    }
    res[n] = w[n] - boundary;
    res
}

fn max_norm(res: &[f64]) -> f64 {
    res[1..res.len() - 1].iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Damped Newton for a scalar radial problem on the same flux-form stencil as the coupled system.
/// Returns the samples and the final max-norm of the interior rows.
pub fn solve_scalar_problem(
    g: &RadialGrid,
    k: i32,
    boundary_value: f64,
    nl: ScalarNonlinearity,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64), SolverError> {
    let n = g.intervals();
    let r = g.nodes();
    let wt = g.weights();
    let k2 = f64::from(k) * f64::from(k);
    let m = k.unsigned_abs() as i32 - 1;
    let rate = nl.derivative(boundary_value);
    let scale = if rate > 0.0 { (0.5 * rate).sqrt() } else { std::f64::consts::FRAC_1_SQRT_2 };
    let mut w: Vec<f64> = r.iter().map(|&x| boundary_value * (scale * x).tanh() * (x / (1.0 + x)).powi(m)).collect();
    w[0] = 0.0;
    w[n] = boundary_value;

    let mut res = residual(g, k2, boundary_value, &nl, &w);
    let mut norm = max_norm(&res);
    let mut it = 0;
    let mut polished = false;
    loop {
        if norm <= tol && polished {
            return Ok((w, norm));
        }
        if it >= max_iter {
            if norm <= tol {
                return Ok((w, norm));
            }
            return Err(SolverError::NoConvergence { iterations: it, last_norm: norm });
        }
        it += 1;
        let mut jac = BandMatrix::zeros(n + 1, 1, 1);
        jac.add(0, 0, 1.0);
        for i in 1..n {
            let left = g.edge_conductance(i - 1) / wt[i];
            let right = g.edge_conductance(i) / wt[i];
            jac.add(i, i - 1, left);
            jac.add(i, i + 1, right);
            jac.add(i, i, -left - right - k2 / (r[i] * r[i]) - nl.derivative(w[i]));
        }
        jac.add(n, n, 1.0);
        let lu = jac.factor().ok_or(SolverError::SingularJacobian(it))?;
        let mut step: Vec<f64> = res.iter().map(|x| -x).collect();
        lu.solve(&mut step);

        if norm <= tol {
            polished = true;
            let mut trial: Vec<f64> = w.iter().zip(&step).map(|(a, d)| a + d).collect();
            (trial[0], trial[n]) = (0.0, boundary_value);
            let tres = residual(g, k2, boundary_value, &nl, &trial);
            let tnorm = max_norm(&tres);
            if tnorm < norm {
                (w, res, norm) = (trial, tres, tnorm);
            }
            continue;
        }

        let merit = res.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=30 {
            let mut trial: Vec<f64> = w.iter().zip(&step).map(|(a, d)| a + alpha * d).collect();
            (trial[0], trial[n]) = (0.0, boundary_value);
            let tres = residual(g, k2, boundary_value, &nl, &trial);
            let tmerit = tres.iter().map(|x| x * x).sum::<f64>().sqrt();
            if tmerit.is_finite() && tmerit < (1.0 - 1e-4 * alpha) * merit {
                norm = max_norm(&tres);
                (w, res) = (trial, tres);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(SolverError::NoConvergence { iterations: it, last_norm: norm });
        }
    }
}
