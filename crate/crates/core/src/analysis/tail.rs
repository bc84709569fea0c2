use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{predicted_decoupled_coeffs, predicted_tail_coeffs, AnalysisError};
use crate::params::{sqrt3, MaterialParams};
use crate::solver::ProfilePair;

pub const MIN_TAIL_NODES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub window: [f64; 2],
    pub nodes_used: usize,
    pub fitted_u_const: f64,
    /// `u ~ fitted_u_const - fitted_u_coeff / r^2`.
    pub fitted_u_coeff: f64,
    pub fitted_v_const: f64,
    pub fitted_v_coeff: f64,
    pub predicted_u_coeff: Option<f64>,
    pub predicted_v_coeff: Option<f64>,
    pub rel_err_u: Option<f64>,
    pub rel_err_v: Option<f64>,
    /// Minus the log-log slope of `|u - u_inf + A_u / r^2|` over the window.
    pub remainder_order_estimate: Option<f64>,
}

fn window_nodes(profile: &ProfilePair, lo: f64, hi: f64) -> Result<Vec<usize>, AnalysisError> {
    let radius = profile.radius();
    if !(lo > 0.0 && lo < hi && hi <= radius * (1.0 + 1e-12)) {
        return Err(AnalysisError::WindowOutsideDomain { lo, hi, radius });
    }
    let idx: Vec<usize> = (0..profile.grid.len()).filter(|&i| (lo..=hi).contains(&profile.nodes()[i])).collect();
    if idx.len() < MIN_TAIL_NODES {
        return Err(AnalysisError::WindowTooSmall { lo, hi, nodes: idx.len() });
    }
    Ok(idx)
}

/// Least squares of `y` on `{1, (r_lo/r)^2}` weighted by the local spacing.
/// Returns `(c0, c2)` with `y ~ c0 - c2 / r^2`.
fn fit_inverse_square(r: &[f64], y: &[f64], lo: f64) -> (f64, f64) {
    let m = r.len();
    let spacing = |i: usize| {
        let left = if i > 0 { r[i] - r[i - 1] } else { 0.0 };
        let right = if i + 1 < m { r[i + 1] - r[i] } else { 0.0 };
        0.5 * (left + right)
    };
    let mut a = DMatrix::zeros(m, 2);
    let mut b = DVector::zeros(m);
    for i in 0..m {
        let s = spacing(i).sqrt();
        a[(i, 0)] = s;
        a[(i, 1)] = s * (lo / r[i]).powi(2);
        b[i] = s * y[i];
    }
    let c = a.svd(true, true).solve(&b, 1e-14).expect("SVD with both factors");
    (c[0], -c[1] * lo * lo)
}

/// `-slope` of `log|y|` against `log r`.
fn decay_order(r: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = r.iter().zip(y).filter(|(_, v)| v.abs() > 0.0).map(|(r, v)| (r.ln(), v.abs().ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    (sxx > 0.0).then(|| -sxy / sxx)
}

fn rel_err(fitted: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        fitted.abs()
    } else {
        ((fitted - predicted) / predicted).abs()
    }
}

/// Fits `c0 - c2 r^-2` to `u` and `v` on `window` and compares with the predicted coefficients.
/// For a vanishing prediction the relative error is the absolute fitted value.
pub fn fit_tail(profile: &ProfilePair, window: (f64, f64)) -> Result<TailFit, AnalysisError> {
    let (lo, hi) = window;
    let idx = window_nodes(profile, lo, hi)?;
    let r: Vec<f64> = idx.iter().map(|&i| profile.nodes()[i]).collect();
    let u: Vec<f64> = idx.iter().map(|&i| profile.u[i]).collect();
    let v: Vec<f64> = idx.iter().map(|&i| profile.v[i]).collect();
    let (u0, cu) = fit_inverse_square(&r, &u, lo);
    let (v0, cv) = fit_inverse_square(&r, &v, lo);
    let predicted = predicted_tail_coeffs(&profile.params).ok();
    let remainder = predicted.and_then(|(a_u, _)| {
        let u_inf = profile.params.constants().u_inf;
        let rem: Vec<f64> = r.iter().zip(&u).map(|(r, u)| u - u_inf + a_u / (r * r)).collect();
        decay_order(&r, &rem)
    });
    Ok(TailFit {
        window: [lo, hi],
        nodes_used: idx.len(),
        fitted_u_const: u0,
        fitted_u_coeff: cu,
        fitted_v_const: v0,
        fitted_v_coeff: cv,
        predicted_u_coeff: predicted.map(|c| c.0),
        predicted_v_coeff: predicted.map(|c| c.1),
        rel_err_u: predicted.map(|c| rel_err(cu, c.0)),
        rel_err_v: predicted.map(|c| rel_err(cv, c.1)),
        remainder_order_estimate: remainder,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoupledTailReport {
    pub window: [f64; 2],
    pub nodes_used: usize,
    /// Least-squares `x` in `X ~ -x / r^2`.
    pub fitted_x_coeff: f64,
    pub predicted_x_coeff: f64,
    pub predicted_y_coeff: f64,
    pub x_bar_order: Option<f64>,
    pub y_bar_order: Option<f64>,
    /// Critical regime only: `max |Y/X - sqrt 3|` on the window.
    pub critical_ratio_defect: Option<f64>,
}

/// Excluded layer next to `R`: ten decay lengths of the slowest far-field mode, at most `R/4`.
fn boundary_layer(p: &MaterialParams, radius: f64) -> f64 {
    let d = p.constants();
    let b2s = p.b2() * d.s_plus;
    let slow = b2s.min((4.0 * p.c2() * d.s_plus * d.s_plus - b2s) / 3.0);
    (10.0 / slow.sqrt()).min(radius / 4.0)
}

/// Checks `X = u_hat + sqrt3 v_hat` and `Y = sqrt3 u_hat - v_hat` against their `r^-2`
/// laws on the outer half-domain, excluding the layer near `R` where the Dirichlet
/// data pins the corrected quantities to zero.
pub fn decoupled_tail_check(profile: &ProfilePair) -> Result<DecoupledTailReport, AnalysisError> {
    let p = &profile.params;
    let (x_pred, y_pred) = predicted_decoupled_coeffs(p)?;
    let d = p.constants();
    let radius = profile.radius();
    let (lo, hi) = (radius / 2.0, radius - boundary_layer(p, radius));
    let idx = window_nodes(profile, lo, hi)?;
    let r: Vec<f64> = idx.iter().map(|&i| profile.nodes()[i]).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = idx
        .iter()
        .map(|&i| {
            let (uh, vh) = (profile.u[i] - d.u_inf, profile.v[i] - d.v_inf);
            (uh + sqrt3() * vh, sqrt3() * uh - vh)
        })
        .unzip();
    let (_, fitted_x) = fit_inverse_square(&r, &x, lo);
    let x_bar: Vec<f64> = r.iter().zip(&x).map(|(r, x)| x + x_pred / (r * r)).collect();
    let y_bar: Vec<f64> = r.iter().zip(&y).map(|(r, y)| y + y_pred / (r * r)).collect();
    let critical = matches!(p.regime().tag, crate::params::RegimeTag::Critical);
    let ratio = critical.then(|| x.iter().zip(&y).fold(0.0f64, |m, (x, y)| m.max((y / x - sqrt3()).abs())));
    Ok(DecoupledTailReport {
        window: [lo, hi],
        nodes_used: idx.len(),
        fitted_x_coeff: fitted_x,
        predicted_x_coeff: x_pred,
        predicted_y_coeff: y_pred,
        x_bar_order: decay_order(&r, &x_bar),
        y_bar_order: decay_order(&r, &y_bar),
        critical_ratio_defect: ratio,
    })
}
