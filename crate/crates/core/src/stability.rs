//! Second variation of the energy along the out-of-plane mode
//! `P = w(r) (n x e3 + e3 x n)` and its Hardy-substituted form in `xi = w / u`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, RadialGrid};
use crate::linalg::lowest_eigenpair;
use crate::params::{sqrt3, sqrt6};
use crate::solver::ProfilePair;

/// Minimal number of grid nodes strictly inside the support of the eigenproblem.
pub const MIN_SUPPORT_NODES: usize = 30;

/// Rayleigh quotients below `-CERTIFICATE_TOL` produce a certificate.
pub const CERTIFICATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("perturbation is nonzero at r = {radius} (node {node}); it must vanish at both ends of the domain")]
    SupportViolation { node: usize, radius: f64 },
    #[error("support [{lo}, {hi}] does not fit in (0, {radius}]")]
    SupportOutsideDomain { lo: f64, hi: f64, radius: f64 },
    #[error("support holds {nodes} interior nodes, at least {MIN_SUPPORT_NODES} required")]
    SupportTooCoarse { nodes: usize },
    #[error("eigen-iteration failed")]
    EigenFailure,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// `c_k = (1 + (-1)^(k+1)) / 2`: 1 for odd `k`, 0 for even `k`.
pub fn parity_constant(k: i32) -> f64 {
    if k % 2 == 0 {
        0.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FormKind {
    WForm,
    XiForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFormSpec {
    pub k: i32,
    pub c_k: f64,
    pub form_kind: FormKind,
}

impl QuadraticFormSpec {
    pub fn for_profile(profile: &ProfilePair, form_kind: FormKind) -> Self {
        let k = profile.params.k();
        Self { k, c_k: parity_constant(k), form_kind }
    }

    pub fn evaluate(&self, profile: &ProfilePair, f: &[f64]) -> Result<f64, StabilityError> {
        match self.form_kind {
            FormKind::WForm => w_form(profile, f),
            FormKind::XiForm => xi_form(profile, f),
        }
    }
}

fn check_support(g: &RadialGrid, f: &[f64]) -> Result<(), StabilityError> {
    g.check_len(f.len())?;
    for node in [0, g.intervals()] {
        if f[node] != 0.0 {
            return Err(StabilityError::SupportViolation { node, radius: g.nodes()[node] });
        }
    }
    Ok(())
}

/// `-(b^2/sqrt 2)(u + sqrt3 v)`, the potential gained by tilting the director out of plane.
fn tilt_potential(profile: &ProfilePair, i: usize) -> f64 {
    -profile.params.b2() / SQRT_2 * (profile.u[i] + sqrt3() * profile.v[i])
}

/// `sum_e r_{e+1/2}/h_e (dw)^2 + sum_i w_i [ (k^2+c_k)/(4r^2) - a^2 + (2/sqrt6) b^2 v
/// + c^2 (u^2+v^2) - (b^2/sqrt2)(u + sqrt3 v) ] w_i^2`.
pub fn w_form(profile: &ProfilePair, w: &[f64]) -> Result<f64, StabilityError> {
    let g = &profile.grid;
    check_support(g, w)?;
    let p = &profile.params;
    let (r, wt) = (g.nodes(), g.weights());
    let angular = (p.k2() + parity_constant(p.k())) / 4.0;
    let mut total = 0.0;
    for e in 0..g.intervals() {
        total += g.edge_conductance(e) * (w[e + 1] - w[e]).powi(2);
    }
    for i in 1..g.intervals() {
        let (u, v) = (profile.u[i], profile.v[i]);
        let bulk = -p.a2() + 2.0 / sqrt6() * p.b2() * v + p.c2() * (u * u + v * v);
        total += wt[i] * (angular / (r[i] * r[i]) + bulk + tilt_potential(profile, i)) * w[i] * w[i];
    }
    Ok(total)
}

/// `sum_e r_{e+1/2}/h_e ubar_e^2 (dxi)^2 + sum_i w_i u_i^2 [ -(3k^2 - c_k)/(4r^2) - (b^2/sqrt2)(u + sqrt3 v) ] xi_i^2`
/// with `ubar_e^2 = (u_e^2 + u_{e+1}^2)/2`.
pub fn xi_form(profile: &ProfilePair, xi: &[f64]) -> Result<f64, StabilityError> {
    xi_form_for_winding(profile, xi, profile.params.k())
}

/// [`xi_form`] with the Hardy coefficient of winding `k` but the profile of `profile`.
pub fn xi_form_for_winding(profile: &ProfilePair, xi: &[f64], k: i32) -> Result<f64, StabilityError> {
    let g = &profile.grid;
    check_support(g, xi)?;
    let (r, wt) = (g.nodes(), g.weights());
    let u = &profile.u;
    let hardy = (3.0 * f64::from(k * k) - parity_constant(k)) / 4.0;
    let mut total = 0.0;
    for e in 0..g.intervals() {
        let ubar2 = 0.5 * (u[e] * u[e] + u[e + 1] * u[e + 1]);
        total += g.edge_conductance(e) * ubar2 * (xi[e + 1] - xi[e]).powi(2);
    }
    for i in 1..g.intervals() {
        total += wt[i] * u[i] * u[i] * (-hardy / (r[i] * r[i]) + tilt_potential(profile, i)) * xi[i] * xi[i];
    }
    Ok(total)
}

/// [`xi_form`] with `u = 1` and the tilt potential removed:
/// `sum_e r_{e+1/2}/h_e (dxi)^2 - sum_i w_i (3k^2 - c_k)/(4 r_i^2) xi_i^2`.
pub fn hardy_form(g: &RadialGrid, xi: &[f64], k: i32) -> Result<f64, StabilityError> {
    check_support(g, xi)?;
    let (r, wt) = (g.nodes(), g.weights());
    let hardy = (3.0 * f64::from(k * k) - parity_constant(k)) / 4.0;
    let mut total = 0.0;
    for e in 0..g.intervals() {
        total += g.edge_conductance(e) * (xi[e + 1] - xi[e]).powi(2);
    }
    for i in 1..g.intervals() {
        total -= wt[i] * hardy / (r[i] * r[i]) * xi[i] * xi[i];
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TestFamily {
    /// `sin((ln r - 2 n pi)/2)` on `(e^{2 n pi}, e^{2(n+1) pi})`.
    LogSine { n: u32 },
    /// `sin(omega ln(r / r_a))` on `(r_a, r_a e^{pi/omega})`.
    RescaledLogSine { r_a: f64, omega: f64 },
    /// `exp(-((r - center)/width)^2) - e^{-16}` on `[center - 4 width, center + 4 width]`.
    GaussianBump { center: f64, width: f64 },
}

impl TestFamily {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            TestFamily::LogSine { n } => ((2.0 * PI * f64::from(n)).exp(), (2.0 * PI * f64::from(n + 1)).exp()),
            TestFamily::RescaledLogSine { r_a, omega } => (r_a, r_a * (PI / omega).exp()),
            TestFamily::GaussianBump { center, width } => (center - 4.0 * width, center + 4.0 * width),
        }
    }

    /// Rescaled log-sine filling `(r_a, r_b)` with exactly one half-wave.
    pub fn log_sine_on(r_a: f64, r_b: f64) -> Self {
        TestFamily::RescaledLogSine { r_a, omega: PI / (r_b / r_a).ln() }
    }

    fn raw(&self, r: f64) -> f64 {
        match *self {
            TestFamily::LogSine { n } => ((r.ln() - 2.0 * PI * f64::from(n)) / 2.0).sin(),
            TestFamily::RescaledLogSine { r_a, omega } => (omega * (r / r_a).ln()).sin(),
            TestFamily::GaussianBump { center, width } => (-((r - center) / width).powi(2)).exp() - (-16f64).exp(),
        }
    }
}

/// Samples of `family` on `g`, zero outside the open support. A positive `smoothing`
/// multiplies by a `(1 - cos)/2` ramp of that length at both support ends.
pub fn test_function(g: &RadialGrid, family: TestFamily, smoothing: f64) -> Result<Vec<f64>, StabilityError> {
    let (lo, hi) = family.support();
    let radius = g.radius();
    if !(lo > 0.0 && lo < hi && hi <= radius * (1.0 + 1e-12)) {
        return Err(StabilityError::SupportOutsideDomain { lo, hi, radius });
    }
    let ramp = |d: f64| if smoothing > 0.0 && d < smoothing { 0.5 * (1.0 - (PI * d / smoothing).cos()) } else { 1.0 };
    let mut out: Vec<f64> = g
        .nodes()
        .iter()
        .map(|&r| if r > lo && r < hi { family.raw(r) * ramp(r - lo) * ramp(hi - r) } else { 0.0 })
        .collect();
    *out.last_mut().unwrap() = 0.0;
    Ok(out)
}

/// Smooth random perturbation supported in a random sub-annulus of `(lo, hi)`.
pub fn random_test_function(g: &RadialGrid, lo: f64, hi: f64, rng: &mut impl Rng) -> Vec<f64> {
    let (tl, th) = (lo.ln(), hi.ln());
    let a = tl + rng.random_range(0.0..0.3) * (th - tl);
    let b = th - rng.random_range(0.0..0.3) * (th - tl);
    let amps: [f64; 3] = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
    let scale = rng.random_range(0.5..2.0);
    let mut out: Vec<f64> = g
        .nodes()
        .iter()
        .map(|&r| {
            if r <= 0.0 {
                return 0.0;
            }
            let s = (r.ln() - a) / (b - a);
            if s <= 0.0 || s >= 1.0 {
                return 0.0;
            }
            let modes: f64 = amps.iter().enumerate().map(|(j, c)| c * ((j + 1) as f64 * PI * s).sin()).sum();
            scale * (PI * s).sin().powi(2) * (1.0 + modes)
        })
        .collect();
    *out.last_mut().unwrap() = 0.0;
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub k: i32,
    pub c_k: f64,
    pub support: [f64; 2],
    pub nodes_in_support: usize,
    /// Lowest eigenvalue of the `xi` form against `sum_i w_i u_i^2 xi_i^2`.
    pub min_rayleigh: f64,
    /// Eigenvector on the full grid, max-norm one, present iff `min_rayleigh < -CERTIFICATE_TOL`.
    pub certificate: Option<Vec<f64>>,
    /// [`xi_form`] of the certificate, evaluated independently of the eigen-solve.
    pub certificate_form_value: Option<f64>,
    pub form_values: BTreeMap<String, f64>,
    /// Max over five random `xi` of `|w_form(u xi) - xi_form(xi)| / (1 + |xi_form(xi)|)`.
    pub hardy_identity_error: f64,
    /// Set for `|k| = 1`, where no sign claim is made.
    pub open_question: bool,
}

/// `[R/4, R]`.
pub fn default_support(r_max: f64) -> (f64, f64) {
    (r_max / 4.0, r_max)
}

/// Relative Hardy-identity defect `|w_form(u xi) - xi_form(xi)| / (1 + |xi_form(xi)|)`.
pub fn hardy_identity_defect(profile: &ProfilePair, xi: &[f64]) -> Result<f64, StabilityError> {
    let w: Vec<f64> = xi.iter().zip(&profile.u).map(|(x, u)| x * u).collect();
    let lhs = w_form(profile, &w)?;
    let rhs = xi_form(profile, xi)?;
    Ok((lhs - rhs).abs() / (1.0 + rhs.abs()))
}

/// Minimises the generalised Rayleigh quotient of [`xi_form`] over perturbations
/// vanishing at every node outside the open annulus `support`.
pub fn minimize_rayleigh(profile: &ProfilePair, support: (f64, f64), seed: u64) -> Result<StabilityReport, StabilityError> {
    let g = &profile.grid;
    let (lo, hi) = support;
    let radius = g.radius();
    if !(lo > 0.0 && lo < hi && hi <= radius * (1.0 + 1e-12)) {
        return Err(StabilityError::SupportOutsideDomain { lo, hi, radius });
    }
    let idx: Vec<usize> = (1..g.intervals()).filter(|&i| g.nodes()[i] > lo && g.nodes()[i] < hi).collect();
    if idx.len() < MIN_SUPPORT_NODES {
        return Err(StabilityError::SupportTooCoarse { nodes: idx.len() });
    }
    let k = profile.params.k();
    let c_k = parity_constant(k);
    let hardy = (3.0 * f64::from(k * k) - c_k) / 4.0;
    let (r, wt, u) = (g.nodes(), g.weights(), &profile.u);
    let edge = |e: usize| g.edge_conductance(e) * 0.5 * (u[e] * u[e] + u[e + 1] * u[e + 1]);

    // Symmetrised pencil D A D with D = diag(w_i u_i^2)^(-1/2).
    let scale: Vec<f64> = idx.iter().map(|&i| 1.0 / (wt[i] * u[i] * u[i]).sqrt()).collect();
    let diag: Vec<f64> = idx
        .iter()
        .zip(&scale)
        .map(|(&i, d)| {
            let stiff = edge(i - 1) + edge(i);
            let pot = wt[i] * u[i] * u[i] * (-hardy / (r[i] * r[i]) + tilt_potential(profile, i));
            (stiff + pot) * d * d
        })
        .collect();
    let off: Vec<f64> = (0..idx.len() - 1).map(|j| -edge(idx[j]) * scale[j] * scale[j + 1]).collect();
    let pair = lowest_eigenpair(&diag, &off).ok_or(StabilityError::EigenFailure)?;
    if !pair.value.is_finite() {
        return Err(StabilityError::EigenFailure);
    }

    let (certificate, certificate_form_value) = if pair.value < -CERTIFICATE_TOL {
        let mut xi = vec![0.0; g.len()];
        for (j, &i) in idx.iter().enumerate() {
            xi[i] = pair.vector[j] * scale[j];
        }
        let top = xi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        xi.iter_mut().for_each(|x| *x /= top);
        let value = xi_form(profile, &xi)?;
        (Some(xi), Some(value))
    } else {
        (None, None)
    };

    let mut form_values = BTreeMap::new();
    let log_sine = test_function(g, TestFamily::log_sine_on(lo, hi), 0.0)?;
    form_values.insert("rescaled_log_sine".to_string(), xi_form(profile, &log_sine)?);
    let bump = TestFamily::GaussianBump { center: 0.5 * (lo + hi), width: (hi - lo) / 8.0 };
    form_values.insert("gaussian_bump".to_string(), xi_form(profile, &test_function(g, bump, 0.0)?)?);
    let unscaled = TestFamily::LogSine { n: 0 };
    if unscaled.support().1 <= radius {
        form_values.insert("log_sine_n0".to_string(), xi_form(profile, &test_function(g, unscaled, 0.0)?)?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hardy_identity_error = 0.0f64;
    for _ in 0..5 {
        let xi = random_test_function(g, lo, hi, &mut rng);
        hardy_identity_error = hardy_identity_error.max(hardy_identity_defect(profile, &xi)?);
    }

    Ok(StabilityReport {
        k,
        c_k,
        support: [lo, hi],
        nodes_in_support: idx.len(),
        min_rayleigh: pair.value,
        certificate,
        certificate_form_value,
        form_values,
        hardy_identity_error,
        open_question: k.abs() == 1,
    })
}

/// `max |r^2 (b^2/sqrt2)(u + sqrt3 v) + k^2/2| / (k^2/2)` over the nodes in `[lo, hi]`.
pub fn far_field_potential_defect(profile: &ProfilePair, lo: f64, hi: f64) -> f64 {
    let half_k2 = profile.params.k2() / 2.0;
    profile
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, r)| (lo..=hi).contains(*r))
        .map(|(i, r)| (-r * r * tilt_potential(profile, i) + half_k2).abs() / half_k2)
        .fold(0.0, f64::max)
}
