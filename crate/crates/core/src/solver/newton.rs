use super::energy::{minimize_energy_samples, StepRule};
use super::profile::{Boundary, Method, ProfilePair};
use super::residual::{ode_jacobian, ode_residual_with, unknown_index, OdeResidual};
use super::{SolverError, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::grid::RadialGrid;
use crate::params::MaterialParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Max-norm of the ODE rows at which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Extra full steps after reaching `tol`, kept only while the residual drops.
    pub polish_steps: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, max_halvings: 30, polish_steps: 2 }
    }
}

impl NewtonSettings {
    pub fn with_tol(tol: f64, max_iter: usize) -> Self {
        Self { tol, max_iter, ..Self::default() }
    }
}

/// `u0 = u_inf tanh(r/sqrt 2) (r/(1+r))^(|k|-1)`, `v0 = v_inf`, boundary nodes pinned to `outer`.
pub fn default_initial_guess(p: &MaterialParams, g: &RadialGrid, outer: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    let d = p.constants();
    let m = p.k().unsigned_abs() as i32 - 1;
    let mut u: Vec<f64> = g
        .nodes()
        .iter()
        .map(|&r| d.u_inf * (r / std::f64::consts::SQRT_2).tanh() * (r / (1.0 + r)).powi(m))
        .collect();
    let mut v = vec![d.v_inf; g.len()];
    u[0] = 0.0;
    *u.last_mut().unwrap() = outer.0;
    *v.last_mut().unwrap() = outer.1;
    (u, v)
}

pub fn solve_finite(
    p: &MaterialParams,
    g: &RadialGrid,
    init: Option<&ProfilePair>,
    tol: f64,
    max_iter: usize,
) -> Result<ProfilePair, SolverError> {
    solve_finite_with(p, g, init, NewtonSettings::with_tol(tol, max_iter))
}

pub fn solve_finite_with(
    p: &MaterialParams,
    g: &RadialGrid,
    init: Option<&ProfilePair>,
    settings: NewtonSettings,
) -> Result<ProfilePair, SolverError> {
    let boundary = Boundary::Finite { radius: g.radius() };
    let start = init.map(|prof| prof.transfer_to(g));
    solve_bvp(p, g, start, boundary, settings)
}

/// Newton from `start` followed by the default-initializer and energy-descent fallbacks.
pub(crate) fn solve_bvp(
    p: &MaterialParams,
    g: &RadialGrid,
    start: Option<(Vec<f64>, Vec<f64>)>,
    boundary: Boundary,
    settings: NewtonSettings,
) -> Result<ProfilePair, SolverError> {
    let outer = boundary.outer_values(p);
    if let Some((mut u, mut v)) = start {
        g.check_len(u.len())?;
        g.check_len(v.len())?;
        pin_boundary(&mut u, &mut v, outer);
        if let Ok(found) = solve_with_outer(p, g, (u, v), boundary, settings) {
            return Ok(found);
        }
    }
    let guess = default_initial_guess(p, g, outer);
    match solve_with_outer(p, g, guess.clone(), boundary, settings) {
        Ok(found) => Ok(found),
        Err(err @ SolverError::SignViolation { .. }) => Err(err),
        Err(first) => {
            // Hard start: descend the energy first, then let Newton finish.
            let relaxed = minimize_energy_samples(p, g, guess, outer, StepRule::default(), 1e-6, 20_000);
            match relaxed {
                Ok(m) => solve_with_outer(p, g, (m.u, m.v), boundary, settings).map_err(|_| first),
                Err(_) => Err(first),
            }
        }
    }
}

fn pin_boundary(u: &mut [f64], v: &mut [f64], outer: (f64, f64)) {
    u[0] = 0.0;
    *u.last_mut().unwrap() = outer.0;
    *v.last_mut().unwrap() = outer.1;
}

/// One damped Newton run from `start` with the sign check; no fallbacks.
pub fn solve_with_outer(
    p: &MaterialParams,
    g: &RadialGrid,
    start: (Vec<f64>, Vec<f64>),
    boundary: Boundary,
    settings: NewtonSettings,
) -> Result<ProfilePair, SolverError> {
    let outer = boundary.outer_values(p);
    let (mut u, mut v) = start;
    g.check_len(u.len())?;
    g.check_len(v.len())?;
    pin_boundary(&mut u, &mut v, outer);
    let (u, v, residual_norm, iterations) = newton(p, g, u, v, outer, settings)?;
    check_signs(g, &u, &v)?;
    Ok(ProfilePair { grid: g.clone(), u, v, params: *p, residual_norm, method: Method::Newton, boundary, iterations })
}

pub(crate) fn check_signs(g: &RadialGrid, u: &[f64], v: &[f64]) -> Result<(), SolverError> {
    let n = g.intervals();
    for i in 0..=n {
        let u_bad = i > 0 && u[i] <= 0.0;
        if u_bad || v[i] >= 0.0 {
            return Err(SolverError::SignViolation { node: i, radius: g.nodes()[i], u: u[i], v: v[i] });
        }
    }
    Ok(())
}

type NewtonResult = (Vec<f64>, Vec<f64>, f64, usize);

fn newton(
    p: &MaterialParams,
    g: &RadialGrid,
    mut u: Vec<f64>,
    mut v: Vec<f64>,
    outer: (f64, f64),
    s: NewtonSettings,
) -> Result<NewtonResult, SolverError> {
    let nodes = g.len();
    let mut res = ode_residual_with(p, g, &u, &v, outer)?;
    let mut norm = res.interior_max_norm();
    let mut polished = 0;
    let mut it = 0;
    loop {
        let converged = norm <= s.tol;
        if converged && polished >= s.polish_steps {
            return Ok((u, v, norm, it));
        }
        if it >= s.max_iter {
            if converged {
                return Ok((u, v, norm, it));
            }
            return Err(SolverError::NoConvergence { iterations: it, last_norm: norm });
        }
        it += 1;
        let lu = ode_jacobian(p, g, &u, &v)?.factor().ok_or(SolverError::SingularJacobian(it))?;
        let mut step = interleave(&res);
        step.iter_mut().for_each(|x| *x = -*x);
        lu.solve(&mut step);

        if converged {
            polished += 1;
            let (tu, tv) = apply_step(&u, &v, &step, 1.0, outer);
            let tres = ode_residual_with(p, g, &tu, &tv, outer)?;
            let tnorm = tres.interior_max_norm();
            if tnorm < norm {
                (u, v, res, norm) = (tu, tv, tres, tnorm);
                continue;
            }
            return Ok((u, v, norm, it));
        }

        let merit = res.l2_norm();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=s.max_halvings {
            let (tu, tv) = apply_step(&u, &v, &step, alpha, outer);
            let tres = ode_residual_with(p, g, &tu, &tv, outer)?;
            let tmerit = tres.l2_norm();
            if tmerit.is_finite() && tmerit < (1.0 - 1e-4 * alpha) * merit {
                accepted = Some((tu, tv, tres));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((tu, tv, tres)) => {
                norm = tres.interior_max_norm();
                (u, v, res) = (tu, tv, tres);
            }
            None => return Err(SolverError::NoConvergence { iterations: it, last_norm: norm }),
        }
        debug_assert_eq!(u.len(), nodes);
    }
}

fn interleave(res: &OdeResidual) -> Vec<f64> {
    let mut out = vec![0.0; 2 * res.u.len()];
    for i in 0..res.u.len() {
        out[unknown_index(i, 0)] = res.u[i];
        out[unknown_index(i, 1)] = res.v[i];
    }
    out
}

/// `x + alpha step` with the Dirichlet entries reset exactly.
fn apply_step(u: &[f64], v: &[f64], step: &[f64], alpha: f64, outer: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    let mut tu: Vec<f64> = u.iter().enumerate().map(|(i, x)| x + alpha * step[unknown_index(i, 0)]).collect();
    let mut tv: Vec<f64> = v.iter().enumerate().map(|(i, x)| x + alpha * step[unknown_index(i, 1)]).collect();
    pin_boundary(&mut tu, &mut tv, outer);
    (tu, tv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Grading};

    #[test]
    fn sign_check_reports_first_offending_node() {
        let g = build_grid(1.0, 16, Grading::Uniform).unwrap();
        let mut u = vec![0.5; 17];
        u[0] = 0.0;
        let mut v = vec![-0.5; 17];
        assert!(check_signs(&g, &u, &v).is_ok());
        v[3] = 0.0;
        match check_signs(&g, &u, &v) {
            Err(SolverError::SignViolation { node, .. }) => assert_eq!(node, 3),
            other => panic!("{other:?}"),
        }
        v[3] = -0.5;
        u[7] = -1e-3;
        assert!(matches!(check_signs(&g, &u, &v), Err(SolverError::SignViolation { node: 7, .. })));
    }

    #[test]
    fn initial_guess_lies_in_sign_cone() {
        let p = MaterialParams::new(1.0, 1.0, 1.0, 3).unwrap();
        let g = build_grid(20.0, 200, Grading::Composite).unwrap();
        let d = p.constants();
        let (u, v) = default_initial_guess(&p, &g, (d.u_inf, d.v_inf));
        assert!(check_signs(&g, &u, &v).is_ok());
        // r^|k| behaviour at the core.
        let (r1, r2) = (g.nodes()[1], g.nodes()[2]);
        let slope = (u[2] / u[1]).ln() / (r2 / r1).ln();
        assert!((slope - 3.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn newton_iteration_limit_is_reported() {
        let p = MaterialParams::new(1.0, 1.0, 1.0, 1).unwrap();
        let g = build_grid(20.0, 200, Grading::Composite).unwrap();
        let err = solve_with_outer(
            &p,
            &g,
            default_initial_guess(&p, &g, (p.constants().u_inf, p.constants().v_inf)),
            Boundary::Finite { radius: 20.0 },
            NewtonSettings { tol: 1e-300, max_iter: 2, max_halvings: 30, polish_steps: 0 },
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::NoConvergence { iterations: 2, .. }), "{err:?}");
    }
}
