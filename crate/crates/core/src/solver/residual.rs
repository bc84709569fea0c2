use crate::grid::{GridError, RadialGrid};
use crate::linalg::BandMatrix;
use crate::params::{bulk_gradient, bulk_hessian, MaterialParams};

/// Residual rows of the collocated system, one entry per node.
///
/// Rows `u[0]`, `u[N]`, `v[N]` are Dirichlet identity rows; every other row is
/// the strong form of the corresponding ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeResidual {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl OdeResidual {
    /// Max-norm over the ODE rows (`u[1..N]`, `v[0..N]`).
    pub fn interior_max_norm(&self) -> f64 {
        let n = self.u.len() - 1;
        self.u[1..n].iter().chain(&self.v[..n]).fold(0.0f64, |m, r| m.max(r.abs()))
    }

    /// Euclidean norm over all rows, used as the line-search merit.
    pub fn l2_norm(&self) -> f64 {
        self.u.iter().chain(&self.v).map(|r| r * r).sum::<f64>().sqrt()
    }
}

/// Index of `u_i` (`component = 0`) or `v_i` (`component = 1`) in the interleaved Newton vector.
#[inline]
pub fn unknown_index(node: usize, component: usize) -> usize {
    2 * node + component
}

/// Residuals of
/// `u'' + u'/r - k^2 u / r^2 - u [-a^2 + sqrt(2/3) b^2 v + c^2 (u^2 + v^2)]` and
/// `v'' + v'/r - v [-a^2 - b^2 v / sqrt(6) + c^2 (u^2 + v^2)] - b^2 u^2 / sqrt(6)`,
/// with the finite-domain outer values `(u_inf, v_inf)`.
pub fn ode_residual(p: &MaterialParams, g: &RadialGrid, u: &[f64], v: &[f64]) -> Result<OdeResidual, GridError> {
    let d = p.constants();
    ode_residual_with(p, g, u, v, (d.u_inf, d.v_inf))
}

pub fn ode_residual_with(
    p: &MaterialParams,
    g: &RadialGrid,
    u: &[f64],
    v: &[f64],
    outer: (f64, f64),
) -> Result<OdeResidual, GridError> {
    g.check_len(u.len())?;
    g.check_len(v.len())?;
    let n = g.intervals();
    let r = g.nodes();
    let w = g.weights();
    let k2 = p.k2();
    let flux = |f: &[f64], e: usize| g.edge_conductance(e) * (f[e + 1] - f[e]);

    let mut ru = vec![0.0; n + 1];
    let mut rv = vec![0.0; n + 1];
    ru[0] = u[0];
    let (_, gv0) = bulk_gradient(p, u[0], v[0]);
    rv[0] = flux(v, 0) / w[0] - gv0;
    for i in 1..n {
        let (gu, gv) = bulk_gradient(p, u[i], v[i]);
        ru[i] = (flux(u, i) - flux(u, i - 1)) / w[i] - k2 * u[i] / (r[i] * r[i]) - gu;
        rv[i] = (flux(v, i) - flux(v, i - 1)) / w[i] - gv;
    }
    ru[n] = u[n] - outer.0;
    rv[n] = v[n] - outer.1;
    Ok(OdeResidual { u: ru, v: rv })
}

/// Analytic Jacobian of [`ode_residual_with`] in the interleaved ordering of [`unknown_index`].
pub fn ode_jacobian(p: &MaterialParams, g: &RadialGrid, u: &[f64], v: &[f64]) -> Result<BandMatrix, GridError> {
    g.check_len(u.len())?;
    g.check_len(v.len())?;
    let n = g.intervals();
    let r = g.nodes();
    let w = g.weights();
    let k2 = p.k2();
    let mut jac = BandMatrix::zeros(2 * (n + 1), 2, 2);
    let (iu, iv) = (|i| unknown_index(i, 0), |i| unknown_index(i, 1));

    jac.add(iu(0), iu(0), 1.0);
    let c0 = g.edge_conductance(0) / w[0];
    let h0 = bulk_hessian(p, u[0], v[0]);
    jac.add(iv(0), iv(0), -c0 - h0[1][1]);
    jac.add(iv(0), iv(1), c0);
    jac.add(iv(0), iu(0), -h0[1][0]);

    for i in 1..n {
        let left = g.edge_conductance(i - 1) / w[i];
        let right = g.edge_conductance(i) / w[i];
        let h = bulk_hessian(p, u[i], v[i]);
        jac.add(iu(i), iu(i - 1), left);
        jac.add(iu(i), iu(i + 1), right);
        jac.add(iu(i), iu(i), -left - right - k2 / (r[i] * r[i]) - h[0][0]);
        jac.add(iu(i), iv(i), -h[0][1]);
        jac.add(iv(i), iv(i - 1), left);
        jac.add(iv(i), iv(i + 1), right);
        jac.add(iv(i), iv(i), -left - right - h[1][1]);
        jac.add(iv(i), iu(i), -h[1][0]);
    }
    jac.add(iu(n), iu(n), 1.0);
    jac.add(iv(n), iv(n), 1.0);
    Ok(jac)
}
