use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::params::{sqrt3, MaterialParams, RegimeTag};
use crate::solver::{solve_scalar_problem, ProfilePair, ScalarKind, ScalarNonlinearity, DEFAULT_MAX_ITER, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundName {
    Positivity,
    Negativity,
    Cone,
    Ball,
    VWindow,
    UUpper,
    Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub name: BoundName,
    pub satisfied: bool,
    /// Largest amount by which the inequality fails, clamped at zero.
    pub worst_violation: f64,
    /// Node radius where the inequality is tightest.
    pub worst_location: f64,
    /// `false` when the bound has no meaning for the regime (`b2 = 0`).
    pub applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub regime: RegimeTag,
    pub tolerance: f64,
    pub records: Vec<BoundRecord>,
}

impl BoundsReport {
    pub fn all_satisfied(&self) -> bool {
        self.records.iter().all(|r| r.satisfied)
    }

    pub fn get(&self, name: BoundName) -> Option<&BoundRecord> {
        self.records.iter().find(|r| r.name == name)
    }
}

/// Like [`verify_bounds`] but first checks that the profile was computed for `expected`.
pub fn verify_bounds_as(profile: &ProfilePair, expected: &MaterialParams, tol: f64) -> Result<BoundsReport, AnalysisError> {
    if profile.params != *expected {
        return Err(AnalysisError::RegimeMismatch { expected: *expected, found: profile.params });
    }
    verify_bounds(profile, tol)
}

/// Checks every bound at the interior nodes `0 < r_i < R`.
pub fn verify_bounds(profile: &ProfilePair, tol: f64) -> Result<BoundsReport, AnalysisError> {
    let p = &profile.params;
    let d = p.constants();
    let regime = p.regime().tag;
    let (s, sm) = (d.s_plus, d.s_minus);
    let sqrt23 = (2.0f64 / 3.0).sqrt();
    let r = profile.nodes();
    let (u, v) = (&profile.u, &profile.v);
    let interior = 1..r.len() - 1;

    let record = |name: BoundName, excess: &dyn Fn(usize) -> f64| {
        let (mut worst, mut at) = (f64::NEG_INFINITY, r[1]);
        for i in interior.clone() {
            let e = excess(i);
            if e > worst {
                (worst, at) = (e, r[i]);
            }
        }
        let worst = worst.max(0.0);
        BoundRecord { name, satisfied: worst <= tol, worst_violation: worst, worst_location: at, applicable: true }
    };
    let not_applicable = |name| BoundRecord {
        name,
        satisfied: true,
        worst_violation: 0.0,
        worst_location: r[1],
        applicable: false,
    };

    let mut records = vec![
        record(BoundName::Positivity, &|i| -u[i]),
        record(BoundName::Negativity, &|i| v[i]),
        record(BoundName::Cone, &|i| u[i] + sqrt3() * v[i]),
        record(BoundName::Ball, &|i| u[i] * u[i] + v[i] * v[i] - 2.0 / 3.0 * s * s),
        record(BoundName::UUpper, &|i| u[i] - d.u_inf),
    ];
    let low = -s / 6f64.sqrt();
    records.push(match regime {
        RegimeTag::Supercritical => record(BoundName::VWindow, &|i| (low - v[i]).max(v[i] - sqrt23 * sm)),
        RegimeTag::Critical => record(BoundName::VWindow, &|i| (v[i] - low).abs()),
        RegimeTag::Subcritical => record(BoundName::VWindow, &|i| (sqrt23 * sm - v[i]).max(v[i] - low)),
        RegimeTag::BZero => not_applicable(BoundName::VWindow),
    });

    let kind = match regime {
        RegimeTag::Supercritical | RegimeTag::Critical => Some(ScalarKind::UI),
        RegimeTag::Subcritical => Some(ScalarKind::UIII),
        RegimeTag::BZero => None,
    };
    records.push(match kind {
        Some(kind) => {
            // Same grid and same outer value as the profile.
            let nl = ScalarNonlinearity::for_kind(p, kind);
            let outer = *u.last().unwrap();
            let (w, _) = solve_scalar_problem(&profile.grid, p.k(), outer, nl, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            record(BoundName::Comparison, &|i| w[i] - u[i])
        }
        None => not_applicable(BoundName::Comparison),
    });
    Ok(BoundsReport { regime, tolerance: tol, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Grading};
    use crate::solver::{Boundary, Method};

    fn synthetic(p: MaterialParams, u: f64, v: f64) -> ProfilePair {
        let g = build_grid(5.0, 32, Grading::Uniform).unwrap();
        let n = g.len();
        ProfilePair {
            grid: g,
            u: vec![u; n],
            v: vec![v; n],
            params: p,
            residual_norm: 0.0,
            method: Method::Newton,
            boundary: Boundary::Finite { radius: 5.0 },
            iterations: 0,
        }
    }

    #[test]
    fn ball_violation_is_reported_with_its_size() {
        let p = MaterialParams::new(1.0, 1.0, 1.0, 1).unwrap();
        let s = p.constants().s_plus;
        let report = verify_bounds(&synthetic(p, s, 0.0), 1e-6).unwrap();
        let ball = report.get(BoundName::Ball).unwrap();
        assert!(!ball.satisfied);
        assert!((ball.worst_violation - s * s / 3.0).abs() < 1e-12);
        // v = 0 sits on the boundary of the negativity constraint.
        assert_eq!(report.get(BoundName::Negativity).unwrap().worst_violation, 0.0);
    }

    #[test]
    fn mismatched_parameters_are_rejected() {
        let p = MaterialParams::new(1.0, 1.0, 1.0, 1).unwrap();
        let q = MaterialParams::new(1.0, 3.0, 1.0, 1).unwrap();
        let prof = synthetic(p, 0.5, -0.5);
        assert!(matches!(verify_bounds_as(&prof, &q, 1e-6), Err(AnalysisError::RegimeMismatch { .. })));
    }

    #[test]
    fn b_zero_skips_regime_bounds() {
        let p = MaterialParams::diagnostic(1.0, 0.0, 1.0, 1).unwrap();
        let report = verify_bounds(&synthetic(p, 0.5, -0.5), 1e-6).unwrap();
        assert!(!report.get(BoundName::VWindow).unwrap().applicable);
        assert!(!report.get(BoundName::Comparison).unwrap().applicable);
    }
}
