//! Material constants, the far-field uniaxial state and the bulk potential
//! restricted to the `(u, v)` plane spanned by `E1` and `E0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance on `b^4 - 3 a^2 c^2` below which the critical regime is reported.
pub const CRITICAL_REL_TOL: f64 = 1e-9;

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[inline]
pub(crate) fn sqrt3() -> f64 {
    3f64.sqrt()
}

#[inline]
pub(crate) fn sqrt6() -> f64 {
    6f64.sqrt()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("a2 must be positive and finite, got {0}")]
    A2(f64),
    #[error("c2 must be positive and finite, got {0}")]
    C2(f64),
    #[error("b2 must be non-negative and finite, got {0}")]
    B2(f64),
    #[error("b2 = 0 is only accepted in diagnostic mode")]
    BZeroRefused,
    #[error("winding index k must be nonzero")]
    ZeroWinding,
}

/// Landau-de Gennes constants `(a^2, b^2, c^2)` together with the winding index `k`.
///
/// `k` counts half-turns: the far-field director is `(cos(k phi/2), sin(k phi/2), 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    a2: f64,
    b2: f64,
    c2: f64,
    k: i32,
    diagnostic: bool,
}

impl MaterialParams {
    pub fn new(a2: f64, b2: f64, c2: f64, k: i32) -> Result<Self, ParamError> {
        Self::build(a2, b2, c2, k, false)
    }

    /// Like [`MaterialParams::new`] but also accepts `b2 = 0`.
    pub fn diagnostic(a2: f64, b2: f64, c2: f64, k: i32) -> Result<Self, ParamError> {
        Self::build(a2, b2, c2, k, true)
    }

    fn build(a2: f64, b2: f64, c2: f64, k: i32, diagnostic: bool) -> Result<Self, ParamError> {
        if !(a2.is_finite() && a2 > 0.0) {
            return Err(ParamError::A2(a2));
        }
        if !(c2.is_finite() && c2 > 0.0) {
            return Err(ParamError::C2(c2));
        }
        if !(b2.is_finite() && b2 >= 0.0) {
            return Err(ParamError::B2(b2));
        }
        if b2 == 0.0 && !diagnostic {
            return Err(ParamError::BZeroRefused);
        }
        if k == 0 {
            return Err(ParamError::ZeroWinding);
        }
        Ok(Self { a2, b2, c2, k, diagnostic })
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn k(&self) -> i32 {
        self.k
    }

    pub fn is_diagnostic(&self) -> bool {
        self.diagnostic
    }

    /// Same material, different winding index.
    pub fn with_k(&self, k: i32) -> Result<Self, ParamError> {
        Self::build(self.a2, self.b2, self.c2, k, self.diagnostic)
    }

    pub fn k2(&self) -> f64 {
        let k = self.k as f64;
        k * k
    }

    pub fn constants(&self) -> DerivedConstants {
        derive_constants(self)
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self, CRITICAL_REL_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub s_plus: f64,
    pub s_minus: f64,
    pub mu: f64,
    pub u_inf: f64,
    pub v_inf: f64,
    /// Bulk density at `(u_inf, v_inf)`.
    pub f_min: f64,
}

pub fn derive_constants(p: &MaterialParams) -> DerivedConstants {
    let (a2, b2, c2) = (p.a2, p.b2, p.c2);
    let root = (b2 * b2 + 24.0 * a2 * c2).sqrt();
    let s_plus = (b2 + root) / (4.0 * c2);
    let s_minus = (b2 - root) / (4.0 * c2);
    let sp2 = s_plus * s_plus;
    DerivedConstants {
        s_plus,
        s_minus,
        mu: b2 / root,
        u_inf: s_plus / SQRT2,
        v_inf: -s_plus / sqrt6(),
        f_min: -a2 * sp2 / 3.0 + c2 * sp2 * sp2 / 9.0 - 2.0 * b2 * sp2 * s_plus / 27.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegimeTag {
    /// `b^4 > 3 a^2 c^2`
    Supercritical,
    /// `b^4 = 3 a^2 c^2`
    Critical,
    /// `0 < b^4 < 3 a^2 c^2`
    Subcritical,
    BZero,
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegimeTag::Supercritical => "SUPERCRITICAL",
            RegimeTag::Critical => "CRITICAL",
            RegimeTag::Subcritical => "SUBCRITICAL",
            RegimeTag::BZero => "B_ZERO",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    /// `b^4 - 3 a^2 c^2`
    pub discriminant: f64,
    pub tolerance: f64,
}

pub fn classify_regime(p: &MaterialParams, tol: f64) -> Regime {
    let b4 = p.b2 * p.b2;
    let three_ac = 3.0 * p.a2 * p.c2;
    let discriminant = b4 - three_ac;
    let tag = if p.b2 == 0.0 {
        RegimeTag::BZero
    } else if discriminant.abs() <= tol * (b4 + three_ac) {
        RegimeTag::Critical
    } else if discriminant > 0.0 {
        RegimeTag::Supercritical
    } else {
        RegimeTag::Subcritical
    };
    Regime { tag, discriminant, tolerance: tol }
}

/// `f_bulk(u E1 + v E0)`.
pub fn bulk_density(p: &MaterialParams, u: f64, v: f64) -> f64 {
    let rho2 = u * u + v * v;
    -0.5 * p.a2 * rho2 + 0.25 * p.c2 * rho2 * rho2 - p.b2 / (3.0 * sqrt6()) * v * (v * v - 3.0 * u * u)
}

pub fn bulk_gradient(p: &MaterialParams, u: f64, v: f64) -> (f64, f64) {
    let rho2 = u * u + v * v;
    let cubic = p.b2 / (3.0 * sqrt6());
    let du = -p.a2 * u + p.c2 * rho2 * u + 6.0 * cubic * u * v;
    let dv = -p.a2 * v + p.c2 * rho2 * v - cubic * (3.0 * v * v - 3.0 * u * u);
    (du, dv)
}

/// Symmetric Hessian `[[f_uu, f_uv], [f_uv, f_vv]]`.
pub fn bulk_hessian(p: &MaterialParams, u: f64, v: f64) -> [[f64; 2]; 2] {
    let rho2 = u * u + v * v;
    let cubic = p.b2 / (3.0 * sqrt6());
    let uu = -p.a2 + p.c2 * (rho2 + 2.0 * u * u) + 6.0 * cubic * v;
    let vv = -p.a2 + p.c2 * (rho2 + 2.0 * v * v) - 6.0 * cubic * v;
    let uv = 2.0 * p.c2 * u * v + 6.0 * cubic * u;
    [[uu, uv], [uv, vv]]
}
