//! JSON report bodies. Every file carries `schema_version` and the `report` kind;
//! `schema/report.schema.json` describes them.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Context;
use ldg_radial::analysis::{BoundsReport, DecoupledTailReport, TailFit};
use ldg_radial::solver::DriftSample;
use ldg_radial::{Boundary, DerivedConstants, Method, ProfilePair, RegimeTag};
use serde::Serialize;

use crate::args::SweepAxis;
use crate::config::RunConfig;

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: &'static str,
    pub report: &'static str,
    pub config: &'a RunConfig,
    #[serde(flatten)]
    pub body: T,
}

pub fn write_report<T: Serialize>(dir: &Path, file: &str, report: &'static str, config: &RunConfig, body: T) -> anyhow::Result<()> {
    let envelope = Envelope { schema_version: SCHEMA_VERSION, report, config, body };
    let mut text = serde_json::to_string_pretty(&envelope)?;
    text.push('\n');
    let path = dir.join(file);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub regime: RegimeTag,
    pub method: Method,
    pub boundary: Boundary,
    pub nodes: usize,
    pub iterations: usize,
    pub residual_norm: f64,
    pub outer_u: f64,
    pub outer_v: f64,
}

impl ProfileSummary {
    pub fn of(profile: &ProfilePair) -> Self {
        Self {
            regime: profile.params.regime().tag,
            method: profile.method,
            boundary: profile.boundary,
            nodes: profile.grid.len(),
            iterations: profile.iterations,
            residual_norm: profile.residual_norm,
            outer_u: *profile.u.last().unwrap(),
            outer_v: *profile.v.last().unwrap(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EnergyBody {
    pub constants: DerivedConstants,
    pub profile: ProfileSummary,
    /// Discrete reduced energy.
    pub energy: f64,
    /// Same with the bulk minimum subtracted from the density.
    pub renormalized_energy: f64,
}

#[derive(Debug, Serialize)]
pub struct BoundsBody {
    pub profile: ProfileSummary,
    pub bounds: BoundsReport,
    pub all_satisfied: bool,
}

#[derive(Debug, Serialize)]
pub struct TailBody {
    pub constants: DerivedConstants,
    pub profile: Option<ProfileSummary>,
    pub fit: Option<TailFit>,
    pub fit_error: Option<String>,
    pub decoupled: Option<DecoupledTailReport>,
    pub decoupled_error: Option<String>,
    /// Max relative defect of the far-field potential law on `[3R/4, R]`.
    pub far_field_potential_defect: Option<f64>,
    /// Only for `b2 = 0`: growth of `max |v|` on the inner half with the domain.
    pub b_zero_drift: Option<Vec<DriftSample>>,
}

#[derive(Debug, Serialize)]
pub struct StabilityBody {
    pub profile: ProfileSummary,
    pub k: i32,
    pub c_k: f64,
    pub support: [f64; 2],
    pub nodes_in_support: usize,
    pub min_rayleigh: f64,
    pub certificate_file: Option<String>,
    pub certificate_form_value: Option<f64>,
    pub form_values: BTreeMap<String, f64>,
    pub hardy_identity_error: f64,
    pub open_question: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub status: &'static str,
    pub exit_code: u8,
    pub s_plus: Option<f64>,
    pub regime: Option<RegimeTag>,
    pub energy: Option<f64>,
    pub min_rayleigh: Option<f64>,
    pub tail_rel_err_u: Option<f64>,
    pub tail_rel_err_v: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SweepBody {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}
