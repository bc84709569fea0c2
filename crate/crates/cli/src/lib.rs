//! Command-line front end for `ldg-radial`: configuration layering, run
//! orchestration and the JSON/CSV artifacts.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use ldg_radial::analysis::AnalysisError;
use ldg_radial::stability::StabilityError;
use ldg_radial::{GridError, ParamError, SolverError};

use args::{Cli, RunArgs, Verb};
use config::{usage, Layer, RunConfig, UsageError, OUT_ENV};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO_CONVERGENCE: u8 = 2;
pub const EXIT_SIGN_VIOLATION: u8 = 3;
pub const EXIT_REFUSED: u8 = 4;
pub const EXIT_USAGE: u8 = 64;
/// I/O and anything else unexpected.
pub const EXIT_INTERNAL: u8 = 70;

fn solver_code(err: &SolverError) -> u8 {
    match err.root_cause() {
        SolverError::SignViolation { .. } => EXIT_SIGN_VIOLATION,
        SolverError::Refused(_) => EXIT_REFUSED,
        SolverError::Grid(_) => EXIT_USAGE,
        _ => EXIT_NO_CONVERGENCE,
    }
}

/// Maps the first recognised cause in the chain to an exit status.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() || cause.is::<GridError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<SolverError>() {
            return solver_code(e);
        }
        if let Some(e) = cause.downcast_ref::<ParamError>() {
            return if matches!(e, ParamError::BZeroRefused) { EXIT_REFUSED } else { EXIT_USAGE };
        }
        if let Some(e) = cause.downcast_ref::<AnalysisError>() {
            return match e {
                AnalysisError::Comparison(s) => solver_code(s),
                AnalysisError::BZero | AnalysisError::RegimeMismatch { .. } => EXIT_REFUSED,
                _ => EXIT_USAGE,
            };
        }
        if let Some(e) = cause.downcast_ref::<StabilityError>() {
            return match e {
                StabilityError::EigenFailure => EXIT_NO_CONVERGENCE,
                _ => EXIT_USAGE,
            };
        }
    }
    EXIT_INTERNAL
}

/// Flags over config file over defaults. `force_infinite` is for verbs that only make
/// sense on the truncated infinite domain.
pub fn resolve_config(args: &RunArgs, force_infinite: bool) -> anyhow::Result<RunConfig> {
    let flags = Layer::from_args(args)?;
    let file = match &args.config {
        Some(path) => Layer::from_file(path)?,
        None => Layer::default(),
    };
    let mut merged = flags.over(file);
    if force_infinite {
        if merged.explicit_radius() {
            return Err(usage("this verb runs on the infinite domain; use --rmax instead of --R"));
        }
        merged.set_infinite();
    }
    merged.resolve(std::env::var_os(OUT_ENV).map(PathBuf::from))
}

pub fn run(cli: Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Verb::Solve(a) => commands::cmd_solve(&resolve_config(a, false)?),
        Verb::Verify(a) => commands::cmd_verify(&resolve_config(a, false)?),
        Verb::Asymptotics(a) => commands::cmd_asymptotics(&resolve_config(a, true)?),
        Verb::Stability(a) => commands::cmd_stability(&resolve_config(a, true)?),
        Verb::Qfield(a) => commands::cmd_qfield(&resolve_config(a, false)?),
        Verb::Sweep(s) => commands::cmd_sweep(&resolve_config(&s.run, false)?, s.axis, &s.values),
    }
}
