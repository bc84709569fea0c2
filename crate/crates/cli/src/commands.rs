use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::Context;
use ldg_radial::analysis::{decoupled_tail_check, fit_tail, verify_bounds};
use ldg_radial::solver::{b_zero_drift, ode_residual_with, renormalized_energy, StepRule};
use ldg_radial::stability::{default_support, far_field_potential_defect};
use ldg_radial::{
    build_grid, discrete_energy, minimize_energy, minimize_rayleigh, reconstruct, solve_finite, solve_infinite, MaterialParams,
    ProfilePair, SolverError,
};
use rayon::prelude::*;

use crate::args::{MethodArg, SweepAxis};
use crate::config::{usage, Domain, RunConfig};
use crate::exit_code_for;
use crate::report::{
    write_report, BoundsBody, EnergyBody, ProfileSummary, StabilityBody, SweepBody, SweepRow, TailBody,
};

/// Bound checks use this tolerance regardless of the solver tolerance.
pub const BOUNDS_TOL: f64 = 1e-6;

/// Exit status when a verification verb completes but a check fails.
pub const EXIT_CHECK_FAILED: u8 = 1;

pub fn material(cfg: &RunConfig) -> anyhow::Result<MaterialParams> {
    if cfg.b2 == 0.0 {
        if cfg.domain.is_infinite() && !cfg.allow_b_zero {
            return Err(SolverError::Refused(
                "b2 = 0 has no far-field solution on the infinite domain; pass --allow-b-zero for diagnostics".into(),
            )
            .into());
        }
        return Ok(MaterialParams::diagnostic(cfg.a2, cfg.b2, cfg.c2, cfg.k)?);
    }
    Ok(MaterialParams::new(cfg.a2, cfg.b2, cfg.c2, cfg.k)?)
}

pub fn solve_profile(cfg: &RunConfig, p: &MaterialParams) -> anyhow::Result<ProfilePair> {
    let profile = match cfg.domain {
        Domain::Finite { radius } => {
            let g = build_grid(radius, cfg.n, cfg.grading)?;
            match cfg.method {
                MethodArg::Newton => solve_finite(p, &g, None, cfg.tol, cfg.max_iter)?,
                MethodArg::Energy => minimize_energy(p, &g, None, StepRule::default(), cfg.tol, cfg.max_iter)?.profile,
            }
        }
        Domain::Infinite { r_max } => solve_infinite(p, r_max, cfg.n, cfg.bc_mode(), cfg.tol)?,
    };
    Ok(profile)
}

fn prepare_out(cfg: &RunConfig) -> anyhow::Result<&Path> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    Ok(&cfg.out)
}

fn csv_writer(dir: &Path, file: &str) -> anyhow::Result<csv::Writer<BufWriter<File>>> {
    let path = dir.join(file);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

/// Columns `r, u, v, residual`, the residual being the larger ODE row at the node.
pub fn write_profile_csv(dir: &Path, profile: &ProfilePair) -> anyhow::Result<()> {
    let p = &profile.params;
    let outer = profile.boundary.outer_values(p);
    let res = ode_residual_with(p, &profile.grid, &profile.u, &profile.v, outer)?;
    let mut w = csv_writer(dir, "profile.csv")?;
    w.write_record(["r", "u", "v", "residual"])?;
    for (i, r) in profile.nodes().iter().enumerate() {
        let residual = res.u[i].abs().max(res.v[i].abs());
        w.serialize((r, profile.u[i], profile.v[i], residual))?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_solve(cfg: &RunConfig) -> anyhow::Result<u8> {
    let p = material(cfg)?;
    let profile = solve_profile(cfg, &p)?;
    let dir = prepare_out(cfg)?;
    write_profile_csv(dir, &profile)?;
    let body = EnergyBody {
        constants: p.constants(),
        profile: ProfileSummary::of(&profile),
        energy: discrete_energy(&p, &profile.grid, &profile.u, &profile.v)?,
        renormalized_energy: renormalized_energy(&p, &profile.grid, &profile.u, &profile.v)?,
    };
    write_report(dir, "energy.json", "energy", cfg, body)?;
    Ok(0)
}

pub fn cmd_verify(cfg: &RunConfig) -> anyhow::Result<u8> {
    let p = material(cfg)?;
    let profile = solve_profile(cfg, &p)?;
    let bounds = verify_bounds(&profile, BOUNDS_TOL)?;
    let all_satisfied = bounds.all_satisfied();
    for record in bounds.records.iter().filter(|r| r.applicable && !r.satisfied) {
        eprintln!("bound {:?} violated by {:e} at r = {}", record.name, record.worst_violation, record.worst_location);
    }
    let body = BoundsBody { profile: ProfileSummary::of(&profile), bounds, all_satisfied };
    write_report(prepare_out(cfg)?, "bounds.json", "bounds", cfg, body)?;
    Ok(if all_satisfied { 0 } else { EXIT_CHECK_FAILED })
}

pub fn cmd_asymptotics(cfg: &RunConfig) -> anyhow::Result<u8> {
    let p = material(cfg)?;
    let r_max = cfg.domain.radius();
    if p.b2() == 0.0 {
        // No r^-2 law to fit; report how the inner solution drifts as R grows.
        let radii = [r_max / 4.0, r_max / 2.0, r_max];
        let radii: Vec<f64> = radii.into_iter().filter(|&r| r >= ldg_radial::solver::MIN_INFINITE_RADIUS).collect();
        let body = TailBody {
            constants: p.constants(),
            profile: None,
            fit: None,
            fit_error: Some("b2 = 0: no far-field expansion".into()),
            decoupled: None,
            decoupled_error: None,
            far_field_potential_defect: None,
            b_zero_drift: Some(b_zero_drift(&p, &radii, cfg.n, cfg.tol)),
        };
        write_report(prepare_out(cfg)?, "tailfit.json", "tailfit", cfg, body)?;
        return Ok(0);
    }
    let profile = solve_profile(cfg, &p)?;
    let dir = prepare_out(cfg)?;
    write_profile_csv(dir, &profile)?;
    let fit = fit_tail(&profile, (r_max / 2.0, r_max));
    let decoupled = decoupled_tail_check(&profile);
    let body = TailBody {
        constants: p.constants(),
        profile: Some(ProfileSummary::of(&profile)),
        fit_error: fit.as_ref().err().map(|e| e.to_string()),
        fit: fit.ok(),
        decoupled_error: decoupled.as_ref().err().map(|e| e.to_string()),
        decoupled: decoupled.ok(),
        far_field_potential_defect: Some(far_field_potential_defect(&profile, 0.75 * r_max, r_max)),
        b_zero_drift: None,
    };
    write_report(dir, "tailfit.json", "tailfit", cfg, body)?;
    Ok(0)
}

pub fn cmd_stability(cfg: &RunConfig) -> anyhow::Result<u8> {
    let p = material(cfg)?;
    let profile = solve_profile(cfg, &p)?;
    let support = cfg.support.map(|[lo, hi]| (lo, hi)).unwrap_or_else(|| default_support(cfg.domain.radius()));
    let report = minimize_rayleigh(&profile, support, cfg.seed)?;
    let dir = prepare_out(cfg)?;
    let certificate_file = match &report.certificate {
        Some(xi) => {
            let mut w = csv_writer(dir, "certificate.csv")?;
            w.write_record(["r", "xi"])?;
            for (r, x) in profile.nodes().iter().zip(xi) {
                w.serialize((r, x))?;
            }
            w.flush()?;
            Some("certificate.csv".to_string())
        }
        None => None,
    };
    let note = report.open_question.then(|| {
        let text = "open question: stability of |k| = 1 profiles is unresolved; the value is reported without a sign claim";
        eprintln!("{text}");
        text.to_string()
    });
    let body = StabilityBody {
        profile: ProfileSummary::of(&profile),
        k: report.k,
        c_k: report.c_k,
        support: report.support,
        nodes_in_support: report.nodes_in_support,
        min_rayleigh: report.min_rayleigh,
        certificate_file,
        certificate_form_value: report.certificate_form_value,
        form_values: report.form_values,
        hardy_identity_error: report.hardy_identity_error,
        open_question: report.open_question,
        note,
    };
    write_report(dir, "stability.json", "stability", cfg, body)?;
    Ok(0)
}

pub fn cmd_qfield(cfg: &RunConfig) -> anyhow::Result<u8> {
    let p = material(cfg)?;
    let profile = solve_profile(cfg, &p)?;
    let field = reconstruct(&profile, cfg.angles);
    let path = prepare_out(cfg)?.join("qfield.csv");
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(f);
    field.write_csv(&mut out)?;
    std::io::Write::flush(&mut out)?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn with_axis(cfg: &RunConfig, axis: SweepAxis, value: f64) -> RunConfig {
    let mut point = cfg.clone();
    match axis {
        SweepAxis::A2 => point.a2 = value,
        SweepAxis::B2 => point.b2 = value,
        SweepAxis::C2 => point.c2 = value,
        SweepAxis::K => point.k = value as i32,
    }
    point
}

fn sweep_point(cfg: &RunConfig, value: f64) -> SweepRow {
    let mut row = SweepRow {
        value,
        status: "ok",
        exit_code: 0,
        s_plus: None,
        regime: None,
        energy: None,
        min_rayleigh: None,
        tail_rel_err_u: None,
        tail_rel_err_v: None,
        error: None,
    };
    let outcome = (|| -> anyhow::Result<()> {
        let p = material(cfg)?;
        row.s_plus = Some(p.constants().s_plus);
        row.regime = Some(p.regime().tag);
        let profile = solve_profile(cfg, &p)?;
        row.energy = Some(discrete_energy(&p, &profile.grid, &profile.u, &profile.v)?);
        let support = cfg.support.map(|[lo, hi]| (lo, hi)).unwrap_or_else(|| default_support(cfg.domain.radius()));
        row.min_rayleigh = minimize_rayleigh(&profile, support, cfg.seed).ok().map(|s| s.min_rayleigh);
        if cfg.domain.is_infinite() {
            let r_max = cfg.domain.radius();
            if let Ok(fit) = fit_tail(&profile, (r_max / 2.0, r_max)) {
                (row.tail_rel_err_u, row.tail_rel_err_v) = (fit.rel_err_u, fit.rel_err_v);
            }
        }
        Ok(())
    })();
    if let Err(err) = outcome {
        row.exit_code = exit_code_for(&err);
        row.status = match row.exit_code {
            2 => "no_convergence",
            3 => "sign_violation",
            4 => "refused",
            64 => "usage",
            _ => "error",
        };
        row.error = Some(format!("{err:#}"));
    }
    row
}

pub fn cmd_sweep(cfg: &RunConfig, axis: SweepAxis, values: &[f64]) -> anyhow::Result<u8> {
    if values.is_empty() {
        return Err(usage("sweep needs at least one value"));
    }
    if axis == SweepAxis::K && values.iter().any(|v| v.fract() != 0.0 || *v == 0.0 || v.abs() > 64.0) {
        return Err(usage("k values must be nonzero integers"));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build()?;
    // `collect` on an indexed parallel iterator keeps input order.
    let rows: Vec<SweepRow> = pool.install(|| values.par_iter().map(|&v| sweep_point(&with_axis(cfg, axis, v), v)).collect());
    let code = rows.iter().map(|r| r.exit_code).find(|&c| c != 0).unwrap_or(0);
    for row in rows.iter().filter(|r| r.exit_code != 0) {
        eprintln!("{axis:?} = {}: {}", row.value, row.error.as_deref().unwrap_or(row.status));
    }
    write_report(prepare_out(cfg)?, "sweep.json", "sweep", cfg, SweepBody { axis, rows })?;
    Ok(code)
}
