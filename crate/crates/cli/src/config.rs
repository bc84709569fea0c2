//! Run configuration: defaults, a flat `key = value` file, and flags, in increasing precedence.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use ldg_radial::grid::MIN_INTERVALS;
use ldg_radial::tensor::DEFAULT_ANGLES;
use ldg_radial::{BcMode, Grading};
use serde::Serialize;

use crate::args::{BcArg, MethodArg, RunArgs};

pub const OUT_ENV: &str = "NEMATIC_PROFILE_OUT";
pub const MAX_TOL: f64 = 1e-2;

/// Bad input on the command line or in the config file (exit 64).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Finite { radius: f64 },
    Infinite { r_max: f64 },
}

impl Domain {
    pub fn radius(&self) -> f64 {
        match *self {
            Domain::Finite { radius } => radius,
            Domain::Infinite { r_max } => r_max,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Domain::Infinite { .. })
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub k: i32,
    pub domain: Domain,
    pub n: usize,
    pub grading: Grading,
    pub tol: f64,
    pub max_iter: usize,
    pub method: MethodArg,
    pub bc: BcArg,
    pub allow_b_zero: bool,
    pub seed: u64,
    pub angles: usize,
    pub support: Option<[f64; 2]>,
    /// Artifacts land here; not part of the report echo.
    #[serde(skip)]
    pub out: PathBuf,
    /// Sweep parallelism; results do not depend on it.
    #[serde(skip)]
    pub jobs: usize,
}

impl RunConfig {
    pub fn bc_mode(&self) -> BcMode {
        match self.bc {
            BcArg::Dirichlet => BcMode::DirichletConst,
            BcArg::Asymptotic => BcMode::AsymptoticCorrected,
        }
    }
}

/// One layer of optional settings.
#[derive(Debug, Clone, Default)]
pub struct Layer {
    a2: Option<f64>,
    b2: Option<f64>,
    c2: Option<f64>,
    k: Option<i32>,
    radius: Option<f64>,
    r_max: Option<f64>,
    infinite: Option<bool>,
    n: Option<usize>,
    grading: Option<Grading>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    method: Option<MethodArg>,
    bc: Option<BcArg>,
    allow_b_zero: Option<bool>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    seed: Option<u64>,
    angles: Option<usize>,
    support_lo: Option<f64>,
    support_hi: Option<f64>,
}

impl Layer {
    pub fn from_args(args: &RunArgs) -> anyhow::Result<Self> {
        if args.radius.is_some() && args.rmax.is_some() {
            return Err(usage("--R and --rmax are mutually exclusive"));
        }
        let infinite = if args.infinite || args.rmax.is_some() {
            Some(true)
        } else if args.radius.is_some() {
            Some(false)
        } else {
            None
        };
        Ok(Self {
            a2: args.a2,
            b2: args.b2,
            c2: args.c2,
            k: args.k,
            radius: args.radius,
            r_max: args.rmax,
            infinite,
            n: args.n,
            grading: args.grading.as_deref().map(parse_grading).transpose()?,
            tol: args.tol,
            max_iter: args.max_iter,
            method: args.method,
            bc: args.bc,
            allow_b_zero: args.allow_b_zero.then_some(true),
            out: args.out.clone(),
            jobs: args.jobs,
            seed: args.seed,
            angles: args.angles,
            support_lo: args.support_lo,
            support_hi: args.support_hi,
        })
    }

    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    /// `key = value` per line; `#` starts a comment; keys use the long flag names.
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut layer = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| usage(format!("line {}: bad {what} `{value}`", lineno + 1));
            let float = || value.parse::<f64>().map_err(|_| bad("number"));
            let count = || value.parse::<usize>().map_err(|_| bad("count"));
            let flag = || value.parse::<bool>().map_err(|_| bad("boolean"));
            match key.replace('-', "_").as_str() {
                "a2" => layer.a2 = Some(float()?),
                "b2" => layer.b2 = Some(float()?),
                "c2" => layer.c2 = Some(float()?),
                "k" => layer.k = Some(value.parse().map_err(|_| bad("winding"))?),
                "R" | "r" | "radius" => {
                    layer.radius = Some(float()?);
                    layer.infinite.get_or_insert(false);
                }
                "rmax" | "r_max" => {
                    layer.r_max = Some(float()?);
                    layer.infinite.get_or_insert(true);
                }
                "infinite" => layer.infinite = Some(flag()?),
                "n" => layer.n = Some(count()?),
                "grading" => layer.grading = Some(parse_grading(value)?),
                "tol" => layer.tol = Some(float()?),
                "max_iter" => layer.max_iter = Some(count()?),
                "method" => layer.method = Some(parse_enum(value).map_err(|_| bad("method"))?),
                "bc" => layer.bc = Some(parse_enum(value).map_err(|_| bad("boundary mode"))?),
                "allow_b_zero" => layer.allow_b_zero = Some(flag()?),
                "out" => layer.out = Some(PathBuf::from(value)),
                "jobs" => layer.jobs = Some(count()?),
                "seed" => layer.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "angles" => layer.angles = Some(count()?),
                "support_lo" => layer.support_lo = Some(float()?),
                "support_hi" => layer.support_hi = Some(float()?),
                other => return Err(usage(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        Ok(layer)
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Layer) -> Layer {
        Layer {
            a2: self.a2.or(base.a2),
            b2: self.b2.or(base.b2),
            c2: self.c2.or(base.c2),
            k: self.k.or(base.k),
            radius: self.radius.or(base.radius),
            r_max: self.r_max.or(base.r_max),
            infinite: self.infinite.or(base.infinite),
            n: self.n.or(base.n),
            grading: self.grading.or(base.grading),
            tol: self.tol.or(base.tol),
            max_iter: self.max_iter.or(base.max_iter),
            method: self.method.or(base.method),
            bc: self.bc.or(base.bc),
            allow_b_zero: self.allow_b_zero.or(base.allow_b_zero),
            out: self.out.or(base.out),
            jobs: self.jobs.or(base.jobs),
            seed: self.seed.or(base.seed),
            angles: self.angles.or(base.angles),
            support_lo: self.support_lo.or(base.support_lo),
            support_hi: self.support_hi.or(base.support_hi),
        }
    }

    pub fn set_infinite(&mut self) {
        self.infinite = Some(true);
    }

    pub fn explicit_radius(&self) -> bool {
        self.infinite == Some(false)
    }

    /// Fills defaults and validates. `env_out` is the value of [`OUT_ENV`], if any.
    pub fn resolve(self, env_out: Option<PathBuf>) -> anyhow::Result<RunConfig> {
        let method = self.method.unwrap_or(MethodArg::Newton);
        let infinite = self.infinite.unwrap_or(false);
        let domain = if infinite {
            Domain::Infinite { r_max: self.r_max.unwrap_or(200.0) }
        } else {
            Domain::Finite { radius: self.radius.unwrap_or(20.0) }
        };
        let (default_tol, default_iter) = match method {
            MethodArg::Newton => (1e-8, 100),
            MethodArg::Energy => (1e-6, 20_000),
        };
        let cfg = RunConfig {
            a2: self.a2.unwrap_or(1.0),
            b2: self.b2.unwrap_or(1.0),
            c2: self.c2.unwrap_or(1.0),
            k: self.k.unwrap_or(1),
            domain,
            n: self.n.unwrap_or(800),
            grading: self.grading.unwrap_or(Grading::Composite),
            tol: self.tol.unwrap_or(default_tol),
            max_iter: self.max_iter.unwrap_or(default_iter),
            method,
            bc: self.bc.unwrap_or(BcArg::Asymptotic),
            allow_b_zero: self.allow_b_zero.unwrap_or(false),
            seed: self.seed.unwrap_or(0),
            angles: self.angles.unwrap_or(DEFAULT_ANGLES),
            support: match (self.support_lo, self.support_hi) {
                (None, None) => None,
                (Some(lo), Some(hi)) => Some([lo, hi]),
                _ => return Err(usage("--support-lo and --support-hi go together")),
            },
            out: self.out.or(env_out).unwrap_or_else(|| PathBuf::from("out")),
            jobs: self.jobs.unwrap_or(1),
        };
        validate(&cfg)?;
        Ok(cfg)
    }
}

fn validate(cfg: &RunConfig) -> anyhow::Result<()> {
    let positive = |x: f64| x.is_finite() && x > 0.0;
    if !positive(cfg.a2) || !positive(cfg.c2) {
        return Err(usage("a2 and c2 must be positive"));
    }
    if !(cfg.b2.is_finite() && cfg.b2 >= 0.0) {
        return Err(usage("b2 must be non-negative"));
    }
    if cfg.k == 0 {
        return Err(usage("k must be nonzero"));
    }
    if !positive(cfg.domain.radius()) {
        return Err(usage("domain radius must be positive"));
    }
    if cfg.n < MIN_INTERVALS {
        return Err(usage(format!("n = {} is below the minimum of {MIN_INTERVALS} intervals", cfg.n)));
    }
    if !(cfg.tol > 0.0 && cfg.tol <= MAX_TOL) {
        return Err(usage(format!("tol = {} must lie in (0, {MAX_TOL}]", cfg.tol)));
    }
    if cfg.max_iter == 0 || cfg.jobs == 0 || cfg.angles == 0 {
        return Err(usage("max-iter, jobs and angles must be at least 1"));
    }
    if cfg.domain.is_infinite() {
        if cfg.method == MethodArg::Energy {
            return Err(usage("the energy method is only available on finite domains"));
        }
        if cfg.grading != Grading::Composite {
            return Err(usage("infinite-domain runs use the composite grading"));
        }
    }
    if let Some([lo, hi]) = cfg.support {
        if !(lo > 0.0 && lo < hi) {
            return Err(usage("support needs 0 < lo < hi"));
        }
    }
    Ok(())
}

fn parse_grading(s: &str) -> anyhow::Result<Grading> {
    match s.split_once(':') {
        None if s == "uniform" => Ok(Grading::Uniform),
        None if s == "composite" => Ok(Grading::Composite),
        Some(("geometric", ratio)) => {
            let ratio: f64 = ratio.parse().map_err(|_| usage(format!("bad geometric ratio `{ratio}`")))?;
            if !(ratio.is_finite() && ratio > 0.0) {
                return Err(usage("geometric ratio must be positive"));
            }
            Ok(Grading::Geometric { ratio })
        }
        _ => Err(usage(format!("unknown grading `{s}` (uniform | composite | geometric:RATIO)"))),
    }
}

fn parse_enum<T: clap::ValueEnum>(s: &str) -> Result<T, String> {
    T::from_str(s, true)
}
