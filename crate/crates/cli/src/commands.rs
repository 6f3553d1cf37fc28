use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use steiner_ps::analysis::{decay_constants, tail_report, DecayReport};
use steiner_ps::geometry::{
    classify_infinity, inradius, realize_domain, validate_steiner, InfinityProfile,
    InfinitySchedule, SteinerValidity, GALLERY,
};
use steiner_ps::grid::read_field;
use steiner_ps::solver::{
    box_sweep, confinement_sweep, drift_test, lambda_p, q_sweep, DriftReport, GridParams,
    SolveSummary,
};
use steiner_ps::symmetrization::{full_symmetrize, rearrangement_report};
use steiner_ps::{
    gallery, solve_extremal, solve_linfty, Exponent, Grid, GridFunction64, ProblemConfig,
};

use crate::output::{num, OutDir};

/// Configuration problems: exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Solver stopped without meeting its tolerance: exit code 3.
#[derive(Debug)]
pub struct NotConverged(pub String);

impl std::fmt::Display for NotConverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "not converged: {}", self.0)
    }
}

impl std::error::Error for NotConverged {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Confinement,
    Box,
    Q,
    Drift,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SweepSpec {
    pub kind: Option<SweepKind>,
    pub schedule: Vec<f64>,
}

/// Contents of a `--config` file: a problem plus an optional `[sweep]` table.
#[derive(Debug, Clone, Deserialize)]
pub struct RunFile {
    #[serde(flatten)]
    pub problem: ProblemConfig,
    pub sweep: Option<SweepSpec>,
}

/// Options shared by every command.
pub struct Common {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub jobs: usize,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<RunFile> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| ConfigError("--config is required".into()))?;
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut run: RunFile = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)
                .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
        };
        if let Some(seed) = self.seed {
            run.problem.solver.seed = seed;
        }
        if let Some(tol) = self.tolerance {
            run.problem.solver.tolerance = tol;
        }
        Ok(run)
    }
}

#[derive(Serialize, Deserialize)]
struct ResultFile {
    config: ProblemConfig,
    result: SolveSummary,
}

pub fn solve(common: &Common) -> Result<()> {
    let cfg = common.load()?.problem;
    cfg.validate()?;
    let result = if cfg.q.is_finite() {
        solve_extremal::<f64>(&cfg)?
    } else {
        solve_linfty::<f64>(&cfg)?
    };
    let mut out = OutDir::create(&common.out)?;
    let summary = result.summary();
    out.json(
        "result.json",
        &ResultFile {
            config: cfg.clone(),
            result: summary,
        },
    )?;
    out.field("field.csv", &result.u)?;
    out.history("energy.csv", &result.energy_history)?;
    out.finish("solve", common.config.as_deref())?;
    println!(
        "lambda = {} (iterations {}, residual {:.3e}, converged {})",
        num(result.lambda),
        result.iterations,
        result.residual,
        result.converged
    );
    if !result.converged {
        return Err(NotConverged(format!("stopped after {} iterations", result.iterations)).into());
    }
    Ok(())
}

fn flag(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

pub fn sweep(common: &Common, kind: Option<SweepKind>) -> Result<()> {
    let run = common.load()?;
    let spec = run
        .sweep
        .ok_or_else(|| ConfigError("config has no [sweep] table".into()))?;
    let kind = kind
        .or(spec.kind)
        .ok_or_else(|| ConfigError("sweep kind missing (--kind or sweep.kind)".into()))?;
    let cfg = run.problem;
    let schedule = spec.schedule;
    let mut out = OutDir::create(&common.out)?;
    let mut csv = Vec::new();
    let header = match kind {
        SweepKind::Confinement => "n,lambda,converged,ball_floor,nonincreasing",
        SweepKind::Box => "half_extent,lambda,converged,nonincreasing",
        SweepKind::Q => "q,lambda,distance,argmax_at_origin,converged,distance_decreasing",
        SweepKind::Drift => "half_extent,argmax,distance,lambda,converged,distance_increasing",
    };
    writeln!(csv, "{header}")?;

    let outcome = run_sweep(kind, &cfg, &schedule, common.jobs, &mut csv, &mut out);
    if let Err(e) = &outcome {
        writeln!(csv, "# incomplete: {e:#}")?;
    }
    out.write("sweep.csv", &csv)?;
    if let Ok(summary) = &outcome {
        out.json("sweep.json", summary)?;
    }
    out.finish(
        &format!("sweep {kind:?}").to_lowercase(),
        common.config.as_deref(),
    )?;
    let summary = outcome?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

fn confinement_schedule(schedule: &[f64]) -> Result<Vec<u32>> {
    schedule
        .iter()
        .map(|&n| {
            if n >= 0.0 && n.fract() == 0.0 && n <= u32::MAX as f64 {
                Ok(n as u32)
            } else {
                Err(ConfigError(format!(
                    "confinement index {n} is not a nonnegative integer"
                ))
                .into())
            }
        })
        .collect()
}

fn run_sweep(
    kind: SweepKind,
    cfg: &ProblemConfig,
    schedule: &[f64],
    jobs: usize,
    csv: &mut Vec<u8>,
    out: &mut OutDir,
) -> Result<serde_json::Value> {
    let slack = 1.0 + 1e-6;
    Ok(match kind {
        SweepKind::Confinement => {
            let s = confinement_sweep::<f64>(cfg, &confinement_schedule(schedule)?)?;
            let mut prev = f64::INFINITY;
            for pt in &s.points {
                let r = &pt.result;
                writeln!(
                    csv,
                    "{},{},{},{},{}",
                    pt.n,
                    num(pt.lambda),
                    r.converged,
                    num(r.ball_floor),
                    flag(pt.lambda <= prev * slack)
                )?;
                prev = pt.lambda;
                out.field(&format!("members/n={}/field.csv", pt.n), &r.u)?;
            }
            let u = &s.unconfined;
            writeln!(
                csv,
                "unconfined,{},{},{},{}",
                num(u.lambda),
                u.converged,
                num(u.ball_floor),
                flag(prev >= u.lambda / slack)
            )?;
            out.field("members/unconfined/field.csv", &u.u)?;
            serde_json::json!({
                "kind": "confinement",
                "lambda": s.points.iter().map(|p| (p.n, p.lambda)).collect::<Vec<_>>(),
                "unconfined": u.lambda,
                "monotone": s.monotone,
            })
        }
        SweepKind::Box => {
            let s = box_sweep::<f64>(cfg, schedule, jobs)?;
            let mut prev = f64::INFINITY;
            for pt in &s.points {
                writeln!(
                    csv,
                    "{},{},{},{}",
                    num(pt.half_extent),
                    num(pt.lambda),
                    pt.converged,
                    flag(pt.lambda <= prev * slack)
                )?;
                prev = pt.lambda;
            }
            serde_json::to_value(&s)?
        }
        SweepKind::Q => {
            let s = q_sweep::<f64>(cfg, schedule, jobs)?;
            let mut prev = f64::INFINITY;
            for pt in &s.points {
                let r = &pt.result;
                writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    num(pt.q),
                    num(pt.lambda),
                    num(pt.distance),
                    pt.argmax_at_origin,
                    r.converged,
                    flag(pt.distance < prev)
                )?;
                prev = pt.distance;
                out.field(&format!("members/q={}/field.csv", pt.q), &r.u)?;
            }
            writeln!(
                csv,
                "inf,{},0,true,{},",
                num(s.limit.lambda),
                s.limit.converged
            )?;
            out.field("members/q=inf/field.csv", &s.limit.u)?;
            serde_json::json!({
                "kind": "q",
                "limit": s.limit.lambda,
                "points": s.points.iter().map(|p| serde_json::json!({
                    "q": p.q, "lambda": p.lambda, "distance": p.distance, "argmax_at_origin": p.argmax_at_origin,
                })).collect::<Vec<_>>(),
                "distance_decreasing": s.distance_decreasing,
                "lambda_approaching": s.lambda_approaching,
            })
        }
        SweepKind::Drift => {
            let s = drift_test::<f64>(cfg, schedule, jobs)?;
            let mut prev = f64::NEG_INFINITY;
            for pt in &s.points {
                let argmax: Vec<String> = pt.argmax.iter().map(|&x| num(x)).collect();
                writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    num(pt.half_extent),
                    argmax.join(" "),
                    num(pt.distance),
                    num(pt.lambda),
                    pt.converged,
                    flag(pt.distance > prev)
                )?;
                prev = pt.distance;
            }
            serde_json::to_value(&s)?
        }
    })
}

#[derive(Debug, Serialize)]
struct DecaySummary {
    r0: f64,
    recursion_pass: bool,
    a: f64,
    rates: Vec<Option<f64>>,
    rate_pass: bool,
}

#[derive(Debug, Serialize)]
struct GallerySolve {
    lambda: f64,
    lambda_p: f64,
    converged: bool,
    argmax: Vec<f64>,
    decay: Option<DecaySummary>,
    decay_error: Option<String>,
}

#[derive(Debug, Serialize)]
struct GalleryReport {
    name: String,
    dim: usize,
    steiner: SteinerValidity,
    inradius: f64,
    infinity: Option<InfinityProfile>,
    infinity_error: Option<String>,
    solve: Option<GallerySolve>,
    drift: Option<DriftReport>,
}

/// Parameters of a gallery run.
pub struct GalleryParams {
    pub dim: usize,
    pub p: f64,
    pub q: f64,
    pub spacing: f64,
    pub half_extent: f64,
}

fn gallery_one(name: &str, gp: &GalleryParams, common: &Common) -> Result<GalleryReport> {
    let spec = gallery(name, gp.dim).map_err(|e| ConfigError(e.to_string()))?;
    let geo_h = gp.spacing / 2.0;
    let grid = Grid::with_extents(&spec.truncation_extents(gp.dim, 8.0, geo_h), geo_h)?;
    let mask = validate_steiner(realize_domain(&spec, &grid)?);
    let schedule = InfinitySchedule {
        dim: gp.dim,
        spacing: geo_h,
        extents: vec![8.0, 16.0, 32.0],
    };
    let (infinity, infinity_error) = match classify_infinity(&spec, &schedule) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let bounded = spec.is_bounded(gp.dim);
    let l = if bounded { None } else { Some(gp.half_extent) };
    let mut cfg = ProblemConfig::new(gp.dim, gp.p, gp.q, spec, GridParams::new(gp.spacing, l));
    if let Some(seed) = common.seed {
        cfg.solver.seed = seed;
    }
    if let Some(tol) = common.tolerance {
        cfg.solver.tolerance = tol;
    }
    let mut report = GalleryReport {
        name: name.to_string(),
        dim: gp.dim,
        steiner: mask.steiner().clone(),
        inradius: inradius(&mask),
        infinity,
        infinity_error,
        solve: None,
        drift: None,
    };
    if mask.is_steiner_valid() {
        let r = solve_extremal::<f64>(&cfg)?;
        let lp = lambda_p::<f64>(&cfg)?.lambda;
        let (decay, decay_error) =
            match decay_constants(gp.p, gp.q, lp, r.lambda).and_then(|c| tail_report(&r.u, &c)) {
                Ok(d) => (
                    Some(DecaySummary {
                        r0: d.r0,
                        recursion_pass: d.recursion_pass,
                        a: d.constants.a,
                        rates: d.rates.iter().map(|x| x.rate).collect(),
                        rate_pass: d.rate_pass,
                    }),
                    None,
                ),
                Err(e) => (None, Some(e.to_string())),
            };
        report.solve = Some(GallerySolve {
            lambda: r.lambda,
            lambda_p: lp,
            converged: r.converged,
            argmax: r.argmax.clone(),
            decay,
            decay_error,
        });
    } else {
        let schedule = [gp.half_extent / 2.0, gp.half_extent, 2.0 * gp.half_extent];
        let first = cfg.clone().with_half_extent(schedule[0]);
        report.drift = Some(drift_test::<f64>(&first, &schedule, common.jobs)?);
    }
    Ok(report)
}

pub fn gallery_cmd(
    common: &Common,
    name: Option<&str>,
    all: bool,
    gp: &GalleryParams,
) -> Result<()> {
    let names: Vec<&str> = match (name, all) {
        (_, true) => GALLERY.to_vec(),
        (Some(n), false) => vec![n],
        (None, false) => bail!(ConfigError("give a domain name or --all".into())),
    };
    if gp.dim != 2 && names.contains(&"staircase") {
        bail!(ConfigError("the staircase is planar; use --dim 2".into()));
    }
    let mut out = OutDir::create(&common.out)?;
    for n in names {
        let rep = gallery_one(n, gp, common).with_context(|| format!("gallery domain '{n}'"))?;
        let verdict = match &rep.steiner {
            SteinerValidity::Validated => "validated".to_string(),
            SteinerValidity::Violated { property, axis, .. } => {
                format!("violated ({property:?}, axis {axis})")
            }
            SteinerValidity::Unchecked => "unchecked".to_string(),
        };
        let tail = match (&rep.solve, &rep.drift) {
            (Some(s), _) => format!("lambda {:.6}, argmax {:?}", s.lambda, s.argmax),
            (None, Some(d)) => format!(
                "drift {}: distances {:?}",
                if d.drifting {
                    "detected"
                } else {
                    "not detected"
                },
                d.points.iter().map(|p| p.distance).collect::<Vec<_>>()
            ),
            _ => String::new(),
        };
        println!("{n}: {verdict}, inradius {:.5}, {tail}", rep.inradius);
        out.json(&format!("{n}.json"), &rep)?;
    }
    out.finish("gallery", None)
}

pub fn decay(common: &Common, result: &Path) -> Result<()> {
    let dir = if result.is_dir() {
        result.to_path_buf()
    } else {
        result.parent().unwrap_or(Path::new(".")).to_path_buf()
    };
    let file = if result.is_dir() {
        dir.join("result.json")
    } else {
        result.to_path_buf()
    };
    let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
    let rf: ResultFile =
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", file.display())))?;
    let field_path = dir.join("field.csv");
    let reader = BufReader::new(
        fs::File::open(&field_path).with_context(|| format!("opening {}", field_path.display()))?,
    );
    let u: GridFunction64 = read_field(reader)?;
    let q = match rf.config.q {
        Exponent::Finite(q) if q > rf.config.p => q,
        q => bail!(ConfigError(format!("decay needs p < q < inf (q = {q})"))),
    };
    let lp = lambda_p::<f64>(&rf.config)?.lambda;
    let constants = decay_constants(rf.config.p, q, lp, rf.result.lambda)?;
    let report: DecayReport = tail_report(&u, &constants)?;
    let mut out = OutDir::create(&common.out)?;
    out.json("decay.json", &report)?;
    let mut csv = Vec::new();
    writeln!(csv, "R,tail_mass,tail_sup")?;
    for (m, s) in report.tail_mass.iter().zip(&report.tail_sup) {
        writeln!(csv, "{},{},{}", m.0, num(m.1), num(s.1))?;
    }
    out.write("tail.csv", &csv)?;
    out.finish("decay", Some(&file))?;
    println!(
        "r0 = {}, recursion_pass = {}, a = {:.6}, rates = {:?}",
        report.r0,
        report.recursion_pass,
        report.constants.a,
        report.rates.iter().map(|r| r.rate).collect::<Vec<_>>()
    );
    Ok(())
}

pub fn symmetrize(common: &Common, field: &Path, p: f64, alphas: &[f64]) -> Result<()> {
    let reader = BufReader::new(
        fs::File::open(field).with_context(|| format!("opening {}", field.display()))?,
    );
    let u: GridFunction64 = read_field(reader)?;
    let s = full_symmetrize(&u)?;
    let report = rearrangement_report(&u, p, alphas)?;
    let mut out = OutDir::create(&common.out)?;
    out.field("symmetrized.csv", &s)?;
    out.json("symmetrize.json", &report)?;
    out.finish("symmetrize", Some(field))?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

/// Exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<NotConverged>().is_some() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<steiner_ps::Error>() {
            return core_code(e);
        }
    }
    1
}

fn core_code(e: &steiner_ps::Error) -> i32 {
    use steiner_ps::Error::*;
    match e {
        InvalidGrid(_) | InvalidArgument(_) | Infeasible(_) | EmptyDomain | Inconclusive(_)
        | NegativeValues(_) => 2,
        Format(_) | Json(_) | GridMismatch(_) => 2,
        TailUnresolved(_) => 4,
        Sweep { source, .. } => core_code(source),
        _ => 1,
    }
}
