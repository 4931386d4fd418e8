//! Command-line front end.
//!
//! Problem files are JSON documents tagged `"schema": "tsvar/1"`:
//!
//! ```json
//! {
//!   "schema": "tsvar/1",
//!   "scale": {"uniform": {"a": 0, "b": 1, "h": 0.125}},
//!   "lagrangian": "v1^2",
//!   "q_a": 0, "q_b": 2,
//!   "trajectory": {"slopes": [2, 2, 2, 2, 2, 2, 2, 2]},
//!   "transformation": {"tau": "1", "xi": ["1"]},
//!   "solver": {"tol": 1e-10, "max_iter": 50}
//! }
//! ```
//!
//! Exit codes: 0 success, 1 a verification failed, 2 bad input, 3 numerical
//! failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::ExprError;
use crate::noether::{
    check_conservation, invariance_sweep, NoetherError, NoetherRecord, Transformation,
};
use crate::solver::{
    enumerate_slope_extremals, filter_second_el, solve, CandidateRecord, CandidateSet,
    NewtonOptions, Provenance, Solution, SolverError,
};
use crate::timescale::{GridFunction, Samples, ScaleSpec, TimeScale};
use crate::variational::{
    action, erdmann_deviation, first_el_residual, second_el_residual, trajectory_from_slopes,
    Lagrangian, VariationalError, VariationalProblem, EXACT_EXTREMAL_TOL,
};

pub const SCHEMA: &str = "tsvar/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Slope-built trajectories within this distance of `q(b)` are snapped to it.
const SLOPE_SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("invalid problem file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot write output: {0}")]
    Output(io::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("in the Lagrangian: {0}")]
    Lagrangian(ExprError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Noether(#[from] NoetherError),
}

fn is_domain(e: &ExprError) -> bool {
    matches!(e, ExprError::Domain { .. })
}

fn variational_code(e: &VariationalError) -> i32 {
    match e {
        VariationalError::Expr(x) if is_domain(x) => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Variational(e) => variational_code(e),
            CliError::Solver(SolverError::Variational(e)) => variational_code(e),
            CliError::Solver(
                SolverError::SingularSystem { .. } | SolverError::NoConvergence { .. },
            ) => EXIT_NUMERICAL,
            CliError::Noether(NoetherError::Variational(e)) => variational_code(e),
            CliError::Noether(NoetherError::Generator { source, .. }) if is_domain(source) => {
                EXIT_NUMERICAL
            }
            _ => EXIT_INPUT,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "tsvar",
    version,
    about = "Calculus of variations on time scales"
)]
struct Cli {
    /// Also write a machine-readable report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Pass/fail threshold (defaults to 1e-8 on discrete scales, 10·h on dense ones).
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find an extremal, or enumerate slope extremals.
    Solve(SolveArgs),
    /// Check necessary conditions along the file's trajectory.
    Verify(VerifyArgs),
    /// Check invariance and the conserved quantity of the file's transformation.
    Noether(NoetherArgs),
    /// Print σ, ρ, μ and the class of every point of the scale.
    ScaleInfo(FileArg),
}

#[derive(Debug, Args)]
struct FileArg {
    file: PathBuf,
}

#[derive(Debug, Args)]
struct SolveArgs {
    file: PathBuf,
    /// Enumerate slope sequences over a comma-separated alphabet.
    #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
    enumerate: Option<String>,
    /// Keep only candidates satisfying the second Euler-Lagrange equation.
    #[arg(long, requires = "enumerate")]
    filter_second_el: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long)]
    first_el: bool,
    #[arg(long)]
    second_el: bool,
    #[arg(long)]
    erdmann: bool,
}

#[derive(Debug, Args)]
struct NoetherArgs {
    file: PathBuf,
    /// Also take the max invariance residual over K random trajectories.
    #[arg(long, value_name = "K")]
    sweep: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use a solved extremal instead of the file's trajectory.
    #[arg(long)]
    solve: bool,
}

/// Scalar or vector boundary value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Boundary {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Boundary {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            Boundary::Scalar(x) => vec![*x],
            Boundary::Vector(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectorySpec {
    Values(Samples),
    Slopes(Samples),
}

/// `xi` may be a single string for scalar problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Generators {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformationSpec {
    pub tau: String,
    pub xi: Generators,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema: String,
    pub scale: ScaleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_a: Option<Boundary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_b: Option<Boundary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectorySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transformation: Option<TransformationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<NewtonOptions>,
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)?;
        if file.schema != SCHEMA {
            return Err(CliError::Invalid(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                file.schema
            )));
        }
        Ok(file)
    }

    pub fn time_scale(&self) -> Result<TimeScale> {
        self.scale
            .build()
            .map_err(|e| CliError::Invalid(format!("invalid scale: {e}")))
    }

    pub fn problem(&self) -> Result<VariationalProblem> {
        let missing = |field: &str| CliError::Invalid(format!("problem file has no {field:?}"));
        let q_a = self.q_a.as_ref().ok_or_else(|| missing("q_a"))?.to_vec();
        let q_b = self.q_b.as_ref().ok_or_else(|| missing("q_b"))?.to_vec();
        let n = self.n.unwrap_or(q_a.len());
        let text = self
            .lagrangian
            .as_deref()
            .ok_or_else(|| missing("lagrangian"))?;
        let lagrangian = Lagrangian::parse(text, n).map_err(CliError::Lagrangian)?;
        Ok(VariationalProblem::new(
            self.time_scale()?,
            lagrangian,
            q_a,
            q_b,
        )?)
    }

    pub fn trajectory(&self, p: &VariationalProblem) -> Result<Option<GridFunction>> {
        let Some(spec) = &self.trajectory else {
            return Ok(None);
        };
        let q = match spec {
            TrajectorySpec::Values(s) => GridFunction::from_rows(p.scale().clone(), &s.rows())
                .map_err(|e| CliError::Invalid(format!("invalid trajectory: {e}")))?,
            TrajectorySpec::Slopes(s) => {
                let q = trajectory_from_slopes(p.scale(), p.q_a(), &s.rows())?;
                let n = p.n();
                let mut values = q.values().to_vec();
                let tail = values.len() - n;
                if values[tail..]
                    .iter()
                    .zip(p.q_b())
                    .all(|(x, b)| (x - b).abs() <= SLOPE_SNAP_TOL)
                {
                    values[tail..].copy_from_slice(p.q_b());
                }
                GridFunction::new(p.scale().clone(), n, values).expect("same shape")
            }
        };
        p.check_trajectory(&q)?;
        Ok(Some(q))
    }

    pub fn transformation(&self) -> Result<Transformation> {
        let spec = self
            .transformation
            .as_ref()
            .ok_or_else(|| CliError::Invalid("problem file has no \"transformation\"".into()))?;
        let xi = match &spec.xi {
            Generators::One(s) => vec![s.clone()],
            Generators::Many(v) => v.clone(),
        };
        Ok(Transformation::parse(&spec.tau, &xi)?)
    }
}

/// Report of `solve` without enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub provenance: Provenance,
    pub points: Vec<f64>,
    pub values: Samples,
    pub action: f64,
    pub first_el: f64,
    pub second_el: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub magnitude: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tol: f64,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub t: f64,
    pub sigma: f64,
    pub rho: f64,
    pub mu: f64,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleInfoReport {
    pub exact: bool,
    pub points: Vec<PointRecord>,
}

/// Reads back a JSON report written with `--json`.
pub fn load_report<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Reads back the JSON-lines output of an enumeration.
pub fn load_candidates(path: &Path) -> Result<Vec<CandidateRecord>> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(CandidateSet::parse_json_lines(&text)?)
}

/// Formats with 12 significant digits, trailing zeros trimmed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, exponent) = s.split_once('e').expect("scientific format");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

fn fmt_row(row: &[f64]) -> String {
    row.iter()
        .map(|x| fmt_num(*x))
        .collect::<Vec<_>>()
        .join(", ")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(path, text + "\n").map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_alphabet(csv: &str) -> Result<Vec<f64>> {
    csv.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Invalid(format!("invalid alphabet entry {:?}", s.trim())))
        })
        .collect()
}

fn cmd_solve(cli: &Cli, args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let file = ProblemFile::load(&args.file)?;
    let p = file.problem()?;
    let io = CliError::Output;

    if let Some(csv) = &args.enumerate {
        let alphabet = parse_alphabet(csv)?;
        let tol = cli.tol.unwrap_or(EXACT_EXTREMAL_TOL);
        let all = enumerate_slope_extremals(&p, &alphabet, tol)?;
        writeln!(out, "first-EL extremals: {}", all.len()).map_err(io)?;
        let shown = if args.filter_second_el {
            let kept = filter_second_el(&p, &all, tol)?;
            writeln!(out, "second-EL survivors: {}", kept.len()).map_err(io)?;
            kept
        } else {
            all
        };
        writeln!(
            out,
            "{:>6}  {:<40}  {:>18}  {:>18}  {:>18}",
            "#", "slopes", "action", "first-EL", "second-EL"
        )
        .map_err(io)?;
        for (i, c) in shown.iter().enumerate() {
            let slopes = c
                .slopes
                .iter()
                .map(|r| fmt_row(r))
                .collect::<Vec<_>>()
                .join(" ");
            writeln!(
                out,
                "{:>6}  {:<40}  {:>18}  {:>18}  {:>18}",
                i,
                slopes,
                fmt_num(c.diagnostics.action),
                fmt_num(c.diagnostics.first_el),
                fmt_num(c.diagnostics.second_el)
            )
            .map_err(io)?;
        }
        if let Some(path) = &cli.json {
            fs::write(path, shown.to_json_lines()).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
        }
        return Ok(EXIT_OK);
    }

    let opts = file.solver.unwrap_or_default();
    let Solution {
        trajectory: q,
        provenance,
        iterations,
    } = solve(&p, &opts)?;
    let report = SolveReport {
        provenance,
        points: p.scale().points().to_vec(),
        values: q.samples(),
        action: action(&p, &q)?,
        first_el: first_el_residual(&p, &q)?.magnitude,
        second_el: second_el_residual(&p, &q)?.magnitude,
        iterations,
    };
    let label = match provenance {
        Provenance::ClosedForm => "closed form".to_string(),
        Provenance::Newton => format!("Newton, {} iterations", iterations.unwrap_or(0)),
        Provenance::Enumerated => "enumeration".to_string(),
    };
    writeln!(out, "extremal ({label})").map_err(io)?;
    writeln!(out, "{:>18}  q", "t").map_err(io)?;
    for (t, row) in p.scale().points().iter().zip(q.rows()) {
        writeln!(out, "{:>18}  {}", fmt_num(*t), fmt_row(row)).map_err(io)?;
    }
    writeln!(out, "action: {}", fmt_num(report.action)).map_err(io)?;
    writeln!(out, "first-EL residual: {}", fmt_num(report.first_el)).map_err(io)?;
    writeln!(out, "second-EL residual: {}", fmt_num(report.second_el)).map_err(io)?;
    if let Some(path) = &cli.json {
        write_json(path, &report)?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let file = ProblemFile::load(&args.file)?;
    let p = file.problem()?;
    let q = file
        .trajectory(&p)?
        .ok_or_else(|| CliError::Invalid("problem file has no \"trajectory\" to verify".into()))?;
    let tol = cli.tol.unwrap_or_else(|| p.default_tolerance());
    let all = !(args.first_el || args.second_el || args.erdmann);

    let mut checks = Vec::new();
    if args.first_el || all {
        checks.push(("first-EL", first_el_residual(&p, &q)?.magnitude));
    }
    if args.second_el || all {
        checks.push(("second-EL", second_el_residual(&p, &q)?.magnitude));
    }
    if args.erdmann {
        checks.push(("erdmann", erdmann_deviation(&p, &q)?));
    }
    let io = CliError::Output;
    let records: Vec<CheckRecord> = checks
        .into_iter()
        .map(|(name, magnitude)| CheckRecord {
            name: name.into(),
            magnitude,
            pass: magnitude <= tol,
        })
        .collect();
    for r in &records {
        let verdict = if r.pass { "pass" } else { "FAIL" };
        writeln!(
            out,
            "{:<10}  {:>18}  {verdict}",
            r.name,
            fmt_num(r.magnitude)
        )
        .map_err(io)?;
    }
    writeln!(out, "tolerance: {}", fmt_num(tol)).map_err(io)?;
    let report = VerifyReport {
        tol,
        pass: records.iter().all(|r| r.pass),
        checks: records,
    };
    if let Some(path) = &cli.json {
        write_json(path, &report)?;
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_noether(cli: &Cli, args: &NoetherArgs, out: &mut dyn Write) -> Result<i32> {
    let file = ProblemFile::load(&args.file)?;
    let p = file.problem()?;
    let tr = file.transformation()?;
    let q = if args.solve {
        solve(&p, &file.solver.unwrap_or_default())?.trajectory
    } else {
        file.trajectory(&p)?.ok_or_else(|| {
            CliError::Invalid(
                "problem file has no \"trajectory\"; pass --solve to use a solved extremal".into(),
            )
        })?
    };
    let mut report = check_conservation(&p, &q, &tr)?;
    if let Some(k) = args.sweep {
        report.invariance = report
            .invariance
            .max(invariance_sweep(&p, &tr, k, args.seed)?);
    }
    let tol = cli.tol.unwrap_or_else(|| p.default_tolerance());

    let io = CliError::Output;
    match args.sweep {
        Some(k) => writeln!(
            out,
            "invariance (max over trajectory and {k} random): {}",
            fmt_num(report.invariance)
        ),
        None => writeln!(out, "invariance: {}", fmt_num(report.invariance)),
    }
    .map_err(io)?;
    writeln!(out, "{:>18}  conserved", "t").map_err(io)?;
    for (t, c) in report
        .conserved
        .scale()
        .points()
        .iter()
        .zip(report.conserved.values())
    {
        writeln!(out, "{:>18}  {}", fmt_num(*t), fmt_num(*c)).map_err(io)?;
    }
    writeln!(out, "deviation: {}", fmt_num(report.deviation)).map_err(io)?;
    let pass = report.holds(tol);
    writeln!(
        out,
        "tolerance: {}  {}",
        fmt_num(tol),
        if pass { "pass" } else { "FAIL" }
    )
    .map_err(io)?;
    if let Some(path) = &cli.json {
        write_json::<NoetherRecord>(path, &report.record())?;
    }
    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_scale_info(cli: &Cli, args: &FileArg, out: &mut dyn Write) -> Result<i32> {
    let file = ProblemFile::load(&args.file)?;
    let scale = file.time_scale()?;
    let mut points = Vec::with_capacity(scale.len());
    for i in 0..scale.len() {
        let get = |r: std::result::Result<usize, _>| r.map(|j| scale.points()[j]);
        points.push(PointRecord {
            t: scale.points()[i],
            sigma: get(scale.sigma(i)).expect("index in range"),
            rho: get(scale.rho(i)).expect("index in range"),
            mu: scale.mu(i).expect("index in range"),
            class: scale.classify(i).expect("index in range").to_string(),
        });
    }
    let io = CliError::Output;
    writeln!(
        out,
        "{} points, {}",
        scale.len(),
        if scale.is_exact_discrete() {
            "exact discrete"
        } else {
            "with dense gaps"
        }
    )
    .map_err(io)?;
    writeln!(
        out,
        "{:>18}  {:>18}  {:>18}  {:>18}  class",
        "t", "sigma", "rho", "mu"
    )
    .map_err(io)?;
    for r in &points {
        writeln!(
            out,
            "{:>18}  {:>18}  {:>18}  {:>18}  {}",
            fmt_num(r.t),
            fmt_num(r.sigma),
            fmt_num(r.rho),
            fmt_num(r.mu),
            r.class
        )
        .map_err(io)?;
    }
    if let Some(path) = &cli.json {
        write_json(
            path,
            &ScaleInfoReport {
                exact: scale.is_exact_discrete(),
                points,
            },
        )?;
    }
    Ok(EXIT_OK)
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    if let Some(tol) = cli.tol {
        if tol.is_nan() || tol < 0.0 {
            let _ = writeln!(err, "error: --tol must be a non-negative number");
            return EXIT_INPUT;
        }
    }
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(&cli, a, out),
        Command::Verify(a) => cmd_verify(&cli, a, out),
        Command::Noether(a) => cmd_noether(&cli, a, out),
        Command::ScaleInfo(a) => cmd_scale_info(&cli, a, out),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Output(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut io::stdout().lock(), &mut io::stderr().lock())
}
