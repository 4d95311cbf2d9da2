//! Command-line front end: argument definitions, command dispatch, the JSON
//! run report and mesh/CSV export.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::complement::{competitor_check, complement_subcomplex, spanning_report, CompetitorVerdict, SpanningVerdict};
use crate::complex::{Complex, FaceSet};
use crate::error::Error;
use crate::exec::Execution;
use crate::grassmann::{equality_samples, verify_projection_bounds_with, BoundReport, PlanePair};
use crate::homology::{homology, HomologyGroup};
use crate::problem::{parse_problem, ProblemSpec};
use crate::solver::{
    measure_jh, minimize_exhaustive_with, minimize_local_with, projection_lower_bound, Certificate, LocalOptions,
    ProjectionBound, ProjectionSetup, SolveResult, EXHAUSTIVE_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "topomin", version, about = "Homological spanning checks and discrete minimal surfaces on grid complexes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Homology of the box and of the complement of the initial face set.
    Homology(RunArgs),
    /// Spanning verdicts of the initial face set, and the competitor check if configured.
    Check(RunArgs),
    /// Minimize the weighted area subject to the constraints.
    Solve(RunArgs),
    /// Sample the projection inequalities for a plane pair.
    Lemmas(LemmaArgs),
    /// Solve, then write the best face set as a mesh and its projections as CSV.
    Export(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Problem file (TOML).
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Overrides the problem's RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the local-search evaluation budget.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Relative gap accepted when certifying against a lower bound.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Raster cells per side for projected areas.
    #[arg(long)]
    pub raster: Option<usize>,
    /// Force exhaustive search regardless of the pool size.
    #[arg(long)]
    pub exhaustive: bool,
    /// Write the face set as a mesh.
    #[arg(long, value_name = "FILE")]
    pub mesh_out: Option<PathBuf>,
    /// Write a CSV table.
    #[arg(long, value_name = "FILE")]
    pub csv_out: Option<PathBuf>,
    /// Disable data-parallel evaluation.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LemmaArgs {
    /// `orthogonal` or `angles:A1,A2` (radians).
    #[arg(long, default_value = "orthogonal")]
    pub pair: String,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Extra equality-family samples (orthogonal pairs only).
    #[arg(long, default_value_t = 0)]
    pub injected: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Infeasible,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub index: usize,
    pub kind: String,
    pub degree: usize,
    pub verdict: SpanningVerdict,
    pub homology_rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomologySection {
    pub ambient: Vec<HomologyGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement: Option<Vec<HomologyGroup>>,
}

/// Structured result of one CLI run. Everything except `timing_ms` is a
/// deterministic function of the problem, seed and flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted_moves: Option<usize>,
    /// Faces of the reported set, each written as its lattice points, e.g. `(0,1) (1,1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<ConstraintRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homology: Option<HomologySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub competitor: Option<CompetitorVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectionBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<BoundReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub artifacts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timing_ms: f64,
}

impl RunReport {
    fn new(command: String) -> Self {
        RunReport {
            command,
            status: Status::Ok,
            seed: None,
            method: None,
            objective: None,
            certificate: None,
            certified: None,
            evaluations: None,
            accepted_moves: None,
            faces: None,
            constraints: Vec::new(),
            homology: None,
            competitor: None,
            projection: None,
            lemmas: None,
            artifacts: Vec::new(),
            error: None,
            timing_ms: 0.0,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => EXIT_OK,
            Status::Infeasible => EXIT_INFEASIBLE,
            Status::Error => EXIT_ERROR,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Failure of a command: infeasibility or any other error.
enum Failure {
    Infeasible(String),
    Error(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible => Failure::Infeasible(e.to_string()),
            other => Failure::Error(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs a parsed command line; `echo` is recorded verbatim in the report.
pub fn run(cli: &Cli, echo: &str) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport::new(echo.to_string());
    let outcome = match &cli.command {
        Command::Homology(a) => with_problem(a, &mut report, run_homology),
        Command::Check(a) => with_problem(a, &mut report, run_check),
        Command::Solve(a) => with_problem(a, &mut report, |s, a, r| run_solve(s, a, r, false)),
        Command::Export(a) => with_problem(a, &mut report, |s, a, r| run_solve(s, a, r, true)),
        Command::Lemmas(a) => run_lemmas(a, &mut report),
    };
    match outcome {
        Ok(()) => {}
        Err(Failure::Infeasible(msg)) => {
            report.status = Status::Infeasible;
            report.error = Some(msg);
        }
        Err(Failure::Error(msg)) => {
            report.status = Status::Error;
            report.error = Some(msg);
        }
    }
    report.timing_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

fn with_problem(
    args: &RunArgs,
    report: &mut RunReport,
    body: impl FnOnce(&ProblemSpec, &RunArgs, &mut RunReport) -> Outcome,
) -> Outcome {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| Failure::Error(format!("cannot read {}: {e}", args.input.display())))?;
    let mut spec = parse_problem(&text).map_err(|e| Failure::Error(e.to_string()))?;
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(b) = args.budget {
        spec.budget = b;
    }
    if let Some(t) = args.tol {
        spec.tol = t;
    }
    if let Some(r) = args.raster {
        spec.raster = r;
    }
    let violations = spec.violations();
    if !violations.is_empty() {
        return Err(Failure::Error(format!("invalid flags: {}", violations.join("; "))));
    }
    report.seed = Some(spec.seed);
    body(&spec, args, report)
}

fn exec_of(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn lattice_faces(set: &FaceSet<'_>) -> Vec<String> {
    let k = set.complex();
    set.iter()
        .map(|f| {
            let points: Vec<String> = k
                .simplex(set.dim(), f)
                .vertices()
                .iter()
                .map(|&v| {
                    let p: Vec<String> = k.lattice_point(v).iter().map(|x| x.to_string()).collect();
                    format!("({})", p.join(","))
                })
                .collect();
            points.join(" ")
        })
        .collect()
}

fn constraint_rows(spec: &ProblemSpec, set: &FaceSet<'_>, exec: Execution, ranks: bool) -> crate::Result<Vec<ConstraintRow>> {
    let reports = spanning_report(set.complex(), set, &spec.constraints, exec, ranks)?;
    Ok(reports
        .into_iter()
        .zip(&spec.constraints)
        .enumerate()
        .map(|(index, (r, c))| ConstraintRow {
            index,
            kind: c.kind_name().to_string(),
            degree: r.degree,
            verdict: r.verdict,
            homology_rank: r.homology_rank,
        })
        .collect())
}

fn run_homology(spec: &ProblemSpec, _args: &RunArgs, report: &mut RunReport) -> Outcome {
    let complex = spec.build_complex()?;
    let ambient = homology(&complex);
    let complement = match spec.initial_set(&complex)? {
        Some(set) => {
            report.faces = Some(lattice_faces(&set));
            Some(homology(&complement_subcomplex(&complex, &set)))
        }
        None => None,
    };
    report.homology = Some(HomologySection { ambient, complement });
    Ok(())
}

fn run_check(spec: &ProblemSpec, args: &RunArgs, report: &mut RunReport) -> Outcome {
    let complex = spec.build_complex()?;
    let set = spec
        .initial_set(&complex)?
        .ok_or_else(|| Failure::Error("check needs an initial face set".into()))?;
    let exec = exec_of(args.sequential);
    report.faces = Some(lattice_faces(&set));
    report.objective = Some(measure_jh(&set, &spec.weight));
    report.constraints = constraint_rows(spec, &set, exec, true)?;
    if let (Some(candidate), Some(region)) = (spec.competitor_set(&complex)?, &spec.region) {
        report.competitor = Some(competitor_check(&set, &candidate, region, &spec.constraints)?);
    }
    if let Some(path) = &args.csv_out {
        write_file(path, &constraints_csv(&report.constraints), report)?;
    }
    if let Some(path) = &args.mesh_out {
        write_file(path, &mesh_text(&set), report)?;
    }
    if report.constraints.iter().all(|r| r.verdict.passed()) {
        Ok(())
    } else {
        Err(Failure::Infeasible("initial face set fails a constraint".into()))
    }
}

fn solve<'a>(
    spec: &ProblemSpec,
    complex: &'a Complex,
    args: &RunArgs,
    report: &mut RunReport,
) -> std::result::Result<SolveResult<'a>, Failure> {
    let exec = exec_of(args.sequential);
    let pool = spec.pool_set(complex)?;
    if args.exhaustive || pool.len() <= EXHAUSTIVE_CAP {
        report.method = Some("exhaustive".into());
        return Ok(minimize_exhaustive_with(complex, &spec.constraints, &spec.weight, &pool, exec)?);
    }
    report.method = Some("local".into());
    let init = spec.initial_set(complex)?.ok_or_else(|| {
        Failure::Error(format!(
            "pool has {} faces (exhaustive cap {EXHAUSTIVE_CAP}); local search needs an initial face set",
            pool.len()
        ))
    })?;
    let options = LocalOptions { pool: spec.pool.as_ref().map(|_| pool.clone()), exec, ..LocalOptions::default() };
    minimize_local_with(complex, &spec.constraints, &spec.weight, &init, spec.budget, spec.seed, &options).map_err(
        |e| match e {
            Error::Precondition(msg) => Failure::Infeasible(msg),
            other => other.into(),
        },
    )
}

fn run_solve(spec: &ProblemSpec, args: &RunArgs, report: &mut RunReport, export: bool) -> Outcome {
    if export && args.mesh_out.is_none() && args.csv_out.is_none() {
        return Err(Failure::Error("export needs --mesh-out or --csv-out".into()));
    }
    let complex = spec.build_complex()?;
    let result = solve(spec, &complex, args, report)?;
    let exec = exec_of(args.sequential);

    let mut certificate = result.certificate.clone();
    let setup = spec.projection_setup().transpose()?;
    if let Some(setup) = &setup {
        let bound = projection_lower_bound(&result.best, setup)?;
        if matches!(certificate, Certificate::None) {
            certificate = bound.certificate();
        }
        report.projection = Some(bound);
    }
    let certified = match &certificate {
        Certificate::Exhaustive { .. } => true,
        Certificate::Projection { lower_bound, .. } => {
            result.objective - lower_bound <= spec.tol * result.objective.abs().max(1.0)
        }
        Certificate::None => false,
    };
    report.objective = Some(result.objective);
    report.certificate = Some(certificate);
    report.certified = Some(certified);
    report.evaluations = Some(result.evaluations);
    report.accepted_moves = Some(result.accepted_moves);
    report.faces = Some(lattice_faces(&result.best));
    report.constraints = constraint_rows(spec, &result.best, exec, false)?;

    if let Some(path) = &args.mesh_out {
        write_file(path, &mesh_text(&result.best), report)?;
    }
    if let Some(path) = &args.csv_out {
        let text = if export {
            projection_csv(&result.best, setup.as_ref())
        } else {
            constraints_csv(&report.constraints)
        };
        write_file(path, &text, report)?;
    }
    Ok(())
}

fn parse_pair(text: &str) -> crate::Result<PlanePair> {
    if text == "orthogonal" {
        return Ok(PlanePair::orthogonal());
    }
    let bad = || Error::InvalidInput(format!("pair \"{text}\" is neither \"orthogonal\" nor \"angles:A1,A2\""));
    let rest = text.strip_prefix("angles:").ok_or_else(bad)?;
    let (a, b) = rest.split_once(',').ok_or_else(bad)?;
    let a1: f64 = a.trim().parse().map_err(|_| bad())?;
    let a2: f64 = b.trim().parse().map_err(|_| bad())?;
    PlanePair::with_angles(a1, a2)
}

fn run_lemmas(args: &LemmaArgs, report: &mut RunReport) -> Outcome {
    report.seed = Some(args.seed);
    let pair = parse_pair(&args.pair)?;
    let injected = if args.injected > 0 {
        equality_samples(&pair, args.injected, args.seed)?
    } else {
        Vec::new()
    };
    let bound = verify_projection_bounds_with(&pair, args.samples, args.seed, &injected, exec_of(args.sequential))?;
    report.lemmas = Some(bound);
    Ok(())
}

fn write_file(path: &Path, text: &str, report: &mut RunReport) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::Error(format!("cannot write {}: {e}", path.display())))?;
    report.artifacts.push(path.display().to_string());
    Ok(())
}

/// Mesh text: `n d`, then `vertices N` and `id x1 … xn` rows for the
/// vertices used, then `faces M` and one vertex-id tuple per face.
pub fn mesh_text(set: &FaceSet<'_>) -> String {
    let k = set.complex();
    let d = set.dim();
    let mut used: Vec<usize> = set.iter().flat_map(|f| k.simplex(d, f).vertices().to_vec()).collect();
    used.sort_unstable();
    used.dedup();
    let mut out = format!("{} {}\nvertices {}\n", k.ambient_dim(), d, used.len());
    for v in used {
        let coords: Vec<String> = k.point(v).iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{v} {}", coords.join(" "));
    }
    let _ = writeln!(out, "faces {}", set.len());
    for f in set.iter() {
        let ids: Vec<String> = k.simplex(d, f).vertices().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", ids.join(" "));
    }
    out
}

pub fn constraints_csv(rows: &[ConstraintRow]) -> String {
    let mut out = String::from("constraint,kind,degree,verdict,homology_rank\n");
    for r in rows {
        let verdict = match r.verdict {
            SpanningVerdict::Pass => "pass",
            SpanningVerdict::Killed => "killed",
            SpanningVerdict::Contact => "contact",
        };
        let rank = r.homology_rank.map_or(String::new(), |x| x.to_string());
        let _ = writeln!(out, "{},{},{},{verdict},{rank}", r.index, r.kind, r.degree);
    }
    out
}

/// One row per face vertex with its coordinates and, in R⁴, its frame
/// coordinates in both planes of the projection setup (coordinate planes
/// through the origin when the problem has none).
pub fn projection_csv(set: &FaceSet<'_>, setup: Option<&ProjectionSetup>) -> String {
    let k = set.complex();
    let n = k.ambient_dim();
    let mut header: Vec<String> = vec!["face".into(), "vertex".into()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    let planes = (n == 4).then(|| match setup {
        Some(s) => (s.pair, s.origin),
        None => (PlanePair::orthogonal(), [0.0; 4]),
    });
    if planes.is_some() {
        header.extend(["p1_u", "p1_v", "p2_u", "p2_v"].map(String::from));
    }
    let mut out = header.join(",") + "\n";
    for f in set.iter() {
        for &v in k.simplex(set.dim(), f).vertices() {
            let p = k.point(v);
            let mut row: Vec<String> = vec![f.to_string(), v.to_string()];
            row.extend(p.iter().map(|x| x.to_string()));
            if let Some((pair, origin)) = &planes {
                let x = [0, 1, 2, 3].map(|i| p[i] - origin[i]);
                for plane in [&pair.p1, &pair.p2] {
                    row.extend(plane.coords_of(&x).iter().map(|c| c.to_string()));
                }
            }
            out += &row.join(",");
            out.push('\n');
        }
    }
    out
}
