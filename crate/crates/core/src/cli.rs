//! Command-line front end.
//!
//! Exit codes: 0 success, 1 bad input, 2 no monotone branch (or regression
//! refused), 3 residual check failed, 4 curvature check failed.

// errors carry the partial report so it can still be printed
#![allow(clippy::result_large_err)]

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::condition::{condition_polynomials, degree_bound, normalised_residual};
use crate::curves::{classify_pair, CurvePairClassification, NurbsCurve, PLANARITY_TOL};
use crate::patch::{
    gaussian_curvature_profile, residual_profile, tessellate, unroll, DevelopablePatch,
    PatchError, RulingConcurrency, UnrollMetrics, UnrollOptions,
};
use crate::roots::{trace_branches, uniform_samples, ReparamBranch, DEFAULT_SAMPLES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_BRANCH: i32 = 2;
pub const EXIT_RESIDUAL: i32 = 3;
pub const EXIT_CURVATURE: i32 = 4;

pub const REPORT_SCHEMA: u32 = 1;
pub const BRANCH_HEADER: &str = "t,T,dT";

#[derive(Debug, Parser)]
#[command(name = "devpatch", version, about = "Developable patches between NURBS curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for reparametrisation branches and write them as CSV.
    Solve(SolveArgs),
    /// Recompute residuals and curvature for a branch file.
    Verify(BranchArgs),
    /// Write the patch of a branch as a triangle mesh.
    Export(ExportArgs),
    /// Flatten the patch of a branch into the plane.
    Unroll(UnrollArgs),
}

#[derive(Debug, Args)]
struct Tolerances {
    /// Normalised triple-product residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol_residual: f64,
    /// Normalised Gaussian curvature tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol_curvature: f64,
    /// Relative isometry tolerance for developments.
    #[arg(long, default_value_t = 1e-6)]
    tol_isometry: f64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    c_file: PathBuf,
    d_file: PathBuf,
    /// Number of uniform t samples before adaptive refinement.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Directory receiving branch_<k>.csv files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Report path; printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    tol: Tolerances,
}

#[derive(Debug, Args)]
struct BranchArgs {
    c_file: PathBuf,
    d_file: PathBuf,
    branch_file: PathBuf,
    /// Evaluation grid as NT,NV.
    #[arg(long, default_value = "65,9", value_parser = parse_grid)]
    grid: (usize, usize),
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    tol: Tolerances,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeshFormat {
    Obj,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    common: BranchArgs,
    #[arg(long, value_enum, default_value = "obj")]
    format: MeshFormat,
    /// Export branches with regression areas anyway.
    #[arg(long)]
    allow_regression: bool,
    #[arg(short, long, default_value = "patch.obj")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct UnrollArgs {
    #[command(flatten)]
    common: BranchArgs,
    /// Directory receiving development.obj and development.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected NT,NV, got {s:?}"))?;
    let nt: usize = a.trim().parse().map_err(|e| format!("bad NT: {e}"))?;
    let nv: usize = b.trim().parse().map_err(|e| format!("bad NV: {e}"))?;
    if nt < 2 || nv < 2 {
        return Err("grid needs NT >= 2 and NV >= 2".into());
    }
    Ok((nt, nv))
}

/// Machine-readable outcome of one command.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub classification: CurvePairClassification,
    pub degree_bound: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_degree_max: Option<usize>,
    pub branches: Vec<BranchSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<ResidualSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature: Option<CurvatureSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unroll: Option<UnrollSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub export: Option<ExportSummary>,
    pub exit_code: i32,
    pub message: String,
    pub timings: Timings,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub samples: usize,
    pub monotone: bool,
    pub curvature_compatible: bool,
    pub zero_sign_samples: usize,
    pub secant_samples: usize,
    pub t_range: [f64; 2],
    #[serde(rename = "T_range")]
    pub tau_range: [f64; 2],
    pub max_residual: f64,
}

impl BranchSummary {
    fn new(branch: &ReparamBranch, file: Option<String>) -> Self {
        let (t0, t1) = branch.t_range();
        let (s0, s1) = branch.tau_range();
        Self {
            file,
            samples: branch.samples().len(),
            monotone: branch.monotone(),
            curvature_compatible: branch.curvature_compatible(),
            zero_sign_samples: branch.zero_sign_samples(),
            secant_samples: branch.secant_samples(),
            t_range: [t0, t1],
            tau_range: [s0, s1],
            max_residual: branch.max_residual(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualSummary {
    pub tolerance: f64,
    pub max_sample_residual: f64,
    pub max_grid_residual: f64,
    pub offending_t: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSummary {
    pub grid: [usize; 2],
    pub tolerance: f64,
    pub max_abs_normalised: f64,
    pub min_normalised: Option<f64>,
    pub masked: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnrollSummary {
    pub metrics: UnrollMetrics,
    pub tolerance: f64,
    pub isometry_within_tolerance: bool,
    pub apex: Option<RulingConcurrency>,
    pub obj: String,
    pub csv: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExportSummary {
    pub path: String,
    pub vertices: usize,
    pub faces: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

fn read_curve(path: &Path) -> Result<NurbsCurve, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    NurbsCurve::from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Serialises a branch as `t,T,dT` rows in round-trip decimal notation.
pub fn branch_to_csv(branch: &ReparamBranch) -> String {
    let mut out = format!("{BRANCH_HEADER}\n");
    for s in branch.samples() {
        let _ = writeln!(out, "{},{},{}", s.t, s.tau, s.slope);
    }
    out
}

/// Parses branch CSV rows into `(t, T, T')`.
pub fn parse_branch_csv(text: &str) -> Result<Vec<(f64, f64, f64)>, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == BRANCH_HEADER => {}
        Some(h) => return Err(format!("expected header {BRANCH_HEADER:?}, got {h:?}")),
        None => return Err("empty branch file".into()),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(format!("row {}: expected 3 fields, got {}", i + 1, fields.len()));
            }
            let num = |k: usize| {
                fields[k]
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| format!("row {}: bad number {:?}", i + 1, fields[k]))
            };
            Ok((num(0)?, num(1)?, num(2)?))
        })
        .collect()
}

fn read_branch(path: &Path, c: &NurbsCurve, d: &NurbsCurve) -> Result<ReparamBranch, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let rows = parse_branch_csv(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let raw: Vec<(f64, f64, Option<f64>)> = rows.into_iter().map(|(t, s, d)| (t, s, Some(d))).collect();
    ReparamBranch::from_samples(c, d, &raw)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

struct Context {
    c: NurbsCurve,
    d: NurbsCurve,
    report: Report,
}

impl Context {
    fn load(command: &str, c_file: &Path, d_file: &Path) -> Result<Self, Failure> {
        let c = read_curve(c_file)?;
        let d = read_curve(d_file)?;
        let classification = classify_pair(&c, &d, PLANARITY_TOL);
        let report = Report {
            schema: REPORT_SCHEMA,
            command: command.into(),
            degree_bound: degree_bound(&classification),
            classification,
            observed_degree_max: None,
            branches: Vec::new(),
            residual: None,
            curvature: None,
            unroll: None,
            export: None,
            exit_code: EXIT_OK,
            message: String::new(),
            timings: Timings { total_ms: 0.0 },
        };
        Ok(Self { c, d, report })
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<Report, (Option<Report>, Failure)> {
    let mut ctx = Context::load("solve", &args.c_file, &args.d_file).map_err(|f| (None, f))?;
    if args.samples < 2 {
        return Err((Some(ctx.report), Failure::input("--samples must be at least 2")));
    }
    let samples = uniform_samples(args.samples);
    let spans = ctx.d.bezier_spans();
    ctx.report.observed_degree_max = samples
        .iter()
        .flat_map(|&t| condition_polynomials(&ctx.c, &spans, t))
        .filter_map(|p| p.degree())
        .max();

    let branches = match trace_branches(&ctx.c, &ctx.d, &samples) {
        Ok(b) => b,
        Err(e) => return Err((Some(ctx.report), Failure::input(e.to_string()))),
    };
    for (k, branch) in branches.iter().enumerate() {
        let name = format!("branch_{k}.csv");
        if let Err(f) = write_file(&args.out.join(&name), &branch_to_csv(branch)) {
            return Err((Some(ctx.report), f));
        }
        ctx.report.branches.push(BranchSummary::new(branch, Some(name)));
    }
    let monotone = branches.iter().filter(|b| b.monotone()).count();
    if monotone == 0 {
        ctx.report.exit_code = EXIT_NO_BRANCH;
        ctx.report.message = format!("no monotone branch among {} found", branches.len());
    } else {
        ctx.report.message = format!("{monotone} monotone of {} branches", branches.len());
    }
    Ok(ctx.report)
}

fn load_patch(
    command: &str,
    args: &BranchArgs,
) -> Result<(Context, DevelopablePatch), (Option<Report>, Failure)> {
    let mut ctx = Context::load(command, &args.c_file, &args.d_file).map_err(|f| (None, f))?;
    let branch = match read_branch(&args.branch_file, &ctx.c, &ctx.d) {
        Ok(b) => b,
        Err(f) => return Err((Some(ctx.report), f)),
    };
    ctx.report.branches.push(BranchSummary::new(
        &branch,
        Some(args.branch_file.display().to_string()),
    ));
    match DevelopablePatch::new(ctx.c.clone(), ctx.d.clone(), branch) {
        Ok(p) => Ok((ctx, p)),
        Err(e) => Err((Some(ctx.report), Failure::input(e.to_string()))),
    }
}

fn cmd_verify(args: &BranchArgs) -> Result<Report, (Option<Report>, Failure)> {
    let (mut ctx, patch) = load_patch("verify", args)?;
    let (nt, nv) = args.grid;
    let tol = &args.tol;

    let offending: Vec<f64> = patch
        .branch()
        .samples()
        .iter()
        .filter(|s| !(normalised_residual(&ctx.c, &ctx.d, s.t, s.tau) <= tol.tol_residual))
        .map(|s| s.t)
        .collect();
    ctx.report.residual = Some(ResidualSummary {
        tolerance: tol.tol_residual,
        max_sample_residual: patch.branch().max_residual(),
        max_grid_residual: residual_profile(&patch, nt),
        offending_t: offending.clone(),
    });
    let profile = gaussian_curvature_profile(&patch, nt, nv)
        .map_err(|e| (Some(ctx.report.clone()), Failure::input(e.to_string())))?;
    ctx.report.curvature = Some(CurvatureSummary {
        grid: [nt, nv],
        tolerance: tol.tol_curvature,
        max_abs_normalised: profile.max_abs_normalised,
        min_normalised: Some(profile.min_normalised),
        masked: profile.masked,
    });

    if !offending.is_empty() {
        let list: Vec<String> = offending.iter().map(|t| t.to_string()).collect();
        ctx.report.exit_code = EXIT_RESIDUAL;
        ctx.report.message = format!("residual above tolerance at t = {}", list.join(", "));
    } else if !(profile.max_abs_normalised <= tol.tol_curvature) {
        ctx.report.exit_code = EXIT_CURVATURE;
        ctx.report.message = format!(
            "max normalised |K| = {:e} above tolerance",
            profile.max_abs_normalised
        );
    } else {
        ctx.report.message = "branch verified".into();
    }
    Ok(ctx.report)
}

fn cmd_export(args: &ExportArgs) -> Result<Report, (Option<Report>, Failure)> {
    let (mut ctx, patch) = load_patch("export", &args.common)?;
    if !patch.branch().monotone() && !args.allow_regression {
        ctx.report.exit_code = EXIT_NO_BRANCH;
        ctx.report.message =
            "branch is not monotone (regression area); pass --allow-regression to export".into();
        return Ok(ctx.report);
    }
    let (nt, nv) = args.common.grid;
    let mesh = tessellate(&patch, nt, nv)
        .map_err(|e| (Some(ctx.report.clone()), Failure::input(e.to_string())))?;
    let text = match args.format {
        MeshFormat::Obj => mesh.to_obj(),
    };
    write_file(&args.output, &text).map_err(|f| (Some(ctx.report.clone()), f))?;
    ctx.report.export = Some(ExportSummary {
        path: args.output.display().to_string(),
        vertices: mesh.vertices.len(),
        faces: mesh.triangles.len(),
    });
    ctx.report.message = "mesh written".into();
    Ok(ctx.report)
}

fn cmd_unroll(args: &UnrollArgs) -> Result<Report, (Option<Report>, Failure)> {
    let (mut ctx, patch) = load_patch("unroll", &args.common)?;
    let (nt, nv) = args.common.grid;
    let tol = &args.common.tol;
    let opts = UnrollOptions {
        curvature_tol: tol.tol_curvature,
    };
    let dev = match unroll(&patch, nt, nv, &opts) {
        Ok(dev) => dev,
        Err(PatchError::NotMonotone) => {
            ctx.report.exit_code = EXIT_NO_BRANCH;
            ctx.report.message = "branch is not monotone; refusing to unroll a regression area".into();
            return Ok(ctx.report);
        }
        Err(PatchError::NotDevelopable { max_k, tol }) => {
            ctx.report.curvature = Some(CurvatureSummary {
                grid: [nt, nv],
                tolerance: tol,
                max_abs_normalised: max_k,
                min_normalised: None,
                masked: 0,
            });
            ctx.report.exit_code = EXIT_CURVATURE;
            ctx.report.message = format!("not developable: max normalised |K| = {max_k:e}");
            return Ok(ctx.report);
        }
        Err(e) => return Err((Some(ctx.report), Failure::input(e.to_string()))),
    };
    let obj_path = args.out.join("development.obj");
    let csv_path = args.out.join("development.csv");
    write_file(&obj_path, &dev.to_obj()).map_err(|f| (Some(ctx.report.clone()), f))?;
    write_file(&csv_path, &dev.to_csv()).map_err(|f| (Some(ctx.report.clone()), f))?;
    let m = dev.metrics;
    ctx.report.curvature = Some(CurvatureSummary {
        grid: [nt, nv],
        tolerance: tol.tol_curvature,
        max_abs_normalised: m.max_curvature,
        min_normalised: None,
        masked: 0,
    });
    ctx.report.unroll = Some(UnrollSummary {
        metrics: m,
        tolerance: tol.tol_isometry,
        isometry_within_tolerance: m.edge_length_error <= tol.tol_isometry
            && m.area_error <= tol.tol_isometry
            && m.boundary_length_error <= tol.tol_isometry,
        apex: dev.ruling_concurrency(),
        obj: obj_path.display().to_string(),
        csv: csv_path.display().to_string(),
    });
    ctx.report.message = "development written".into();
    Ok(ctx.report)
}

fn emit(report: &Report, path: Option<&Path>) {
    let text = serde_json::to_string_pretty(report).expect("report serialises");
    match path {
        Some(p) => {
            if let Err(f) = write_file(p, &(text + "\n")) {
                eprintln!("devpatch: {}", f.message);
            }
        }
        None => println!("{text}"),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let start = Instant::now();
    let (result, report_path) = match &cli.command {
        Command::Solve(a) => (cmd_solve(a), a.report.as_deref()),
        Command::Verify(a) => (cmd_verify(a), a.report.as_deref()),
        Command::Export(a) => (cmd_export(a), a.common.report.as_deref()),
        Command::Unroll(a) => (cmd_unroll(a), a.common.report.as_deref()),
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok(mut report) => {
            report.timings.total_ms = elapsed;
            if report.exit_code != EXIT_OK {
                eprintln!("devpatch: {}", report.message);
            }
            emit(&report, report_path);
            report.exit_code
        }
        Err((report, failure)) => {
            eprintln!("devpatch: {}", failure.message);
            if let Some(mut report) = report {
                report.exit_code = failure.code;
                report.message = failure.message;
                report.timings.total_ms = elapsed;
                emit(&report, report_path);
            }
            failure.code
        }
    }
}
