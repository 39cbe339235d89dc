//! Command-line front end.
//!
//! Results go to stdout as single-line JSON (floats as `%.12e`) or CSV;
//! errors go to stderr as a JSON object. Exit codes: 0 success, 2 usage
//! error, 3 solver or domain error.

use std::ffi::OsString;
use std::io::{self, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use serde_json::ser::Formatter;

use crate::bounds::{self, BoundsReport};
use crate::curvature::{self, Constraint, CurvatureFamily};
use crate::eigen::{self, MethodChoice, Problem};
use crate::error::SteklovError;
use crate::radial::{ManifoldSpec, RadialOptions};
use crate::scaling::{self, Curve, Geometry, Normalizer, NormalizerFactor, DEFAULT_MARGIN};
use crate::warp::WarpSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "steklov",
    version,
    about = "Steklov eigenvalues on warped-product balls"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutFormat::Json, global = true)]
    pub out: OutFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// One eigenvalue on one manifold.
    Eig(EigArgs),
    /// Normalized eigenvalue over a radius grid, with a monotonicity verdict.
    Scan(ScanArgs),
    /// Critical radius of a normalized curve inside a bracket.
    Critical(CriticalArgs),
    /// Eigenvalue of a space-form disk over a curvature grid.
    Curvature(CurvatureArgs),
    /// Sharp bounds on one manifold.
    Bounds(BoundsArgs),
    /// Bounds over seeded random warps.
    Fuzz(FuzzArgs),
}

fn parse_problem(s: &str) -> std::result::Result<String, String> {
    s.parse::<Problem>()
        .map(|p| p.to_string())
        .map_err(|e| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct EigArgs {
    /// euclidean | sphere | hyperbolic | spaceform:K=<real> | poly:a3=<real>[,a5=...]
    #[arg(long)]
    pub warp: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: f64,
    /// sigma | xi | eta
    #[arg(long, value_parser = parse_problem)]
    pub problem: String,
    #[arg(long)]
    pub m: usize,
    /// auto | ode | closed | coupled
    #[arg(long, default_value = "auto")]
    pub method: String,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryArg {
    Sphere,
    Hyperbolic,
}

impl From<GeometryArg> for Geometry {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Sphere => Geometry::Sphere,
            GeometryArg::Hyperbolic => Geometry::Hyperbolic,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CurveSpec {
    #[arg(long, value_enum)]
    pub geometry: GeometryArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_problem)]
    pub problem: String,
    #[arg(long)]
    pub m: usize,
    /// R | sinR | tanHalf | sinHalf (hyperbolic variants are implied)
    #[arg(long)]
    pub normalizer: String,
    /// 3 for xi, 1 otherwise; defaults to the problem's power.
    #[arg(long)]
    pub power: Option<i32>,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub curve: CurveSpec,
    #[arg(long)]
    pub r_min: f64,
    #[arg(long)]
    pub r_max: f64,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Relative margin on consecutive differences.
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
    /// Bracket width for the transition search on unimodal curves.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CriticalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub curve: CurveSpec,
    #[arg(long)]
    pub lo: f64,
    #[arg(long)]
    pub hi: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintArg {
    Area,
    Radius,
}

#[derive(Debug, Args, Serialize)]
pub struct CurvatureArgs {
    #[arg(long, value_enum)]
    pub constraint: ConstraintArg,
    /// Disk area (with --constraint area).
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub area: Option<f64>,
    /// Disk radius (with --constraint radius).
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, value_parser = parse_problem)]
    pub problem: String,
    #[arg(long)]
    pub m: usize,
    /// Defaults to -5 times the curvature bound.
    #[arg(long, allow_hyphen_values = true)]
    pub k_min: Option<f64>,
    /// Defaults to 0.99 times the curvature bound.
    #[arg(long, allow_hyphen_values = true)]
    pub k_max: Option<f64>,
    #[arg(long, default_value_t = 128)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub warp: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: f64,
    #[arg(long)]
    pub m: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FuzzArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub m_max: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include every report, not only the summary and violations.
    #[arg(long)]
    pub full: bool,
}

/// Writes floats as `%.12e`.
struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.12e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.12e}")
    }
}

/// Serializes `value` on one line with fixed float formatting.
pub fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn sci(v: f64) -> String {
    format!("{v:.12e}")
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

enum Failure {
    Usage(String),
    Compute(SteklovError),
}

impl From<SteklovError> for Failure {
    fn from(e: SteklovError) -> Self {
        Failure::Compute(e)
    }
}

struct Output {
    stdout: String,
    stderr: Option<String>,
}

fn curve_csv(header: &str, curve: &Curve) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([header, "value", "est_error"])
        .expect("writing to memory");
    for p in &curve.points {
        w.write_record([sci(p.x), sci(p.value), sci(p.est_error)])
            .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv emits UTF-8")
}

fn normalizer_for(spec: &CurveSpec, problem: Problem) -> std::result::Result<Normalizer, Failure> {
    let factor: NormalizerFactor = spec
        .normalizer
        .parse()
        .map_err(|e: SteklovError| usage(e.to_string()))?;
    let nz = Normalizer {
        factor,
        power: spec.power.unwrap_or(problem.scaling_power()),
    };
    nz.check(problem).map_err(|e| usage(e.to_string()))?;
    Ok(nz)
}

fn problem_of(s: &str) -> Problem {
    s.parse().expect("validated by clap")
}

fn eig(
    args: &EigArgs,
    out: OutFormat,
    echo: &serde_json::Value,
) -> std::result::Result<Output, Failure> {
    let method: MethodChoice = args
        .method
        .parse()
        .map_err(|e: SteklovError| usage(e.to_string()))?;
    if !(args.rtol > 0.0 && args.rtol <= 1e-6) {
        return Err(usage(format!(
            "--rtol must lie in (0, 1e-6], got {}",
            args.rtol
        )));
    }
    let warp: WarpSpec = args.warp.parse()?;
    let manifold = ManifoldSpec::new(args.n, args.radius, warp)?;
    let opts = RadialOptions::with_tolerances(args.rtol, 1e-3 * args.rtol);
    let res = eigen::eigenvalue(problem_of(&args.problem), &manifold, args.m, method, &opts)?;
    let stdout = match out {
        OutFormat::Json => to_json_line(&json!({
            "value": res.value,
            "est_error": res.est_error,
            "method": res.method,
            "config_echo": echo,
        })),
        OutFormat::Csv => format!(
            "R,value,est_error\n{},{},{}",
            sci(args.radius),
            sci(res.value),
            sci(res.est_error)
        ),
    };
    Ok(Output {
        stdout,
        stderr: None,
    })
}

fn scan(
    args: &ScanArgs,
    out: OutFormat,
    echo: &serde_json::Value,
) -> std::result::Result<Output, Failure> {
    let problem = problem_of(&args.curve.problem);
    let nz = normalizer_for(&args.curve, problem)?;
    if args.samples < scaling::MIN_SAMPLES || !(args.r_min < args.r_max) {
        return Err(usage(format!(
            "need --r-min < --r-max and --samples >= {}",
            scaling::MIN_SAMPLES
        )));
    }
    let grid = scaling::linspace(args.r_min, args.r_max, args.samples);
    let (curve, report) = scaling::scan(
        args.curve.geometry.into(),
        args.curve.n,
        problem,
        args.curve.m,
        nz,
        &grid,
        args.margin,
        args.tol,
    )?;
    Ok(curve_output("R", &curve, json!(report), out, echo))
}

fn curve_output(
    header: &str,
    curve: &Curve,
    report: serde_json::Value,
    out: OutFormat,
    echo: &serde_json::Value,
) -> Output {
    match out {
        OutFormat::Json => Output {
            stdout: to_json_line(&json!({
                "report": report,
                "points": curve.points,
                "gaps": curve.gaps,
                "config_echo": echo,
            })),
            stderr: None,
        },
        OutFormat::Csv => Output {
            stdout: curve_csv(header, curve).trim_end().to_string(),
            stderr: Some(to_json_line(&json!({
                "report": report,
                "gaps": curve.gaps,
                "config_echo": echo,
            }))),
        },
    }
}

fn critical(args: &CriticalArgs, echo: &serde_json::Value) -> std::result::Result<Output, Failure> {
    let problem = problem_of(&args.curve.problem);
    let nz = normalizer_for(&args.curve, problem)?;
    let t = scaling::find_transition(
        args.curve.geometry.into(),
        args.curve.n,
        problem,
        args.curve.m,
        nz,
        (args.lo, args.hi),
        args.tol,
    )?;
    Ok(Output {
        stdout: to_json_line(&json!({
            "value": t.location,
            "est_error": t.bracket.1 - t.bracket.0,
            "transition": t,
            "config_echo": echo,
        })),
        stderr: None,
    })
}

fn curvature_cmd(
    args: &CurvatureArgs,
    out: OutFormat,
    echo: &serde_json::Value,
) -> std::result::Result<Output, Failure> {
    let constraint = match (args.constraint, args.area, args.rho) {
        (ConstraintArg::Area, Some(a), None) => Constraint::FixedArea(a),
        (ConstraintArg::Radius, None, Some(r)) => Constraint::FixedRadius(r),
        _ => {
            return Err(usage(
                "--constraint area needs --A, --constraint radius needs --rho (not both)",
            ))
        }
    };
    if args.samples < scaling::MIN_SAMPLES {
        return Err(usage(format!(
            "--samples must be >= {}",
            scaling::MIN_SAMPLES
        )));
    }
    let problem = problem_of(&args.problem);
    let default = CurvatureFamily::with_default_range(constraint, problem, args.m)?;
    let range = (
        args.k_min.unwrap_or(default.k_range.0),
        args.k_max.unwrap_or(default.k_range.1),
    );
    let family = CurvatureFamily::new(constraint, problem, args.m, range)?;
    let (curve, report) =
        curvature::curvature_scan(&family, &family.grid(args.samples), args.margin, args.tol)?;
    Ok(curve_output("K", &curve, json!(report), out, echo))
}

fn bounds_cmd(args: &BoundsArgs, echo: &serde_json::Value) -> std::result::Result<Output, Failure> {
    let warp: WarpSpec = args.warp.parse()?;
    let manifold = ManifoldSpec::new(args.n, args.radius, warp)?;
    let mut reports: Vec<BoundsReport> = Vec::new();
    if args.m >= 1 {
        reports.push(bounds::verify_xi_bounds(&manifold, args.m)?);
    }
    reports.push(bounds::verify_eta_bounds(&manifold, args.m)?);
    reports.push(bounds::verify_eta_ratio(&manifold, args.m)?);
    Ok(Output {
        stdout: to_json_line(&json!({ "reports": reports, "config_echo": echo })),
        stderr: None,
    })
}

/// Relative slack tolerance used to count fuzz violations.
const FUZZ_VIOLATION_TOL: f64 = 1e-8;

fn fuzz_cmd(args: &FuzzArgs, echo: &serde_json::Value) -> std::result::Result<Output, Failure> {
    let trials = bounds::fuzz_bounds(args.n, args.m_max, args.trials, args.seed)?;
    let reports: Vec<&BoundsReport> = trials.iter().flat_map(|t| &t.reports).collect();
    let violations: Vec<&BoundsReport> = trials
        .iter()
        .flat_map(|t| t.violations(FUZZ_VIOLATION_TOL))
        .collect();
    let worst = reports
        .iter()
        .filter_map(|r| r.worst_relative_slack())
        .fold(f64::INFINITY, f64::min);
    let attempts: usize = trials.iter().map(|t| t.attempts).sum();
    let summary = json!({
        "trials": trials.len(),
        "reports": reports.len(),
        "violations": violations.len(),
        "worst_relative_slack": worst,
        "acceptance_rate": trials.len() as f64 / attempts.max(1) as f64,
    });
    let body = if args.full {
        json!({ "summary": summary, "violations": violations, "trials": trials, "config_echo": echo })
    } else {
        json!({ "summary": summary, "violations": violations, "config_echo": echo })
    };
    Ok(Output {
        stdout: to_json_line(&body),
        stderr: None,
    })
}

fn dispatch(cli: &Cli) -> std::result::Result<Output, Failure> {
    let echo = serde_json::to_value(cli).expect("config serializes");
    match &cli.command {
        Command::Eig(a) => eig(a, cli.out, &echo),
        Command::Scan(a) => scan(a, cli.out, &echo),
        Command::Critical(a) => critical(a, &echo),
        Command::Curvature(a) => curvature_cmd(a, cli.out, &echo),
        Command::Bounds(a) => bounds_cmd(a, &echo),
        Command::Fuzz(a) => fuzz_cmd(a, &echo),
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            let _ = writeln!(stdout, "{}", out.stdout);
            if let Some(s) = out.stderr {
                let _ = writeln!(stderr, "{s}");
            }
            EXIT_OK
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(
                stderr,
                "{}",
                to_json_line(&json!({ "error": { "kind": "usage", "message": msg } }))
            );
            EXIT_USAGE
        }
        Err(Failure::Compute(e)) => {
            let _ = writeln!(
                stderr,
                "{}",
                to_json_line(&json!({ "error": { "kind": e.kind(), "message": e.to_string() } }))
            );
            EXIT_FAILURE
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// Evaluates one command and returns `(exit code, stdout, stderr)`.
pub fn run_captured<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}
