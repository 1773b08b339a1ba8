//! `ratplanes`: rational lines and r-planes on hypersurfaces over finite fields.
//!
//! Results go to stdout as JSON (or CSV for census runs). Diagnostics go to
//! stderr as `error[module::code]: message`. Exit status is 0 on success, 2
//! for usage and input errors, 1 for computational failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};
use ratplanes::bounds::bound_report;
use ratplanes::census::{run_census, CensusConfig};
use ratplanes::fano::{count_lines_par, find_point, lift_plane, point_count, LiftStatus};
use ratplanes::formring::{parse_form, Form, FormError};
use ratplanes::gf::Field;
use ratplanes::projgeom::{Plane, ProjPoint};
use ratplanes::smoothness::{is_smooth, singular_point_search, SingularWitness};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "ratplanes", version, about = "Rational lines and planes on hypersurfaces over finite fields")]
struct Cli {
    /// Worker threads; never changes any output.
    #[arg(long, global = true, env = "FANO_CENSUS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rational lines on V(f).
    #[command(subcommand)]
    Lines(LinesCmd),
    /// Lifting a contained plane to a higher-dimensional one.
    #[command(subcommand)]
    Planes(PlanesCmd),
    /// Rational points on V(f).
    #[command(subcommand)]
    Point(PointCmd),
    /// Smoothness over the algebraic closure.
    #[command(subcommand)]
    Smooth(SmoothCmd),
    /// Parameter bounds for r-planes.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Monte-Carlo census of line counts.
    #[command(subcommand)]
    Census(CensusCmd),
    /// Built-in checks.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand)]
enum LinesCmd {
    /// Count (and optionally list) the F_q-rational lines.
    Count {
        #[command(flatten)]
        input: FormInput,
        /// Include the lines as RREF matrices.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Subcommand)]
enum PlanesCmd {
    /// Lift a contained plane (or a found point) to an r-plane.
    Lift {
        #[command(flatten)]
        input: FormInput,
        /// Starting plane as a JSON matrix, inline or `@file`.
        #[arg(long)]
        plane: Option<String>,
        /// Target dimension.
        #[arg(long)]
        r: usize,
    },
}

#[derive(Subcommand)]
enum PointCmd {
    /// First rational point in enumeration order.
    Find {
        #[command(flatten)]
        input: FormInput,
    },
    /// Number of rational points.
    Count {
        #[command(flatten)]
        input: FormInput,
    },
}

#[derive(Subcommand)]
enum SmoothCmd {
    /// Decide smoothness with a Groebner basis.
    Check {
        #[command(flatten)]
        input: FormInput,
        /// Also search for a singular point over F_{q^k}, k <= K.
        #[arg(long, value_name = "K")]
        witness: Option<u32>,
    },
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Conditions and thresholds for r-planes on degree-d hypersurfaces in P^n.
    Report {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        r: u32,
    },
}

#[derive(Subcommand)]
enum CensusCmd {
    /// Count lines on seeded random hypersurfaces.
    Run {
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: u32,
        #[arg(long)]
        samples: u64,
        /// Keep only smooth hypersurfaces.
        #[arg(long)]
        smooth_only: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// JSON goes to PATH; CSV goes to PATH_stats.csv and PATH_hist.csv.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Add wall-clock time to the report.
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// The embedded smooth cubic threefold over F_7 with exactly 8 lines.
    Appendix,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct FormInput {
    /// Field: `p`, `p^e` or the prime power itself.
    #[arg(long)]
    q: String,
    /// Ambient projective dimension.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Expected degree; checked when given.
    #[arg(long)]
    d: Option<u32>,
    /// Polynomial text, or `@file`.
    #[arg(long)]
    form: String,
}

struct Failure {
    code: String,
    message: String,
    exit: u8,
}

impl Failure {
    fn input(code: &str, message: impl ToString) -> Self {
        Failure { code: code.to_string(), message: message.to_string(), exit: 2 }
    }

    fn compute(code: &str, message: impl ToString) -> Self {
        Failure { code: code.to_string(), message: message.to_string(), exit: 1 }
    }

    /// Errors about what was asked for exit with 2, the rest with 1.
    fn classify(code: &str, message: impl ToString) -> Self {
        let input = code.starts_with("gf::")
            || code.starts_with("formring::")
            || code.starts_with("projgeom::")
            || matches!(
                code,
                "bounds::bad-parameters"
                    | "bounds::degree-too-small"
                    | "fano::dimension-mismatch"
                    | "fano::bad-target"
                    | "fano::not-contained"
                    | "census::empty"
                    | "census::bad-config"
            );
        Failure { code: code.to_string(), message: message.to_string(), exit: if input { 2 } else { 1 } }
    }
}

macro_rules! module_err {
    ($e:expr) => {{
        let e = $e;
        Failure::classify(e.code(), &e)
    }};
}

type Outcome = Result<String, Failure>;

fn read_arg(text: &str) -> Result<String, Failure> {
    match text.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| Failure::input("cli::io", format!("{path}: {e}"))),
        None => Ok(text.to_string()),
    }
}

fn field(text: &str) -> Result<Field, Failure> {
    Field::parse(text).map_err(|e| module_err!(e))
}

fn load_form(input: &FormInput) -> Result<Form, Failure> {
    let field = field(&input.q)?;
    let text = read_arg(&input.form)?;
    let f = parse_form(&text, &field, input.n + 1).map_err(|e| module_err!(e))?;
    if let Some(d) = input.d {
        if !f.is_zero() && f.degree() != d {
            return Err(module_err!(FormError::WrongDegree { expected: d, found: f.degree() }));
        }
    }
    Ok(f)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes") + "\n"
}

fn threads(requested: Option<usize>) -> Result<usize, Failure> {
    match requested {
        Some(0) => Err(Failure::input("cli::usage", "--threads must be positive")),
        Some(k) => Ok(k),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn in_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::compute("cli::thread-pool", e))?;
    Ok(pool.install(job))
}

#[derive(Serialize)]
struct Shape {
    q: u32,
    n: usize,
    d: u32,
}

impl Shape {
    fn of(f: &Form) -> Self {
        Shape { q: f.field().q(), n: f.nvars() - 1, d: f.degree() }
    }
}

#[derive(Serialize)]
struct LinesOut {
    count: u64,
    #[serde(flatten)]
    shape: Shape,
    #[serde(skip_serializing_if = "Option::is_none")]
    lines: Option<Vec<Plane>>,
}

#[derive(Serialize)]
struct LiftOut {
    status: LiftStatus,
    r: usize,
    #[serde(flatten)]
    shape: Shape,
    start: Option<Plane>,
    plane: Option<Plane>,
}

#[derive(Serialize)]
struct PointOut {
    found: bool,
    #[serde(flatten)]
    shape: Shape,
    point: Option<ProjPoint>,
}

#[derive(Serialize)]
struct CountOut {
    count: u64,
    #[serde(flatten)]
    shape: Shape,
}

#[derive(Serialize)]
struct SmoothOut {
    smooth: bool,
    #[serde(flatten)]
    shape: Shape,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Option<SingularWitness>>,
}

#[derive(Serialize)]
struct VerifyOut {
    check: &'static str,
    q: u32,
    n: usize,
    d: u32,
    smooth: bool,
    count: u64,
    expected_count: u64,
    pass: bool,
}

fn lines_count(input: &FormInput, list: bool, threads: usize) -> Outcome {
    let f = load_form(input)?;
    let res = in_pool(threads, || count_lines_par(&f, list))?;
    Ok(json(&LinesOut { count: res.count, shape: Shape::of(&f), lines: res.lines }))
}

fn planes_lift(input: &FormInput, plane: Option<&str>, r: usize) -> Result<(String, bool), Failure> {
    let f = load_form(input)?;
    let start = match plane {
        Some(text) => {
            let text = read_arg(text)?;
            Some(Plane::from_json(f.field(), &text).map_err(|e| Failure::input("projgeom::bad-plane", e))?)
        }
        None => find_point(&f).map(|p| Plane::from_point(&p)),
    };
    let shape = Shape::of(&f);
    let Some(start) = start else {
        let out = LiftOut { status: LiftStatus::NotFound, r, shape, start: None, plane: None };
        return Ok((json(&out), true));
    };
    let outcome = lift_plane(&f, &start, r).map_err(|e| module_err!(e))?;
    let ok = outcome.status != LiftStatus::GuaranteeViolated;
    let out = LiftOut { status: outcome.status, r, shape, start: Some(start), plane: outcome.plane };
    Ok((json(&out), ok))
}

fn smooth_check(input: &FormInput, witness: Option<u32>) -> Outcome {
    let f = load_form(input)?;
    let smooth = is_smooth(&f).map_err(|e| module_err!(e))?;
    let witness = match witness {
        Some(k) => Some(singular_point_search(&f, k).map_err(|e| module_err!(e))?),
        None => None,
    };
    Ok(json(&SmoothOut { smooth, shape: Shape::of(&f), witness }))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::compute("cli::io", format!("{}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

#[allow(clippy::too_many_arguments)]
fn census_run(
    q: &str,
    n: usize,
    d: u32,
    samples: u64,
    smooth_only: bool,
    seed: u64,
    format: Format,
    out: Option<&Path>,
    timing: bool,
    threads: usize,
) -> Outcome {
    let field = field(q)?;
    let cfg = CensusConfig { field, n, d, samples, smooth_only, seed, threads, timing };
    let report = run_census(&cfg).map_err(|e| module_err!(e))?;
    match (format, out) {
        (Format::Json, None) => Ok(report.to_json()),
        (Format::Json, Some(path)) => write_file(path, &report.to_json()).map(|_| String::new()),
        (Format::Csv, None) => Ok(format!("{}\n{}", report.stats_csv(), report.histogram_csv())),
        (Format::Csv, Some(path)) => {
            write_file(&with_suffix(path, "_stats.csv"), &report.stats_csv())?;
            write_file(&with_suffix(path, "_hist.csv"), &report.histogram_csv())?;
            Ok(String::new())
        }
    }
}

fn verify_appendix(threads: usize) -> Result<(String, bool), Failure> {
    let f = ratplanes::golden_cubic();
    let smooth = is_smooth(&f).map_err(|e| module_err!(e))?;
    let count = in_pool(threads, || count_lines_par(&f, false))?.count;
    let pass = smooth && count == 8;
    let out = VerifyOut { check: "golden_cubic", q: 7, n: 4, d: 3, smooth, count, expected_count: 8, pass };
    Ok((json(&out), pass))
}

fn run(cli: Cli) -> Result<(String, bool), Failure> {
    let threads = threads(cli.threads)?;
    let done = |s: String| (s, true);
    match cli.command {
        Command::Lines(LinesCmd::Count { input, list }) => lines_count(&input, list, threads).map(done),
        Command::Planes(PlanesCmd::Lift { input, plane, r }) => planes_lift(&input, plane.as_deref(), r),
        Command::Point(PointCmd::Find { input }) => {
            let f = load_form(&input)?;
            let point = find_point(&f);
            Ok(done(json(&PointOut { found: point.is_some(), shape: Shape::of(&f), point })))
        }
        Command::Point(PointCmd::Count { input }) => {
            let f = load_form(&input)?;
            Ok(done(json(&CountOut { count: point_count(&f), shape: Shape::of(&f) })))
        }
        Command::Smooth(SmoothCmd::Check { input, witness }) => smooth_check(&input, witness).map(done),
        Command::Bounds(BoundsCmd::Report { n, d, r }) => {
            bound_report(n, d, r).map(|rep| done(json(&rep))).map_err(|e| module_err!(e))
        }
        Command::Census(CensusCmd::Run { q, n, d, samples, smooth_only, seed, format, out, timing }) => {
            census_run(&q, n, d, samples, smooth_only, seed, format, out.as_deref(), timing, threads).map(done)
        }
        Command::Verify(VerifyCmd::Appendix) => verify_appendix(threads),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            eprint!("error[cli::usage]: {}", text.strip_prefix("error: ").unwrap_or(&text));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok((out, ok)) => {
            print!("{out}");
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error[cli::check-failed]: result does not meet its guarantee");
                ExitCode::from(1)
            }
        }
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message);
            ExitCode::from(f.exit)
        }
    }
}
