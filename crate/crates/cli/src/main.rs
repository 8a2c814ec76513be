use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use hombridge_core::bound::{self, DEFAULT_SEARCH_MAX};
use hombridge_core::solver::adaptive_half_length;
use hombridge_core::sweep::{render_svg, write_csv};
use hombridge_core::{
    diagnose, run_sweep, save_solution, solve_with_retries, Builtin, ContinuationOutcome, DiagnosticsConfig, Grid,
    GridPolicy, NonlinearitySpec, SolutionFile, SolveError, SolverConfig, SweepError, SweepParams,
};

const EXIT_USAGE: u8 = 1;
const EXIT_INADMISSIBLE: u8 = 2;
const EXIT_DIAGNOSTICS: u8 = 3;
const EXIT_SOLVER: u8 = 4;
const EXIT_PARTIAL: u8 = 5;

const UNBOUNDED_MESSAGE: &str = "unbounded (Corollary regime: no nonzero homoclinic solutions expected)";

#[derive(Parser)]
#[command(name = "hombridge", version, about = "Homoclinic traveling waves of u'''' + c^2 u'' + f(u) = 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Amplitude lower bound L(f,c), admissibility and tail parameters.
    Bound(BoundArgs),
    /// Solve for one wave, diagnose it and optionally save it.
    Solve(SolveArgs),
    /// Continue a wave branch downward in c and tabulate the diagnostics.
    Sweep(SweepArgs),
    /// Sampled check of u f(u) > 0 and f'(0) > 0.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltinArg {
    Piecewise,
    Exponential,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "nonlinearity")]
struct FArgs {
    /// Nonlinearity as an expression in u, e.g. "exp(u)-1".
    #[arg(long = "f", value_name = "EXPR", group = "nonlinearity", allow_hyphen_values = true)]
    expr: Option<String>,
    #[arg(long, value_enum, group = "nonlinearity")]
    builtin: Option<BuiltinArg>,
}

#[derive(Args)]
struct Smoothing {
    /// Replace max/min by a log-sum-exp softening with this temperature.
    #[arg(long, value_name = "TAU")]
    smoothing: Option<f64>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    f: FArgs,
    #[arg(long)]
    c: f64,
    /// Largest |u| examined.
    #[arg(long, default_value_t = DEFAULT_SEARCH_MAX)]
    search_max: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    f: FArgs,
    #[command(flatten)]
    smoothing: Smoothing,
    #[arg(long)]
    c: f64,
    /// Half-length of the periodic domain [-T, T); chosen from the tail decay rate when omitted.
    #[arg(long = "T", value_name = "T")]
    half_length: Option<f64>,
    #[arg(long, default_value_t = 4096)]
    n: usize,
    /// Newton tolerance on the preconditioned residual.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    seed_amplitude: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    f: FArgs,
    #[command(flatten)]
    smoothing: Smoothing,
    /// Defaults to 0.95·(4f'(0))^(1/4), rounded down to one decimal.
    #[arg(long)]
    c_start: Option<f64>,
    #[arg(long)]
    c_end: f64,
    #[arg(long, default_value_t = 0.025)]
    step: f64,
    /// Fixed half-length; chosen per speed from the tail decay rate when omitted.
    #[arg(long = "T", value_name = "T")]
    half_length: Option<f64>,
    #[arg(long, default_value_t = 4096)]
    n: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// CSV output; written to stdout when omitted.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    seed_amplitude: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    f: FArgs,
    /// Speed in context: sets the default range to 10·L(f,c) and adds the
    /// nonexistence test.
    #[arg(long)]
    c: Option<f64>,
    /// Largest |u| sampled (default 10·L(f,c) with --c, else 100).
    #[arg(long)]
    u_max: Option<f64>,
    #[arg(long, default_value_t = 10_001)]
    samples: usize,
}

/// An error carrying its process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure { code, error: error.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: EXIT_USAGE, error }
    }
}

type Outcome = Result<u8, Failure>;

fn spec_from(f: &FArgs, smoothing: Option<f64>) -> Result<NonlinearitySpec, Failure> {
    let spec = match (&f.expr, f.builtin) {
        (Some(text), _) => NonlinearitySpec::parse(text).map_err(|e| Failure::new(EXIT_USAGE, e))?,
        (None, Some(BuiltinArg::Piecewise)) => NonlinearitySpec::builtin(Builtin::Piecewise),
        (None, Some(BuiltinArg::Exponential)) => NonlinearitySpec::builtin(Builtin::Exponential),
        (None, None) => unreachable!("clap enforces the nonlinearity group"),
    };
    match smoothing {
        Some(t) => spec.with_smoothing(t).map_err(|e| Failure::new(EXIT_USAGE, e)),
        None => Ok(spec),
    }
}

fn require_admissible(spec: &NonlinearitySpec, c: f64) -> Result<(), Failure> {
    if bound::admissible(spec, c) {
        return Ok(());
    }
    Err(Failure::new(
        EXIT_INADMISSIBLE,
        anyhow::anyhow!(
            "inadmissible speed c = {c}: c^4 = {} but admissibility needs 0 < c^4 < 4 f'(0) = {}",
            c.powi(4),
            4.0 * spec.fprime_at_zero()
        ),
    ))
}

fn solver_config(tol: f64, step: Option<f64>) -> Result<SolverConfig, Failure> {
    let mut cfg = SolverConfig { newton_tol: tol, ..SolverConfig::default() };
    if let Some(step) = step {
        cfg.continuation_step = step;
    }
    cfg.validate().map_err(|e| Failure::new(EXIT_USAGE, e))?;
    Ok(cfg)
}

fn fmt_bound(l: Option<f64>) -> String {
    l.map_or_else(|| "inf".to_string(), |v| v.to_string())
}

fn run_bound(args: &BoundArgs) -> Outcome {
    let spec = spec_from(&args.f, None)?;
    require_admissible(&spec, args.c)?;
    let result = bound::lower_bound(&spec, args.c, args.search_max).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let tail = bound::tail_parameters(&spec, args.c).map_err(|e| Failure::new(EXIT_INADMISSIBLE, e))?;
    println!("f(u) = {spec}");
    println!("c = {}", args.c);
    match result.finite() {
        Some(l) => println!("L = {l}"),
        None => println!("L = {UNBOUNDED_MESSAGE}"),
    }
    println!("threshold c^4/4 = {}", result.threshold);
    println!("admissible = {} (f'(0) = {})", result.admissible, spec.fprime_at_zero());
    println!("tail rho = {} omega = {}", tail.rho, tail.omega);
    Ok(0)
}

fn run_solve(args: &SolveArgs) -> Outcome {
    let spec = spec_from(&args.f, args.smoothing.smoothing)?;
    require_admissible(&spec, args.c)?;
    let cfg = solver_config(args.tol, None)?;
    let half_length = match args.half_length {
        Some(t) => t,
        None => adaptive_half_length(&spec, args.c, cfg.tail_tol).map_err(|e| Failure::new(EXIT_INADMISSIBLE, e))?,
    };
    let grid = Grid::new(half_length, args.n).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    info!("solving on T = {half_length}, n = {}", args.n);

    let wave = match solve_with_retries(&spec, args.c, &grid, &cfg, args.seed_amplitude) {
        Ok(w) => w,
        Err(SolveError::Trivial { sup_norm, .. }) => {
            let nonexistent = bound::nonexistence_predicate(&spec, args.c, DEFAULT_SEARCH_MAX).unwrap_or(false);
            if nonexistent {
                println!("collapsed to zero; consistent with Corollary (sup-norm {sup_norm:e})");
            } else {
                println!("collapsed to zero (sup-norm {sup_norm:e}); no nonzero wave found");
            }
            return Ok(EXIT_SOLVER);
        }
        Err(e @ (SolveError::Amplitude(_) | SolveError::Config(_))) => return Err(Failure::new(EXIT_USAGE, e)),
        Err(e) => return Err(Failure::new(EXIT_SOLVER, e)),
    };
    let report = diagnose(&wave, &spec, &DiagnosticsConfig { tail_tol: cfg.tail_tol, ..Default::default() })
        .map_err(|e| Failure::new(EXIT_DIAGNOSTICS, e))?;
    if let Some(path) = &args.out {
        let file = SolutionFile::new(&wave, &spec, report.clone());
        save_solution(path, &file).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    }
    println!(
        "c={} amplitude={} L={} bound_ok={} pass={}",
        wave.c,
        report.amplitude,
        fmt_bound(report.lower_bound),
        report.bound_ok,
        report.overall_pass
    );
    Ok(if report.overall_pass { 0 } else { EXIT_DIAGNOSTICS })
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var("HOMBRIDGE_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|t| *t > 0)
            .map(Some)
            .ok_or_else(|| Failure::new(EXIT_USAGE, anyhow::anyhow!("HOMBRIDGE_THREADS must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

/// Close to the admissibility limit, where waves are small and the
/// linearized guess is accurate.
fn default_c_start(spec: &NonlinearitySpec) -> f64 {
    (0.95 * (4.0 * spec.fprime_at_zero()).powf(0.25) * 10.0).floor() / 10.0
}

fn run_sweep_cmd(args: &SweepArgs) -> Outcome {
    let spec = spec_from(&args.f, args.smoothing.smoothing)?;
    let c_start = args.c_start.unwrap_or_else(|| default_c_start(&spec));
    if !(args.c_end < c_start) {
        return Err(anyhow::anyhow!("--c-end ({}) must be below --c-start ({c_start})", args.c_end).into());
    }
    require_admissible(&spec, c_start)?;
    let cfg = solver_config(args.tol, Some(args.step))?;
    let policy = match args.half_length {
        Some(t) => GridPolicy::Fixed { half_length: t, n: args.n },
        None => GridPolicy::Adaptive { n: args.n },
    };
    let params = SweepParams {
        c_start,
        c_end: args.c_end,
        policy,
        seed_amplitude: args.seed_amplitude,
        threads: threads_from_env()?,
    };
    let diag = DiagnosticsConfig { tail_tol: cfg.tail_tol, ..Default::default() };
    let out = match run_sweep(&spec, &params, &cfg, &diag) {
        Ok(out) => out,
        Err(SweepError::Solve(e @ SolveError::Bound(_))) => return Err(Failure::new(EXIT_INADMISSIBLE, e)),
        Err(SweepError::Solve(e @ (SolveError::Grid(_) | SolveError::Config(_) | SolveError::Amplitude(_)))) => {
            return Err(Failure::new(EXIT_USAGE, e))
        }
        Err(SweepError::Solve(e)) => return Err(Failure::new(EXIT_SOLVER, anyhow::anyhow!("initial solve failed: {e}"))),
        Err(e @ SweepError::Diagnostics { .. }) => return Err(Failure::new(EXIT_DIAGNOSTICS, e)),
        Err(e) => return Err(Failure::new(EXIT_USAGE, e)),
    };

    match &args.csv {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&out.records, io::BufWriter::new(file)).map_err(|e| Failure::new(EXIT_USAGE, e))?;
        }
        None => write_csv(&out.records, io::stdout().lock()).map_err(|e| Failure::new(EXIT_USAGE, e))?,
    }
    if let Some(path) = &args.svg {
        fs::write(path, render_svg(&out.records)).with_context(|| format!("writing {}", path.display()))?;
    }

    let failed = out.records.iter().filter(|r| !r.overall_pass).count();
    eprintln!("{} waves, {} failing diagnostics", out.records.len(), failed);
    if let ContinuationOutcome::StepFloor { last_good_c, failed_c } = out.outcome {
        eprintln!("partial sweep: continuation stalled between c = {last_good_c} and c = {failed_c}");
        return Ok(EXIT_PARTIAL);
    }
    Ok(if failed == 0 { 0 } else { EXIT_DIAGNOSTICS })
}

fn run_check(args: &CheckArgs) -> Outcome {
    let spec = spec_from(&args.f, None)?;
    if args.samples < 16 {
        return Err(anyhow::anyhow!("--samples must be at least 16").into());
    }
    if let Some(c) = args.c {
        require_admissible(&spec, c)?;
    }
    let u_max = match (args.u_max, args.c) {
        (Some(u), _) => u,
        (None, Some(c)) => {
            let l = bound::lower_bound(&spec, c, DEFAULT_SEARCH_MAX).map_err(|e| Failure::new(EXIT_USAGE, e))?;
            l.finite().map_or(100.0, |l| 10.0 * l)
        }
        (None, None) => 100.0,
    };
    if !(u_max > 0.0 && u_max.is_finite()) {
        return Err(anyhow::anyhow!("--u-max must be positive and finite").into());
    }
    let report = spec.check_assumptions(u_max, args.samples);
    println!("f(u) = {spec}");
    println!("{report}");
    if let Some(c) = args.c {
        let none = bound::nonexistence_predicate(&spec, c, u_max).map_err(|e| Failure::new(EXIT_USAGE, e))?;
        if none {
            println!("f(u)/u > c^4/4 on every sample up to {u_max}: no nonzero homoclinic solutions expected");
        } else {
            println!("f(u)/u > c^4/4 fails somewhere up to {u_max}: nonexistence test does not apply");
        }
    }
    Ok(if report.all_hold() { 0 } else { EXIT_DIAGNOSTICS })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Bound(a) => run_bound(a),
        Command::Solve(a) => run_solve(a),
        Command::Sweep(a) => run_sweep_cmd(a),
        Command::Check(a) => run_check(a),
    };
    let _ = io::stdout().flush();
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
