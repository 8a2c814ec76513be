//! Speed sweeps: continuation, per-wave diagnostics on a worker pool, and
//! CSV/SVG output.

use std::fmt::Write as _;
use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{diagnose, DiagnosticsConfig, DiagnosticsError, DiagnosticsReport};
use crate::nonlinearity::NonlinearitySpec;
use crate::solver::{continue_in_c, ContinuationOutcome, GridPolicy, SolveError, SolverConfig, WaveProfile};

pub const CSV_HEADER: [&str; 8] = [
    "c",
    "amplitude",
    "lower_bound",
    "residual_norm",
    "sign_changes_left",
    "sign_changes_right",
    "bound_ok",
    "overall_pass",
];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("diagnostics failed at c = {c}: {source}")]
    Diagnostics { c: f64, source: DiagnosticsError },
    #[error("could not build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One converged wave of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub c: f64,
    pub amplitude: f64,
    /// `None` when `L(f, c)` is unbounded.
    pub lower_bound: Option<f64>,
    pub residual_norm: f64,
    pub sign_changes_left: usize,
    pub sign_changes_right: usize,
    pub bound_ok: bool,
    pub overall_pass: bool,
}

impl SweepRecord {
    pub fn new(w: &WaveProfile, report: &DiagnosticsReport) -> Self {
        SweepRecord {
            c: w.c,
            amplitude: report.amplitude,
            lower_bound: report.lower_bound,
            residual_norm: w.residual_norm,
            sign_changes_left: report.sign_changes_left,
            sign_changes_right: report.sign_changes_right,
            bound_ok: report.bound_ok,
            overall_pass: report.overall_pass,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub waves: Vec<WaveProfile>,
    pub reports: Vec<DiagnosticsReport>,
    /// In decreasing `c`, matching `waves`.
    pub records: Vec<SweepRecord>,
    pub outcome: ContinuationOutcome,
}

impl SweepOutput {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.overall_pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    pub c_start: f64,
    pub c_end: f64,
    pub policy: GridPolicy,
    pub seed_amplitude: Option<f64>,
    /// Worker threads for diagnostics; `None` uses the rayon default.
    pub threads: Option<usize>,
}

/// Runs [`continue_in_c`] and diagnoses every converged wave. Continuation is
/// sequential; diagnostics fan out over a pool of `threads` workers and are
/// collected back in `c`-order, so the output does not depend on scheduling.
pub fn run_sweep(
    spec: &NonlinearitySpec,
    params: &SweepParams,
    cfg: &SolverConfig,
    diag: &DiagnosticsConfig,
) -> Result<SweepOutput, SweepError> {
    let cont = continue_in_c(spec, params.c_start, params.c_end, cfg, params.policy, params.seed_amplitude)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = params.threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder.build()?;
    let reports: Vec<DiagnosticsReport> = pool.install(|| {
        cont.waves
            .par_iter()
            .map(|w| diagnose(w, spec, diag).map_err(|source| SweepError::Diagnostics { c: w.c, source }))
            .collect::<Result<_, _>>()
    })?;
    let records = cont.waves.iter().zip(&reports).map(|(w, r)| SweepRecord::new(w, r)).collect();
    Ok(SweepOutput { waves: cont.waves, reports, records, outcome: cont.outcome })
}

/// Seventeen significant digits, enough to round-trip any `f64`.
fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x > 0.0 {
        "inf".into()
    } else {
        x.to_string()
    }
}

pub fn write_csv<W: io::Write>(records: &[SweepRecord], out: W) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            real(r.c),
            real(r.amplitude),
            real(r.lower_bound.unwrap_or(f64::INFINITY)),
            real(r.residual_norm),
            r.sign_changes_left.to_string(),
            r.sign_changes_right.to_string(),
            r.bound_ok.to_string(),
            r.overall_pass.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

/// A "nice" tick step (1, 2 or 5 times a power of ten) giving about
/// `target` intervals over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let unit = raw / mag;
    let nice = if unit <= 1.0 {
        1.0
    } else if unit <= 2.0 {
        2.0
    } else if unit <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn tick_label(x: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    format!("{x:.decimals$}")
}

/// Amplitude and `L(f, c)` against `c` on a log-scaled y axis, as a
/// standalone SVG document. Deterministic: no timestamps or random ids.
pub fn render_svg(records: &[SweepRecord]) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let positive: Vec<f64> = records
        .iter()
        .flat_map(|r| [Some(r.amplitude), r.lower_bound])
        .flatten()
        .filter(|v| *v > 0.0 && v.is_finite())
        .collect();
    if records.is_empty() || positive.is_empty() {
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">no data</text>"#, WIDTH / 2.0, HEIGHT / 2.0);
        svg.push_str("</svg>\n");
        return svg;
    }
    let (mut c_lo, mut c_hi) = records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.c), b.max(r.c)));
    if c_hi - c_lo < 1e-12 {
        c_lo -= 0.05;
        c_hi += 0.05;
    }
    let y_lo = positive.iter().cloned().fold(f64::INFINITY, f64::min).log10().floor();
    let mut y_hi = positive.iter().cloned().fold(f64::NEG_INFINITY, f64::max).log10().ceil();
    if y_hi <= y_lo {
        y_hi = y_lo + 1.0;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_of = |c: f64| LEFT + (c - c_lo) / (c_hi - c_lo) * plot_w;
    let y_of = |v: f64| TOP + (y_hi - v.log10()) / (y_hi - y_lo) * plot_h;

    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">amplitude and L(f,c) versus c</text>"#, WIDTH / 2.0);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    let step = tick_step(c_hi - c_lo, 6.0);
    let mut k = (c_lo / step).ceil() as i64;
    while (k as f64) * step <= c_hi + 1e-9 * step {
        let c = k as f64 * step;
        let x = x_of(c);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, TOP + plot_h, TOP + plot_h + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + plot_h + 20.0, tick_label(c, step));
        k += 1;
    }
    for e in (y_lo as i64)..=(y_hi as i64) {
        let y = y_of(10f64.powi(e as i32));
        let _ = writeln!(svg, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + plot_w);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"#, LEFT - 8.0, y + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">c</text>"#, LEFT + plot_w / 2.0, HEIGHT - 15.0);
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">value (log scale)</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let polyline = |points: Vec<(f64, f64)>, style: &str| {
        let coords: Vec<String> = points.iter().map(|(c, v)| format!("{:.2},{:.2}", x_of(*c), y_of(*v))).collect();
        format!(r#"<polyline fill="none" {style} points="{}"/>"#, coords.join(" "))
    };
    let amp: Vec<(f64, f64)> = records.iter().filter(|r| r.amplitude > 0.0).map(|r| (r.c, r.amplitude)).collect();
    let bound: Vec<(f64, f64)> =
        records.iter().filter_map(|r| r.lower_bound.filter(|l| *l > 0.0 && l.is_finite()).map(|l| (r.c, l))).collect();
    let _ = writeln!(svg, "{}", polyline(amp, r##"stroke="#1f77b4" stroke-width="2""##));
    let _ = writeln!(svg, "{}", polyline(bound, r##"stroke="#d62728" stroke-width="2" stroke-dasharray="6 4""##));

    let lx = LEFT + plot_w - 150.0;
    let _ = writeln!(svg, r##"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="#1f77b4" stroke-width="2"/>"##, TOP + 18.0, lx + 30.0, TOP + 18.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}">amplitude</text>"#, lx + 38.0, TOP + 22.0);
    let _ = writeln!(
        svg,
        r##"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="#d62728" stroke-width="2" stroke-dasharray="6 4"/>"##,
        TOP + 38.0,
        lx + 30.0,
        TOP + 38.0
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}">L(f,c)</text>"#, lx + 38.0, TOP + 42.0);
    svg.push_str("</svg>\n");
    svg
}
