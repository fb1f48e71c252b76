//! `gaussmean`: Gaussian integral means and their log-convexity from the
//! command line. The binary is a thin wrapper over [`run_with`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussmean::{
    check_corollary1, check_corollary2, check_corollary3, check_theorem1, check_theorem1_below_x0,
    check_theorem2, check_theorem3, corollary1_radius, default_y_grid, loglog_second_difference,
    radial_mean_profile, solve_t0, verify_d3_bounds, verify_d_chain, verify_delta_boundary,
    verify_lemma4, verify_lemma5, x0_of_alpha, Abscissa, CheckOptions, CriterionReport,
    CurvatureReport, DeltaForm, EntireFunction, Error, GeometricGrid, GridSpec, MeanParams,
    MeanProfile, Shape, SuiteReport, SuiteStatus, Verdict,
};
use serde::Serialize;
use serde_json::json;

pub use report::{fmt_f64, ReportDocument, Sink, OUTPUT_DIR_ENV, SCHEMA};

#[derive(Parser, Debug)]
#[command(
    name = "gaussmean",
    version,
    about = "Gaussian integral means of entire functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate r, x = r², M, h, φ and the Gaussian mean on a geometric grid.
    Means(MeansArgs),
    /// Check a convexity criterion and compare with second differences.
    Analyze(AnalyzeArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Print t₀ and x₀ = t₀/(−α).
    Roots(RootsArgs),
    /// Classify log-log curvature over an (α, p) rectangle.
    Scan(ScanArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Args, Debug, Clone)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; `-` for stdout. Defaults to $GAUSSMEAN_OUTPUT_DIR/<command>.<ext>
    /// when that variable is set, else stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Tol {
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = gaussmean::tolerance::QUADRATURE)]
    tol: f64,
    /// Relative width of the zero band in sign tests.
    #[arg(long, default_value_t = gaussmean::tolerance::SIGN)]
    sign_tol: f64,
}

impl Tol {
    fn options(&self, points: usize) -> CheckOptions {
        CheckOptions {
            points,
            tolerances: gaussmean::tolerance::Tolerances {
                quadrature: self.tol,
                sign: self.sign_tol,
            },
            ..CheckOptions::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Radial {
    /// Entire function: mono:k, poly:c0,c1,..., exp:beta, taylor:@file.
    #[arg(long = "f")]
    f: EntireFunction,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
}

impl Radial {
    fn params(&self) -> Result<MeanParams, Error> {
        MeanParams::new(self.p, self.alpha)
    }
}

#[derive(Args, Debug)]
struct MeansArgs {
    #[command(flatten)]
    radial: Radial,
    #[arg(long, default_value_t = 0.1)]
    rmin: f64,
    #[arg(long, default_value_t = 2.0)]
    rmax: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[command(flatten)]
    tol: Tol,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Theorem {
    /// First criterion on [rmin², rmax²].
    #[value(name = "1")]
    T1,
    /// First criterion on (0, x₀).
    #[value(name = "1-below-x0")]
    T1BelowX0,
    #[value(name = "2")]
    T2,
    #[value(name = "3")]
    T3,
    #[value(name = "c1")]
    C1,
    #[value(name = "c2")]
    C2,
    #[value(name = "c3")]
    C3,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    radial: Radial,
    /// Criterion; defaults to 2 for α < 0 and 3 otherwise.
    #[arg(long, value_enum)]
    theorem: Option<Theorem>,
    #[arg(long, default_value_t = 0.05)]
    rmin: f64,
    #[arg(long, default_value_t = 2.0)]
    rmax: f64,
    /// Points of the criterion grid.
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Points of the second-difference grid.
    #[arg(long, default_value_t = 200)]
    oracle_points: usize,
    #[command(flatten)]
    tol: Tol,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Lemma4,
    Lemma5,
    Dchain,
    Delta,
    D3,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Function for lemma5 and delta.
    #[arg(long = "f", default_value = "poly:1,1")]
    f: EntireFunction,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// α values; lemma5, dchain and delta use the first.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,
    #[arg(long)]
    xlo: Option<f64>,
    #[arg(long)]
    xhi: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    /// Slope samples for d3.
    #[arg(long, value_delimiter = ',')]
    y: Option<Vec<f64>>,
    /// x for dchain.
    #[arg(long)]
    x: Option<f64>,
    /// Decreasing probes in (0, 1] for delta.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
    probes: Vec<f64>,
    /// Require |δ| ≤ bound·Mφ at the last delta probe.
    #[arg(long)]
    magnitude_bound: Option<f64>,
    #[arg(long)]
    unstable: bool,
    #[command(flatten)]
    tol: Tol,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct RootsArgs {
    #[arg(long, default_value_t = 1e-13)]
    precision: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Vec<f64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long = "f")]
    f: EntireFunction,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    alpha_min: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    alpha_max: f64,
    #[arg(long, default_value_t = 5)]
    alpha_steps: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    p: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    rmin: f64,
    #[arg(long, default_value_t = 3.0)]
    rmax: f64,
    #[arg(long, default_value_t = 120)]
    points: usize,
    #[command(flatten)]
    tol: Tol,
    #[command(flatten)]
    out: Output,
}

/// Error carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::InvalidGrid(_) | Error::Parse(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: format!("write failed: {e}"),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure {
            code: 1,
            message: format!("serialization failed: {e}"),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

/// Rendered report plus whether every asserted check passed.
struct Rendered {
    text: String,
    ok: bool,
}

/// Parses `args` (program name first), runs the command and writes the
/// report to `stdout` or its file sink. Returns the exit status: 0 when every
/// asserted check passes, 1 on failures or computation errors, 2 on usage
/// errors.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let echo: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let (stem, out) = match &cli.command {
        Command::Means(a) => ("means", &a.out),
        Command::Analyze(a) => ("analyze", &a.out),
        Command::Verify(a) => ("verify", &a.out),
        Command::Roots(a) => ("roots", &a.out),
        Command::Scan(a) => ("scan", &a.out),
    };
    let out = out.clone();
    let result = run(cli.command, &echo).and_then(|(format, rendered)| {
        let ext = match format {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Text => "txt",
        };
        Sink::resolve(out.output, stem, ext).write(&rendered.text, stdout)?;
        Ok(rendered.ok)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(f) => {
            let _ = writeln!(stderr, "gaussmean: {}", f.message);
            f.code
        }
    }
}

fn run(command: Command, echo: &[String]) -> Result<(Format, Rendered), Failure> {
    match command {
        Command::Means(a) => means(a, echo),
        Command::Analyze(a) => analyze(a, echo),
        Command::Verify(a) => verify(a, echo),
        Command::Roots(a) => roots(a, echo),
        Command::Scan(a) => scan(a, echo),
    }
}

fn pick(format: Option<Format>, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(usage(format!(
            "format {f:?} is not available for this command"
        )))
    }
}

fn tolerances_json(tol: &Tol) -> serde_json::Value {
    json!({ "quadrature": tol.tol, "sign": tol.sign_tol })
}

fn document<P: Serialize>(
    echo: &[String],
    tolerances: serde_json::Value,
    payload: P,
) -> Result<String, Failure> {
    Ok(ReportDocument::new(echo.to_vec(), tolerances, payload).to_json()?)
}

fn profile_csv(profile: &MeanProfile) -> String {
    let mut s = String::from("r,x,M,h,phi,mean\n");
    for row in &profile.rows {
        let cells = [row.r, row.x, row.m, row.h, row.phi, row.mean].map(fmt_f64);
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn means(a: MeansArgs, echo: &[String]) -> Result<(Format, Rendered), Failure> {
    let format = pick(
        a.out.format,
        Format::Csv,
        &[Format::Csv, Format::Json, Format::Text],
    )?;
    let params = a.radial.params()?;
    let grid = GeometricGrid::new(a.rmin, a.rmax, a.points)?;
    let profile = radial_mean_profile(&a.radial.f, params, &grid, a.tol.tol)?;
    let text = match format {
        Format::Json => document(
            echo,
            tolerances_json(&a.tol),
            json!({ "function": a.radial.f.to_string(), "profile": profile }),
        )?,
        _ => profile_csv(&profile),
    };
    Ok((format, Rendered { text, ok: true }))
}

#[derive(Serialize)]
struct AnalyzePayload {
    function: String,
    params: MeanParams,
    criterion: CriterionReport,
    second_differences: CurvatureReport,
    /// Whether the oracle's shape agrees with a `holds` verdict.
    consistent: bool,
}

fn analyze(a: AnalyzeArgs, echo: &[String]) -> Result<(Format, Rendered), Failure> {
    let format = pick(a.out.format, Format::Json, &[Format::Json, Format::Text])?;
    let params = a.radial.params()?;
    let f = &a.radial.f;
    if !(a.rmin > 0.0 && a.rmax > a.rmin) {
        return Err(usage("need 0 < rmin < rmax"));
    }
    let opts = a.tol.options(a.points);
    let (xlo, xhi) = (a.rmin * a.rmin, a.rmax * a.rmax);
    let theorem = a.theorem.unwrap_or(if params.alpha < 0.0 {
        Theorem::T2
    } else {
        Theorem::T3
    });
    let report = match theorem {
        Theorem::T1 => check_theorem1(f, params, (xlo, xhi), &opts)?,
        Theorem::T1BelowX0 => check_theorem1_below_x0(f, params, &opts)?,
        Theorem::T2 => check_theorem2(f, params, xhi, &opts)?,
        Theorem::T3 => check_theorem3(f, params, (xlo, xhi), &opts)?,
        Theorem::C1 => check_corollary1(f, params, &opts)?,
        Theorem::C2 => check_corollary2(f, params, xhi, &opts)?,
        Theorem::C3 => check_corollary3(f, params, (xlo, xhi), &opts)?,
    };
    let (rlo, rhi) = (report.interval.0.sqrt(), report.interval.1.sqrt());
    let grid = GeometricGrid::new(rlo, rhi, a.oracle_points)?;
    let profile = radial_mean_profile(f, params, &grid, a.tol.tol)?;
    let curvature = loglog_second_difference(&profile, Abscissa::Radius)?;
    let convex_claim = !matches!(theorem, Theorem::T3 | Theorem::C3);
    let consistent = report.verdict != Verdict::Holds
        || if convex_claim {
            curvature.is_convex()
        } else {
            curvature.is_concave()
        };
    let ok = report.verdict != Verdict::Fails && consistent;
    let payload = AnalyzePayload {
        function: f.to_string(),
        params,
        criterion: report,
        second_differences: curvature,
        consistent,
    };
    let text = match format {
        Format::Json => document(echo, tolerances_json(&a.tol), &payload)?,
        _ => analyze_text(&payload),
    };
    Ok((format, Rendered { text, ok }))
}

fn analyze_text(p: &AnalyzePayload) -> String {
    let r = &p.criterion;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "criterion={:?} f={} p={} alpha={} interval=[{}, {}]",
        r.criterion,
        p.function,
        p.params.p,
        p.params.alpha,
        fmt_f64(r.interval.0),
        fmt_f64(r.interval.1)
    );
    let _ = writeln!(
        s,
        "verdict={:?} points={} hypothesis_failures={} conclusion_failures={}",
        r.verdict, r.points, r.hypothesis_failures, r.conclusion_failures
    );
    for (lo, hi) in &r.hypothesis_runs {
        let _ = writeln!(s, "hypotheses hold on [{}, {}]", fmt_f64(*lo), fmt_f64(*hi));
    }
    for w in &r.witnesses {
        let _ = writeln!(
            s,
            "witness {} x={} slack={} tol={}",
            w.label,
            fmt_f64(w.x),
            fmt_f64(w.slack),
            fmt_f64(w.tolerance)
        );
    }
    let c = &p.second_differences;
    let _ = writeln!(
        s,
        "second differences: shape={:?} tol_curv={} consistent={}",
        c.shape,
        fmt_f64(c.tol_curv),
        p.consistent
    );
    s
}

fn verify(a: VerifyArgs, echo: &[String]) -> Result<(Format, Rendered), Failure> {
    let format = pick(a.out.format, Format::Text, &[Format::Json, Format::Text])?;
    let first_alpha = |default: f64| {
        a.alpha
            .as_ref()
            .and_then(|v| v.first().copied())
            .unwrap_or(default)
    };
    let report: SuiteReport = match a.suite {
        Suite::Lemma4 | Suite::D3 => {
            let mut grid = GridSpec::lemma4_default();
            if let Some(v) = &a.alpha {
                grid.alpha_values = v.clone();
            }
            grid.x_lo = a.xlo.unwrap_or(grid.x_lo);
            grid.x_hi = a.xhi.unwrap_or(grid.x_hi);
            grid.count = a.count.unwrap_or(grid.count);
            if let Some(y) = &a.y {
                grid.y_values = y.clone();
            }
            if a.suite == Suite::Lemma4 {
                verify_lemma4(&grid)?
            } else {
                verify_d3_bounds(&grid)?
            }
        }
        Suite::Lemma5 => {
            let params = MeanParams::new(a.p, first_alpha(-1.0))?;
            let grid = GridSpec::new(
                vec![params.alpha],
                a.xlo.unwrap_or(0.01),
                a.xhi.unwrap_or(10.0),
                a.count.unwrap_or(200),
                Vec::new(),
            )?;
            verify_lemma5(&a.f, params, &grid, a.tol.tol)?
        }
        Suite::Dchain => {
            let alpha = first_alpha(-1.0);
            let x = a.x.unwrap_or(3.0);
            if alpha < 0.0 && x > x0_of_alpha(alpha)? {
                verify_d_chain(alpha, x, &default_y_grid(alpha, x))?
            } else {
                verify_d_chain(alpha, x, &[])?
            }
        }
        Suite::Delta => {
            let params = MeanParams::new(a.p, first_alpha(-1.0))?;
            let form = if a.unstable {
                DeltaForm::Unstable
            } else {
                DeltaForm::Stable
            };
            verify_delta_boundary(&a.f, params, &a.probes, form, a.magnitude_bound, a.tol.tol)?
        }
    };
    let ok = report.status == SuiteStatus::Passed;
    let text = match format {
        Format::Json => document(echo, json!(report.tolerances), &report)?,
        _ => suite_text(&report),
    };
    Ok((format, Rendered { text, ok }))
}

fn suite_text(r: &SuiteReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "suite={} status={:?} checks={} failures={}",
        r.suite,
        r.status,
        r.checks_run,
        r.failures.len()
    );
    for (k, v) in &r.parameters {
        let _ = writeln!(s, "parameter {k}={v}");
    }
    for (k, v) in &r.tolerances {
        let _ = writeln!(s, "tolerance {k}={v:e}");
    }
    for f in r.failures.iter().take(20) {
        let params: Vec<String> = f.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(
            s,
            "FAIL {} [{}] lhs={} rhs={} slack={}",
            f.check,
            params.join(" "),
            fmt_f64(f.lhs),
            fmt_f64(f.rhs),
            fmt_f64(f.slack)
        );
    }
    if r.failures.len() > 20 {
        let _ = writeln!(s, "... {} more", r.failures.len() - 20);
    }
    s
}

#[derive(Serialize)]
struct RootsPayload {
    t0: f64,
    residual: f64,
    iterations: usize,
    x0: Vec<X0Row>,
}

#[derive(Serialize)]
struct X0Row {
    alpha: f64,
    x0: f64,
    r0: f64,
}

fn roots(a: RootsArgs, echo: &[String]) -> Result<(Format, Rendered), Failure> {
    let format = pick(a.out.format, Format::Text, &[Format::Json, Format::Text])?;
    let root = solve_t0(a.precision)?;
    let x0 = a
        .alpha
        .iter()
        .map(|&alpha| {
            let x0 = x0_of_alpha(alpha)?;
            Ok(X0Row {
                alpha,
                x0,
                r0: corollary1_radius(alpha)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let payload = RootsPayload {
        t0: root.value,
        residual: root.residual,
        iterations: root.iterations,
        x0,
    };
    let text = match format {
        Format::Json => document(echo, json!({ "precision": a.precision }), &payload)?,
        _ => {
            let mut s = format!(
                "t0={:.16} residual={:e} iterations={}\n",
                payload.t0, payload.residual, payload.iterations
            );
            for row in &payload.x0 {
                let _ = writeln!(s, "alpha={} x0={:.16} r0={:.16}", row.alpha, row.x0, row.r0);
            }
            s
        }
    };
    Ok((format, Rendered { text, ok: true }))
}

#[derive(Serialize)]
struct ScanCell {
    alpha: f64,
    p: f64,
    /// `√(t₀/(−α))` clipped to the grid for `α < 0`; absent otherwise.
    split: Option<f64>,
    inner: Option<Shape>,
    outer: Option<Shape>,
}

fn scan(a: ScanArgs, echo: &[String]) -> Result<(Format, Rendered), Failure> {
    let format = pick(a.out.format, Format::Csv, &[Format::Csv, Format::Json])?;
    if a.alpha_steps < 1 || !(a.alpha_max >= a.alpha_min) {
        return Err(usage("need alpha_min <= alpha_max and alpha_steps >= 1"));
    }
    let alphas: Vec<f64> = if a.alpha_steps == 1 {
        vec![a.alpha_min]
    } else {
        (0..a.alpha_steps)
            .map(|i| {
                a.alpha_min + (a.alpha_max - a.alpha_min) * i as f64 / (a.alpha_steps - 1) as f64
            })
            .collect()
    };
    let mut cells = Vec::new();
    for &alpha in &alphas {
        for &p in &a.p {
            let params = MeanParams::new(p, alpha)?;
            let split = if alpha < 0.0 {
                Some(corollary1_radius(alpha)?)
            } else {
                None
            };
            let shape_on = |lo: f64, hi: f64| -> Result<Option<Shape>, Error> {
                let n = a.points;
                if !(hi > lo * 1.05) {
                    return Ok(None);
                }
                let grid = GeometricGrid::new(lo, hi, n)?;
                let prof = radial_mean_profile(&a.f, params, &grid, a.tol.tol)?;
                Ok(Some(
                    loglog_second_difference(&prof, Abscissa::Radius)?.shape,
                ))
            };
            let (inner, outer) = match split {
                Some(s) => (
                    shape_on(a.rmin, s.min(a.rmax))?,
                    shape_on(s.max(a.rmin), a.rmax)?,
                ),
                None => (shape_on(a.rmin, a.rmax)?, None),
            };
            cells.push(ScanCell {
                alpha,
                p,
                split,
                inner,
                outer,
            });
        }
    }
    let text = match format {
        Format::Json => document(
            echo,
            tolerances_json(&a.tol),
            json!({ "function": a.f.to_string(), "rmin": a.rmin, "rmax": a.rmax, "points": a.points, "cells": cells }),
        )?,
        _ => {
            let name = |s: Option<Shape>| match s {
                Some(Shape::Convex) => "convex",
                Some(Shape::Concave) => "concave",
                Some(Shape::Linear) => "linear",
                Some(Shape::Mixed) => "mixed",
                None => "",
            };
            let mut s = String::from("alpha,p,split,inner,outer\n");
            for c in &cells {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    fmt_f64(c.alpha),
                    fmt_f64(c.p),
                    c.split.map(fmt_f64).unwrap_or_default(),
                    name(c.inner),
                    name(c.outer)
                );
            }
            s
        }
    };
    Ok((format, Rendered { text, ok: true }))
}
