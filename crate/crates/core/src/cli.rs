//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 numerical non-convergence.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::geometry::SpaceDescriptor;
use crate::kernels::{compare_representations, unified, KernelValue, Method};
use crate::verify::{
    full_suite, kernel_d_grid, linspace, summarize, Family, SuiteProfile, VerificationReport,
    KERNEL_T_GRID,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Smallest diffusion time accepted on the command line.
pub const MIN_T: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(
    name = "hpheat",
    version,
    about = "Heat kernels on complex and quaternionic projective spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel value at one (t, d).
    Eval(EvalArgs),
    /// Kernel values on a t × d grid, t-major.
    Table(TableArgs),
    /// Series against integral representation on a grid.
    Compare(CompareArgs),
    /// Runs the verification suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    Cpn,
    Hpn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Series,
    Integral,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Pretty,
}

#[derive(Debug, Args)]
pub struct SpaceOpts {
    #[arg(long, value_enum, default_value = "hpn")]
    pub space: SpaceArg,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
}

impl SpaceOpts {
    fn descriptor(&self) -> Result<SpaceDescriptor, Failure> {
        let s = match self.space {
            SpaceArg::Cpn => SpaceDescriptor::cpn(self.n),
            SpaceArg::Hpn => SpaceDescriptor::hpn(self.n),
        };
        s.map_err(Failure::Usage)
    }
}

#[derive(Debug, Args)]
pub struct OutputOpts {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub space: SpaceOpts,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub d: f64,
    #[arg(long, value_enum, default_value = "series")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Args)]
pub struct GridOpts {
    #[arg(long, allow_hyphen_values = true, conflicts_with = "t_grid")]
    pub t: Option<f64>,
    /// `a:b:count`, `count` equally spaced points from `a` to `b`.
    #[arg(long, allow_hyphen_values = true)]
    pub t_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "d_grid")]
    pub d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub space: SpaceOpts,
    #[command(flatten)]
    pub grid: GridOpts,
    #[arg(long, value_enum, default_value = "series")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub space: SpaceOpts,
    #[command(flatten)]
    pub grid: GridOpts,
    /// Accepted for symmetry with `table`; only `both` is meaningful.
    #[arg(long, value_enum, default_value = "both")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Restrict to these check families (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Keep only reports about P^n(C) (1) or P^n(H) (2).
    #[arg(long)]
    pub k: Option<usize>,
    /// Judge every check at this tolerance instead of its default.
    #[arg(long)]
    pub tol: Option<f64>,
    /// One JSON report per line instead of the summary table.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Usage(Error),
    Numerical(Error),
    Io(io::Error),
    Verification,
}

impl Failure {
    fn from_kernel(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e)
        } else {
            Failure::Usage(e)
        }
    }

    fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(Error::Domain(msg.into()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Numerical(_) => EXIT_NUMERICAL,
            Failure::Io(_) => EXIT_USAGE,
            Failure::Verification => EXIT_VERIFICATION,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Output goes to `stdout` unless `--out` is given.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(&cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            match &f {
                Failure::Usage(e) | Failure::Numerical(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                }
                Failure::Io(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                }
                Failure::Verification => {
                    let _ = writeln!(stderr, "verification failed");
                }
            }
            f.exit_code()
        }
    }
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Eval(a) => {
            let space = a.space.descriptor()?;
            check_tol(a.tol)?;
            check_t(a.t)?;
            check_d(a.d)?;
            let row = evaluate_row(&space, a.t, a.d, a.method, a.tol)?;
            emit(&a.output, stdout, |w| {
                write_rows(w, a.output.format, &[row])
            })
        }
        Command::Table(a) => {
            let space = a.space.descriptor()?;
            check_tol(a.tol)?;
            let (ts, ds) = grids(&a.grid, None)?;
            let points: Vec<(f64, f64)> = ts
                .iter()
                .flat_map(|&t| ds.iter().map(move |&d| (t, d)))
                .collect();
            let rows = points
                .par_iter()
                .map(|&(t, d)| evaluate_row(&space, t, d, a.method, a.tol))
                .collect::<Result<Vec<_>, _>>()?;
            emit(&a.output, stdout, |w| write_rows(w, a.output.format, &rows))
        }
        Command::Compare(a) => {
            let space = a.space.descriptor()?;
            check_tol(a.tol)?;
            let (ts, ds) = grids(&a.grid, Some((KERNEL_T_GRID.to_vec(), kernel_d_grid())))?;
            let points: Vec<(f64, f64)> = ts
                .iter()
                .flat_map(|&t| ds.iter().map(move |&d| (t, d)))
                .collect();
            let reports = points
                .par_iter()
                .map(|&(t, d)| compare_report(&space, t, d, a.tol))
                .collect::<Result<Vec<_>, _>>()?;
            emit(&a.output, stdout, |w| {
                write_reports(w, a.output.format, &reports)
            })?;
            if reports.iter().all(|r| r.passed) {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
        Command::Selftest(a) => {
            let only = a
                .only
                .iter()
                .map(|s| s.parse::<Family>().map_err(Failure::Usage))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(tol) = a.tol {
                if !(tol >= 0.0) || !tol.is_finite() {
                    return Err(Failure::usage(format!(
                        "tolerance {tol} must be non-negative"
                    )));
                }
            }
            if let Some(k) = a.k {
                if k != 1 && k != 2 {
                    return Err(Failure::usage(format!("k must be 1 or 2, got {k}")));
                }
            }
            let reports = full_suite(&SuiteProfile {
                tol: a.tol,
                k: a.k,
                only,
            });
            let output = OutputOpts {
                format: if a.json { Format::Json } else { Format::Pretty },
                out: a.out.clone(),
            };
            emit(&output, stdout, |w| {
                if a.json {
                    reports
                        .iter()
                        .try_for_each(|r| writeln!(w, "{}", r.to_json_line()))
                } else {
                    write_summary(w, &reports)
                }
            })?;
            if reports.iter().all(|r| r.passed) {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

fn check_t(t: f64) -> Result<(), Failure> {
    if !(t >= MIN_T) || !t.is_finite() {
        return Err(Failure::usage(format!(
            "t={t} out of range: t must be finite and at least {MIN_T:e}"
        )));
    }
    Ok(())
}

fn check_d(d: f64) -> Result<(), Failure> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&d) {
        return Err(Failure::usage(format!(
            "d={d} out of range: d must lie in [0, pi/2)"
        )));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Failure::usage(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

/// Parses `a:b:count` into `count` strictly increasing points.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Domain(format!("grid '{spec}' must have the form a:b:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(Error::Domain(format!("grid '{spec}' is empty")));
    }
    if count > 1 && !(b > a) {
        return Err(Error::Domain(format!(
            "grid '{spec}' must be strictly increasing"
        )));
    }
    Ok(linspace(a, b, count))
}

fn grids(
    g: &GridOpts,
    default: Option<(Vec<f64>, Vec<f64>)>,
) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let (default_t, default_d) = match default {
        Some((t, d)) => (Some(t), Some(d)),
        None => (None, None),
    };
    let pick = |single: Option<f64>,
                grid: &Option<String>,
                fallback: Option<Vec<f64>>,
                name: &str| {
        match (single, grid) {
            (Some(v), _) => Ok(vec![v]),
            (None, Some(spec)) => parse_grid(spec).map_err(Failure::Usage),
            (None, None) => fallback.ok_or_else(|| {
                Failure::usage(format!("either --{name} or --{name}-grid is required"))
            }),
        }
    };
    let ts = pick(g.t, &g.t_grid, default_t, "t")?;
    let ds = pick(g.d, &g.d_grid, default_d, "d")?;
    ts.iter().try_for_each(|&t| check_t(t))?;
    ds.iter().try_for_each(|&d| check_d(d))?;
    Ok((ts, ds))
}

/// One output row; `paired` is set for `--method both`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub k: usize,
    pub n: usize,
    pub t: f64,
    pub d: f64,
    pub method: &'static str,
    pub value: f64,
    pub est_error: f64,
    pub terms_or_nodes: usize,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub paired: Option<Paired>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Paired {
    pub value_series: f64,
    pub value_integral: f64,
    pub abs_diff: f64,
}

fn evaluate_row(
    space: &SpaceDescriptor,
    t: f64,
    d: f64,
    method: MethodArg,
    tol: f64,
) -> Result<Row, Failure> {
    let eval = |m: Method| unified(space, t, d, tol, m).map_err(Failure::from_kernel);
    let row = |name: &'static str, v: KernelValue, paired: Option<Paired>| Row {
        k: space.k(),
        n: space.n(),
        t,
        d,
        method: name,
        value: v.value,
        est_error: v.est_error,
        terms_or_nodes: v.terms_or_nodes,
        paired,
    };
    Ok(match method {
        MethodArg::Series => row("series", eval(Method::Series)?, None),
        MethodArg::Integral => row("integral", eval(Method::Integral)?, None),
        MethodArg::Both => {
            let s = eval(Method::Series)?;
            let i = eval(Method::Integral)?;
            let paired = Paired {
                value_series: s.value,
                value_integral: i.value,
                abs_diff: (s.value - i.value).abs(),
            };
            row("both", s, Some(paired))
        }
    })
}

fn compare_report(
    space: &SpaceDescriptor,
    t: f64,
    d: f64,
    tol: f64,
) -> Result<VerificationReport, Failure> {
    let c = compare_representations(space, t, d, tol).map_err(Failure::from_kernel)?;
    let params = [
        ("k", space.k() as f64),
        ("n", space.n() as f64),
        ("t", t),
        ("d", d),
    ];
    Ok(VerificationReport::new(
        "representation",
        &params,
        c.integral.value,
        c.series.value,
        tol,
    ))
}

fn emit(
    output: &OutputOpts,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), Failure> {
    match &output.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => body(stdout)?,
    }
    Ok(())
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

const CSV_HEADER: &str = "k,n,t,d,method,value,est_error,terms_or_nodes";
const PAIRED_HEADER: &str = "value_series,value_integral,abs_diff";

fn write_rows(w: &mut dyn Write, format: Format, rows: &[Row]) -> io::Result<()> {
    let paired = rows.iter().any(|r| r.paired.is_some());
    match format {
        Format::Csv => {
            if paired {
                writeln!(w, "{CSV_HEADER},{PAIRED_HEADER}")?;
            } else {
                writeln!(w, "{CSV_HEADER}")?;
            }
            for r in rows {
                let mut line = format!(
                    "{},{},{},{},{},{},{},{}",
                    r.k,
                    r.n,
                    float(r.t),
                    float(r.d),
                    r.method,
                    float(r.value),
                    float(r.est_error),
                    r.terms_or_nodes
                );
                if let Some(p) = r.paired {
                    let _ = write!(
                        line,
                        ",{},{},{}",
                        float(p.value_series),
                        float(p.value_integral),
                        float(p.abs_diff)
                    );
                }
                writeln!(w, "{line}")?;
            }
        }
        Format::Json => {
            for r in rows {
                writeln!(
                    w,
                    "{}",
                    serde_json::to_string(r).expect("rows always serialize")
                )?;
            }
        }
        Format::Pretty => {
            for r in rows {
                write!(
                    w,
                    "k={} n={} t={} d={} {}: value = {:.12e}  est_error = {:.2e}  terms_or_nodes = {}",
                    r.k, r.n, r.t, r.d, r.method, r.value, r.est_error, r.terms_or_nodes
                )?;
                if let Some(p) = r.paired {
                    write!(
                        w,
                        "  integral = {:.12e}  abs_diff = {:.2e}",
                        p.value_integral, p.abs_diff
                    )?;
                }
                writeln!(w)?;
            }
        }
    }
    Ok(())
}

fn write_reports(
    w: &mut dyn Write,
    format: Format,
    reports: &[VerificationReport],
) -> io::Result<()> {
    match format {
        Format::Json => reports
            .iter()
            .try_for_each(|r| writeln!(w, "{}", r.to_json_line())),
        Format::Csv => {
            writeln!(
                w,
                "k,n,t,d,value_series,value_integral,abs_diff,rel_diff,tol,passed"
            )?;
            for r in reports {
                let p = |key| float(r.parameter(key).unwrap_or(f64::NAN));
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.parameter("k").unwrap_or(f64::NAN),
                    r.parameter("n").unwrap_or(f64::NAN),
                    p("t"),
                    p("d"),
                    float(r.rhs),
                    float(r.lhs),
                    float(r.abs_err),
                    float(r.rel_err),
                    float(r.tol),
                    r.passed
                )?;
            }
            Ok(())
        }
        Format::Pretty => {
            for r in reports {
                writeln!(
                    w,
                    "{} t={} d={}  series = {:.15e}  integral = {:.15e}  rel_diff = {:.2e}",
                    if r.passed { "ok  " } else { "FAIL" },
                    r.parameter("t").unwrap_or(f64::NAN),
                    r.parameter("d").unwrap_or(f64::NAN),
                    r.rhs,
                    r.lhs,
                    r.rel_err
                )?;
            }
            Ok(())
        }
    }
}

fn write_summary(w: &mut dyn Write, reports: &[VerificationReport]) -> io::Result<()> {
    writeln!(
        w,
        "{:<22} {:>8} {:>8}  status",
        "identity", "passed", "total"
    )?;
    for (name, passed, total) in summarize(reports) {
        let status = if passed == total { "ok" } else { "FAIL" };
        writeln!(w, "{name:<22} {passed:>8} {total:>8}  {status}")?;
    }
    for r in reports
        .iter()
        .filter(|r| r.identity_name == "jacobi_rep_convention")
    {
        match r.parameter("alpha_offset") {
            Some(o) if o.is_finite() => writeln!(w, "jacobi_rep passes with upper index 2n-{o}")?,
            _ => writeln!(w, "jacobi_rep: no single upper-index reading passes")?,
        }
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    writeln!(w, "{} reports, {} failed", reports.len(), failed)
}
