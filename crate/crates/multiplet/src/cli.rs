//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verification threshold was exceeded, 2 bad
//! configuration or input, 3 numerical failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{self, GridInfo, SpectralReport, DEFAULT_POINTS};
use crate::closed_form::{peak_height_bound, ClosedForm};
use crate::dressed::{residues_numeric, spectrum_decomposed, DressedDecomposition};
use crate::error::Error;
use crate::linkage_dsl::{self, fmt_float};
use crate::model::{self, classify, compile, CoupledSystem, LinkageGraph, Method, SpectrumSeries, Topology};
use crate::oracle::{self, TimeTrajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    /// Classify a library error, prefixing the flag or file it came from.
    fn from_lib(context: &str, e: Error) -> Self {
        let code = match e {
            Error::NonFinite(_)
            | Error::DegenerateDarkLines
            | Error::NoConvergence(_)
            | Error::DegenerateRoots(..)
            | Error::SingularSystem(_)
            | Error::UnbracketedCrossing(_) => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        };
        CliError {
            code,
            message: format!("{context}: {e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "multiplet", version, about = "Autler-Townes multiplet emission spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a spectrum and write it as CSV or JSON.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Divide intensities by the peak height bound 4g²/Γ².
        #[arg(long)]
        normalize: bool,
    },
    /// Dark lines, peaks and widths as a JSON report.
    Report {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare every applicable method against the others.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Also compare the time-domain integration.
        #[arg(long)]
        with_time: bool,
        /// Scale the checked series by (1 + x) before comparing; for testing
        /// the failure path.
        #[arg(long, hide = true, allow_negative_numbers = true)]
        inject_error: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Named preset: doublet, triplet, quartuplet, quintuplet, sextuplet.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    preset: Option<String>,
    /// A `.linkage` file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Preset Rabi magnitudes in the order o1,o2,m1,m2[,m3,...]
    /// (triplet: o1,m1,m2).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    rabi: Vec<f64>,
    /// Preset loop phase in radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phase: f64,
    /// Preset decay rate.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "oracle")]
    method: MethodArg,
    #[arg(long, allow_negative_numbers = true)]
    dmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dmax: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Integration horizon for `--method time`, in units of 1/Γ.
    #[arg(long, default_value_t = oracle::DEFAULT_HORIZON)]
    horizon: f64,
    /// Integration step for `--method time`, in units of 1/Γ.
    #[arg(long, default_value_t = oracle::DEFAULT_STEP)]
    step: f64,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Dressed,
    Oracle,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Preset {
        name: String,
        rabi: Vec<f64>,
        phase: f64,
        gamma: Option<f64>,
    },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Input,
    pub method: MethodArg,
    pub dmin: Option<f64>,
    pub dmax: Option<f64>,
    pub points: Option<usize>,
    pub horizon: f64,
    pub step: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn from_args(a: CommonArgs, format: Format) -> Self {
        let input = match (a.preset, a.input) {
            (Some(name), _) => Input::Preset {
                name,
                rabi: a.rabi,
                phase: a.phase,
                gamma: a.gamma,
            },
            (None, Some(path)) => Input::File(path),
            (None, None) => unreachable!("clap requires one of --preset/--input"),
        };
        RunConfig {
            input,
            method: a.method,
            dmin: a.dmin,
            dmax: a.dmax,
            points: a.points,
            horizon: a.horizon,
            step: a.step,
            format,
            out: a.out,
        }
    }

    pub fn graph(&self) -> CliResult<LinkageGraph> {
        match &self.input {
            Input::Preset {
                name,
                rabi,
                phase,
                gamma,
            } => {
                let flag = if matches!(&linkage_dsl::preset(name, &[], 0.0), Err(Error::UnknownPreset(_))) {
                    "--preset"
                } else {
                    "--rabi"
                };
                let graph = linkage_dsl::preset(name, rabi, *phase).map_err(|e| CliError::from_lib(flag, e))?;
                match gamma {
                    Some(g) => graph.with_gamma(*g).map_err(|e| CliError::from_lib("--gamma", e)),
                    None => Ok(graph),
                }
            }
            Input::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::config(format!("--input {}: {e}", path.display())))?;
                linkage_dsl::parse(&text).map_err(|e| CliError::from_lib(&format!("--input {}", path.display()), e))
            }
        }
    }

    /// Explicit bounds, or the default symmetric window. The flag is true when
    /// the window is the default one and may be widened.
    fn window(
        &self,
        graph: &LinkageGraph,
        default_half: f64,
        default_points: usize,
    ) -> CliResult<(f64, f64, usize, bool)> {
        let w = default_half.max(analysis::default_half_width(model::coupling_norm(graph)) * graph.gamma());
        let dmin = self.dmin.unwrap_or(-w);
        let dmax = self.dmax.unwrap_or(w);
        let points = self.points.unwrap_or(default_points);
        analysis::grid(dmin, dmax, points).map_err(|e| CliError::from_lib("--dmin/--dmax/--points", e))?;
        Ok((dmin, dmax, points, self.dmin.is_none() && self.dmax.is_none()))
    }
}

/// A spectrum function bundled with whatever it was built from.
enum Evaluator {
    Closed(ClosedForm),
    Dressed(DressedDecomposition),
    Oracle(CoupledSystem),
    Time(TimeTrajectory, f64),
}

impl Evaluator {
    fn build(graph: &LinkageGraph, method: MethodArg, horizon: f64, step: f64) -> CliResult<Self> {
        match method {
            MethodArg::Closed => Ok(Evaluator::Closed(closed_form_of(graph)?)),
            MethodArg::Dressed => {
                let form = closed_form_of(graph)?;
                residues_numeric(&form)
                    .map(Evaluator::Dressed)
                    .map_err(|e| CliError::from_lib("--method dressed", e))
            }
            MethodArg::Oracle => Ok(Evaluator::Oracle(compile(graph))),
            MethodArg::Time => {
                let sys = compile(graph);
                let traj =
                    oracle::integrate(&sys, horizon, step).map_err(|e| CliError::from_lib("--horizon/--step", e))?;
                Ok(Evaluator::Time(traj, sys.g()))
            }
        }
    }

    fn method(&self) -> Method {
        match self {
            Evaluator::Closed(_) => Method::ClosedForm,
            Evaluator::Dressed(_) => Method::Dressed,
            Evaluator::Oracle(_) => Method::LinearSolve,
            Evaluator::Time(..) => Method::TimeDomain,
        }
    }

    fn warning(&self) -> Option<String> {
        match self {
            Evaluator::Time(traj, _) => oracle::tail_warning(traj),
            _ => None,
        }
    }

    fn eval(&self, delta: f64) -> crate::Result<f64> {
        match self {
            Evaluator::Closed(form) => form.intensity(delta),
            Evaluator::Dressed(d) => Ok(spectrum_decomposed(d, delta)),
            Evaluator::Oracle(sys) => oracle::spectrum_linear_solve(sys, delta),
            Evaluator::Time(traj, g) => Ok(oracle::spectrum_from_trajectory(traj, *g, delta)),
        }
    }
}

fn closed_form_of(graph: &LinkageGraph) -> CliResult<ClosedForm> {
    let topology = classify(graph).map_err(|e| CliError::from_lib("--method", e))?;
    Ok(ClosedForm::from_topology(topology, graph.gamma(), 1.0))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let fail = |e: std::io::Error| CliError::config(format!("--out {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::config(format!("stdout: {e}"))),
    }
}

pub fn csv(series: &SpectrumSeries) -> String {
    let mut s = String::with_capacity(32 * series.len());
    s.push_str("delta,intensity\n");
    for (d, v) in series.deltas.iter().zip(&series.values) {
        let _ = writeln!(s, "{},{}", fmt_float(*d), fmt_float(*v));
    }
    s
}

#[derive(Serialize)]
struct SeriesJson<'a> {
    method: Method,
    grid: GridInfo,
    delta: &'a [f64],
    intensity: &'a [f64],
}

fn sample_with(ev: &Evaluator, dmin: f64, dmax: f64, points: usize) -> CliResult<SpectrumSeries> {
    analysis::sample(|d| ev.eval(d), dmin, dmax, points, ev.method()).map_err(|e| CliError::from_lib("sampling", e))
}

pub fn cmd_spectrum(
    config: &RunConfig,
    normalize: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<()> {
    let graph = config.graph()?;
    let ev = Evaluator::build(&graph, config.method, config.horizon, config.step)?;
    if let Some(w) = ev.warning() {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let (dmin, dmax, points, _) = config.window(&graph, 0.0, DEFAULT_POINTS)?;
    let mut series = sample_with(&ev, dmin, dmax, points)?;
    if normalize {
        let bound = peak_height_bound(graph.gamma(), 1.0);
        series.values.iter_mut().for_each(|v| *v /= bound);
    }
    let text = match config.format {
        Format::Csv => csv(&series),
        Format::Json => {
            let doc = SeriesJson {
                method: series.method,
                grid: GridInfo { dmin, dmax, points },
                delta: &series.deltas,
                intensity: &series.values,
            };
            serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
        }
    };
    emit(&config.out, &text, stdout)
}

pub fn build_report(config: &RunConfig) -> CliResult<SpectralReport> {
    let graph = config.graph()?;
    let ev = Evaluator::build(&graph, config.method, config.horizon, config.step)?;
    let (dmin, dmax, points, widen) = config.window(&graph, 0.0, DEFAULT_POINTS)?;
    let f = |d: f64| ev.eval(d);
    let mut report = if widen {
        analysis::report_widening(&f, dmax, points, ev.method(), graph.gamma())
            .map_err(|e| CliError::from_lib("report", e))?
    } else {
        let series = sample_with(&ev, dmin, dmax, points)?;
        analysis::report(&series, &f, graph.gamma()).map_err(|e| CliError::from_lib("report", e))?
    };
    report.warnings.extend(ev.warning());
    Ok(report)
}

pub fn cmd_report(config: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let report = build_report(config)?;
    let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
    emit(&config.out, &text, stdout)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.threshold
    }
}

fn relative_deviation(a: &[f64], b: &[f64], deltas: &[f64], zeros: &[f64]) -> f64 {
    deltas
        .iter()
        .zip(a.iter().zip(b))
        .filter(|(d, _)| zeros.iter().all(|z| (*d - z).abs() > 1e-6))
        .map(|(_, (x, y))| {
            if x == y {
                0.0
            } else {
                (x - y).abs() / y.abs().max(x.abs())
            }
        })
        .fold(0.0, f64::max)
}

fn zero_deviation(
    f: &dyn Fn(f64) -> crate::Result<f64>,
    g: &dyn Fn(f64) -> crate::Result<f64>,
    zeros: &[f64],
) -> crate::Result<f64> {
    let mut worst: f64 = 0.0;
    for &z in zeros {
        worst = worst.max((f(z)? - g(z)?).abs());
    }
    Ok(worst)
}

/// Run every applicable comparison on the configured grid (default 2001
/// points on [-6, 6]).
pub fn verify_checks(
    config: &RunConfig,
    with_time: bool,
    inject: Option<f64>,
    stderr: &mut dyn Write,
) -> CliResult<Vec<Check>> {
    let graph = config.graph()?;
    let (dmin, dmax, points, _) = config.window(&graph, 6.0, 2001)?;
    let deltas = analysis::grid(dmin, dmax, points).map_err(|e| CliError::from_lib("--dmin/--dmax", e))?;
    let scale = 1.0 + inject.unwrap_or(0.0);
    let numeric = |e: Error| CliError::from_lib("verify", e);

    let sys = compile(&graph);
    let oracle_f = |d: f64| oracle::spectrum_linear_solve(&sys, d);
    let reference = analysis::sample(oracle_f, dmin, dmax, points, Method::LinearSolve).map_err(numeric)?;

    let mut checks = Vec::new();
    let topology = classify(&graph).ok();
    let mut time_needed = with_time;
    match topology {
        Some(t) => {
            let form = ClosedForm::from_topology(t, graph.gamma(), 1.0);
            let zeros = form.zeros().map_err(numeric)?;
            let closed_f = |d: f64| form.intensity(d).map(|v| v * scale);
            let closed = analysis::sample(closed_f, dmin, dmax, points, Method::ClosedForm).map_err(numeric)?;
            checks.push(Check {
                name: "closed_form vs linear_solve, max rel".into(),
                value: relative_deviation(&closed.values, &reference.values, &deltas, &zeros),
                threshold: 1e-9,
            });
            checks.push(Check {
                name: "closed_form vs linear_solve at zeros, max abs".into(),
                value: zero_deviation(&closed_f, &oracle_f, &zeros).map_err(numeric)?,
                threshold: 1e-12,
            });
            match residues_numeric(&form) {
                Ok(dec) => {
                    let dressed_f = |d: f64| Ok(spectrum_decomposed(&dec, d));
                    let dressed = analysis::sample(dressed_f, dmin, dmax, points, Method::Dressed).map_err(numeric)?;
                    checks.push(Check {
                        name: "dressed vs closed_form, max rel".into(),
                        value: relative_deviation(&dressed.values, &closed.values, &deltas, &zeros),
                        threshold: 1e-8,
                    });
                    checks.push(Check {
                        name: "dressed vs closed_form at zeros, max abs".into(),
                        value: zero_deviation(&dressed_f, &closed_f, &zeros).map_err(numeric)?,
                        threshold: 1e-12,
                    });
                }
                Err(Error::DegenerateRoots(..)) => {}
                Err(e) => return Err(numeric(e)),
            }
            if let Some((name, reduced)) = reduction_of(&form) {
                let red = analysis::sample(|d| reduced.intensity(d), dmin, dmax, points, Method::ClosedForm)
                    .map_err(numeric)?;
                checks.push(Check {
                    name: format!("reduction to {name}, max rel"),
                    value: relative_deviation(&closed.values, &red.values, &deltas, &[]),
                    threshold: 1e-12,
                });
            }
        }
        None => time_needed = true,
    }
    if time_needed {
        let traj = oracle::integrate(&sys, config.horizon, config.step)
            .map_err(|e| CliError::from_lib("--horizon/--step", e))?;
        if let Some(w) = oracle::tail_warning(&traj) {
            let _ = writeln!(stderr, "warning: {w}");
        }
        let g = sys.g();
        let series = analysis::sample(
            |d| Ok(oracle::spectrum_from_trajectory(&traj, g, d) * scale),
            dmin,
            dmax,
            points,
            Method::TimeDomain,
        )
        .map_err(numeric)?;
        let peak = reference.max();
        let worst = series
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).abs() / peak)
            .fold(0.0, f64::max);
        checks.push(Check {
            name: "time_domain vs linear_solve, max abs / peak".into(),
            value: worst,
            threshold: 1e-4,
        });
    }
    Ok(checks)
}

/// The lower-order closed form a quartuplet or quintuplet reduces to when
/// the relevant fields vanish.
fn reduction_of(form: &ClosedForm) -> Option<(&'static str, ClosedForm)> {
    match *form {
        ClosedForm::Quartuplet(p) if p.o2 == 0.0 && p.m1 == 0.0 && p.m2 == 0.0 => Some((
            "doublet",
            ClosedForm::Doublet {
                o1: p.o1,
                gamma: p.gamma,
                g: p.g,
            },
        )),
        ClosedForm::Quintuplet(p) if p.o2 == 0.0 && p.m3 == 0.0 => Some((
            "triplet",
            ClosedForm::from_topology(
                Topology::Triplet {
                    o1: p.o1,
                    m1: p.m1,
                    m2: p.m2,
                },
                p.gamma,
                p.g,
            ),
        )),
        _ => None,
    }
}

pub fn format_checks(checks: &[Check]) -> String {
    let mut s = format!("{:<48} {:>12} {:>10}  result\n", "check", "value", "threshold");
    for c in checks {
        let _ = writeln!(
            s,
            "{:<48} {:>12.3e} {:>10.0e}  {}",
            c.name,
            c.value,
            c.threshold,
            if c.passed() { "pass" } else { "FAIL" }
        );
    }
    s
}

pub fn cmd_verify(
    config: &RunConfig,
    with_time: bool,
    inject: Option<f64>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<bool> {
    let checks = verify_checks(config, with_time, inject, stderr)?;
    emit(&config.out, &format_checks(&checks), stdout)?;
    Ok(checks.iter().all(Check::passed))
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Spectrum {
            common,
            format,
            normalize,
        } => cmd_spectrum(&RunConfig::from_args(common, format), normalize, stdout, stderr).map(|_| true),
        Command::Report { common } => cmd_report(&RunConfig::from_args(common, Format::Json), stdout).map(|_| true),
        Command::Verify {
            common,
            with_time,
            inject_error,
        } => cmd_verify(
            &RunConfig::from_args(common, Format::Csv),
            with_time,
            inject_error,
            stdout,
            stderr,
        ),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY_FAILED,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}
