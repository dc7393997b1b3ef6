//! Command-line front end.
//!
//! Curves are written as CSV, structured results as JSON. Output goes to
//! `--out` when given, otherwise into the directory named by `--out-dir`
//! (or `PARITY_GATE_OUT_DIR`) under a per-command file name, otherwise to
//! stdout.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::analysis::{format_float, required_alpha, required_alpha_exact, sweep, Grid, Spacing, SweepSpec, SweepTarget};
use crate::cavity::{transfer_coefficients, CavityParams};
use crate::error::GateError;
use crate::gate::{evolve_lossless, run_shots, DetectorModel, ShotRecord, Tally};
use crate::oracle::{default_cutoff, oracle_report};
use crate::states::{Component, Parity, PolarizationState, StateRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

pub const OUT_DIR_ENV: &str = "PARITY_GATE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "parity-gate", version, about = "Ring-cavity cross-Kerr parity gate simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Required |α| against r = θ/τ at a fixed error probability.
    Figure2(Figure2Args),
    /// Lossy-bus error probability against λ/θ, one column per |α|.
    Figure4(LossCurveArgs),
    /// Odd-state fidelity against λ/θ, one column per |α|.
    Figure5(LossCurveArgs),
    /// Smallest |α| reaching a target error probability.
    Threshold(ThresholdArgs),
    /// Seeded Monte Carlo run of the detection protocol.
    GateRun(GateRunArgs),
    /// Cross-check the branch algebra against the Fock-space oracle.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for default-named output files.
    #[arg(long, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CavityArgs {
    /// Cross-Kerr phase per signal photon.
    #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
    pub theta: f64,
    /// Coupling-mirror transmissivity; defaults to θ.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Bus loss per round trip.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Bus amplitude, e.g. `4`, `3+1i`, `-2i`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, conflicts_with = "kappa_alpha")]
    pub alpha: Option<C64>,
    /// Real bus amplitude chosen so that |κ₀α| equals this value.
    #[arg(long)]
    pub kappa_alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub eta1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta2: f64,
}

pub const DEFAULT_ALPHA: f64 = 4.0;

impl CavityArgs {
    pub fn params(&self) -> Result<CavityParams, GateError> {
        let tau = self.tau.unwrap_or(self.theta);
        let base = CavityParams::from_parts(
            self.theta,
            tau,
            self.lambda,
            C64::new(DEFAULT_ALPHA, 0.0),
            self.eta1,
            self.eta2,
        )?;
        let alpha = match (self.alpha, self.kappa_alpha) {
            (Some(a), _) => a,
            (None, Some(m)) => {
                if !(m >= 0.0 && m.is_finite()) {
                    return Err(GateError::Config(format!("--kappa-alpha must be finite and nonnegative, got {m}")));
                }
                C64::new(m / transfer_coefficients(&base, 0).kappa.norm(), 0.0)
            }
            (None, None) => C64::new(DEFAULT_ALPHA, 0.0),
        };
        base.with_alpha(alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpacingArg {
    Linear,
    Log,
}

impl From<SpacingArg> for Spacing {
    fn from(s: SpacingArg) -> Self {
        match s {
            SpacingArg::Linear => Spacing::Linear,
            SpacingArg::Log => Spacing::Log,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub min: Option<f64>,
    #[arg(long)]
    pub max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub spacing: Option<SpacingArg>,
}

impl GridArgs {
    fn grid(&self, min: f64, max: f64, points: usize, spacing: Spacing) -> Result<Grid, GateError> {
        Grid::new(
            self.min.unwrap_or(min),
            self.max.unwrap_or(max),
            self.points.unwrap_or(points),
            self.spacing.map_or(spacing, Spacing::from),
        )
    }
}

#[derive(Debug, Clone, Args)]
pub struct Figure2Args {
    #[arg(long, default_value_t = 1e-4)]
    pub perr: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LossCurveArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub theta: f64,
    /// Defaults to θ.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Comma-separated bus amplitudes, one column each.
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 30.0])]
    pub alphas: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub theta: f64,
    /// Defaults to θ.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub perr: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GateRunArgs {
    #[command(flatten)]
    pub cavity: CavityArgs,
    /// Qubit input: `uniform`, `odd-bell`, `hh`, `hv`, `vh`, `vv`, or four
    /// comma-separated complex amplitudes.
    #[arg(long, value_parser = parse_input_state, default_value = "uniform")]
    pub input_state: PolarizationState,
    /// Generated and reported on stderr when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    /// Summary JSON file; stdout when only the summary is requested,
    /// stderr otherwise.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Skip the per-shot CSV.
    #[arg(long)]
    pub summary_only: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub cavity: CavityArgs,
    #[arg(long, value_parser = parse_input_state, default_value = "uniform")]
    pub input_state: PolarizationState,
    /// Photon-number cutoff; defaults to ⌈|α|² + 8|α| + 16⌉.
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `x`, `yi`, `x+yi` or `x-yi`; `i` may also be written `j`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse `{s}` as a complex number");
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return num(&t).map(|re| C64::new(re, 0.0));
    };
    let imag = |x: &str| match x {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => num(x.strip_suffix('*').unwrap_or(x)),
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(C64::new(num(&body[..k])?, imag(&body[k..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

pub fn parse_input_state(s: &str) -> Result<PolarizationState, String> {
    let preset = match s.to_ascii_lowercase().as_str() {
        "uniform" => Some(PolarizationState::uniform()),
        "odd-bell" => Some(PolarizationState::odd_bell()),
        "hh" => Some(PolarizationState::basis(Component::HH)),
        "hv" => Some(PolarizationState::basis(Component::HV)),
        "vh" => Some(PolarizationState::basis(Component::VH)),
        "vv" => Some(PolarizationState::basis(Component::VV)),
        _ => None,
    };
    if let Some(p) = preset {
        return Ok(p);
    }
    let parts: Vec<C64> = s.split(',').map(parse_complex).collect::<Result<_, _>>()?;
    let amps: [C64; 4] = parts
        .try_into()
        .map_err(|v: Vec<C64>| format!("input state needs 4 amplitudes, got {}", v.len()))?;
    PolarizationState::new(amps).map_err(|e| e.to_string())
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Validation(String),
}

impl From<GateError> for CliError {
    fn from(e: GateError) -> Self {
        match e {
            GateError::Validation { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

enum Sink {
    Stdout,
    Stderr,
    File(PathBuf),
}

impl OutputArgs {
    fn sink(&self, default_name: &str) -> Sink {
        match (&self.out, &self.out_dir) {
            (Some(p), _) => Sink::File(p.clone()),
            (None, Some(dir)) => Sink::File(dir.join(default_name)),
            (None, None) => Sink::Stdout,
        }
    }
}

fn emit(sink: &Sink, text: &str, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match sink {
        Sink::Stdout => out.write_all(text.as_bytes())?,
        Sink::Stderr => err.write_all(text.as_bytes())?,
        Sink::File(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Figure2(a) => cmd_figure2(a, out, err),
        Command::Figure4(a) => cmd_loss_curve(a, SweepTarget::LossDistinguishError, out, err),
        Command::Figure5(a) => cmd_loss_curve(a, SweepTarget::OddFidelity, out, err),
        Command::Threshold(a) => cmd_threshold(a, out, err),
        Command::GateRun(a) => cmd_gate_run(a, out, err),
        Command::Validate(a) => cmd_validate(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Validation(msg)) => {
            let _ = writeln!(err, "validation failed: {msg}");
            EXIT_VALIDATION
        }
    }
}

fn cmd_figure2(a: &Figure2Args, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    // the approximate inverse ignores θ and τ separately, only r enters
    let params = CavityParams::real(1e-3, 1e-3, 1.0)?;
    let spec = SweepSpec {
        target: SweepTarget::RequiredAlpha,
        grid: a.grid.grid(0.1, 10.0, 200, Spacing::Log)?,
        params,
        p_err: a.perr,
    };
    required_alpha(1.0, a.perr)?;
    let mut table = sweep(&spec)?;
    table.y_name = "alpha".into();
    emit(&a.output.sink("figure2.csv"), &table.to_csv(), out, err)?;
    Ok(EXIT_OK)
}

fn loss_curve_csv(a: &LossCurveArgs, target: SweepTarget) -> CliResult<String> {
    if a.alphas.is_empty() {
        return Err(CliError::Usage("--alphas needs at least one value".into()));
    }
    let tau = a.tau.unwrap_or(a.theta);
    let grid = a.grid.grid(0.0, 10.0, 201, Spacing::Linear)?;
    let prefix = match target {
        SweepTarget::OddFidelity => "f_odd",
        _ => "p_e",
    };
    let mut columns = Vec::with_capacity(a.alphas.len());
    for &alpha in &a.alphas {
        let spec = SweepSpec {
            target,
            grid,
            params: CavityParams::real(a.theta, tau, alpha)?,
            p_err: 0.0,
        };
        columns.push(sweep(&spec)?);
    }

    let mut csv = String::from("lambda_over_theta");
    for alpha in &a.alphas {
        let _ = write!(csv, ",{prefix}_alpha_{alpha}");
    }
    csv.push('\n');
    for (i, x) in grid.values().into_iter().enumerate() {
        csv.push_str(&format_float(x));
        for col in &columns {
            csv.push(',');
            csv.push_str(&format_float(col.rows[i].1));
        }
        csv.push('\n');
    }
    Ok(csv)
}

fn cmd_loss_curve(a: &LossCurveArgs, target: SweepTarget, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let name = match target {
        SweepTarget::OddFidelity => "figure5.csv",
        _ => "figure4.csv",
    };
    let csv = loss_curve_csv(a, target)?;
    emit(&a.output.sink(name), &csv, out, err)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct ThresholdReport {
    theta: f64,
    tau: f64,
    r: f64,
    p_err: f64,
    alpha_approx: f64,
    alpha_exact: f64,
}

fn cmd_threshold(a: &ThresholdArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let tau = a.tau.unwrap_or(a.theta);
    let params = CavityParams::real(a.theta, tau, 1.0)?;
    let r = params.theta().abs() / params.tau();
    let report = ThresholdReport {
        theta: a.theta,
        tau,
        r,
        p_err: a.perr,
        alpha_approx: required_alpha(r, a.perr)?,
        alpha_exact: required_alpha_exact(a.theta, tau, a.perr)?,
    };
    emit(&a.output.sink("threshold.json"), &to_json(&report), out, err)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub shots: u64,
    pub params: CavityParams,
    pub input_state: StateRecord,
    pub tally: Tally,
    pub empirical_p_err: f64,
    /// `Σ_odd |x|² exp(−η₁|κ₀α|²)`.
    pub predicted_p_err: f64,
    /// Three binomial standard deviations around the prediction.
    pub p_err_interval: [f64; 2],
    pub within_interval: bool,
    pub phase_error_rate: f64,
}

pub fn summarize(seed: u64, params: &CavityParams, psi: &PolarizationState, tally: Tally) -> RunSummary {
    let m = (transfer_coefficients(params, 0).kappa * params.alpha()).norm_sqr();
    let odd = psi.parity_weight(Parity::Odd);
    let predicted = odd * (-params.eta1() * m).exp();
    let n = tally.shots as f64;
    let sd = (predicted * (1.0 - predicted) / n).sqrt();
    let empirical = tally.misclassified as f64 / n;
    RunSummary {
        seed,
        shots: tally.shots,
        params: *params,
        input_state: psi.to_record(),
        tally,
        empirical_p_err: empirical,
        predicted_p_err: predicted,
        p_err_interval: [(predicted - 3.0 * sd).max(0.0), predicted + 3.0 * sd],
        within_interval: (empirical - predicted).abs() <= 3.0 * sd,
        phase_error_rate: if tally.classified_odd == 0 {
            0.0
        } else {
            tally.phase_errors as f64 / tally.classified_odd as f64
        },
    }
}

fn cmd_gate_run(a: &GateRunArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let params = a.cavity.params()?;
    if !params.is_lossless() {
        return Err(CliError::Usage(
            "gate-run samples the lossless protocol; use figure4/figure5 for a lossy bus".into(),
        ));
    }
    if a.shots == 0 {
        return Err(CliError::Usage("--shots must be at least 1".into()));
    }
    let seed = match a.seed {
        Some(s) => s,
        None => {
            let s = rand::random::<u64>();
            writeln!(err, "seed: {s}")?;
            s
        }
    };
    let state = evolve_lossless(&a.input_state, &params)?;
    let (d1, d2) = DetectorModel::pair(&params);
    let run = run_shots(&state, &d1, &d2, seed, a.shots, !a.summary_only);
    let summary = to_json(&summarize(seed, &params, &a.input_state, run.tally));

    if a.summary_only {
        let sink = a.summary.clone().map_or_else(|| a.output.sink("gate-run.json"), Sink::File);
        emit(&sink, &summary, out, err)?;
        return Ok(EXIT_OK);
    }
    let mut csv = String::with_capacity(run.records.len() * 40);
    csv.push_str(ShotRecord::CSV_HEADER);
    csv.push('\n');
    for r in &run.records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    emit(&a.output.sink("gate-run.csv"), &csv, out, err)?;
    let summary_sink = match (&a.summary, &a.output.out_dir) {
        (Some(p), _) => Sink::File(p.clone()),
        (None, Some(dir)) => Sink::File(dir.join("gate-run.json")),
        (None, None) => Sink::Stderr,
    };
    emit(&summary_sink, &summary, out, err)?;
    Ok(EXIT_OK)
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let params = a.cavity.params()?;
    let cutoff = a.cutoff.unwrap_or_else(|| default_cutoff(params.alpha().norm()));
    let report = oracle_report(&params, &a.input_state, cutoff)?;
    emit(&a.output.sink("validate.json"), &to_json(&report), out, err)?;
    if report.passed {
        Ok(EXIT_OK)
    } else {
        Err(CliError::Validation(format!(
            "branch {} deviates by {:e} (tolerance {:e})",
            report.worst_branch.map_or_else(|| "?".into(), |c| c.to_string()),
            report.max_deviation,
            report.tolerance
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("parity-gate").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("4").unwrap(), C64::new(4.0, 0.0));
        assert_eq!(parse_complex("3+1i").unwrap(), C64::new(3.0, 1.0));
        assert_eq!(parse_complex("-2i").unwrap(), C64::new(0.0, -2.0));
        assert_eq!(parse_complex("1e-3-2.5e+1j").unwrap(), C64::new(1e-3, -25.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex(" 0.5 - i ").unwrap(), C64::new(0.5, -1.0));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+").is_err());
    }

    #[test]
    fn input_state_parsing() {
        assert_eq!(parse_input_state("HH").unwrap(), PolarizationState::basis(Component::HH));
        let s = parse_input_state("0,1,1i,0").unwrap();
        assert!((s.amplitude(Component::VH) - C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!(parse_input_state("1,0,0").is_err());
        assert!(parse_input_state("0,0,0,0").is_err());
    }

    #[test]
    fn kappa_alpha_flag() {
        let args = CavityArgs {
            theta: 1e-3,
            tau: None,
            lambda: 0.0,
            alpha: None,
            kappa_alpha: Some(3.0),
            eta1: 1.0,
            eta2: 1.0,
        };
        let p = args.params().unwrap();
        assert!(((transfer_coefficients(&p, 0).kappa * p.alpha()).norm() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn figure2_default_row_at_one() {
        let (code, csv, _) = run_capture(&["figure2", "--points", "201", "--min", "0.01", "--max", "100"]);
        assert_eq!(code, 0);
        let row = csv.lines().skip(1).nth(100).unwrap();
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert!((v[1] - 4.128).abs() < 1e-3);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_capture(&["figure2", "--perr", "0.5"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["figure4", "--theta", "0"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["figure2", "--min", "5", "--max", "1"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["gate-run", "--lambda", "1e-4", "--seed", "1"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["gate-run", "--shots", "0", "--seed", "1"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["gate-run", "--alpha", "1", "--kappa-alpha", "1"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn figure5_ratio_zero_is_one() {
        let (code, csv, _) = run_capture(&["figure5", "--points", "3"]);
        assert_eq!(code, 0);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "lambda_over_theta,f_odd_alpha_2,f_odd_alpha_4,f_odd_alpha_30");
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first, vec![0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn gate_run_even_input() {
        let (code, csv, err) = run_capture(&["gate-run", "--input-state", "hh", "--seed", "5", "--shots", "200"]);
        assert_eq!(code, 0);
        assert_eq!(csv.lines().count(), 201);
        assert!(csv.lines().skip(1).all(|l| l.ends_with(",even,even,false")));
        let summary: serde_json::Value = serde_json::from_str(&err).unwrap();
        assert_eq!(summary["tally"]["misclassified"], 0);
        assert_eq!(summary["tally"]["classified_even"], 200);
    }

    #[test]
    fn gate_run_generates_seed() {
        let (code, _, err) = run_capture(&["gate-run", "--shots", "3", "--summary-only"]);
        assert_eq!(code, 0);
        assert!(err.starts_with("seed: "));
    }

    #[test]
    fn validate_exit_codes() {
        let (code, json, _) = run_capture(&["validate", "--alpha", "4", "--cutoff", "64"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["passed"], true);
        let (code, _, err) = run_capture(&["validate", "--alpha", "4", "--cutoff", "8"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("cutoff 8 too small"));
        assert_eq!(run_capture(&["validate", "--alpha", "0"]).0, EXIT_OK);
        assert_eq!(run_capture(&["validate", "--lambda", "1e-4"]).0, EXIT_USAGE);
    }

    #[test]
    fn odd_parity_tally_is_consistent() {
        let (code, json, _) = run_capture(&[
            "gate-run",
            "--input-state",
            "odd-bell",
            "--kappa-alpha",
            "1",
            "--seed",
            "11",
            "--shots",
            "20000",
            "--summary-only",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["tally"]["true_odd"], 20000);
        assert_eq!(v["within_interval"], true);
    }
}
