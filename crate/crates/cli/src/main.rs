//! `uqsd`: reports on the discrimination protocol from the command line.
//!
//! Subcommands either print to stdout or, given `--output`, write a data
//! file plus a `<output>.manifest.json` sidecar recording the command,
//! parameters, library version, and tolerances. Every emission is
//! deterministic for fixed flags (and seed) except the manifest timestamp.

mod checks;
mod config;
mod output;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use checks::{grid_points, verify_point, Check, VerifyRoute};
use config::Config;
use uqsd_core::dynamics::{AtomLevel, SystemParams};
use uqsd_core::linalg::C64;
use uqsd_core::montecarlo::{never_wrong_audit, Preparation, TrialConfig};
use uqsd_core::optimize::{
    bound_gap, optimize_kappa, projective_baseline, sweep, table, EQUAL_PRIOR_REFERENCE_BOUND,
};
use uqsd_core::povm::{effective_povm, extract_kraus, pipeline_report, povm_from_kraus, Ensemble};
use uqsd_core::tol;

#[derive(Parser)]
#[command(
    name = "uqsd",
    version,
    about = "Unambiguous discrimination of two cavity-field states with a three-level atom probe"
)]
struct Cli {
    /// Flat `key = value` config file; explicit flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run operator and discrimination checks at a point or over the standing grid
    Verify(VerifyArgs),
    /// Print the measurement operators at a parameter point
    Kraus(KrausArgs),
    /// Emit optimal operating points for a list of family indices
    Table(TableArgs),
    /// Emit the outcome-rate curve over a coupling-ratio grid
    Sweep(SweepArgs),
    /// Sample the measurement record and audit the conclusive outcomes
    Simulate(SimulateArgs),
    /// Print the ancilla-free comparator rate and the distance to the attainable bound
    Baseline(BaselineArgs),
}

#[derive(Args)]
struct PointArgs {
    /// Family index of a discrimination operating point
    #[arg(long)]
    m: Option<u32>,
    /// Coupling ratio of the upper to the lower transition (default 1.0)
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// Interaction phase of a free parameter point
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Ramsey amplitude kept on the lowest level, e.g. `0.6`, `-i`, `0.5+0.5i`
    #[arg(long)]
    alpha: Option<String>,
    /// Ramsey amplitude moved to the middle level; defaults to sqrt(1 - |alpha|^2)
    #[arg(long)]
    beta: Option<String>,
    /// Shift the interaction phase by this much off its quantized value
    #[arg(long, value_name = "DELTA", allow_negative_numbers = true)]
    perturb_theta: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Check every standing grid point (family indices 0..5, ratios 0.5..12)
    #[arg(long)]
    all_grid: bool,
    /// Report format: text or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct KrausArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Decimal places for printed matrix entries
    #[arg(long)]
    precision: Option<usize>,
    /// Report format: text or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct TableArgs {
    /// Prior probability of the first preparation
    #[arg(long, allow_negative_numbers = true)]
    q1: Option<f64>,
    /// Comma-separated family indices
    #[arg(long)]
    m_list: Option<String>,
    /// Data format: csv or json
    #[arg(long)]
    format: Option<String>,
    /// Write here instead of stdout, with a manifest sidecar
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Prior probability of the first preparation
    #[arg(long, allow_negative_numbers = true)]
    q1: Option<f64>,
    /// Family index
    #[arg(long)]
    m: Option<u32>,
    /// Coupling-ratio grid as lo:hi:step (lo = hi yields one row)
    #[arg(long)]
    kappa_range: Option<String>,
    /// Data format: csv or json
    #[arg(long)]
    format: Option<String>,
    /// Write here instead of stdout, with a manifest sidecar
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Prior probability of the first preparation (default 0.5)
    #[arg(long, allow_negative_numbers = true)]
    q1: Option<f64>,
    /// Family index of the operating point
    #[arg(long)]
    m: Option<u32>,
    /// Coupling ratio of the operating point
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// Shift the interaction phase by this much off its quantized value
    #[arg(long, value_name = "DELTA", allow_negative_numbers = true)]
    perturb_theta: Option<f64>,
    /// Number of trials (default 1000000)
    #[arg(long)]
    trials: Option<u64>,
    /// Generator seed (default 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Write here instead of stdout, with a manifest sidecar
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    /// Prior probability of the first preparation
    #[arg(long, allow_negative_numbers = true)]
    q1: Option<f64>,
    /// Also optimize this family index and report its advantage
    #[arg(long)]
    m: Option<u32>,
    /// Report format: text or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn message(&self) -> &str {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => msg,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

/// Errors caused by the values the user supplied exit as usage errors;
/// everything else is an internal failure.
fn core_error(e: uqsd_core::Error) -> CliError {
    use uqsd_core::Error::*;
    match e {
        InvalidKappa { .. } | InvalidTheta { .. } | NotNormalized { .. } | InvalidRange { .. }
        | InvalidPrior { .. } | UnsupportedPrior { .. } | UnsupportedEnsemble
        | InvalidTrialCount => CliError::Usage(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path).map_err(CliError::Usage)?,
        None => Config::empty(),
    };
    match cli.command {
        Command::Verify(args) => cmd_verify(args, &cfg),
        Command::Kraus(args) => cmd_kraus(args, &cfg),
        Command::Table(args) => cmd_table(args, &cfg),
        Command::Sweep(args) => cmd_sweep(args, &cfg),
        Command::Simulate(args) => cmd_simulate(args, &cfg),
        Command::Baseline(args) => cmd_baseline(args, &cfg),
    }
}

// ---------------------------------------------------------------------
// Flag / config resolution

fn resolve_parsed<T: std::str::FromStr>(
    flag: Option<T>,
    cfg: &Config,
    key: &str,
) -> Result<Option<T>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.get(key) {
        None => Ok(None),
        Some(raw) => raw.trim().parse::<T>().map(Some).map_err(|_| {
            CliError::Usage(format!("config key {key:?}: cannot parse value {raw:?}"))
        }),
    }
}

fn resolve_string(flag: Option<String>, cfg: &Config, key: &str) -> Option<String> {
    flag.or_else(|| cfg.get(key).map(str::to_string))
}

fn resolve_complex(
    flag: Option<String>,
    cfg: &Config,
    key: &str,
) -> Result<Option<C64>, CliError> {
    match resolve_string(flag, cfg, key) {
        None => Ok(None),
        Some(raw) => parse_complex(&raw)
            .map(Some)
            .map_err(|e| CliError::Usage(format!("{key}: {e}"))),
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing {what}")))
}

/// Sign-and-magnitude complex literals: `1`, `-0.5`, `i`, `-i`, `0.8i`,
/// `0.5+0.5i`, `1e-3-2i`.
fn parse_complex(raw: &str) -> Result<C64, String> {
    let s: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty complex literal".to_string());
    }
    let Some(body) = s.strip_suffix(['i', 'I']) else {
        return s
            .parse::<f64>()
            .map(|re| C64::new(re, 0.0))
            .map_err(|_| format!("cannot parse {raw:?} as a complex number"));
    };
    let bytes = body.as_bytes();
    // The last sign that is neither leading nor an exponent sign splits
    // the real part from the imaginary coefficient.
    let split = (1..bytes.len())
        .rev()
        .find(|&idx| {
            matches!(bytes[idx], b'+' | b'-') && !matches!(bytes[idx - 1], b'e' | b'E')
        });
    let (re_part, im_part) = match split {
        Some(idx) => (&body[..idx], &body[idx..]),
        None => ("", body),
    };
    let re = if re_part.is_empty() {
        0.0
    } else {
        re_part
            .parse::<f64>()
            .map_err(|_| format!("cannot parse {raw:?} as a complex number"))?
    };
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        coefficient => coefficient
            .parse::<f64>()
            .map_err(|_| format!("cannot parse {raw:?} as a complex number"))?,
    };
    Ok(C64::new(re, im))
}

struct PointInputs {
    m: Option<u32>,
    kappa: Option<f64>,
    theta: Option<f64>,
    alpha: Option<C64>,
    beta: Option<C64>,
    perturb_theta: f64,
}

impl PointInputs {
    fn resolve(args: PointArgs, cfg: &Config) -> Result<PointInputs, CliError> {
        Ok(PointInputs {
            m: resolve_parsed(args.m, cfg, "m")?,
            kappa: resolve_parsed(args.kappa, cfg, "kappa")?,
            theta: resolve_parsed(args.theta, cfg, "theta")?,
            alpha: resolve_complex(args.alpha, cfg, "alpha")?,
            beta: resolve_complex(args.beta, cfg, "beta")?,
            perturb_theta: resolve_parsed(args.perturb_theta, cfg, "perturb-theta")?
                .unwrap_or(0.0),
        })
    }
}

enum ResolvedPoint {
    Family {
        params: SystemParams,
        m: u32,
        kappa: f64,
        perturbed: bool,
    },
    Free {
        params: SystemParams,
    },
}

impl ResolvedPoint {
    fn params(&self) -> &SystemParams {
        match self {
            ResolvedPoint::Family { params, .. } | ResolvedPoint::Free { params } => params,
        }
    }

    fn route(&self) -> VerifyRoute {
        match *self {
            ResolvedPoint::Family {
                m, kappa, perturbed, ..
            } => VerifyRoute::Family { m, kappa, perturbed },
            ResolvedPoint::Free { .. } => VerifyRoute::Free,
        }
    }
}

/// Builds the operating point from either route: `--m` derives everything
/// from the quantization conditions (optionally phase-shifted), `--theta`
/// takes the raw parameters as given.
fn resolve_point(inputs: PointInputs) -> Result<ResolvedPoint, CliError> {
    match (inputs.m, inputs.theta) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "pass either --m or --theta, not both".to_string(),
        )),
        (None, None) => Err(CliError::Usage(
            "pass --m (family route) or --theta (free route)".to_string(),
        )),
        (Some(m), None) => {
            if inputs.alpha.is_some() || inputs.beta.is_some() {
                return Err(CliError::Usage(
                    "--alpha and --beta apply to the --theta route; the family route derives them"
                        .to_string(),
                ));
            }
            let kappa = inputs.kappa.unwrap_or(1.0);
            if inputs.perturb_theta == 0.0 {
                let params = SystemParams::unambiguous(m, kappa).map_err(core_error)?;
                Ok(ResolvedPoint::Family {
                    params,
                    m,
                    kappa,
                    perturbed: false,
                })
            } else {
                let theta = SystemParams::quantized_theta(m, kappa).map_err(core_error)?
                    + inputs.perturb_theta;
                let params = SystemParams::new(
                    theta,
                    kappa,
                    C64::new(theta.cos(), 0.0),
                    C64::new(0.0, theta.sin()),
                )
                .map_err(core_error)?;
                Ok(ResolvedPoint::Family {
                    params,
                    m,
                    kappa,
                    perturbed: true,
                })
            }
        }
        (None, Some(theta)) => {
            let kappa = inputs.kappa.unwrap_or(1.0);
            let theta = theta + inputs.perturb_theta;
            let (alpha, beta) = match (inputs.alpha, inputs.beta) {
                (Some(a), Some(b)) => (a, b),
                (Some(a), None) => (a, complement_amplitude(a)?),
                (None, Some(b)) => {
                    let a = complement_amplitude(b)?;
                    (a, b)
                }
                (None, None) => (C64::ONE, C64::ZERO),
            };
            let params = SystemParams::new(theta, kappa, alpha, beta).map_err(core_error)?;
            Ok(ResolvedPoint::Free { params })
        }
    }
}

/// Real nonnegative amplitude completing `given` to a normalized pair.
fn complement_amplitude(given: C64) -> Result<C64, CliError> {
    let remainder = 1.0 - given.norm_sqr();
    if remainder < -tol::NORMALIZATION_TOL {
        return Err(CliError::Usage(format!(
            "amplitude magnitude {} exceeds 1",
            given.norm()
        )));
    }
    Ok(C64::new(remainder.max(0.0).sqrt(), 0.0))
}

fn params_json(point: &ResolvedPoint, perturb_theta: f64) -> Value {
    let p = point.params();
    json!({
        "m": p.m(),
        "theta": p.theta(),
        "kappa": p.kappa(),
        "alpha": { "re": p.alpha().re, "im": p.alpha().im },
        "beta": { "re": p.beta().re, "im": p.beta().im },
        "perturb_theta": perturb_theta,
    })
}

enum ReportFormat {
    Text,
    Json,
}

fn report_format(flag: Option<String>, cfg: &Config) -> Result<ReportFormat, CliError> {
    match resolve_string(flag, cfg, "format").as_deref() {
        None | Some("text") => Ok(ReportFormat::Text),
        Some("json") => Ok(ReportFormat::Json),
        Some(other) => Err(CliError::Usage(format!(
            "format must be text or json, not {other:?}"
        ))),
    }
}

enum DataFormat {
    Csv,
    Json,
}

fn data_format(flag: Option<String>, cfg: &Config) -> Result<DataFormat, CliError> {
    match resolve_string(flag, cfg, "format").as_deref() {
        None | Some("csv") => Ok(DataFormat::Csv),
        Some("json") => Ok(DataFormat::Json),
        Some(other) => Err(CliError::Usage(format!(
            "format must be csv or json, not {other:?}"
        ))),
    }
}

fn resolve_output(flag: Option<PathBuf>, cfg: &Config) -> Option<PathBuf> {
    flag.or_else(|| cfg.get("output").map(PathBuf::from))
}

fn emit(
    output: Option<&PathBuf>,
    content: &str,
    command: &str,
    parameters: Value,
) -> Result<(), CliError> {
    output::emit(output.map(PathBuf::as_path), content, command, parameters)
        .map_err(|e| CliError::Runtime(format!("cannot write output: {e}")))
}

fn print_report(content: &str) -> Result<(), CliError> {
    output::print_stdout(content)
        .map_err(|e| CliError::Runtime(format!("cannot write to stdout: {e}")))
}

// ---------------------------------------------------------------------
// Subcommands

fn cmd_verify(args: VerifyArgs, cfg: &Config) -> Result<ExitCode, CliError> {
    let format = report_format(args.format, cfg)?;
    if args.all_grid {
        let inputs = PointInputs::resolve(args.point, cfg)?;
        if inputs.m.is_some() || inputs.theta.is_some() || inputs.perturb_theta != 0.0 {
            return Err(CliError::Usage(
                "--all-grid replaces the point parameters".to_string(),
            ));
        }
        return cmd_verify_grid(format);
    }

    let inputs = PointInputs::resolve(args.point, cfg)?;
    let perturb_theta = inputs.perturb_theta;
    let point = resolve_point(inputs)?;
    let checks = verify_point(point.params(), point.route()).map_err(core_error)?;
    let passed = checks.iter().all(|c| c.passed);

    let mut buf = String::new();
    match format {
        ReportFormat::Text => {
            for check in &checks {
                let _ = writeln!(
                    buf,
                    "{:<22} {}  {}",
                    check.name,
                    if check.passed { "PASS" } else { "FAIL" },
                    check.detail
                );
            }
            let _ = writeln!(
                buf,
                "result: {} ({} checks)",
                if passed { "PASS" } else { "FAIL" },
                checks.len()
            );
        }
        ReportFormat::Json => {
            let report = json!({
                "command": "verify",
                "parameters": params_json(&point, perturb_theta),
                "checks": checks.iter().map(Check::json).collect::<Vec<_>>(),
                "passed": passed,
                "tolerances": output::tolerances_json(),
            });
            let _ = writeln!(buf, "{report:#}");
        }
    }
    print_report(&buf)?;
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_verify_grid(format: ReportFormat) -> Result<ExitCode, CliError> {
    let points = grid_points();
    let mut checks_run = 0usize;
    let mut failures: Vec<(u32, f64, Vec<String>)> = Vec::new();
    for &(m, kappa) in &points {
        let params = SystemParams::unambiguous(m, kappa).map_err(core_error)?;
        let route = VerifyRoute::Family {
            m,
            kappa,
            perturbed: false,
        };
        let checks = verify_point(&params, route).map_err(core_error)?;
        checks_run += checks.len();
        let failed: Vec<String> = checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.to_string())
            .collect();
        if !failed.is_empty() {
            failures.push((m, kappa, failed));
        }
    }
    let passed = failures.is_empty();

    let mut buf = String::new();
    match format {
        ReportFormat::Text => {
            for (m, kappa, failed) in &failures {
                let _ = writeln!(buf, "m={m} kappa={kappa}: FAIL {}", failed.join(", "));
            }
            let _ = writeln!(
                buf,
                "grid result: {} ({} points, {} checks)",
                if passed { "PASS" } else { "FAIL" },
                points.len(),
                checks_run
            );
        }
        ReportFormat::Json => {
            let report = json!({
                "command": "verify",
                "grid": { "points": points.len(), "checks": checks_run },
                "failures": failures
                    .iter()
                    .map(|(m, kappa, failed)| json!({
                        "m": m,
                        "kappa": kappa,
                        "failed": failed,
                    }))
                    .collect::<Vec<_>>(),
                "passed": passed,
                "tolerances": output::tolerances_json(),
            });
            let _ = writeln!(buf, "{report:#}");
        }
    }
    print_report(&buf)?;
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_kraus(args: KrausArgs, cfg: &Config) -> Result<ExitCode, CliError> {
    let format = report_format(args.format, cfg)?;
    let precision = resolve_parsed(args.precision, cfg, "precision")?.unwrap_or(6);
    if !(1..=17).contains(&precision) {
        return Err(CliError::Usage(format!(
            "precision must be between 1 and 17, not {precision}"
        )));
    }
    let inputs = PointInputs::resolve(args.point, cfg)?;
    let perturb_theta = inputs.perturb_theta;
    let point = resolve_point(inputs)?;
    let params = point.params();

    let u = uqsd_core::dynamics::protocol_unitary(params).map_err(core_error)?;
    let kraus = extract_kraus(&u).map_err(core_error)?;
    let povm = povm_from_kraus(&kraus);
    let effective = match point {
        ResolvedPoint::Family {
            m,
            kappa,
            perturbed: false,
            ..
        } => Some(effective_povm(m, kappa).map_err(core_error)?),
        _ => None,
    };

    let mut buf = String::new();
    match format {
        ReportFormat::Text => {
            let _ = writeln!(
                buf,
                "theta = {:.prec$}, kappa = {:.prec$}, alpha = {}, beta = {}",
                params.theta(),
                params.kappa(),
                output::format_complex(params.alpha(), precision),
                output::format_complex(params.beta(), precision),
                prec = precision,
            );
            for level in AtomLevel::ALL {
                let _ = writeln!(buf, "\nM_{} =", level.label());
                for line in output::matrix_lines(kraus.element(level), precision) {
                    let _ = writeln!(buf, "{line}");
                }
            }
            for level in AtomLevel::ALL {
                let _ = writeln!(buf, "\nE_{} =", level.label());
                for line in output::matrix_lines(povm.element(level), precision) {
                    let _ = writeln!(buf, "{line}");
                }
            }
            if let Some(effective) = &effective {
                let _ = writeln!(buf, "\nsector-restricted elements (vacuum/one-photon block):");
                for level in AtomLevel::ALL {
                    let _ = writeln!(buf, "\nE_{} (restricted) =", level.label());
                    for line in output::matrix_lines(effective.element(level), precision) {
                        let _ = writeln!(buf, "{line}");
                    }
                }
                let w = effective.dropped_two_weight().expect("restricted set");
                let _ = writeln!(
                    buf,
                    "\ndropped two-photon weight: a {:.prec$}, b {:.prec$}, c {:.prec$}",
                    w[0],
                    w[1],
                    w[2],
                    prec = precision,
                );
            }
        }
        ReportFormat::Json => {
            let mut report = json!({
                "command": "kraus",
                "parameters": params_json(&point, perturb_theta),
                "kraus": {
                    "m_a": output::matrix_json(kraus.element(AtomLevel::A)),
                    "m_b": output::matrix_json(kraus.element(AtomLevel::B)),
                    "m_c": output::matrix_json(kraus.element(AtomLevel::C)),
                },
                "povm": {
                    "e_a": output::matrix_json(povm.element(AtomLevel::A)),
                    "e_b": output::matrix_json(povm.element(AtomLevel::B)),
                    "e_c": output::matrix_json(povm.element(AtomLevel::C)),
                },
            });
            if let Some(effective) = &effective {
                report["effective"] = json!({
                    "e_a": output::matrix_json(effective.element(AtomLevel::A)),
                    "e_b": output::matrix_json(effective.element(AtomLevel::B)),
                    "e_c": output::matrix_json(effective.element(AtomLevel::C)),
                    "dropped_two_weight": effective.dropped_two_weight().expect("restricted set"),
                });
            }
            let _ = writeln!(buf, "{report:#}");
        }
    }
    print_report(&buf)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(args: TableArgs, cfg: &Config) -> Result<ExitCode, CliError> {
    let q1 = require(resolve_parsed(args.q1, cfg, "q1")?, "--q1")?;
    let format = data_format(args.format, cfg)?;
    let output_path = resolve_output(args.output, cfg);
    let m_list = resolve_string(args.m_list, cfg, "m-list")
        .unwrap_or_else(|| "0,1,2,3,4,5,10,20,50".to_string());
    let family_indices = parse_m_list(&m_list)?;

    let rows = table(q1, &family_indices).map_err(core_error)?;
    let content = match format {
        DataFormat::Csv => output::table_csv(&rows),
        DataFormat::Json => {
            let report = json!({
                "command": "table",
                "q1": q1,
                "rows": rows.iter().map(|r| json!({
                    "m": r.m,
                    "kappa": r.kappa,
                    "theta": r.theta,
                    "p_in": r.p_in,
                    "p_b": r.p_b,
                    "p_c": r.p_c,
                    "p_s": r.p_s,
                })).collect::<Vec<_>>(),
            });
            format!("{report:#}\n")
        }
    };
    let parameters = json!({
        "q1": q1,
        "m_list": family_indices,
        "format": match format { DataFormat::Csv => "csv", DataFormat::Json => "json" },
    });
    emit(output_path.as_ref(), &content, "table", parameters)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_m_list(raw: &str) -> Result<Vec<u32>, CliError> {
    let indices: Result<Vec<u32>, _> = raw
        .split(',')
        .map(|part| part.trim().parse::<u32>())
        .collect();
    let indices =
        indices.map_err(|_| CliError::Usage(format!("cannot parse m-list {raw:?}")))?;
    if indices.is_empty() {
        return Err(CliError::Usage("m-list is empty".to_string()));
    }
    Ok(indices)
}

fn cmd_sweep(args: SweepArgs, cfg: &Config) -> Result<ExitCode, CliError> {
    let q1 = require(resolve_parsed(args.q1, cfg, "q1")?, "--q1")?;
    let m = require(resolve_parsed(args.m, cfg, "m")?, "--m")?;
    let range_raw = require(
        resolve_string(args.kappa_range, cfg, "kappa-range"),
        "--kappa-range",
    )?;
    let (lo, hi, step) = parse_kappa_range(&range_raw)?;
    let format = data_format(args.format, cfg)?;
    let output_path = resolve_output(args.output, cfg);

    let curve = sweep(m, q1, lo, hi, step).map_err(core_error)?;
    let content = match format {
        DataFormat::Csv => output::sweep_csv(&curve),
        DataFormat::Json => {
            let report = json!({
                "command": "sweep",
                "q1": q1,
                "m": m,
                "points": curve.points.iter().map(|p| json!({
                    "kappa": p.kappa,
                    "p_b": p.p_b,
                    "p_c": p.p_c,
                    "p_in": p.p_in,
                    "p_s": p.p_s,
                })).collect::<Vec<_>>(),
            });
            format!("{report:#}\n")
        }
    };
    let parameters = json!({
        "q1": q1,
        "m": m,
        "kappa_range": range_raw,
        "format": match format { DataFormat::Csv => "csv", DataFormat::Json => "json" },
    });
    emit(output_path.as_ref(), &content, "sweep", parameters)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_kappa_range(raw: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<&str> = raw.split(':').collect();
    let err = || CliError::Usage(format!("kappa-range must be lo:hi:step, not {raw:?}"));
    if parts.len() != 3 {
        return Err(err());
    }
    let lo = parts[0].trim().parse::<f64>().map_err(|_| err())?;
    let hi = parts[1].trim().parse::<f64>().map_err(|_| err())?;
    let step = parts[2].trim().parse::<f64>().map_err(|_| err())?;
    Ok((lo, hi, step))
}

fn cmd_simulate(args: SimulateArgs, cfg: &Config) -> Result<ExitCode, CliError> {
    let q1 = resolve_parsed(args.q1, cfg, "q1")?.unwrap_or(0.5);
    let m = require(resolve_parsed(args.m, cfg, "m")?, "--m")?;
    let kappa = require(resolve_parsed(args.kappa, cfg, "kappa")?, "--kappa")?;
    let perturb_theta = resolve_parsed(args.perturb_theta, cfg, "perturb-theta")?.unwrap_or(0.0);
    let trials = resolve_parsed(args.trials, cfg, "trials")?.unwrap_or(1_000_000);
    let seed = resolve_parsed(args.seed, cfg, "seed")?.unwrap_or(0);
    let output_path = resolve_output(args.output, cfg);

    let point = resolve_point(PointInputs {
        m: Some(m),
        kappa: Some(kappa),
        theta: None,
        alpha: None,
        beta: None,
        perturb_theta,
    })?;
    let params = point.params();
    let ensemble = Ensemble::standard(q1).map_err(core_error)?;
    let config = TrialConfig::new(trials, seed).map_err(core_error)?;
    let verdict = never_wrong_audit(params, &ensemble, &config).map_err(core_error)?;
    let stats = verdict.stats;
    let empirical = stats.empirical();
    let expected = pipeline_report(params, &ensemble).map_err(core_error)?;

    let by_outcome = |values: [f64; 3]| {
        json!({ "a": values[0], "b": values[1], "c": values[2] })
    };
    let counts = |prep: Preparation| {
        json!({
            "a": stats.count(prep, AtomLevel::A),
            "b": stats.count(prep, AtomLevel::B),
            "c": stats.count(prep, AtomLevel::C),
        })
    };
    let report = json!({
        "command": "simulate",
        "parameters": {
            "m": m,
            "kappa": kappa,
            "theta": params.theta(),
            "q1": q1,
            "perturb_theta": perturb_theta,
            "trials": trials,
            "seed": seed,
        },
        "counts": {
            "state1": counts(Preparation::State1),
            "state2": counts(Preparation::State2),
        },
        "prep_counts": {
            "state1": empirical.prep_counts[0],
            "state2": empirical.prep_counts[1],
        },
        "rates": {
            "state1": by_outcome(empirical.rates[0]),
            "state2": by_outcome(empirical.rates[1]),
        },
        "standard_errors": {
            "state1": by_outcome(empirical.standard_errors[0]),
            "state2": by_outcome(empirical.standard_errors[1]),
        },
        "expected_rates": {
            "p_b": expected.p_b,
            "p_c": expected.p_c,
            "p_in": expected.p_in,
            "p_s": expected.p_s,
        },
        "success_rate": empirical.success_rate,
        "success_standard_error": empirical.success_se,
        "inconclusive_rate": empirical.inconclusive_rate,
        "audit": {
            "pass": verdict.pass,
            "b_given_state2": verdict.b_given_state2,
            "c_given_state1": verdict.c_given_state1,
        },
    });
    let content = format!("{report:#}\n");
    let parameters = report["parameters"].clone();
    emit(output_path.as_ref(), &content, "simulate", parameters)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_baseline(args: BaselineArgs, cfg: &Config) -> Result<ExitCode, CliError> {
    let q1 = require(resolve_parsed(args.q1, cfg, "q1")?, "--q1")?;
    let format = report_format(args.format, cfg)?;
    let m = resolve_parsed(args.m, cfg, "m")?;

    let base = projective_baseline(q1).map_err(core_error)?;
    let optimized = match m {
        Some(m) => Some(optimize_kappa(m, q1).map_err(core_error)?),
        None => None,
    };
    let gap = if q1 == 0.5 {
        let p_s = optimized.as_ref().map_or(base, |row| row.p_s);
        Some(bound_gap(q1, p_s).map_err(core_error)?)
    } else {
        None
    };

    let mut buf = String::new();
    match format {
        ReportFormat::Text => {
            let _ = writeln!(buf, "q1 = {q1}");
            let _ = writeln!(buf, "projective baseline p_s = {base:.6}");
            if let Some(row) = &optimized {
                let _ = writeln!(
                    buf,
                    "optimized p_s (m = {}, kappa = {:.6}) = {:.6}",
                    row.m, row.kappa, row.p_s
                );
                let _ = writeln!(buf, "advantage over baseline = {:.6}", row.p_s - base);
            }
            if let Some(gap) = gap {
                let _ = writeln!(buf, "reference bound = {EQUAL_PRIOR_REFERENCE_BOUND}");
                let _ = writeln!(buf, "gap below reference bound = {gap:.6}");
            }
        }
        ReportFormat::Json => {
            let report = json!({
                "command": "baseline",
                "q1": q1,
                "projective_baseline": base,
                "optimized": optimized.as_ref().map(|row| json!({
                    "m": row.m,
                    "kappa": row.kappa,
                    "p_s": row.p_s,
                    "advantage": row.p_s - base,
                })),
                "reference_bound": gap.map(|_| EQUAL_PRIOR_REFERENCE_BOUND),
                "gap_below_bound": gap,
            });
            let _ = writeln!(buf, "{report:#}");
        }
    }
    print_report(&buf)?;
    Ok(ExitCode::SUCCESS)
}
