//! Command-line driver: equilibrium/threshold reports, delay-system
//! simulation, bifurcation-diagram sweeps, and rightmost-root tracks.
//!
//! Exit codes: 0 on success, 1 on computational failure (divergence, lost
//! roots, no crossing), 2 on usage errors. All CSV numbers carry 17
//! significant digits so identical configurations reproduce byte-identical
//! files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use igp_dde::branch::{amplitude_growth_check, sweep, BranchDiagram, SweepSettings};
use igp_dde::critical_delay::{hopf_e1, hopf_e2, hopf_e3, hopf_e4, HopfReport};
use igp_dde::dde_sim::{integrate, History, Trajectory};
use igp_dde::model::{equilibria, equilibrium, EquilibriumKind, ModelParams, StateTriple};
use igp_dde::presets;
use igp_dde::spectrum_oracle::rightmost_roots;
use igp_dde::stability::{char_poly, tau0_stability, Tau0Verdict};
use igp_dde::Error;

#[derive(Parser)]
#[command(
    name = "igp-dde",
    version,
    about = "Stability and bifurcation analysis of a delayed three-species \
             Lotka-Volterra intraguild-predation model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibria, zero-delay verdicts, and Hopf thresholds as one JSON report
    Analyze(AnalyzeArgs),
    /// Integrate the delay system from a constant history; emits CSV t,x,y,z
    Simulate(SimulateArgs),
    /// Sweep the delay and emit bifurcation-diagram CSV plus a JSON summary
    Branch(BranchArgs),
    /// Track the rightmost characteristic roots over a delay grid (CSV)
    Spectrum(SpectrumArgs),
}

#[derive(Args)]
struct ParamsSource {
    /// Parameter file: flat JSON with keys a0..c2 and tau
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    params: Option<PathBuf>,
    /// Built-in parameter set: example1 | example2 | example3
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Override the delay from the file/preset
    #[arg(long)]
    tau: Option<f64>,
}

struct Resolved {
    params: ModelParams,
    history: StateTriple,
}

impl ParamsSource {
    fn resolve(&self, history_flag: Option<&str>) -> Result<Resolved, CliError> {
        let (mut params, mut history) = match (&self.params, &self.preset) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read {}: {e}", path.display()))
                })?;
                let params = ModelParams::from_json(&text)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                (params, StateTriple::new(1.0, 1.0, 1.0))
            }
            (None, Some(name)) => {
                let preset = presets::by_name(name).ok_or_else(|| {
                    CliError::Usage(format!(
                        "unknown preset {name:?}; expected one of {:?}",
                        presets::NAMES
                    ))
                })?;
                (preset.params, preset.history)
            }
            _ => {
                return Err(CliError::Usage(
                    "exactly one of --params or --preset is required".into(),
                ))
            }
        };
        if let Some(tau) = self.tau {
            if !tau.is_finite() || tau < 0.0 {
                return Err(CliError::Usage(format!("--tau must be >= 0, got {tau}")));
            }
            params = params.with_tau(tau);
        }
        if let Some(text) = history_flag {
            history = parse_history(text)?;
        }
        Ok(Resolved { params, history })
    }
}

fn parse_history(text: &str) -> Result<StateTriple, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "--history expects \"x,y,z\", got {text:?}"
        )));
    }
    let mut vals = [0.0; 3];
    for (slot, part) in vals.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|e| CliError::Usage(format!("--history component {part:?}: {e}")))?;
    }
    Ok(StateTriple::new(vals[0], vals[1], vals[2]))
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: ParamsSource,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: ParamsSource,
    /// Constant history "x,y,z" on [-tau, 0] (default: preset's, else 1,1,1)
    #[arg(long, value_name = "X,Y,Z")]
    history: Option<String>,
    /// Integration horizon
    #[arg(long, default_value_t = 1500.0)]
    t_end: f64,
    /// Step size; must divide tau (default tau/40, or 0.05 when tau = 0)
    #[arg(long)]
    dt: Option<f64>,
    /// Emit every n-th grid point
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Write the CSV here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BranchArgs {
    #[command(flatten)]
    source: ParamsSource,
    /// Equilibrium to follow (default: the most interior existing one)
    #[arg(long, value_name = "KIND")]
    eq: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    tau_min: f64,
    #[arg(long, default_value_t = 2.4)]
    tau_max: f64,
    #[arg(long, default_value_t = 0.05)]
    tau_step: f64,
    /// Horizon away from the critical delay (near it, twice this is used)
    #[arg(long)]
    t_end: Option<f64>,
    /// Steps per delay interval
    #[arg(long, default_value_t = 40)]
    steps_per_delay: usize,
    /// Print the JSON summary to stdout instead of the CSV
    #[arg(long)]
    json: bool,
    /// Write the CSV here (summary goes to PATH.summary.json)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    source: ParamsSource,
    /// Equilibrium whose characteristic roots to track
    #[arg(long, value_name = "KIND")]
    eq: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    tau_min: f64,
    #[arg(long, default_value_t = 2.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 0.1)]
    tau_step: f64,
    /// Number of rightmost roots per grid point
    #[arg(long, default_value_t = 4)]
    roots: usize,
    /// Write the CSV here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Computation(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Computation(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Branch(args) => cmd_branch(args),
        Command::Spectrum(args) => cmd_spectrum(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Computation(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

/// 17 significant digits; round-trips exactly through f64.
fn g17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| {
            CliError::Computation(Error::InvalidInput(format!(
                "cannot write {}: {e}",
                path.display()
            )))
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Echo of the fully resolved configuration; lands next to the output file
/// or on stderr for stdout runs.
fn emit_sidecar(out: &Option<PathBuf>, config: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(config).expect("config serializes");
    match out {
        Some(path) => {
            let sidecar = sidecar_path(path);
            std::fs::write(&sidecar, text).map_err(|e| {
                CliError::Computation(Error::InvalidInput(format!(
                    "cannot write {}: {e}",
                    sidecar.display()
                )))
            })
        }
        None => {
            eprintln!("{text}");
            Ok(())
        }
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".config.json");
    PathBuf::from(name)
}

fn parse_eq(text: &str) -> Result<EquilibriumKind, CliError> {
    EquilibriumKind::from_str(text).map_err(|e| CliError::Usage(e.to_string()))
}

/// Most interior equilibrium that exists, the default analysis target.
fn default_eq(params: &ModelParams) -> Result<EquilibriumKind, CliError> {
    equilibria(params)
        .iter()
        .rev()
        .find(|eq| eq.exists && eq.kind != EquilibriumKind::E0)
        .map(|eq| eq.kind)
        .ok_or_else(|| {
            CliError::Usage("only the extinction equilibrium exists; pass --eq explicitly".into())
        })
}

fn tau_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(min.is_finite() && max.is_finite() && step.is_finite() && step > 0.0 && min <= max) {
        return Err(CliError::Usage(format!(
            "invalid delay grid: min {min}, max {max}, step {step}"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| min + step * i as f64).collect())
}

fn hopf_outcome(params: &ModelParams, kind: EquilibriumKind) -> serde_json::Value {
    let report: Result<HopfReport, Error> = match kind {
        EquilibriumKind::E0 => Err(Error::NotApplicable(
            "extinction equilibrium is unstable for every delay".into(),
        )),
        EquilibriumKind::E1 => hopf_e1(params),
        EquilibriumKind::E2 => hopf_e2(params),
        EquilibriumKind::E3 => hopf_e3(params),
        EquilibriumKind::E4 => hopf_e4(params),
    };
    match report {
        Ok(report) => serde_json::to_value(&report).expect("report serializes"),
        Err(Error::NotApplicable(msg)) | Err(Error::UndefinedEquilibrium(msg)) => {
            json!({ "not_applicable": msg })
        }
        Err(other) => json!({ "error": other.to_string() }),
    }
}

fn tau0_outcome(params: &ModelParams, kind: EquilibriumKind) -> serde_json::Value {
    let verdict: Result<Tau0Verdict, Error> =
        tau0_stability(params, &equilibrium(params, kind));
    match verdict {
        Ok(verdict) => serde_json::to_value(&verdict).expect("verdict serializes"),
        Err(Error::NotApplicable(msg)) | Err(Error::UndefinedEquilibrium(msg)) => {
            json!({ "not_applicable": msg })
        }
        Err(other) => json!({ "error": other.to_string() }),
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let resolved = args.source.resolve(None)?;
    let params = resolved.params;
    let eqs = equilibria(&params);
    let reports: Vec<serde_json::Value> = EquilibriumKind::ALL
        .iter()
        .map(|&kind| {
            json!({
                "eq_kind": kind.as_str(),
                "tau0": tau0_outcome(&params, kind),
                "hopf": hopf_outcome(&params, kind),
            })
        })
        .collect();
    let doc = json!({
        "params": params,
        "equilibria": eqs,
        "reports": reports,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    write_output(&args.out, &text)
}

fn trajectory_csv(traj: &Trajectory, stride: usize) -> String {
    let mut csv = String::with_capacity(traj.len() * 80 / stride.max(1));
    csv.push_str("t,x,y,z\n");
    for (i, state) in traj.states().iter().enumerate() {
        if !i.is_multiple_of(stride) {
            continue;
        }
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            g17(traj.time(i)),
            g17(state.x),
            g17(state.y),
            g17(state.z)
        );
    }
    csv
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    if args.stride == 0 {
        return Err(CliError::Usage("--stride must be at least 1".into()));
    }
    let resolved = args.source.resolve(args.history.as_deref())?;
    let params = resolved.params;
    let dt = args
        .dt
        .unwrap_or(if params.tau > 0.0 { params.tau / 40.0 } else { 0.05 });
    let history = History::constant(resolved.history)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let config = json!({
        "command": "simulate",
        "params": params,
        "history": resolved.history,
        "t_end": args.t_end,
        "dt": dt,
        "stride": args.stride,
    });
    emit_sidecar(&args.out, &config)?;

    let traj = integrate(&params, &history, args.t_end, dt)?;
    write_output(&args.out, &trajectory_csv(&traj, args.stride))
}

fn branch_csv(diagram: &BranchDiagram) -> String {
    let mut csv = String::new();
    csv.push_str("tau,eq_stable,class,amp_x,amp_y,amp_z,period\n");
    for p in &diagram.points {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            g17(p.tau),
            p.eq_stable,
            p.classification,
            g17(p.amplitude[0]),
            g17(p.amplitude[1]),
            g17(p.amplitude[2]),
            p.period.map(g17).unwrap_or_default()
        );
    }
    csv
}

fn cmd_branch(args: BranchArgs) -> Result<(), CliError> {
    let resolved = args.source.resolve(None)?;
    let params = resolved.params;
    let kind = match &args.eq {
        Some(text) => parse_eq(text)?,
        None => default_eq(&params)?,
    };
    let grid = tau_grid(args.tau_min, args.tau_max, args.tau_step)?;
    let mut settings = SweepSettings {
        steps_per_delay: args.steps_per_delay,
        ..SweepSettings::default()
    };
    if let Some(t_end) = args.t_end {
        settings.t_end = t_end;
        settings.t_end_near_hopf = 2.0 * t_end;
    }

    let config = json!({
        "command": "branch",
        "params": params,
        "eq": kind.as_str(),
        "tau_min": args.tau_min,
        "tau_max": args.tau_max,
        "tau_step": args.tau_step,
        "t_end": settings.t_end,
        "t_end_near_hopf": settings.t_end_near_hopf,
        "steps_per_delay": settings.steps_per_delay,
    });
    emit_sidecar(&args.out, &config)?;

    let diagram = sweep(&params, kind, &grid, &settings)?;
    let growth = match amplitude_growth_check(&diagram) {
        Ok(report) => serde_json::to_value(&report).expect("report serializes"),
        Err(err) => json!({ "skipped": err.to_string() }),
    };
    let summary = json!({
        "eq_kind": kind.as_str(),
        "hopf_tau": diagram.hopf_tau,
        "growth_check": growth,
    });
    let mut summary_text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    summary_text.push('\n');
    let csv = branch_csv(&diagram);

    match (&args.out, args.json) {
        (Some(path), json_to_stdout) => {
            std::fs::write(path, &csv).map_err(|e| {
                CliError::Computation(Error::InvalidInput(format!(
                    "cannot write {}: {e}",
                    path.display()
                )))
            })?;
            let mut name = path.as_os_str().to_os_string();
            name.push(".summary.json");
            let summary_path = PathBuf::from(name);
            std::fs::write(&summary_path, &summary_text).map_err(|e| {
                CliError::Computation(Error::InvalidInput(format!(
                    "cannot write {}: {e}",
                    summary_path.display()
                )))
            })?;
            if json_to_stdout {
                print!("{summary_text}");
            }
        }
        (None, true) => print!("{summary_text}"),
        (None, false) => {
            print!("{csv}");
            eprint!("{summary_text}");
        }
    }
    Ok(())
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let resolved = args.source.resolve(None)?;
    let params = resolved.params;
    let kind = match &args.eq {
        Some(text) => parse_eq(text)?,
        None => default_eq(&params)?,
    };
    let grid = tau_grid(args.tau_min, args.tau_max, args.tau_step)?;
    if args.roots == 0 {
        return Err(CliError::Usage("--roots must be at least 1".into()));
    }

    let config = json!({
        "command": "spectrum",
        "params": params,
        "eq": kind.as_str(),
        "tau_min": args.tau_min,
        "tau_max": args.tau_max,
        "tau_step": args.tau_step,
        "roots": args.roots,
    });
    emit_sidecar(&args.out, &config)?;

    let eq = equilibrium(&params, kind);
    let qp = char_poly(&params, &eq)?;
    let mut csv = String::new();
    csv.push_str("tau,re_lambda,im_lambda,residual\n");
    for &tau in &grid {
        for root in rightmost_roots(&qp.with_tau(tau), args.roots)? {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                g17(tau),
                g17(root.lambda.re),
                g17(root.lambda.im),
                g17(root.residual)
            );
        }
    }
    write_output(&args.out, &csv)
}
