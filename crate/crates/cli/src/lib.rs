//! Command-line front end: argument parsing, dispatch and result emission.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use symlandscape::characters::{character, scan_landscape, IrrepLabel, TorusPoint};
use symlandscape::dynamics::{run_grape, Problem, TargetSpec};
use symlandscape::kinematic::{flow_ensemble, reduced_scan, AscentConfig, FlowSummary, TargetGate};
use symlandscape::representations::{build_spin_operators, lie_closure, SpinLabel};
use symlandscape::topology::critical_points;

pub mod figures;
pub mod output;

use output::{CliError, Output};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SYMLANDSCAPE_OUT";

#[derive(Debug, Parser)]
#[command(name = "symlandscape", version, about = "Gate-fidelity landscapes under SU(2) and SU(3) dynamical symmetry")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalOpts {
    /// Rendering of JSON-producing commands.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Progress and timing on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the character and fidelity at torus points.
    Character(CharacterArgs),
    /// Sample J on beta in [0, pi/2] for a spin-j irrep (CSV).
    ScanSu2(ScanSu2Args),
    /// Sample J on the (theta1, theta2) torus for an SU(3) irrep (CSV).
    ScanSu3(ScanSu3Args),
    /// Locate and classify critical points of a character landscape.
    Critical(CriticalArgs),
    /// Reduced (theta, phi) scan of a spin-j gate landscape (CSV).
    EulerScan(EulerScanArgs),
    /// Multi-start Riemannian ascent on the reachable group (JSON).
    KinematicFlow(FlowArgs),
    /// Multi-start GRAPE on a problem file (JSON lines).
    Grape(GrapeArgs),
    /// Dynamical Lie algebra dimension of a problem file.
    Controllability(ControllabilityArgs),
    /// Regenerate figure data and SVG renderings.
    Figures(figures::FigureArgs),
}

#[derive(Debug, Args, Serialize)]
struct OutputArg {
    /// Write the result here instead of stdout, with a `.meta.json` sidecar.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CharacterArgs {
    /// Irrep label, e.g. su2:j=7/2 or su3:6,1.
    #[arg(long)]
    label: IrrepLabel,
    /// Torus angles, comma separated (beta, or theta1,theta2). Repeatable.
    #[arg(long = "at", required = true, num_args = 1)]
    points: Vec<String>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args, Serialize)]
struct ScanSu2Args {
    /// Spin, e.g. 3, 7/2 or 3.5.
    #[arg(long)]
    #[serde(serialize_with = "as_display")]
    j: SpinLabel,
    #[arg(long, default_value_t = 1024)]
    resolution: usize,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args, Serialize)]
struct ScanSu3Args {
    /// First Young-diagram row length.
    #[arg(long)]
    r1: u32,
    /// Second row length, at most r1.
    #[arg(long)]
    r2: u32,
    /// Points per torus axis.
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args, Serialize)]
struct CriticalArgs {
    /// Irrep label, e.g. su2:j=3 or su3:5,2.
    #[arg(long)]
    label: IrrepLabel,
    /// Torus grid points per axis (SU(3) only).
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Location tolerance of the refinement.
    #[arg(long, default_value_t = 1e-10)]
    refine_tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args, Serialize)]
struct EulerScanArgs {
    /// Spin, e.g. 3 or 7/2.
    #[arg(long)]
    #[serde(serialize_with = "as_display")]
    j: SpinLabel,
    /// `identity`, `flip`, or a JSON file holding a matrix of [re, im] pairs.
    #[arg(long, default_value = "identity")]
    target: String,
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args, Serialize)]
struct FlowArgs {
    /// Spin, e.g. 3 or 7/2.
    #[arg(long)]
    #[serde(serialize_with = "as_display")]
    j: SpinLabel,
    /// `identity`, `flip`, or a JSON target file.
    #[arg(long, default_value = "identity")]
    target: String,
    #[arg(long, default_value_t = 100)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gradient-norm stopping tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args, Serialize)]
struct GrapeArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Overrides `experiment.starts`.
    #[arg(long)]
    starts: Option<usize>,
    /// Overrides `experiment.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args, Serialize)]
struct ControllabilityArgs {
    #[arg(long)]
    problem: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArg,
}

/// One evaluated torus point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterValue {
    pub angles: Vec<f64>,
    pub chi: [f64; 2],
    #[serde(rename = "J")]
    pub j: f64,
}

/// Verdict of the `controllability` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityReport {
    pub dim: usize,
    pub closure_dim: usize,
    pub traceless_dim: usize,
    /// `N² − 1`, the dimension of su(N).
    pub su_dim: usize,
    pub controllable: bool,
    pub rounds: usize,
}

fn as_display<S: serde::Serializer>(v: &SpinLabel, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn parse_angles(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("`{t}` is not a finite angle")))
        })
        .collect()
}

fn load_target(spec: &str, dim: usize) -> Result<TargetGate, CliError> {
    if spec.ends_with(".json") {
        let text = read_file(Path::new(spec))?;
        let parsed: TargetSpec = serde_json::from_str(&text).map_err(symlandscape::Error::from)?;
        Ok(parsed.resolve(dim)?)
    } else {
        Ok(TargetGate::named(spec, dim)?)
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_problem(path: &Path) -> Result<Problem, CliError> {
    Ok(Problem::from_json(&read_file(path)?)?)
}

pub(crate) fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Character(a) => {
            let sink = Output::new("character", g, a, a.out.output.clone());
            let rank = a.label.rank();
            let mut values = Vec::new();
            for s in &a.points {
                let angles = parse_angles(s)?;
                if angles.len() != rank {
                    return Err(CliError::Usage(format!("{} needs {rank} angle(s), got `{s}`", a.label)));
                }
                let chi = character(&a.label, &TorusPoint::new(angles.clone()))?;
                values.push(CharacterValue {
                    angles,
                    chi: [chi.re, chi.im],
                    j: chi.norm() / a.label.dim() as f64,
                });
            }
            let text = match g.format {
                Format::Json => to_json(&values),
                Format::Table => values
                    .iter()
                    .map(|v| format!("{:?}  chi = {:.12} {:+.12}i  J = {:.12}\n", v.angles, v.chi[0], v.chi[1], v.j))
                    .collect(),
            };
            sink.emit(out, err, &text)
        }
        Command::ScanSu2(a) => {
            let sink = Output::new("scan-su2", g, a, a.out.output.clone());
            let grid = scan_landscape(&IrrepLabel::Su2(a.j), a.resolution)?;
            sink.emit(out, err, &grid.to_csv())
        }
        Command::ScanSu3(a) => {
            let sink = Output::new("scan-su3", g, a, a.out.output.clone());
            let label = IrrepLabel::su3(a.r1, a.r2)?;
            let grid = scan_landscape(&label, a.resolution)?;
            sink.emit(out, err, &grid.to_csv())
        }
        Command::Critical(a) => {
            let sink = Output::new("critical", g, a, a.out.output.clone());
            let report = critical_points(&a.label, a.resolution, a.refine_tol)?;
            match g.format {
                Format::Json => {
                    output::write_stream(err, &report.to_table())?;
                    sink.emit(out, err, &to_json(&report))
                }
                Format::Table => sink.emit(out, err, &report.to_table()),
            }
        }
        Command::EulerScan(a) => {
            let sink = Output::new("euler-scan", g, a, a.out.output.clone());
            let ops = build_spin_operators(a.j);
            let w = load_target(&a.target, a.j.dim())?;
            let grid = reduced_scan(&ops, &w, a.resolution)?;
            sink.emit(out, err, &grid.to_csv())
        }
        Command::KinematicFlow(a) => {
            let sink = Output::new("kinematic-flow", g, a, a.out.output.clone());
            if a.starts == 0 {
                return Err(CliError::Usage("--starts must be at least 1".into()));
            }
            let ops = build_spin_operators(a.j);
            let w = load_target(&a.target, a.j.dim())?;
            let config = AscentConfig {
                tol: a.tol,
                max_iter: a.max_iter,
                seed: a.seed,
                record_history: false,
            };
            let runs = flow_ensemble(&w, &ops.algebra(), a.starts, a.seed, &config)?;
            let summaries: Vec<FlowSummary> = runs.iter().map(|(seed, r)| r.summary(*seed)).collect();
            let text = match g.format {
                Format::Json => to_json(&summaries),
                Format::Table => summaries
                    .iter()
                    .map(|s| {
                        format!(
                            "{:>20}  J = {:.12}  iterations = {:>6}  residual = {:.2e}  converged = {}\n",
                            s.seed, s.final_j, s.iterations, s.residual, s.converged
                        )
                    })
                    .collect(),
            };
            sink.emit(out, err, &text)
        }
        Command::Grape(a) => {
            let problem = load_problem(&a.problem)?;
            let mut config = problem.experiment.clone().unwrap_or_default();
            if let Some(s) = a.starts {
                config.starts = s;
            }
            if let Some(s) = a.seed {
                config.seed = s;
            }
            let w = problem.target_gate()?;
            let resolved = serde_json::json!({ "args": a, "experiment": config });
            let sink = Output::new("grape", g, resolved, a.out.output.clone());
            let outcomes = run_grape(&problem.system, &w, &config)?;
            let mut text = String::new();
            for o in &outcomes {
                match g.format {
                    Format::Json => {
                        text.push_str(&serde_json::to_string(o).expect("serializable outcome"));
                        text.push('\n');
                    }
                    Format::Table => text.push_str(&format!(
                        "{:>4}  J = {:.12}  |grad| = {:.2e}  iterations = {:>5}  converged = {}\n",
                        o.run, o.final_j, o.gradient_norm, o.iterations, o.converged
                    )),
                }
            }
            sink.emit(out, err, &text)
        }
        Command::Controllability(a) => {
            let sink = Output::new("controllability", g, a, a.out.output.clone());
            let problem = load_problem(&a.problem)?;
            let closure = lie_closure(&problem.system.generators(), None)?;
            let n = problem.system.dim();
            let report = ControllabilityReport {
                dim: n,
                closure_dim: closure.dim(),
                traceless_dim: closure.traceless_dim,
                su_dim: n * n - 1,
                controllable: closure.controllable,
                rounds: closure.rounds,
            };
            let text = match g.format {
                Format::Json => to_json(&report),
                Format::Table => format!(
                    "dimension {n}: closure {} (traceless {}) of su({n}) = {}  controllable = {}\n",
                    report.closure_dim, report.traceless_dim, report.su_dim, report.controllable
                ),
            };
            sink.emit(out, err, &text)
        }
        Command::Figures(a) => figures::run(g, a, out, err),
    }
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 1 for invalid input or usage errors, 2
/// for numerical failures.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                1
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    match run(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
