//! `dephasim`: evolve GHZ-type states under correlated dephasing and write CSV.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use dephasim_core::experiments::{
    comparison_csv, compare_rows, format_number, run_curve, run_scenario, series_csv, table_csv, write_atomic,
    Scenario, TablePreset,
};
use dephasim_core::linalg::frobenius_distance;
use dephasim_core::model::{beta, initial_density};
use dephasim_core::montecarlo::{mc_evolve, ou_phase_samples, sample_variance};
use dephasim_core::{channel, EntropyBase, InitialState, NoiseParams, Partition, Scheme, TrajectoryConfig};

#[derive(Parser)]
#[command(name = "dephasim", version, about = "Multiqubit dephasing under Ornstein-Uhlenbeck noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write EW, purity and entropy along a time grid.
    Evolve(EvolveArgs),
    /// Saturation levels and times for a table preset.
    Table(TableArgs),
    /// Run a named scenario, one CSV per curve.
    Scenario(ScenarioArgs),
    /// Compare the analytic channel with Monte Carlo trajectories.
    Validate(ValidateArgs),
    /// Print the accumulated phase variance β(g, t).
    Beta(BetaArgs),
}

#[derive(Args)]
struct SystemArgs {
    /// Number of qubits.
    #[arg(long, default_value_t = 4)]
    qubits: usize,
    /// Preset (cse, bse, tse, ise) or explicit environment ids such as "0,0,1,1".
    #[arg(long, default_value = "cse")]
    partition: String,
    /// Inverse correlation time of the noise.
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    /// Qubit-noise coupling.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Qubit energy splitting; only contributes a global phase.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    epsilon: f64,
    /// GHZ weight of the initial state (1 = pure GHZ, 0 = maximally mixed).
    #[arg(long, default_value_t = 1.0)]
    p: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Nats,
    Bits,
}

impl From<BaseArg> for EntropyBase {
    fn from(b: BaseArg) -> Self {
        match b {
            BaseArg::Nats => EntropyBase::Natural,
            BaseArg::Bits => EntropyBase::Two,
        }
    }
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// End of the time grid.
    #[arg(long, default_value_t = 2.0)]
    t_max: f64,
    /// Number of grid points, including both ends.
    #[arg(long, default_value_t = 400)]
    steps: usize,
    /// Entropy logarithm base.
    #[arg(long, value_enum, default_value = "nats")]
    entropy_base: BaseArg,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableName {
    Table1,
    Table2,
    Table3,
    Table4,
    Comparative,
}

impl TableName {
    fn preset(self) -> &'static TablePreset {
        let name = match self {
            TableName::Table1 => "table1",
            TableName::Table2 => "table2",
            TableName::Table3 => "table3",
            TableName::Table4 => "table4",
            TableName::Comparative => "comparative",
        };
        TablePreset::by_name(name).expect("known preset")
    }
}

#[derive(Args)]
struct TableArgs {
    /// Table to build.
    #[arg(long, value_enum)]
    preset: TableName,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write a per-measure comparison with the published values here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario name (fig2 .. fig10).
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(Scenario::preset_names()))]
    name: String,
    /// Override the number of grid points.
    #[arg(long)]
    steps: Option<usize>,
    /// Entropy logarithm base.
    #[arg(long, value_enum, default_value = "nats")]
    entropy_base: BaseArg,
    /// Directory receiving `<name>_<config>_g<g>.csv`.
    #[arg(long)]
    output_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    DirectPhase,
    OuPath,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Evolution time.
    #[arg(long, default_value_t = 2.0)]
    t: f64,
    /// Number of trajectories (at least 100).
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(100..))]
    samples: u64,
    /// Base seed; trajectory i uses stream i.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// How trajectory phases are drawn.
    #[arg(long, value_enum, default_value = "direct-phase")]
    scheme: SchemeArg,
    /// OU path step; defaults to min(1e-3, 0.01/g).
    #[arg(long)]
    dt: Option<f64>,
    /// Largest accepted Frobenius distance between estimate and channel.
    #[arg(long, default_value_t = 0.02)]
    distance_tol: f64,
    /// Largest accepted relative error of the OU phase variance.
    #[arg(long, default_value_t = 0.05)]
    variance_tol: f64,
    /// Report path; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BetaArgs {
    /// Inverse correlation time.
    #[arg(long)]
    g: f64,
    /// Time.
    #[arg(long)]
    t: f64,
}

enum Failure {
    Usage(String),
    Runtime(String),
    Tolerance,
}

impl From<dephasim_core::Error> for Failure {
    fn from(e: dephasim_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        Cli::command().error(ErrorKind::InvalidValue, msg).exit();
    }
    let outcome = match cli.command {
        Command::Evolve(a) => evolve_cmd(a),
        Command::Table(a) => table_cmd(a),
        Command::Scenario(a) => scenario_cmd(a),
        Command::Validate(a) => validate_cmd(a),
        Command::Beta(a) => beta_cmd(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => Cli::command().error(ErrorKind::ValueValidation, msg).exit(),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Tolerance) => ExitCode::from(1),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("DEPHASIM_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("DEPHASIM_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn emit(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Runtime(e.to_string()))?;
        }
    }
    Ok(())
}

fn resolve(system: &SystemArgs) -> Result<(Partition, NoiseParams, InitialState), Failure> {
    let partition = Partition::parse(&system.partition, system.qubits).map_err(|e| Failure::Usage(e.to_string()))?;
    let noise =
        NoiseParams::with_coupling(system.g, system.lambda, system.epsilon).map_err(|e| Failure::Usage(e.to_string()))?;
    if !(0.0..=1.0).contains(&system.p) {
        return Err(Failure::Usage(format!("--p must lie in [0, 1], got {}", system.p)));
    }
    Ok((partition, noise, InitialState { n_qubits: system.qubits, p: system.p }))
}

fn evolve_cmd(a: EvolveArgs) -> CmdResult {
    let (partition, noise, state) = resolve(&a.system)?;
    if a.steps == 0 || !(a.t_max >= 0.0 && a.t_max.is_finite()) {
        return Err(Failure::Usage("--steps must be positive and --t-max a nonnegative number".into()));
    }
    let curve = run_curve(&a.system.partition, &partition, &noise, state.p, a.t_max, a.steps, a.entropy_base.into())?;
    emit(a.output.as_deref(), &series_csv(&curve.series, Some(&curve.env_betas))?)
}

fn table_cmd(a: TableArgs) -> CmdResult {
    let rows = dephasim_core::experiments::build_table(a.preset.preset())?;
    if let Some(report) = &a.report {
        write_atomic(report, comparison_csv(&compare_rows(&rows)).as_bytes())?;
    }
    emit(a.output.as_deref(), &table_csv(&rows))
}

fn scenario_cmd(a: ScenarioArgs) -> CmdResult {
    let mut scenario = Scenario::preset(&a.name)?;
    if let Some(steps) = a.steps {
        if steps == 0 {
            return Err(Failure::Usage("--steps must be positive".into()));
        }
        scenario.steps = steps;
    }
    scenario.base = a.entropy_base.into();
    std::fs::create_dir_all(&a.output_dir).map_err(|e| Failure::Runtime(format!("{}: {e}", a.output_dir.display())))?;
    for curve in run_scenario(&scenario)? {
        let file = a.output_dir.join(format!("{}_{}_g{}.csv", scenario.name, curve.config, format_number(curve.g)));
        write_atomic(&file, series_csv(&curve.series, Some(&curve.env_betas))?.as_bytes())?;
        println!("{}", file.display());
    }
    Ok(())
}

fn validate_cmd(a: ValidateArgs) -> CmdResult {
    let (partition, noise, state) = resolve(&a.system)?;
    if !(a.t > 0.0 && a.t.is_finite()) {
        return Err(Failure::Usage(format!("--t must be positive, got {}", a.t)));
    }
    let dt = a.dt.unwrap_or_else(|| (1e-3f64).min(0.01 / noise.g));
    if !(dt > 0.0) {
        return Err(Failure::Usage(format!("--dt must be positive, got {dt}")));
    }
    let samples = a.samples as usize;
    let scheme = match a.scheme {
        SchemeArg::DirectPhase => Scheme::DirectPhase,
        SchemeArg::OuPath => Scheme::OuPath,
    };
    let rho0 = initial_density(&state)?;
    let exact = channel::evolve(&rho0, &partition, &noise, a.t)?;
    let config = TrajectoryConfig::new(samples, a.seed, dt.min(a.t), scheme)?;
    let estimate = mc_evolve(&rho0, &partition, &noise, a.t, &config)?;
    let distance = frobenius_distance(&estimate.state, &exact)?;

    let expected = beta(&noise, a.t)?;
    let phases = ou_phase_samples(&noise, a.t, dt.min(a.t), samples, a.seed)?;
    let variance = sample_variance(&phases);
    let rel_err = (variance - expected).abs() / expected;

    let pass = distance <= a.distance_tol && rel_err <= a.variance_tol;
    let scheme_name = match a.scheme {
        SchemeArg::DirectPhase => "direct-phase",
        SchemeArg::OuPath => "ou-path",
    };
    let fields: [(&str, String); 15] = [
        ("partition", partition.to_string()),
        ("g", format_number(noise.g)),
        ("t", format_number(a.t)),
        ("samples", samples.to_string()),
        ("seed", a.seed.to_string()),
        ("scheme", scheme_name.into()),
        ("dt", format_number(dt.min(a.t))),
        ("frobenius_distance", format_number(distance)),
        ("std_error", format_number(estimate.std_error)),
        ("distance_tol", format_number(a.distance_tol)),
        ("ou_variance", format_number(variance)),
        ("beta", format_number(expected)),
        ("variance_rel_error", format_number(rel_err)),
        ("variance_tol", format_number(a.variance_tol)),
        ("status", if pass { "pass" } else { "fail" }.into()),
    ];
    let report: String = fields.iter().map(|(k, v)| format!("{k},{v}\n")).collect();
    emit(a.output.as_deref(), &report)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Tolerance)
    }
}

fn beta_cmd(a: BetaArgs) -> CmdResult {
    let noise = NoiseParams::new(a.g).map_err(|e| Failure::Usage(e.to_string()))?;
    if !(a.t >= 0.0 && a.t.is_finite()) {
        return Err(Failure::Usage(format!("--t must be nonnegative, got {}", a.t)));
    }
    println!("{}", format_number(beta(&noise, a.t)?));
    Ok(())
}
