//! Command-line front end: experiment sweeps, analytic surfaces and the
//! oracle verification gate.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qsense_core::analytic;
use qsense_core::experiments::{
    self, axis_values, Evaluation, LineQuality, RunRecord, RunSettings, SweepSpec, SymmetricLineSpec,
};
use qsense_core::machines::QuantumMachine;
use qsense_core::{HintVector, MachineConfig, MachineKind, RngStream, ScoreTable, SecretBits, TOLERANCE};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QSENSE_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qsense", version, about = "Classical vs quantum decision-making machines in the secret-bit guessing game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo sweep over the (h0, h1) hint grid.
    Grid(GridArgs),
    /// Monte Carlo sweep along the symmetric Good/Poor hint diagonals.
    Symmetric(SymmetricArgs),
    /// Monte Carlo sweep of Good symmetric hints against dephasing rates.
    Decoherence(DecoherenceArgs),
    /// Closed-form expected scores on any of the sweep layouts.
    Analytic {
        #[command(subcommand)]
        experiment: AnalyticCommand,
    },
    /// Check the enumeration oracle, the density-matrix pipeline and the
    /// closed forms against each other on random inputs.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
enum AnalyticCommand {
    Grid(GridAxisArgs),
    Symmetric(SymmetricAxisArgs),
    Decoherence(DecoherenceAxisArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MachineChoice {
    Cdm,
    Qdm,
    Both,
}

impl MachineChoice {
    fn kinds(self) -> Vec<MachineKind> {
        match self {
            MachineChoice::Cdm => vec![MachineKind::Classical],
            MachineChoice::Qdm => vec![MachineKind::Quantum],
            MachineChoice::Both => MachineKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QualityChoice {
    Good,
    Poor,
    Both,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Which machines to run.
    #[arg(long, value_enum, default_value = "both")]
    machine: MachineChoice,
    /// Alice's secrets: 00, 01, 10, 11 or all.
    #[arg(long, default_value = "all", value_parser = parse_secrets)]
    secrets: SecretsChoice,
    /// Fiducial ancilla bit.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    alpha: u8,
    /// Score scale; a correct guess earns xi/2.
    #[arg(long, default_value_t = 1.0)]
    xi: f64,
    /// Output CSV path, or "-" for stdout. Defaults to <command>.csv in
    /// $QSENSE_OUT_DIR, or in the current directory when unset.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    /// Games per (cell, secrets) pair.
    #[arg(long, default_value_t = 10_000)]
    games: u64,
    /// Master seed [default: random, printed to stderr].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct GridAxisArgs {
    /// Grid spacing on both axes.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Lower hint bound on both axes.
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    min: f64,
    /// Upper hint bound on both axes.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    max: f64,
    /// Whole axis as min:max:step (replaces --min/--max/--step).
    #[arg(long, conflicts_with_all = ["step", "min", "max"], allow_negative_numbers = true)]
    axis: Option<String>,
    /// Dephasing rates for the quantum machine, min:max:step or a comma list.
    #[arg(long, default_value = "0")]
    gammas: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct SymmetricAxisArgs {
    /// Which diagonal: good maps every value to +|h|, poor to -|h|, both keeps signs.
    #[arg(long, value_enum, default_value = "both")]
    quality: QualityChoice,
    /// Signed hint values (positive = Good), min:max:step or a comma list.
    #[arg(long, default_value = "-0.5:0.5:0.01", allow_negative_numbers = true)]
    h: String,
    /// Shorthand for --h -0.5:0.5:STEP.
    #[arg(long, conflicts_with = "h")]
    step: Option<f64>,
    /// Dephasing rates for the quantum machine.
    #[arg(long, default_value = "0")]
    gammas: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct DecoherenceAxisArgs {
    /// Dephasing rates for the quantum machine.
    #[arg(long, default_value = "0,0.25,0.5,0.75,1.0")]
    gammas: String,
    /// Good symmetric hint magnitudes in [0, 1/2], min:max:step or a comma list.
    #[arg(long, default_value = "0:0.5:0.01")]
    h: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[command(flatten)]
    axis: GridAxisArgs,
    #[command(flatten)]
    mc: MonteCarloArgs,
}

#[derive(Debug, Args)]
struct SymmetricArgs {
    #[command(flatten)]
    axis: SymmetricAxisArgs,
    #[command(flatten)]
    mc: MonteCarloArgs,
}

#[derive(Debug, Args)]
struct DecoherenceArgs {
    #[command(flatten)]
    axis: DecoherenceAxisArgs,
    #[command(flatten)]
    mc: MonteCarloArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Random (machine, hint, secrets, gamma) samples per check.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Seed for the sample draws [default: random, printed to stderr].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone)]
struct SecretsChoice(Vec<SecretBits>);

fn parse_secrets(s: &str) -> Result<SecretsChoice, String> {
    if s == "all" {
        return Ok(SecretsChoice(SecretBits::all().to_vec()));
    }
    s.parse::<SecretBits>()
        .map(|x| SecretsChoice(vec![x]))
        .map_err(|_| format!("expected 00, 01, 10, 11 or all, got {s:?}"))
}

/// Parses `min:max:step` or a comma-separated list of numbers.
pub fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range must be min:max:step, got {s:?}"));
        }
        axis_values(num(parts[0])?, num(parts[1])?, num(parts[2])?).map_err(|e| e.to_string())
    } else {
        let values = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(format!("non-finite value in {s:?}"));
        }
        Ok(values)
    }
}

struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn settings(common: &CommonArgs, gammas: &str, mc: Option<&MonteCarloArgs>, seed: u64) -> Result<RunSettings, UsageError> {
    Ok(RunSettings {
        machines: common.machine.kinds(),
        secrets: common.secrets.0.clone(),
        gamma_list: parse_values(gammas).map_err(|e| UsageError(format!("--gammas: {e}")))?,
        games_per_cell: mc.map_or(0, |m| m.games),
        master_seed: seed,
        alpha: common.alpha == 1,
        table: ScoreTable::new(common.xi)?,
        evaluation: if mc.is_some() {
            Evaluation::MonteCarlo
        } else {
            Evaluation::Analytic
        },
    })
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn output_path(common: &CommonArgs, default_name: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
        dir.join(format!("{default_name}.csv"))
    })
}

fn emit(common: &CommonArgs, default_name: &str, records: &[RunRecord]) -> Result<(), UsageError> {
    let path = output_path(common, default_name);
    if path.as_os_str() == "-" {
        experiments::write_csv(records, std::io::stdout().lock())?;
    } else {
        experiments::write_csv_file(&path, records)?;
        eprintln!("wrote {} records to {}", records.len(), path.display());
    }
    Ok(())
}

fn run_grid(axis: &GridAxisArgs, mc: Option<&MonteCarloArgs>, name: &str) -> Result<(), UsageError> {
    let seed = mc.map_or(0, |m| resolve_seed(m.seed));
    let (min, max, step) = match &axis.axis {
        Some(range) => {
            let parts: Vec<&str> = range.split(':').collect();
            let bad = || UsageError(format!("--axis must be min:max:step, got {range:?}"));
            if parts.len() != 3 {
                return Err(bad());
            }
            let n = |t: &str| t.parse::<f64>().map_err(|_| bad());
            (n(parts[0])?, n(parts[1])?, n(parts[2])?)
        }
        None => (axis.min, axis.max, axis.step),
    };
    let spec = SweepSpec {
        grid_min: min,
        grid_max: max,
        step,
        settings: settings(&axis.common, &axis.gammas, mc, seed)?,
    };
    let records = experiments::with_threads(axis.common.threads, || experiments::run_grid(&spec))??;
    emit(&axis.common, name, &records)
}

fn run_symmetric(axis: &SymmetricAxisArgs, mc: Option<&MonteCarloArgs>, name: &str) -> Result<(), UsageError> {
    let seed = mc.map_or(0, |m| resolve_seed(m.seed));
    let h_values = match axis.step {
        Some(step) => axis_values(-0.5, 0.5, step)?,
        None => parse_values(&axis.h).map_err(|e| UsageError(format!("--h: {e}")))?,
    };
    let spec = SymmetricLineSpec {
        quality: match axis.quality {
            QualityChoice::Good => LineQuality::Good,
            QualityChoice::Poor => LineQuality::Poor,
            QualityChoice::Both => LineQuality::Both,
        },
        h_values,
        settings: settings(&axis.common, &axis.gammas, mc, seed)?,
    };
    let records = experiments::with_threads(axis.common.threads, || experiments::run_symmetric(&spec))??;
    emit(&axis.common, name, &records)
}

fn run_decoherence(axis: &DecoherenceAxisArgs, mc: Option<&MonteCarloArgs>, name: &str) -> Result<(), UsageError> {
    let seed = mc.map_or(0, |m| resolve_seed(m.seed));
    let h_values = parse_values(&axis.h).map_err(|e| UsageError(format!("--h: {e}")))?;
    let settings = settings(&axis.common, &axis.gammas, mc, seed)?;
    let records = experiments::with_threads(axis.common.threads, || {
        experiments::run_decoherence_line(&h_values, &settings)
    })??;
    emit(&axis.common, name, &records)
}

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub samples: u64,
    pub max_error: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_error <= TOLERANCE
    }
}

/// Runs the self-consistency checks on `trials` random samples each.
pub fn verify(trials: u64, seed: u64) -> Vec<CheckReport> {
    let mut rng = RngStream::new(seed);
    let table = ScoreTable::default();
    let hint = |rng: &mut RngStream| {
        HintVector::new(rng.uniform() - 0.5, rng.uniform() - 0.5).expect("sampled in range")
    };

    let mut oracle = 0.0f64;
    let mut pipeline = 0.0f64;
    let mut null = 0.0f64;
    for _ in 0..trials {
        let kind = if rng.bernoulli(0.5) { MachineKind::Quantum } else { MachineKind::Classical };
        let h = hint(&mut rng);
        let x = SecretBits::new(rng.bernoulli(0.5), rng.bernoulli(0.5));
        let g = rng.uniform();
        let closed = analytic::expected_score(kind, &h, &x, g, &table).expect("valid inputs");
        let brute = analytic::brute_force_oracle(kind, &h, &x, g, &table).expect("valid inputs");
        oracle = oracle.max((closed - brute).abs());

        let q = QuantumMachine::new(MachineConfig::new(h).with_gamma(g)).expect("valid config");
        let gamma = analytic::gamma(&h).value();
        let expected = 0.5 + 2.0 * h.h0() * h.h1() + (1.0 - g) * gamma * h.phase_difference().cos();
        pipeline = pipeline.max((q.outcome_distribution().p_m1_zero - expected).abs());

        null = null.max(analytic::uniform_alice_average(kind, &h, g, &table).expect("valid inputs").abs());
    }
    vec![
        CheckReport {
            name: "oracle vs closed-form expected score",
            samples: trials,
            max_error: oracle,
        },
        CheckReport {
            name: "density-matrix pipeline vs closed-form P(y1=0)",
            samples: trials,
            max_error: pipeline,
        },
        CheckReport {
            name: "uniform-secrets average is zero",
            samples: trials,
            max_error: null,
        },
    ]
}

fn dispatch(cli: Cli) -> Result<i32, UsageError> {
    match cli.command {
        Command::Grid(a) => run_grid(&a.axis, Some(&a.mc), "grid")?,
        Command::Symmetric(a) => run_symmetric(&a.axis, Some(&a.mc), "symmetric")?,
        Command::Decoherence(a) => run_decoherence(&a.axis, Some(&a.mc), "decoherence")?,
        Command::Analytic { experiment } => match experiment {
            AnalyticCommand::Grid(a) => run_grid(&a, None, "analytic-grid")?,
            AnalyticCommand::Symmetric(a) => run_symmetric(&a, None, "analytic-symmetric")?,
            AnalyticCommand::Decoherence(a) => run_decoherence(&a, None, "analytic-decoherence")?,
        },
        Command::Verify(a) => {
            if a.trials == 0 {
                return Err(UsageError("--trials must be at least 1".into()));
            }
            let seed = resolve_seed(a.seed);
            let reports = verify(a.trials, seed);
            for r in &reports {
                println!(
                    "[{}] {} ({} samples, max error {:e}, tolerance {:e})",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.name,
                    r.samples,
                    r.max_error,
                    TOLERANCE
                );
            }
            if !reports.iter().all(CheckReport::passed) {
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}
