use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use leakbf::solvers::SolverSettings;
use leakbf_sim::output::emit;
use leakbf_sim::recipes::{self, Quantity};
use leakbf_sim::spec::extract_config;
use leakbf_sim::{verify, Assignments, ExperimentSpec, SimError};

/// Leakage-controlled robust beamforming simulator.
#[derive(Parser)]
#[command(name = "leakbf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scheme sweep or a figure recipe.
    Run(ExperimentArgs),
    /// Analytical versus simulated leakage CDFs.
    Cdf(ExperimentArgs),
    /// Run the invariant checks.
    Verify {
        /// Channel trials and SDP instances per check.
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat `key = value` file, or an earlier output file to replay.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated schemes, or `all`.
    #[arg(long)]
    scheme: Option<String>,
    /// SNR grid in dB: `start:step:stop`, a list, or one value.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `csv` or `json`.
    #[arg(long)]
    format: Option<String>,
    /// fig2 ... fig8.
    #[arg(long)]
    recipe: Option<String>,
    /// Any config key, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ExperimentArgs {
    fn spec(&self) -> Result<ExperimentSpec, SimError> {
        let text = match &self.config {
            Some(path) => extract_config(&std::fs::read_to_string(path)?)?,
            None => String::new(),
        };
        let mut flags = Assignments::default();
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| SimError::Usage(format!("--set expects key=value, got '{item}'")))?;
            flags.set(k, v)?;
        }
        let pairs = [
            ("schemes", self.scheme.clone()),
            ("snr_db", self.snr_db.clone()),
            ("trials", self.trials.map(|t| t.to_string())),
            ("seed", self.seed.map(|s| s.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("format", self.format.clone()),
            ("recipe", self.recipe.clone()),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                flags.set(k, &v)?;
            }
        }
        ExperimentSpec::parse(&text, &flags)
    }
}

fn run(cli: Cli) -> Result<bool, SimError> {
    let settings = SolverSettings::default();
    match cli.command {
        Command::Run(args) => {
            let spec = args.spec()?;
            emit(&spec, &recipes::run(&spec, &settings)?)?;
            Ok(true)
        }
        Command::Cdf(args) => {
            let mut spec = args.spec()?;
            let quantities: &[Quantity] = match spec.recipe {
                Some(r) if r.is_cdf() => return emit(&spec, &recipes::run(&spec, &settings)?).map(|_| true),
                Some(r) => return Err(SimError::Usage(format!("recipe {r} is not a CDF recipe (use fig2 or fig3)"))),
                None => &[Quantity::D, Quantity::V],
            };
            if args.trials.is_none() && !args.set.iter().any(|s| s.starts_with("trials")) {
                spec.n_trials = 100_000;
            }
            emit(&spec, &recipes::cdf_table(&spec, quantities)?)?;
            Ok(true)
        }
        Command::Verify { trials, seed } => {
            let checks = verify::run_checks(trials, seed)?;
            for c in &checks {
                println!("{c}");
            }
            Ok(checks.iter().all(|c| c.passed))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SimError::Usage(_) | SimError::UnknownKey { .. } | SimError::Value { .. } | SimError::Syntax { .. } => {
                    ExitCode::from(2)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}
