//! `reslab`: runs sweeps, the onset scan and the validation harness, writing CSV.
//!
//! Exit codes: 0 success, 1 a tolerance or certification failed, 2 bad
//! configuration, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reslab::experiments::{parse_config_text, run_experiment, Experiment, ExperimentConfig};
use reslab::{Error, Exec};

/// Worker-count variable. Results are identical for every value.
const THREADS_ENV: &str = "RESLAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "reslab",
    version,
    about = "Qubits in a shared Lorentzian reservoir: QFI and geometric-phase sweeps"
)]
struct Cli {
    /// Flat `key = value` file; command-line flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Run sequentially even when built with parallel support.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one figure sweep.
    Run {
        #[arg(long)]
        experiment: Option<String>,
        #[command(flatten)]
        keys: Keys,
    },
    /// Find the smallest N whose QFI decay is non-monotone.
    ScanNc {
        #[command(flatten)]
        keys: Keys,
    },
    /// Cross-validate every computational route.
    Validate {
        #[command(flatten)]
        keys: Keys,
    },
}

/// One flag per config key. Lists are comma separated.
#[derive(Args, Debug, Default)]
struct Keys {
    #[arg(long)]
    gamma0: Option<String>,
    #[arg(long)]
    omega0: Option<String>,
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    theta_list: Option<String>,
    #[arg(long)]
    t_max: Option<String>,
    #[arg(long)]
    n_samples: Option<String>,
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    solver_dt: Option<String>,
    #[arg(long)]
    k_steps: Option<String>,
    #[arg(long)]
    gp_steps: Option<String>,
    #[arg(long)]
    bath_modes: Option<String>,
    #[arg(long)]
    bath_half_width: Option<String>,
    #[arg(long)]
    bath_dt: Option<String>,
    #[arg(long)]
    bath_t_max: Option<String>,
    #[arg(long)]
    n_max: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl Keys {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let fields = [
            ("gamma0", &self.gamma0),
            ("omega0", &self.omega0),
            ("n_list", &self.n_list),
            ("theta_list", &self.theta_list),
            ("t_max", &self.t_max),
            ("n_samples", &self.n_samples),
            ("methods", &self.methods),
            ("solver_dt", &self.solver_dt),
            ("k_steps", &self.k_steps),
            ("gp_steps", &self.gp_steps),
            ("bath_modes", &self.bath_modes),
            ("bath_half_width", &self.bath_half_width),
            ("bath_dt", &self.bath_dt),
            ("bath_t_max", &self.bath_t_max),
            ("n_max", &self.n_max),
            ("grid", &self.grid),
            ("out", &self.out),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect()
    }
}

enum Failure {
    Tolerance(Vec<String>),
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Failure::Config(format!(
            "{THREADS_ENV} must be a positive integer, got `{raw}`"
        ))
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("cannot size the worker pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut pairs: Vec<(String, String)> = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_config_text(&text)?
        }
        None => Vec::new(),
    };
    let (fallback, keys) = match &cli.command {
        Command::Run { experiment, keys } => {
            let has_file_experiment = pairs.iter().any(|(k, _)| k == "experiment");
            match experiment {
                Some(e) => pairs.push(("experiment".into(), e.clone())),
                None if !has_file_experiment => {
                    return Err(Failure::Config(
                        "`run` needs --experiment or an `experiment` key".into(),
                    ))
                }
                None => {}
            }
            (Experiment::Fig1, keys)
        }
        Command::ScanNc { keys } => (Experiment::NcScan, keys),
        Command::Validate { keys } => (Experiment::Validate, keys),
    };
    // the subcommand decides scan-nc and validate, whatever the file says
    if !matches!(cli.command, Command::Run { .. }) {
        pairs.retain(|(k, _)| k != "experiment");
    }
    pairs.extend(keys.pairs().into_iter().map(|(k, v)| (k.to_string(), v)));
    let cfg = ExperimentConfig::from_pairs(
        fallback,
        pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())),
    )?;
    if matches!(cli.command, Command::Run { .. })
        && matches!(cfg.experiment, Experiment::NcScan | Experiment::Validate)
    {
        return Err(Failure::Config(format!(
            "use the `{}` subcommand for this experiment",
            if cfg.experiment == Experiment::NcScan {
                "scan-nc"
            } else {
                "validate"
            }
        )));
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    let cfg = resolve(cli)?;
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    let output = run_experiment(&cfg, exec)?;
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &output.csv)
                .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
            for line in &output.summary {
                println!("{line}");
            }
            println!("wrote {}", path.display());
        }
        None => {
            print!("{}", output.csv);
            for line in &output.summary {
                eprintln!("{line}");
            }
        }
    }
    if output.passed() {
        Ok(())
    } else {
        Err(Failure::Tolerance(output.failures))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Tolerance(msgs)) => {
            for m in msgs {
                eprintln!("tolerance failure: {m}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical error: {m}");
            ExitCode::from(3)
        }
    }
}
