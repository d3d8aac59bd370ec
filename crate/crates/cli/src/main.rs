//! `linfty-ot`: solve, certify, and script bottleneck transport experiments.
//!
//! Exit codes: 0 on success, 1 on config or input errors, 2 when a scenario's
//! built-in assertion fails (artifacts are still written in that case).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use linfty_ot_cli::config::{self, CostSpec, ExperimentConfig, MeasureSpec, Scenario};
use linfty_ot_cli::{scenarios, CliError};

#[derive(Parser)]
#[command(name = "linfty-ot", version, about = "Bottleneck transport solver and certifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scripted experiment from a JSON config.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Output directory (default: config's out_dir, then "out").
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's rng seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve a transport problem between two measure CSVs.
    Solve {
        mu: PathBuf,
        nu: PathBuf,
        /// Cost family: euclidean | sup-norm | power:Q | affine:Q:r11,r12;r21,r22
        #[arg(long)]
        cost: String,
        /// Solve the mean-power relaxation at this exponent.
        #[arg(long)]
        p: Option<f64>,
        /// Solve the minimax problem (the default).
        #[arg(long)]
        bottleneck: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Certify an existing plan against its marginals and a cost.
    Certify {
        plan: PathBuf,
        mu: PathBuf,
        nu: PathBuf,
        #[arg(long)]
        cost: String,
        /// Monotonicity tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn csv_spec(path: &Path) -> MeasureSpec {
    MeasureSpec {
        csv: Some(path.display().to_string()),
        grid: None,
        points: None,
        weights: None,
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config: path, out, seed } => {
            let mut cfg = config::parse_config(&path)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let out = out
                .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let base = path.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
            scenarios::run_experiment(&cfg, &out, &base)
        }
        Command::Solve { mu, nu, cost, p, bottleneck, out } => {
            if p.is_some() && bottleneck {
                return Err(CliError::Config("--p and --bottleneck are exclusive".to_string()));
            }
            let spec = CostSpec::parse_flag(&cost)?;
            match p {
                Some(p) => {
                    let mu = linfty_ot::io::read_measure_csv(&mu)
                        .map_err(|e| CliError::Config(format!("mu: {e}")))?;
                    let nu = linfty_ot::io::read_measure_csv(&nu)
                        .map_err(|e| CliError::Config(format!("nu: {e}")))?;
                    if mu.dim() != nu.dim() {
                        return Err(CliError::Config(format!(
                            "mu has dimension {} but nu has dimension {}",
                            mu.dim(),
                            nu.dim()
                        )));
                    }
                    let cost = spec.build(mu.dim())?;
                    scenarios::run_single_p(&mu, &nu, &cost, p, 0, &out)
                }
                None => {
                    let mut cfg = ExperimentConfig::bare(Scenario::Bottleneck);
                    cfg.mu = Some(csv_spec(&mu));
                    cfg.nu = Some(csv_spec(&nu));
                    cfg.cost = Some(spec);
                    scenarios::run_experiment(&cfg, &out, &PathBuf::from("."))
                }
            }
        }
        Command::Certify { plan, mu, nu, cost, tol, out } => {
            let mut cfg = ExperimentConfig::bare(Scenario::Certify);
            cfg.mu = Some(csv_spec(&mu));
            cfg.nu = Some(csv_spec(&nu));
            cfg.cost = Some(CostSpec::parse_flag(&cost)?);
            cfg.plan = Some(plan.display().to_string());
            cfg.tolerance = Some(tol);
            scenarios::run_experiment(&cfg, &out, &PathBuf::from("."))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}
