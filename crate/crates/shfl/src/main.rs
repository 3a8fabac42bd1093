use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shfl::config::{load_config, RunConfig};
use shfl::error::{Error, Result};
use shfl::experiment;
use shfl::formats;
use shfl_core::scheduler::{admm_solve, brute_force_oracle};
use shfl_core::sim::EdgeUpdate;

#[derive(Parser)]
#[command(name = "shfl", version, about = "Semi-asynchronous hierarchical federated learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// JSON run config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<RunConfig> {
        match &self.config {
            Some(p) => load_config(p),
            None => Ok(RunConfig::default()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write metrics plus a manifest.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        rounds: Option<u64>,
        /// proposed, full, random-M or fastest-M.
        #[arg(long)]
        policy: Option<String>,
        #[arg(long, value_parser = parse_edge_update)]
        edge_update: Option<EdgeUpdate>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Solve a scheduling instance with the ADMM solver.
    Schedule {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        rho: Option<f64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a scheduling instance exactly by enumeration.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one instance across a range of rho values; writes CSV.
    SweepRho {
        #[command(flatten)]
        config: ConfigArg,
        /// Instance file; otherwise the config's first-round instance.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated; defaults to 0.40,0.45,...,0.80.
        #[arg(long, value_delimiter = ',')]
        rho_values: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the synthetic device and test datasets as text.
    GenData {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "data")]
        out: PathBuf,
    },
    /// Write the config's first-round scheduling instance as JSON.
    GenInstance {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_edge_update(s: &str) -> std::result::Result<EdgeUpdate, String> {
    match s {
        "elastic" => Ok(EdgeUpdate::Elastic),
        "normal" => Ok(EdgeUpdate::Normal),
        _ => Err(format!("expected `elastic` or `normal`, got `{s}`")),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => formats::write_file(p, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io { path: "<stdout>".into(), source: e }),
    }
}

fn check_rho(rho: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&rho) {
        Ok(rho)
    } else {
        Err(Error::Invalid { field: "rho".into(), msg: format!("{rho} is outside [0, 1]") })
    }
}

fn with_overrides(mut cfg: RunConfig, seed: Option<u64>, rho: Option<f64>) -> Result<RunConfig> {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = rho {
        cfg.solver.rho = r;
    }
    cfg.to_sim_config()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, seed, rounds, policy, edge_update, rho, out } => {
            let mut cfg = config.load()?;
            if let Some(r) = rounds {
                cfg.rounds = r;
            }
            if let Some(p) = policy {
                cfg.policy.selection = p;
            }
            if let Some(u) = edge_update {
                cfg.policy.edge_update = u;
            }
            let cfg = with_overrides(cfg, Some(seed), rho)?;
            let art = experiment::run_experiment(&cfg, &out)?;
            for r in &art.manifest.empty_rounds {
                eprintln!("warning: round {r} selected no edge; the clock did not advance");
            }
            let last = art.log.rows.last().expect("initial row");
            eprintln!(
                "{}: {} rounds, final accuracy {:.4}, simulated time {:.4} s -> {}",
                art.manifest.policy,
                cfg.rounds,
                last.test_acc,
                last.wall_clock_s,
                art.dir.display()
            );
        }
        Command::Schedule { config, instance, rho, out } => {
            let solver = config.load()?.solver.to_solver();
            let mut inst = formats::read_instance(&instance)?;
            if let Some(r) = rho {
                inst.rho = check_rho(r)?;
            }
            let s = admm_solve(&inst, &solver)?;
            emit(out.as_deref(), &formats::schedule_to_json(&s))?;
        }
        Command::Oracle { instance, rho, out } => {
            let mut inst = formats::read_instance(&instance)?;
            if let Some(r) = rho {
                inst.rho = check_rho(r)?;
            }
            let s = brute_force_oracle(&inst)?;
            emit(out.as_deref(), &formats::schedule_to_json(&s))?;
        }
        Command::SweepRho { config, instance, seed, rho_values, out } => {
            let cfg = with_overrides(config.load()?, seed, None)?;
            let rhos = rho_values.unwrap_or_else(experiment::default_rho_values);
            let rows = match instance {
                Some(p) => {
                    let inst = formats::read_instance(&p)?;
                    experiment::sweep_instance(&inst, &cfg.solver.to_solver(), &rhos)?
                }
                None => experiment::run_rho_sweep(&cfg, &rhos)?,
            };
            emit(out.as_deref(), &experiment::sweep_to_csv(&rows)?)?;
        }
        Command::GenData { config, seed, out } => {
            let cfg = with_overrides(config.load()?, seed, None)?;
            let files = experiment::write_datasets(&cfg, &out)?;
            eprintln!("wrote {} files to {}", files.len(), out.display());
        }
        Command::GenInstance { config, seed, rho, out } => {
            let cfg = with_overrides(config.load()?, seed, rho)?;
            let inst = experiment::first_round_instance(&cfg)?;
            emit(out.as_deref(), &formats::instance_to_json(&inst))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
