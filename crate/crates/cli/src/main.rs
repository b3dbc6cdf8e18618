use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use ks_cli::{commands, InitialData, RunConfig};

#[derive(Parser)]
#[command(name = "ks", version, about = "Kuramoto-Sivashinsky simulations and stripe analysis")]
struct Cli {
    /// Run config file; defaults describe the L = 32 pi reference run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate and write the trajectory file plus a heatmap.
    Simulate {
        /// Start from u = 0 instead of the seeded random field.
        #[arg(long)]
        zero: bool,
        /// Also write trajectory.csv with one (t, x, u) row per sample.
        #[arg(long)]
        csv: bool,
    },
    /// Track stripes in a saved trajectory; writes events, density and overlays.
    Stripes {
        /// Trajectory file (default: <out>/trajectory.kstraj).
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Compare single-mode growth with the linear rates.
    LinearCheck,
    /// Stripe density over the configured lengths and seeds, in parallel.
    DensitySweep {
        /// Lengths in units of pi, e.g. `16,32,64`.
        #[arg(long, value_delimiter = ',')]
        lengths_pi: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Leading Lyapunov exponent.
    Lyapunov,
    /// Print the linear mode table as CSV.
    Modes {
        /// Every mode n > 0 instead of the unstable ones.
        #[arg(long)]
        all: bool,
    },
    /// Print the effective config.
    Config,
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Simulate { zero, csv } => {
            if zero {
                cfg.initial = InitialData::Zero;
            }
            let r = commands::simulate(&cfg, csv)?;
            println!(
                "{} snapshots -> {}, {}",
                r.trajectory.len(),
                r.trajectory_path.display(),
                r.heatmap_path.display()
            );
        }
        Command::Stripes { trajectory } => {
            let path = trajectory.unwrap_or_else(|| cfg.path(commands::TRAJECTORY_FILE));
            let r = commands::stripes(&cfg, &path)?;
            let s = &r.tracking.settled;
            println!("density = {}", r.density.density);
            println!("mean_count = {}", r.density.mean_count);
            println!(
                "after t = {}: births {} deaths {} merges {} splits {}",
                cfg.t_transient, s.births, s.deaths, s.merges, s.splits
            );
        }
        Command::LinearCheck => {
            let rows = commands::linear_check(&cfg)?;
            let bad: Vec<_> = rows.iter().filter(|r| !r.within_tolerance()).collect();
            println!("{} modes checked, {} outside tolerance", rows.len(), bad.len());
            for r in &bad {
                eprintln!("n = {}: theory {} measured {}", r.n, r.theory, r.measured);
            }
            if !bad.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::DensitySweep { lengths_pi, seeds } => {
            if let Some(l) = lengths_pi {
                cfg.sweep_lengths_pi = l;
            }
            if let Some(s) = seeds {
                cfg.sweep_seeds = s;
            }
            cfg.validate()?;
            let r = commands::density_sweep(&cfg, cli.jobs)?;
            for s in &r.summary {
                println!(
                    "L = {}: density {} +- {} ({} runs)",
                    s.length, s.mean_density, s.std_density, s.runs
                );
            }
            for f in &r.failures {
                eprintln!("L = {} seed {}: FAILED: {}", f.length, f.seed, f.error);
            }
            if !r.failures.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Lyapunov => {
            let e = commands::lyapunov(&cfg)?;
            println!("lambda1 = {} +- {} ({} renormalizations)", e.lambda1, e.std_error, e.n_renorms);
        }
        Command::Modes { all } => {
            let csv = commands::modes(&cfg, all)?;
            std::io::stdout().write_all(csv.as_str().as_bytes()).context("writing stdout")?;
        }
        Command::Config => print!("{}", cfg.to_text()),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
