use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use couette::harness::{self, ExperimentConfig, Overrides};
use couette::Error;

#[derive(Parser)]
#[command(name = "couette", version, about = "Stochastic micromodel of the Couette flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment config; missing fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Print the resolved config and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// kMC ensemble on the full strip.
    Simulate,
    /// Integrate the moment equations.
    Ode,
    /// Evolve the exact single-column chain (S <= 8).
    Exact,
    /// Closed-form stationary profile and regime.
    Stationary,
    /// Stationary profiles across S against the g_K limit.
    Sweep,
    /// Cross-validate the selected methods.
    Compare,
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let base = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let config = base.with_overrides(&Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        workers: cli.workers,
    });
    if cli.print_config {
        println!("{}", config.to_json_pretty());
        return config.validate().map(|_| true);
    }
    let files = match cli.command {
        Command::Simulate => harness::cmd_simulate(&config)?.files,
        Command::Ode => harness::cmd_ode(&config)?.files,
        Command::Exact => harness::cmd_exact(&config)?.files,
        Command::Stationary => harness::cmd_stationary(&config)?.files,
        Command::Sweep => harness::cmd_sweep(&config)?.files,
        Command::Compare => {
            let out = harness::cmd_compare(&config)?;
            print!("{}", out.result.table());
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            return Ok(out.result.pass);
        }
    };
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
