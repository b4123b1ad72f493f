use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use twin_contract::harness::{cmd_solve, cmd_sweep, cmd_train, cmd_verify, ExperimentConfig, RunOptions, SEED_ENV};
use twin_contract::Error;

#[derive(Parser)]
#[command(name = "twin-contract", version, about = "Contract design for AI-twin migration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults apply to missing keys or a missing file flag.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed, overriding the environment variable and the config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimise a menu on the search lattice.
    Solve(Common),
    /// Train the diffusion policy.
    Train(Common),
    /// Run the property suites and optionally check a menu CSV.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        menu: Option<PathBuf>,
    },
    /// Train across reference points and loss-aversion values.
    Sweep(Common),
}

fn options(c: &Common) -> Result<RunOptions, Error> {
    let config = match &c.config {
        Some(p) => ExperimentConfig::load(p).map_err(|e| match e {
            Error::Io { .. } => Error::Usage(e.to_string()),
            other => other,
        })?,
        None => ExperimentConfig::default(),
    };
    let env = std::env::var(SEED_ENV).ok();
    RunOptions::new(config, c.seed, env.as_deref(), c.out.clone())
}

fn run(cli: Cli) -> Result<Vec<String>, Error> {
    match cli.command {
        Command::Solve(c) => {
            let s = cmd_solve(&options(&c)?)?;
            println!("objective {} with {} violations", s.result.objective, s.report.violation_count());
            Ok(s.failures())
        }
        Command::Train(c) => {
            let t = cmd_train(&options(&c)?)?;
            if let Some((g, r, gr)) = t.final_means {
                println!("final reward {g} (random {r}, greedy {gr})");
            }
            Ok(Vec::new())
        }
        Command::Verify { common, menu } => {
            let v = cmd_verify(&options(&common)?, menu.as_deref())?;
            for s in &v.suites {
                println!("{} {} ({} cases)", if s.passed() { "ok" } else { "FAILED" }, s.name, s.cases);
            }
            Ok(v.failures())
        }
        Command::Sweep(c) => {
            let s = cmd_sweep(&options(&c)?)?;
            for p in ["u_ref", "kappa"] {
                for (v, g, _, _) in s.curve(p) {
                    println!("{p}={v}: final reward {g}");
                }
            }
            Ok(s.failures())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("error: {}", failures.join("; "));
            ExitCode::from(1)
        }
        Err(e @ (Error::Usage(_) | Error::Config(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
