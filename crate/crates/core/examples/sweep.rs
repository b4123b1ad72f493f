//! Sweep the reference point and loss aversion and print the seed-averaged
//! final reward curves. Writes CSVs under a temporary directory.

use twin_contract::harness::{cmd_sweep, ExperimentConfig, RunOptions};

fn main() -> twin_contract::Result<()> {
    let mut config = ExperimentConfig::default();
    config.training.episodes = 20;
    config.training.batch_size = 32;
    config.training.actor_lr = 1e-3;
    config.training.critic_lr = 1e-3;
    config.final_epochs = 5;
    config.sweep.seed_count = 2;

    let out = std::env::temp_dir().join("twin-contract-sweep");
    let summary = cmd_sweep(&RunOptions::new(config, Some(1), None, Some(out.clone()))?)?;
    for p in ["u_ref", "kappa"] {
        for (v, gdm, random, greedy) in summary.curve(p) {
            println!("{p} = {v:4}: gdm {gdm:8.2}  random {random:8.2}  greedy {greedy:8.2}");
        }
    }
    println!("outputs in {}", out.display());
    Ok(())
}
