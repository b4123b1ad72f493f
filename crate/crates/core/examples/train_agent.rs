//! Train the diffusion policy on a short run and compare it with the random
//! and greedy baselines.

use twin_contract::harness::{train_run, ExperimentConfig};

fn main() -> twin_contract::Result<()> {
    let mut config = ExperimentConfig::default();
    config.training.episodes = 40;
    config.training.batch_size = 64;
    config.training.actor_lr = 1e-3;
    config.training.critic_lr = 1e-3;
    config.final_epochs = 10;

    let run = train_run(&config, 1)?;
    for (epoch, gdm, random, greedy) in run.epoch_table().iter().step_by(5) {
        println!("epoch {epoch:3}: gdm {gdm:8.2}  random {random:8.2}  greedy {greedy:8.2}");
    }
    if let Some((g, r, gr)) = run.final_means(config.final_epochs) {
        println!("final {} epochs: gdm {g:.2}, random {r:.2}, greedy {gr:.2}", config.final_epochs);
    }
    let (_, menu) = run.final_menu(1, config.training.episodes)?;
    println!("agent menu objective {:.4}, feasible {}", menu.objective, menu.feasible);
    Ok(())
}
