//! Compare backpropagated gradients with central differences, for a plain
//! network and for the actor objective through the denoising chain.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twin_contract::gdm::{ChainNoise, GdmAgent, TrainingConfig};
use twin_contract::nn::{gradient_check, relative_error, Activation, Mlp};

fn main() -> twin_contract::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let net = Mlp::new(&mut rng, &[4, 16, 16, 2], Activation::Tanh, Activation::Identity)?;
    let x = Array2::from_shape_simple_fn((5, 4), || rng.random_range(-1.0..1.0));
    let up = Array2::from_shape_simple_fn((5, 2), || rng.random_range(-1.0..1.0));
    let check = gradient_check(&net, x.view(), up.view(), 1e-5, 1e-6)?;
    println!("network: {} parameters, max relative error {:.2e}", net.param_count(), check.max_rel());

    let cfg = TrainingConfig { hidden_width: 8, hidden_layers: 1, ..Default::default() };
    let agent = GdmAgent::new(&cfg, 2, 3, &mut rng)?;
    let states = Array2::from_shape_simple_fn((4, 2), || rng.random_range(-1.0..1.0));
    let noise = ChainNoise::sample(&mut rng, 4, 3, cfg.denoise_steps);
    let (_, grads) = agent.actor_objective(states.view(), &noise)?;
    let base = agent.actor.params_flat();
    let h = 1e-6;
    let mut worst = 0.0f64;
    for (i, g) in grads.flat().into_iter().enumerate() {
        let loss = |d: f64| -> twin_contract::Result<f64> {
            let mut a = agent.clone();
            let mut p = base.clone();
            p[i] += d;
            a.actor.set_params_flat(&p)?;
            Ok(a.actor_objective(states.view(), &noise)?.0)
        };
        worst = worst.max(relative_error(g, (loss(h)? - loss(-h)?) / (2.0 * h), 1e-6));
    }
    println!("actor chain: {} parameters, max relative error {worst:.2e}", base.len());
    Ok(())
}
