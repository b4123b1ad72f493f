use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_distr::StandardNormal;

use super::buffer::Batch;
use super::schedule::NoiseSchedule;
use super::TrainingConfig;
use crate::error::{Error, Result};
use crate::nn::{Activation, Adam, GradTape, Gradients, Mlp};

/// Floor inside the log of the squashing entropy proxy.
const ENTROPY_EPS: f64 = 1e-6;

/// Gaussian draws consumed by one pass of the reverse chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainNoise {
    /// Starting point `x_K`.
    pub init: Array2<f64>,
    /// `steps[k - 1]` is the fresh noise of the reverse step from `k`; the
    /// entry for `k = 1` is never used.
    pub steps: Vec<Array2<f64>>,
}

fn normal_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

impl ChainNoise {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, batch: usize, action_dim: usize, steps: usize) -> Self {
        let init = normal_matrix(rng, batch, action_dim);
        let mut noise = vec![Array2::zeros((batch, action_dim))];
        noise.extend((1..steps).map(|_| normal_matrix(rng, batch, action_dim)));
        ChainNoise { init, steps: noise }
    }

    pub fn zeros(batch: usize, action_dim: usize, steps: usize) -> Self {
        ChainNoise { init: Array2::zeros((batch, action_dim)), steps: vec![Array2::zeros((batch, action_dim)); steps] }
    }
}

/// Diffusion actor, twin critics and their target copies.
///
/// The actor `eps(x_k, s, k)` predicts the noise in `x_k`; running the
/// reverse chain from Gaussian `x_K` and squashing `x_0` with `tanh` gives an
/// action in `[-1, 1]^A`. Critics score `[s, a]`.
#[derive(Debug, Clone)]
pub struct GdmAgent {
    pub actor: Mlp,
    pub actor_target: Mlp,
    pub critic1: Mlp,
    pub critic2: Mlp,
    pub critic1_target: Mlp,
    pub critic2_target: Mlp,
    pub schedule: NoiseSchedule,
    pub gamma: f64,
    pub tau: f64,
    pub entropy_weight: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    state_dim: usize,
    action_dim: usize,
    actor_opt: Adam,
    critic1_opt: Adam,
    critic2_opt: Adam,
}

impl GdmAgent {
    pub fn new<R: Rng + ?Sized>(cfg: &TrainingConfig, state_dim: usize, action_dim: usize, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let hidden = vec![cfg.hidden_width; cfg.hidden_layers];
        let widths = |input: usize, output: usize| [vec![input], hidden.clone(), vec![output]].concat();
        let actor = Mlp::new(rng, &widths(action_dim + state_dim + 1, action_dim), Activation::Relu, Activation::Identity)?;
        let critic1 = Mlp::new(rng, &widths(state_dim + action_dim, 1), Activation::Relu, Activation::Identity)?;
        let critic2 = Mlp::new(rng, &widths(state_dim + action_dim, 1), Activation::Relu, Activation::Identity)?;
        let schedule = NoiseSchedule::linear(cfg.denoise_steps, cfg.iota_min, cfg.iota_max)?;
        Ok(GdmAgent {
            actor_opt: Adam::new(&actor),
            critic1_opt: Adam::new(&critic1),
            critic2_opt: Adam::new(&critic2),
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor,
            critic1,
            critic2,
            schedule,
            gamma: cfg.gamma,
            tau: cfg.tau,
            entropy_weight: cfg.entropy_weight,
            actor_lr: cfg.actor_lr,
            critic_lr: cfg.critic_lr,
            state_dim,
            action_dim,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    /// Rebuilds optimiser state after the networks were replaced.
    pub fn reset_optimizers(&mut self) {
        self.actor_opt = Adam::new(&self.actor);
        self.critic1_opt = Adam::new(&self.critic1);
        self.critic2_opt = Adam::new(&self.critic2);
    }

    fn check_states(&self, s: &ArrayView2<f64>) -> Result<()> {
        if s.ncols() != self.state_dim {
            return Err(Error::dims(format!("state width {}", self.state_dim), s.ncols()));
        }
        Ok(())
    }

    fn actor_input(&self, x: &ArrayView2<f64>, s: &ArrayView2<f64>, k: usize) -> Array2<f64> {
        let t = Array2::from_elem((x.nrows(), 1), k as f64 / self.schedule.steps() as f64);
        concatenate![Axis(1), *x, *s, t]
    }

    fn critic_input(s: &ArrayView2<f64>, a: &ArrayView2<f64>) -> Array2<f64> {
        concatenate![Axis(1), *s, *a]
    }

    fn reverse(&self, x_k: &ArrayView2<f64>, eps: &Array2<f64>, k: usize, noise: &ArrayView2<f64>) -> Result<Array2<f64>> {
        let inv = 1.0 / self.schedule.lambda(k)?.sqrt();
        let c = self.schedule.eps_coeff(k)?;
        let sd = self.schedule.reverse_std(k)?;
        let mut out = x_k.to_owned() * inv - eps * c;
        if sd > 0.0 {
            out.scaled_add(sd, noise);
        }
        Ok(out)
    }

    /// `x_{k-1} = x_k / sqrt(lambda_k) - iota_k / sqrt(lambda_k (1 - lambda_hat_k)) eps(x_k, s, k) + sqrt(iota_k) noise`,
    /// with no noise term when `k = 1`.
    pub fn denoise_step(&self, x_k: ArrayView2<f64>, s: ArrayView2<f64>, k: usize, noise: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_states(&s)?;
        let eps = self.actor.forward(self.actor_input(&x_k, &s, k).view())?;
        self.reverse(&x_k, &eps, k, &noise)
    }

    fn run_chain(&self, net: &Mlp, s: &ArrayView2<f64>, noise: &ChainNoise) -> Result<Array2<f64>> {
        self.check_states(s)?;
        let mut x = noise.init.clone();
        for k in (1..=self.schedule.steps()).rev() {
            let eps = net.forward(self.actor_input(&x.view(), s, k).view())?;
            x = self.reverse(&x.view(), &eps, k, &noise.steps[k - 1].view())?;
        }
        Ok(x.mapv(f64::tanh))
    }

    /// Actions in `[-1, 1]` for each state row, from the given chain noise.
    pub fn generate_with(&self, s: ArrayView2<f64>, noise: &ChainNoise) -> Result<Array2<f64>> {
        self.run_chain(&self.actor, &s, noise)
    }

    pub fn generate<R: Rng + ?Sized>(&self, s: ArrayView2<f64>, rng: &mut R) -> Result<Array2<f64>> {
        let noise = ChainNoise::sample(rng, s.nrows(), self.action_dim, self.schedule.steps());
        self.generate_with(s, &noise)
    }

    /// Actor loss `-mean Q1(s, a(s)) - w * mean sum log(1 - a^2 + 1e-6)` and its
    /// parameter gradient, backpropagated through every reverse step.
    pub fn actor_objective(&self, s: ArrayView2<f64>, noise: &ChainNoise) -> Result<(f64, Gradients)> {
        self.check_states(&s)?;
        let batch = s.nrows() as f64;
        let steps = self.schedule.steps();
        let mut tapes: Vec<GradTape> = Vec::with_capacity(steps);
        let mut x = noise.init.clone();
        for k in (1..=steps).rev() {
            let (eps, tape) = self.actor.forward_taped(self.actor_input(&x.view(), &s, k).view())?;
            x = self.reverse(&x.view(), &eps, k, &noise.steps[k - 1].view())?;
            tapes.push(tape);
        }
        let a = x.mapv(f64::tanh);

        let (q, ctape) = self.critic1.forward_taped(Self::critic_input(&s, &a.view()).view())?;
        let entropy: f64 = a.iter().map(|v| (1.0 - v * v + ENTROPY_EPS).ln()).sum();
        let loss = -q.sum() / batch - self.entropy_weight * entropy / batch;

        let mut scratch = Gradients::zeros_like(&self.critic1);
        let up = Array2::from_elem((s.nrows(), 1), -1.0 / batch);
        let dinput = self.critic1.backward(&ctape, up.view(), &mut scratch)?;
        let mut g = dinput.slice(s![.., self.state_dim..]).to_owned();
        let w = self.entropy_weight / batch;
        // dL/dx_0 through tanh.
        Zip::from(&mut g).and(&a).for_each(|g, &a| {
            *g += w * 2.0 * a / (1.0 - a * a + ENTROPY_EPS);
            *g *= 1.0 - a * a;
        });

        let mut grads = Gradients::zeros_like(&self.actor);
        for (tape, k) in tapes.iter().rev().zip(1..=steps) {
            let c = self.schedule.eps_coeff(k)?;
            let up = &g * -c;
            let din = self.actor.backward(tape, up.view(), &mut grads)?;
            g = g / self.schedule.lambda(k)?.sqrt() + din.slice(s![.., ..self.action_dim]);
        }
        Ok((loss, grads))
    }

    pub fn actor_update<R: Rng + ?Sized>(&mut self, batch: &Batch, rng: &mut R) -> Result<f64> {
        let noise = ChainNoise::sample(rng, batch.len(), self.action_dim, self.schedule.steps());
        let (loss, grads) = self.actor_objective(batch.states.view(), &noise)?;
        self.actor_opt.step(&mut self.actor, &grads, self.actor_lr)?;
        Ok(loss)
    }

    /// `r + gamma (1 - d) min(Q1', Q2')` at the target actor's next action.
    /// Rows with `d = 1` skip the bootstrap entirely.
    pub fn critic_targets<R: Rng + ?Sized>(&self, batch: &Batch, rng: &mut R) -> Result<Array1<f64>> {
        let live: Vec<usize> = (0..batch.len()).filter(|&i| batch.dones[i] < 1.0).collect();
        let mut y = batch.rewards.clone();
        if live.is_empty() || self.gamma == 0.0 {
            return Ok(y);
        }
        let s_next = batch.next_states.select(Axis(0), &live);
        let noise = ChainNoise::sample(rng, live.len(), self.action_dim, self.schedule.steps());
        let a_next = self.run_chain(&self.actor_target, &s_next.view(), &noise)?;
        let input = Self::critic_input(&s_next.view(), &a_next.view());
        let q1 = self.critic1_target.forward(input.view())?;
        let q2 = self.critic2_target.forward(input.view())?;
        for (row, &i) in live.iter().enumerate() {
            y[i] += self.gamma * (1.0 - batch.dones[i]) * q1[(row, 0)].min(q2[(row, 0)]);
        }
        Ok(y)
    }

    /// Mean squared error of a critic against targets `y`.
    pub fn critic_loss(critic: &Mlp, batch: &Batch, y: &Array1<f64>) -> Result<f64> {
        let q = critic.forward(Self::critic_input(&batch.states.view(), &batch.actions.view()).view())?;
        Ok(q.column(0).iter().zip(y).map(|(q, y)| (q - y).powi(2)).sum::<f64>() / batch.len() as f64)
    }

    fn critic_step(critic: &mut Mlp, opt: &mut Adam, input: &Array2<f64>, y: &Array1<f64>, lr: f64) -> Result<f64> {
        let n = y.len() as f64;
        let (q, tape) = critic.forward_taped(input.view())?;
        let diff = &q.column(0) - y;
        let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;
        let up = diff.mapv(|d| 2.0 * d / n).insert_axis(Axis(1));
        let mut grads = Gradients::zeros_like(critic);
        critic.backward(&tape, up.view(), &mut grads)?;
        opt.step(critic, &grads, lr)?;
        Ok(loss)
    }

    /// One descent step on each critic. Returns their losses before the step.
    pub fn critic_update<R: Rng + ?Sized>(&mut self, batch: &Batch, rng: &mut R) -> Result<(f64, f64)> {
        if batch.is_empty() {
            return Err(Error::Domain("critic update needs a nonempty batch".into()));
        }
        let y = self.critic_targets(batch, rng)?;
        let input = Self::critic_input(&batch.states.view(), &batch.actions.view());
        let l1 = Self::critic_step(&mut self.critic1, &mut self.critic1_opt, &input, &y, self.critic_lr)?;
        let l2 = Self::critic_step(&mut self.critic2, &mut self.critic2_opt, &input, &y, self.critic_lr)?;
        Ok((l1, l2))
    }

    /// Moves every target network a fraction `tau` toward its online network.
    pub fn soft_update(&mut self) -> Result<()> {
        self.actor_target.soft_update_from(&self.actor, self.tau)?;
        self.critic1_target.soft_update_from(&self.critic1, self.tau)?;
        self.critic2_target.soft_update_from(&self.critic2, self.tau)
    }

    pub fn all_finite(&self) -> bool {
        [&self.actor, &self.actor_target, &self.critic1, &self.critic2, &self.critic1_target, &self.critic2_target]
            .iter()
            .all(|n| n.all_finite())
    }
}
