//! Diffusion-policy contract design: noise schedule, state and action
//! encodings, reward, replay buffer, the actor-critic agent, its training
//! loop and two reference baselines.

mod agent;
mod baselines;
mod buffer;
mod env;
mod schedule;
mod train;

pub use agent::{ChainNoise, GdmAgent};
pub use baselines::{baseline_greedy, baseline_random, greedy_menu, BaselineOutcome};
pub use buffer::{Batch, ReplayBuffer};
pub use env::{
    encode_state, reward_fn, state_dim, ActionBox, RewardBreakdown, RewardOptions, COST_TYPE_SCALE, RSU_COUNT_SCALE,
    TYPE_COUNT_SCALE, U_REF_SCALE,
};
pub use schedule::{forward_diffuse, forward_step, NoiseSchedule};
pub use train::{
    baseline_final_means, baseline_trace, stream_rng, train, BaselineRow, ContractEnv, EnvState, LogRow, Stream, TrainLog,
    GREEDY_POINTS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    /// Number of episodes `Z`.
    pub episodes: usize,
    /// Steps per episode `T`.
    pub steps_per_episode: usize,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Transitions stored before the first network update.
    pub warmup: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Discount factor.
    pub gamma: f64,
    /// Soft target update rate.
    pub tau: f64,
    /// Standard deviation of the Gaussian noise added to actions while training.
    pub exploration_noise: f64,
    /// Number of diffusion steps `K`.
    pub denoise_steps: usize,
    pub iota_min: f64,
    pub iota_max: f64,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    /// Weight on the squashing entropy proxy in the actor loss.
    pub entropy_weight: f64,
    /// Bounds on the reward `R` the actor can offer.
    pub reward_range: [f64; 2],
    pub reward: RewardOptions,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            episodes: 200,
            steps_per_episode: 5,
            batch_size: 512,
            buffer_capacity: 1_000_000,
            warmup: 64,
            actor_lr: 2e-7,
            critic_lr: 2e-7,
            gamma: 1.0,
            tau: 0.005,
            exploration_noise: 0.01,
            denoise_steps: 3,
            iota_min: 1e-4,
            iota_max: 0.02,
            hidden_width: 128,
            hidden_layers: 3,
            entropy_weight: 0.0,
            reward_range: [0.0, 60.0],
            reward: RewardOptions::default(),
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.steps_per_episode == 0 || self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("steps_per_episode, batch_size and buffer_capacity must be positive");
        }
        if self.denoise_steps == 0 || self.hidden_width == 0 {
            return bad("denoise_steps and hidden_width must be positive");
        }
        if !(self.iota_min > 0.0 && self.iota_min <= self.iota_max && self.iota_max < 1.0) {
            return bad("noise levels must satisfy 0 < iota_min <= iota_max < 1");
        }
        for (name, v) in [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
            ("gamma", self.gamma),
            ("exploration_noise", self.exploration_noise),
            ("entropy_weight", self.entropy_weight),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and nonnegative")));
            }
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau must lie in [0, 1]");
        }
        let [lo, hi] = self.reward_range;
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return bad("reward_range must satisfy 0 <= min <= max");
        }
        if !self.reward.ic_weight.is_finite() {
            return bad("reward.ic_weight must be finite");
        }
        Ok(())
    }

    /// Action box for these rewards and the given resource bounds.
    pub fn action_box(&self, b_range: [f64; 2], f_range: [f64; 2]) -> Result<ActionBox> {
        let bx = ActionBox { b: b_range, f: f_range, r: self.reward_range };
        bx.validate()?;
        Ok(bx)
    }
}

#[cfg(test)]
mod tests;
