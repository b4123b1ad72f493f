use std::fmt::Write as _;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::agent::GdmAgent;
use super::baselines::{baseline_greedy, baseline_random};
use super::buffer::ReplayBuffer;
use super::env::{encode_state, reward_fn, state_dim, ActionBox, RewardBreakdown, RewardOptions};
use super::TrainingConfig;
use crate::econ::{ContractMenu, PtParams, Scenario};
use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

/// Lattice resolution per axis of the greedy baseline.
pub const GREEDY_POINTS: usize = 41;

/// Independent random streams of a run. Each draw site gets its own stream
/// keyed by `(seed, purpose, episode, step)`, so adding or reordering draws
/// in one place never shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Scenario = 0,
    Init = 1,
    State = 2,
    Action = 3,
    Explore = 4,
    Update = 5,
    Baseline = 6,
}

pub fn stream_rng(seed: u64, purpose: Stream, episode: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | ((episode & 0xffff_ffff) << 24) | (step & 0xff_ffff));
    rng
}

/// Fixed per-pair channel and HMD parameters; each step draws fresh types
/// and type probabilities on top of them.
#[derive(Debug, Clone)]
pub struct ContractEnv {
    pub config: ScenarioConfig,
    pub base: Scenario,
    pub pt: PtParams,
    pub action_box: ActionBox,
    pub reward: RewardOptions,
}

/// One environment state: the scenario and the agent's view of it.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub scenario: Scenario,
    pub vector: Vec<f64>,
}

impl ContractEnv {
    /// Draws the fixed parameters from the scenario stream of `seed`.
    pub fn new(config: ScenarioConfig, pt: PtParams, action_box: ActionBox, reward: RewardOptions, seed: u64) -> Result<Self> {
        let base = config.sample(&mut stream_rng(seed, Stream::Scenario, 0, 0))?;
        Self::from_scenario(config, base, pt, action_box, reward)
    }

    pub fn from_scenario(
        config: ScenarioConfig,
        base: Scenario,
        pt: PtParams,
        action_box: ActionBox,
        reward: RewardOptions,
    ) -> Result<Self> {
        config.validate()?;
        pt.validate()?;
        action_box.validate()?;
        if base.dim() != config.dim() {
            return Err(Error::dims(format!("{:?} types", config.dim()), format!("{:?}", base.dim())));
        }
        Ok(ContractEnv { config, base, pt, action_box, reward })
    }

    pub fn dim(&self) -> (usize, usize) {
        self.config.dim()
    }

    pub fn state_dim(&self) -> usize {
        state_dim(self.dim())
    }

    pub fn action_dim(&self) -> usize {
        ActionBox::action_dim(self.dim())
    }

    pub fn encode(&self, scenario: &Scenario) -> Vec<f64> {
        encode_state(self.config.rsu_count, &scenario.grid, self.pt.u_ref)
    }

    /// The state at `(episode, step)` of the run seeded with `seed`.
    pub fn state_at(&self, seed: u64, episode: usize, step: usize) -> Result<EnvState> {
        let grid = self.config.sample_grid(&mut stream_rng(seed, Stream::State, episode as u64, step as u64))?;
        let scenario = self.base.with_grid(grid)?;
        let vector = self.encode(&scenario);
        Ok(EnvState { scenario, vector })
    }

    pub fn evaluate(&self, scenario: &Scenario, action: &[f64]) -> Result<(ContractMenu, RewardBreakdown)> {
        let menu = self.action_box.to_menu(action, self.dim())?;
        let reward = reward_fn(&menu, scenario, &self.pt, &self.reward)?;
        Ok((menu, reward))
    }
}

/// One training step. Losses are absent before the first update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub epoch: usize,
    pub step: usize,
    pub reward: f64,
    pub u_pt: f64,
    pub ic_slack_sum: f64,
    pub ir_slack_min: f64,
    /// Mean of the two critic losses.
    pub critic_loss: Option<f64>,
    pub actor_loss: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub rows: Vec<LogRow>,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

impl TrainLog {
    pub const HEADER: &'static str = "epoch,step,reward,u_pt,ic_slack_sum,ir_slack_min,critic_loss,actor_loss";

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `(epoch, mean reward)` for each epoch in the log.
    pub fn epoch_means(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64, usize)> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some((e, s, n)) if *e == r.epoch => {
                    *s += r.reward;
                    *n += 1;
                }
                _ => out.push((r.epoch, r.reward, 1)),
            }
        }
        out.into_iter().map(|(e, s, n)| (e, s / n as f64)).collect()
    }

    /// Mean reward over the last `epochs` epochs.
    pub fn final_mean(&self, epochs: usize) -> Option<f64> {
        let means = self.epoch_means();
        mean(means.iter().skip(means.len().saturating_sub(epochs)).map(|&(_, m)| m))
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut s = String::from(Self::HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.epoch,
                r.step,
                r.reward,
                r.u_pt,
                r.ic_slack_sum,
                r.ir_slack_min,
                opt(r.critic_loss),
                opt(r.actor_loss)
            );
        }
        s
    }
}

fn finite(what: &str, episode: usize, step: usize, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{what} is {v} at episode {episode}, step {step}")))
    }
}

/// Runs `cfg.episodes` episodes of `cfg.steps_per_episode` steps. Each step
/// proposes one menu for a fresh state, perturbs it with exploration noise,
/// stores the transition and, once `cfg.warmup` transitions are stored, takes
/// one critic step, one actor step and a soft target update.
pub fn train(agent: &mut GdmAgent, env: &ContractEnv, cfg: &TrainingConfig, seed: u64) -> Result<TrainLog> {
    cfg.validate()?;
    let (sd, ad) = (env.state_dim(), env.action_dim());
    if agent.state_dim() != sd || agent.action_dim() != ad {
        return Err(Error::dims(
            format!("agent for state {sd} and action {ad}"),
            format!("state {} and action {}", agent.state_dim(), agent.action_dim()),
        ));
    }
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity, sd, ad)?;
    let mut log = TrainLog::default();
    let steps = cfg.steps_per_episode;
    for e in 0..cfg.episodes {
        let mut state = env.state_at(seed, e, 0)?;
        for t in 0..steps {
            let s = Array2::from_shape_vec((1, sd), state.vector.clone()).expect("state width");
            let (e64, t64) = (e as u64, t as u64);
            let mut action = agent.generate(s.view(), &mut stream_rng(seed, Stream::Action, e64, t64))?.row(0).to_vec();
            let mut rng = stream_rng(seed, Stream::Explore, e64, t64);
            for a in &mut action {
                let z: f64 = rng.sample(StandardNormal);
                *a = (*a + cfg.exploration_noise * z).clamp(-1.0, 1.0);
            }
            let (_, rb) = env.evaluate(&state.scenario, &action)?;
            finite("reward", e, t, rb.total)?;
            let next = env.state_at(seed, e, t + 1)?;
            buffer.push(&state.vector, &action, rb.total, &next.vector, t + 1 == steps)?;

            let (mut critic_loss, mut actor_loss) = (None, None);
            if buffer.len() >= cfg.warmup.max(1) {
                let mut rng = stream_rng(seed, Stream::Update, e64, t64);
                let batch = buffer.sample(&mut rng, cfg.batch_size)?;
                let (l1, l2) = agent.critic_update(&batch, &mut rng)?;
                let la = agent.actor_update(&batch, &mut rng)?;
                agent.soft_update()?;
                finite("critic loss", e, t, l1.max(l2))?;
                finite("actor loss", e, t, la)?;
                if !agent.all_finite() {
                    return Err(Error::NonFinite(format!("network weights at episode {e}, step {t}")));
                }
                critic_loss = Some((l1 + l2) / 2.0);
                actor_loss = Some(la);
            }
            log.rows.push(LogRow {
                epoch: e,
                step: t,
                reward: rb.total,
                u_pt: rb.u_pt,
                ic_slack_sum: rb.ic_slack_sum,
                ir_slack_min: rb.ir_slack_min,
                critic_loss,
                actor_loss,
            });
            state = next;
        }
    }
    Ok(log)
}

/// Baseline rewards on the same state sequence a training run with `seed` sees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineRow {
    pub epoch: usize,
    pub step: usize,
    pub random: f64,
    pub greedy: f64,
}

pub fn baseline_trace(env: &ContractEnv, cfg: &TrainingConfig, seed: u64) -> Result<Vec<BaselineRow>> {
    let mut rows = Vec::with_capacity(cfg.episodes * cfg.steps_per_episode);
    for e in 0..cfg.episodes {
        for t in 0..cfg.steps_per_episode {
            let state = env.state_at(seed, e, t)?;
            let mut rng = stream_rng(seed, Stream::Baseline, e as u64, t as u64);
            let random = baseline_random(&state.scenario, &env.pt, &env.action_box, &env.reward, &mut rng)?;
            let greedy = baseline_greedy(&state.scenario, &env.pt, &env.action_box, &env.reward, GREEDY_POINTS)?;
            rows.push(BaselineRow { epoch: e, step: t, random: random.reward.total, greedy: greedy.reward.total });
        }
    }
    Ok(rows)
}

/// Mean random and greedy rewards over the last `epochs` epochs of a trace.
pub fn baseline_final_means(rows: &[BaselineRow], epochs: usize) -> Option<(f64, f64)> {
    let last = rows.last()?.epoch;
    let first = (last + 1).saturating_sub(epochs);
    let kept: Vec<&BaselineRow> = rows.iter().filter(|r| r.epoch >= first).collect();
    Some((mean(kept.iter().map(|r| r.random))?, mean(kept.iter().map(|r| r.greedy))?))
}
