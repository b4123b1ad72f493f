use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};

/// A minibatch of transitions, one row per transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub states: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_states: Array2<f64>,
    /// 1 when the transition ends an episode.
    pub dones: Array1<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Fixed-capacity transition store that overwrites its oldest entry when full.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    state_dim: usize,
    action_dim: usize,
    states: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    next_states: Vec<f64>,
    dones: Vec<f64>,
    head: usize,
    len: usize,
}

impl ReplayBuffer {
    /// Storage grows on demand up to `capacity` transitions.
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay buffer capacity must be positive".into()));
        }
        Ok(ReplayBuffer {
            capacity,
            state_dim,
            action_dim,
            states: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_states: Vec::new(),
            dones: Vec::new(),
            head: 0,
            len: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, state: &[f64], action: &[f64], reward: f64, next_state: &[f64], done: bool) -> Result<()> {
        if state.len() != self.state_dim || next_state.len() != self.state_dim {
            return Err(Error::dims(self.state_dim, state.len().max(next_state.len())));
        }
        if action.len() != self.action_dim {
            return Err(Error::dims(self.action_dim, action.len()));
        }
        let d = if done { 1.0 } else { 0.0 };
        if self.len < self.capacity {
            self.states.extend_from_slice(state);
            self.actions.extend_from_slice(action);
            self.rewards.push(reward);
            self.next_states.extend_from_slice(next_state);
            self.dones.push(d);
            self.len += 1;
        } else {
            let (s, a, h) = (self.state_dim, self.action_dim, self.head);
            self.states[h * s..(h + 1) * s].copy_from_slice(state);
            self.actions[h * a..(h + 1) * a].copy_from_slice(action);
            self.rewards[h] = reward;
            self.next_states[h * s..(h + 1) * s].copy_from_slice(next_state);
            self.dones[h] = d;
        }
        self.head = (self.head + 1) % self.capacity;
        Ok(())
    }

    /// Reward stored in slot `i`, in insertion order among live entries.
    pub fn reward_at(&self, i: usize) -> Option<f64> {
        if i >= self.len {
            return None;
        }
        let oldest = if self.len < self.capacity { 0 } else { self.head };
        Some(self.rewards[(oldest + i) % self.capacity])
    }

    /// `size` transitions drawn uniformly with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, size: usize) -> Result<Batch> {
        if self.is_empty() || size == 0 {
            return Err(Error::Domain("cannot sample an empty minibatch".into()));
        }
        let idx: Vec<usize> = (0..size).map(|_| rng.random_range(0..self.len)).collect();
        let rows = |src: &[f64], width: usize| {
            Array2::from_shape_fn((size, width), |(r, c)| src[idx[r] * width + c])
        };
        Ok(Batch {
            states: rows(&self.states, self.state_dim),
            actions: rows(&self.actions, self.action_dim),
            rewards: idx.iter().map(|&i| self.rewards[i]).collect(),
            next_states: rows(&self.next_states, self.state_dim),
            dones: idx.iter().map(|&i| self.dones[i]).collect(),
        })
    }
}
