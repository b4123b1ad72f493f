use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::econ::{pt_aggregate, type_weights, ContractMenu, PtParams, Scenario, TypeGrid};
use crate::error::{Error, Result};
use crate::feasibility::own_utilities;

/// Normalisation of the state vector entries.
pub const RSU_COUNT_SCALE: f64 = 10.0;
pub const TYPE_COUNT_SCALE: f64 = 10.0;
pub const U_REF_SCALE: f64 = 20.0;
pub const COST_TYPE_SCALE: f64 = 200.0;

/// Length of the state vector for an `M x N` type grid.
pub fn state_dim((m, n): (usize, usize)) -> usize {
    4 + m * n + m + n
}

/// Agent observation, in order: `L/10, M/10, N/10, U_ref/20`, then
/// `Q * MN` row-major, then `theta/200`, then `sigma/200`.
pub fn encode_state(rsu_count: usize, grid: &TypeGrid, u_ref: f64) -> Vec<f64> {
    let (m, n) = grid.dim();
    let mut s = Vec::with_capacity(state_dim((m, n)));
    s.push(rsu_count as f64 / RSU_COUNT_SCALE);
    s.push(m as f64 / TYPE_COUNT_SCALE);
    s.push(n as f64 / TYPE_COUNT_SCALE);
    s.push(u_ref / U_REF_SCALE);
    s.extend(grid.q().iter().map(|q| q * (m * n) as f64));
    s.extend(grid.theta().iter().map(|t| t / COST_TYPE_SCALE));
    s.extend(grid.sigma().iter().map(|t| t / COST_TYPE_SCALE));
    s
}

/// Bounds the actor's `[-1, 1]` outputs are mapped onto.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionBox {
    pub b: [f64; 2],
    pub f: [f64; 2],
    pub r: [f64; 2],
}

impl ActionBox {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("b", self.b), ("f", self.f), ("r", self.r)] {
            if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::Config(format!("action bounds for {name} must satisfy 0 <= min <= max")));
            }
        }
        Ok(())
    }

    /// Action length `3MN`.
    pub fn action_dim((m, n): (usize, usize)) -> usize {
        3 * m * n
    }

    fn ranges(&self) -> [[f64; 2]; 3] {
        [self.b, self.f, self.r]
    }

    /// Maps `[b row-major, f row-major, R row-major]` from `[-1, 1]` onto the
    /// box. Entries outside `[-1, 1]` are clamped first.
    pub fn to_menu(&self, action: &[f64], dim: (usize, usize)) -> Result<ContractMenu> {
        let k = dim.0 * dim.1;
        if action.len() != 3 * k {
            return Err(Error::dims(3 * k, action.len()));
        }
        let mut grids = self.ranges().into_iter().enumerate().map(|(j, [lo, hi])| {
            let v = action[j * k..(j + 1) * k].iter().map(|a| lo + (a.clamp(-1.0, 1.0) + 1.0) / 2.0 * (hi - lo)).collect();
            Array2::from_shape_vec(dim, v).expect("k entries")
        });
        let (b, f, r) = (grids.next().unwrap(), grids.next().unwrap(), grids.next().unwrap());
        ContractMenu::from_grids(&b, &f, &r)
    }

    /// Inverse of [`ActionBox::to_menu`]. Degenerate ranges map to 0.
    pub fn to_action(&self, menu: &ContractMenu) -> Vec<f64> {
        let grids = [menu.bandwidth(), menu.frequency(), menu.rewards()];
        grids
            .iter()
            .zip(self.ranges())
            .flat_map(|(g, [lo, hi])| {
                g.iter()
                    .map(move |v| if hi > lo { 2.0 * (v - lo) / (hi - lo) - 1.0 } else { 0.0 })
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

/// Shaping of the incentive-compatibility term in the reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardOptions {
    /// Multiplier on the summed IC slack.
    pub ic_weight: f64,
    /// Count only violated IC constraints (slack clipped above at 0).
    pub clip_positive_slack: bool,
}

impl Default for RewardOptions {
    fn default() -> Self {
        RewardOptions { ic_weight: 1.0, clip_positive_slack: false }
    }
}

/// Reward and the terms it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardBreakdown {
    pub total: f64,
    /// Prospect-theory utility of the AV.
    pub u_pt: f64,
    /// Sum of RSU utilities under their own items.
    pub sum_v: f64,
    /// `sum over (m,n) != (i,j) of V_{m,n}^{m,n} - V_{m,n}^{i,j}`, after clipping if enabled.
    pub ic_slack_sum: f64,
    /// Smallest own-item RSU utility; negative means some type's IR fails.
    pub ir_slack_min: f64,
}

/// `U_PT + sum V + w * sum of IC slacks` for a proposed menu.
pub fn reward_fn(menu: &ContractMenu, scenario: &Scenario, pt: &PtParams, opts: &RewardOptions) -> Result<RewardBreakdown> {
    let grid = &scenario.grid;
    let av = scenario.av_utilities(menu)?;
    let u_pt = pt_aggregate(&av, &type_weights(grid, pt)?, pt);
    let own = own_utilities(menu, grid)?;
    let (rows, cols) = grid.dim();
    let (th, sg) = (grid.theta(), grid.sigma());
    let items = menu.items();
    let mut slack_sum = 0.0;
    for m in 0..rows {
        for n in 0..cols {
            for i in 0..rows {
                for j in 0..cols {
                    if (i, j) == (m, n) {
                        continue;
                    }
                    let it = &items[(i, j)];
                    let cross = it.r - it.b * it.b / th[m] - it.f * it.f / sg[n];
                    let s = own[(m, n)] - cross;
                    slack_sum += if opts.clip_positive_slack { s.min(0.0) } else { s };
                }
            }
        }
    }
    let sum_v = own.sum();
    Ok(RewardBreakdown {
        total: u_pt + sum_v + opts.ic_weight * slack_sum,
        u_pt,
        sum_v,
        ic_slack_sum: slack_sum,
        ir_slack_min: own.iter().copied().fold(f64::INFINITY, f64::min),
    })
}
