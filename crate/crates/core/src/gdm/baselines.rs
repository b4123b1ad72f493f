use ndarray::Array2;
use rand::Rng;

use super::env::{reward_fn, ActionBox, RewardBreakdown, RewardOptions};
use crate::econ::{ContractMenu, PtParams, Scenario};
use crate::error::{Error, Result};

/// A baseline menu and its reward.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutcome {
    pub menu: ContractMenu,
    pub reward: RewardBreakdown,
}

fn draw<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Every `b`, `f` and `R` drawn independently and uniformly from the box.
pub fn baseline_random<R: Rng + ?Sized>(
    scenario: &Scenario,
    pt: &PtParams,
    action_box: &ActionBox,
    opts: &RewardOptions,
    rng: &mut R,
) -> Result<BaselineOutcome> {
    action_box.validate()?;
    let dim = scenario.dim();
    let b = Array2::from_shape_simple_fn(dim, || draw(rng, action_box.b));
    let f = Array2::from_shape_simple_fn(dim, || draw(rng, action_box.f));
    let r = Array2::from_shape_simple_fn(dim, || draw(rng, action_box.r));
    let menu = ContractMenu::from_grids(&b, &f, &r)?;
    let reward = reward_fn(&menu, scenario, pt, opts)?;
    Ok(BaselineOutcome { menu, reward })
}

/// For each type separately, the `(b, f)` on a `points x points` lattice over
/// the box maximising `alpha M - beta D - R` with `R` at that type's IR bound
/// `b^2/theta + f^2/sigma`. IC is ignored. Ties keep the smallest `(b, f)`.
pub fn greedy_menu(scenario: &Scenario, action_box: &ActionBox, points: usize) -> Result<ContractMenu> {
    action_box.validate()?;
    if points == 0 {
        return Err(Error::Config("greedy lattice needs at least one point".into()));
    }
    let axis = |[lo, hi]: [f64; 2]| -> Vec<f64> {
        if points == 1 || lo == hi {
            vec![lo]
        } else {
            (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
        }
    };
    let (bs, fs) = (axis(action_box.b), axis(action_box.f));
    let dim = scenario.dim();
    let (th, sg) = (scenario.grid.theta(), scenario.grid.sigma());
    let mut b = Array2::zeros(dim);
    let mut f = Array2::zeros(dim);
    let mut r = Array2::zeros(dim);
    for m in 0..dim.0 {
        for n in 0..dim.1 {
            let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
            for &bv in &bs {
                for &fv in &fs {
                    let rv = bv * bv / th[m] + fv * fv / sg[n];
                    let u = scenario.service_value(m, n, bv, fv)? - rv;
                    if u > best.0 {
                        best = (u, bv, fv, rv);
                    }
                }
            }
            (b[(m, n)], f[(m, n)], r[(m, n)]) = (best.1, best.2, best.3);
        }
    }
    ContractMenu::from_grids(&b, &f, &r)
}

/// [`greedy_menu`] scored with the training reward.
pub fn baseline_greedy(
    scenario: &Scenario,
    pt: &PtParams,
    action_box: &ActionBox,
    opts: &RewardOptions,
    points: usize,
) -> Result<BaselineOutcome> {
    let menu = greedy_menu(scenario, action_box, points)?;
    let reward = reward_fn(&menu, scenario, pt, opts)?;
    Ok(BaselineOutcome { menu, reward })
}
