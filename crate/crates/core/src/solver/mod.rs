//! Optimal contract menus by exhaustive search over monotone resource grids,
//! each candidate completed with its minimal feasible rewards.
//!
//! The AV's objective is nonincreasing in every reward, so for fixed
//! resources the componentwise-minimal feasible reward vector is optimal.

mod enumerate;
mod io;
mod refine;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::econ::{pt_value, type_weights, ContractMenu, PtParams, Scenario};
use crate::error::{Error, Result};
use crate::feasibility::kernel::{self, Costs};
use crate::feasibility::{check_full, own_utilities, SLACK_TOL};

pub use io::read_menu_csv;
pub use refine::refine_local;

/// Search box and resolution for [`solve_grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSpec {
    /// Bandwidth bounds `[b_min, b_max]`.
    pub b_range: [f64; 2],
    /// Compute-frequency bounds `[f_min, f_max]`.
    pub f_range: [f64; 2],
    /// Levels per resource axis, endpoints included.
    pub grid_points: usize,
    /// Sweep cap for [`refine_local`].
    pub refine_iters: usize,
    /// Largest number of (bandwidth, frequency) candidate pairs to score.
    pub max_candidates: u64,
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec {
            b_range: [0.0, 80.0],
            f_range: [0.0, 40.0],
            grid_points: 9,
            refine_iters: 200,
            max_candidates: 200_000_000,
        }
    }
}

impl SearchSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("b_range", self.b_range), ("f_range", self.f_range)] {
            if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
                return Err(Error::Config(format!("{name} must satisfy 0 <= min < max, got [{lo}, {hi}]")));
            }
        }
        if self.grid_points < 2 || self.grid_points > u16::MAX as usize {
            return Err(Error::Config(format!("grid_points must be in [2, 65535], got {}", self.grid_points)));
        }
        Ok(())
    }

    fn levels(&self, [lo, hi]: [f64; 2]) -> Vec<f64> {
        let g = self.grid_points;
        (0..g).map(|i| lo + (hi - lo) * i as f64 / (g - 1) as f64).collect()
    }

    /// Number of candidate pairs [`solve_grid`] would score for `dim` types.
    pub fn candidate_count(&self, dim: (usize, usize)) -> u128 {
        let per_resource = enumerate::count(self.grid_points, dim.0, dim.1);
        per_resource.saturating_mul(per_resource)
    }
}

/// An optimised menu with its per-type breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub menu: ContractMenu,
    /// RSU utility of each type under its own item.
    pub rsu_utilities: Array2<f64>,
    /// AV utility from each type's item.
    pub av_utilities: Array2<f64>,
    /// Each type's weighted prospect value; these sum to `objective`.
    pub contributions: Array2<f64>,
    /// Prospect-theory expected utility of the AV.
    pub objective: f64,
    pub feasible: bool,
    /// Candidates scored to reach this menu.
    pub evaluations: u64,
}

impl SolveResult {
    /// Scores `menu` from scratch with the public utility and constraint code.
    pub fn evaluate(menu: ContractMenu, scenario: &Scenario, pt: &PtParams, evaluations: u64) -> Result<Self> {
        let av = scenario.av_utilities(&menu)?;
        let weights = type_weights(&scenario.grid, pt)?;
        let contributions = Array2::from_shape_fn(av.dim(), |t| weights[t] * pt_value(av[t], pt));
        let feasible = check_full(&menu, &scenario.grid)?.feasible();
        Ok(SolveResult {
            rsu_utilities: own_utilities(&menu, &scenario.grid)?,
            objective: contributions.sum(),
            av_utilities: av,
            contributions,
            menu,
            feasible,
            evaluations,
        })
    }

    /// Per-type rows plus one summary row, columns
    /// `kind,m,n,b,f,r,v,u_contribution,objective,evaluations`. Indices are one-based.
    pub fn to_csv(&self) -> String {
        io::result_csv(self)
    }
}

/// Completes resources with their minimal feasible rewards.
pub(crate) struct Completer {
    costs: Costs,
    v: Vec<f64>,
}

impl Completer {
    pub fn new(scenario: &Scenario) -> Self {
        let costs = Costs::new(scenario.grid.theta(), scenario.grid.sigma());
        let v = vec![0.0; costs.len()];
        Completer { costs, v }
    }

    /// Writes minimal rewards into `r`; false when no rewards satisfy IR and IC.
    ///
    /// Tries the local recurrence first and keeps it when it is globally
    /// incentive compatible; otherwise runs the full relaxation.
    pub fn complete(&mut self, bsq: &[f64], fsq: &[f64], r: &mut [f64]) -> bool {
        kernel::recurrence(&self.costs, bsq, fsq, &mut self.v);
        for (t, rt) in r.iter_mut().enumerate() {
            *rt = self.v[t] + self.costs.cost(t, bsq[t], fsq[t]);
        }
        if kernel::ic_holds(&self.costs, bsq, fsq, r, SLACK_TOL) {
            return true;
        }
        kernel::minimal_rewards(&self.costs, bsq, fsq, r).is_some()
    }
}

fn prefer(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Best menu whose bandwidth and frequency grids both grow weakly along
/// each type axis, over `grid_points` levels per resource.
///
/// Candidates are scored in parallel; ties go to the first candidate in
/// enumeration order, so the result does not depend on the thread count.
pub fn solve_grid(spec: &SearchSpec, scenario: &Scenario, pt: &PtParams) -> Result<SolveResult> {
    spec.validate()?;
    pt.validate()?;
    let (rows, cols) = scenario.dim();
    let k = rows * cols;
    let total = spec.candidate_count((rows, cols));
    if total > spec.max_candidates as u128 {
        return Err(Error::SearchTooLarge { candidates: total, cap: spec.max_candidates as u128 });
    }

    let g = spec.grid_points;
    let b_levels = spec.levels(spec.b_range);
    let f_levels = spec.levels(spec.f_range);
    let cands = enumerate::enumerate(g, rows, cols);

    // service[t][ib * g + if] = alpha M - beta D for type t.
    let mut service = vec![0.0; k * g * g];
    for t in 0..k {
        for (ib, &b) in b_levels.iter().enumerate() {
            for (jf, &f) in f_levels.iter().enumerate() {
                service[t * g * g + ib * g + jf] = scenario.service_value(t / cols, t % cols, b, f)?;
            }
        }
    }
    let weights = type_weights(&scenario.grid, pt)?;
    let weights = weights.as_slice().expect("standard layout");
    let squares = |levels: &[f64], c: &[u16]| -> Vec<f64> { c.iter().map(|&l| levels[l as usize].powi(2)).collect() };
    let b_sq: Vec<Vec<f64>> = cands.iter().map(|c| squares(&b_levels, c)).collect();
    let f_sq: Vec<Vec<f64>> = cands.iter().map(|c| squares(&f_levels, c)).collect();
    let nc = cands.len();

    let (best_obj, best_idx) = (0..nc)
        .into_par_iter()
        .map_init(
            || (Completer::new(scenario), vec![0.0; k]),
            |(completer, r), ib| {
                let mut best = (f64::NEG_INFINITY, usize::MAX);
                for jf in 0..nc {
                    if !completer.complete(&b_sq[ib], &f_sq[jf], r) {
                        continue;
                    }
                    let mut obj = 0.0;
                    for t in 0..k {
                        let a = service[t * g * g + cands[ib][t] as usize * g + cands[jf][t] as usize];
                        obj += weights[t] * pt_value(a - r[t], pt);
                    }
                    best = prefer(best, (obj, ib * nc + jf));
                }
                best
            },
        )
        .reduce(|| (f64::NEG_INFINITY, usize::MAX), prefer);
    if best_idx == usize::MAX || !best_obj.is_finite() {
        return Err(Error::Invariant("no monotone candidate admitted feasible rewards".into()));
    }

    let (ib, jf) = (best_idx / nc, best_idx % nc);
    let mut r = vec![0.0; k];
    Completer::new(scenario).complete(&b_sq[ib], &f_sq[jf], &mut r);
    let pick = |levels: &[f64], c: &[u16]| {
        Array2::from_shape_vec((rows, cols), c.iter().map(|&l| levels[l as usize]).collect()).expect("k entries")
    };
    let menu = ContractMenu::from_grids(
        &pick(&b_levels, &cands[ib]),
        &pick(&f_levels, &cands[jf]),
        &Array2::from_shape_vec((rows, cols), r).expect("k entries"),
    )?;
    SolveResult::evaluate(menu, scenario, pt, (nc * nc) as u64)
}
