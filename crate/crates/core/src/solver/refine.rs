use ndarray::Array2;

use super::{Completer, SearchSpec, SolveResult};
use crate::econ::{pt_value, type_weights, ContractMenu, PtParams, Scenario};
use crate::error::{Error, Result};

struct Objective<'a> {
    scenario: &'a Scenario,
    pt: &'a PtParams,
    weights: Vec<f64>,
    completer: Completer,
    r: Vec<f64>,
    evaluations: u64,
}

impl Objective<'_> {
    /// Objective of resources `x = [b..., f...]` completed with minimal
    /// rewards, or `None` when no feasible rewards exist.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        self.evaluations += 1;
        let k = self.weights.len();
        let (b, f) = x.split_at(k);
        let bsq: Vec<f64> = b.iter().map(|v| v * v).collect();
        let fsq: Vec<f64> = f.iter().map(|v| v * v).collect();
        if !self.completer.complete(&bsq, &fsq, &mut self.r) {
            return Ok(None);
        }
        let cols = self.scenario.dim().1;
        let mut obj = 0.0;
        for t in 0..k {
            let a = self.scenario.service_value(t / cols, t % cols, b[t], f[t])?;
            obj += self.weights[t] * pt_value(a - self.r[t], self.pt);
        }
        Ok(Some(obj))
    }
}

/// Whether coordinate `i` of `x` still respects axis monotonicity.
fn locally_monotone(x: &[f64], i: usize, rows: usize, cols: usize) -> bool {
    let k = rows * cols;
    let (base, t) = (i / k * k, i % k);
    let (m, n) = (t / cols, t % cols);
    let at = |m: usize, n: usize| x[base + m * cols + n];
    let v = at(m, n);
    (m == 0 || at(m - 1, n) <= v)
        && (n == 0 || at(m, n - 1) <= v)
        && (m + 1 == rows || v <= at(m + 1, n))
        && (n + 1 == cols || v <= at(m, n + 1))
}

/// Derivative-free pattern search around a feasible menu.
///
/// Each sweep tries moving every bandwidth and frequency entry up and down by
/// the current step, keeping resources inside the search box and monotone
/// along both type axes, and completing rewards minimally. The step starts
/// at half the grid spacing and halves after a sweep without improvement,
/// down to `1e-6` of the box width. The objective never decreases.
pub fn refine_local(result: &SolveResult, spec: &SearchSpec, scenario: &Scenario, pt: &PtParams) -> Result<SolveResult> {
    spec.validate()?;
    if !result.feasible {
        return Err(Error::Domain("refine_local needs a feasible starting menu".into()));
    }
    let (rows, cols) = scenario.dim();
    result.menu.expect_dims(&scenario.grid)?;
    let k = rows * cols;
    let mut obj_fn = Objective {
        scenario,
        pt,
        weights: type_weights(&scenario.grid, pt)?.iter().copied().collect(),
        completer: Completer::new(scenario),
        r: vec![0.0; k],
        evaluations: 0,
    };

    let mut x: Vec<f64> = result.menu.bandwidth().iter().chain(result.menu.frequency().iter()).copied().collect();
    let Some(mut best) = obj_fn.eval(&x)? else {
        return Err(Error::Domain("starting resources admit no feasible rewards".into()));
    };
    // Minimal completion can only help, so start from whichever is better.
    if result.objective > best {
        return Ok(SolveResult { evaluations: result.evaluations + obj_fn.evaluations, ..result.clone() });
    }

    let spacing = |[lo, hi]: [f64; 2]| (hi - lo) / (spec.grid_points - 1) as f64;
    let mut step = [spacing(spec.b_range) / 2.0, spacing(spec.f_range) / 2.0];
    let floor = [
        1e-6 * (spec.b_range[1] - spec.b_range[0]),
        1e-6 * (spec.f_range[1] - spec.f_range[0]),
    ];
    for _ in 0..spec.refine_iters {
        let mut improved = false;
        for i in 0..2 * k {
            let axis = i / k;
            let [lo, hi] = if axis == 0 { spec.b_range } else { spec.f_range };
            for dir in [1.0, -1.0] {
                let old = x[i];
                let new = (old + dir * step[axis]).clamp(lo, hi);
                if new == old {
                    continue;
                }
                x[i] = new;
                if locally_monotone(&x, i, rows, cols) {
                    if let Some(obj) = obj_fn.eval(&x)? {
                        if obj > best + 1e-12 * (1.0 + best.abs()) {
                            best = obj;
                            improved = true;
                            break;
                        }
                    }
                }
                x[i] = old;
            }
        }
        if !improved {
            if step[0] <= floor[0] && step[1] <= floor[1] {
                break;
            }
            step = [step[0] / 2.0, step[1] / 2.0];
        }
    }

    let mut r = vec![0.0; k];
    let bsq: Vec<f64> = x[..k].iter().map(|v| v * v).collect();
    let fsq: Vec<f64> = x[k..].iter().map(|v| v * v).collect();
    obj_fn.completer.complete(&bsq, &fsq, &mut r);
    let grid = |v: &[f64]| Array2::from_shape_vec((rows, cols), v.to_vec()).expect("k entries");
    let menu = ContractMenu::from_grids(&grid(&x[..k]), &grid(&x[k..]), &grid(&r))?;
    let refined = SolveResult::evaluate(menu, scenario, pt, result.evaluations + obj_fn.evaluations)?;
    if refined.objective < result.objective || !refined.feasible {
        // Recomputed scores can differ from the search's by rounding.
        return Ok(SolveResult { evaluations: refined.evaluations, ..result.clone() });
    }
    Ok(refined)
}
