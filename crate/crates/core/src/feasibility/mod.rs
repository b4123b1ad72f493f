//! Individual rationality (IR) and incentive compatibility (IC) of contract
//! menus, the utility recurrence, and minimal-reward completion.
//!
//! Type `(m, n)` pairs a bandwidth cost type `theta_m` with a compute cost
//! type `sigma_n`. `V_{m,n}^{p,q}` is the utility type `(m, n)` gets from the
//! item designed for `(p, q)`.

pub(crate) mod kernel;
mod report;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::econ::{ContractMenu, TypeGrid};
use crate::error::{Error, Result};
use kernel::Costs;

pub use report::{
    FeasibilityReport, IcViolation, IrViolation, MonotoneRule, MonotoneViolation, Resource, SLACK_TOL,
};

/// `V_{m,n}^{p,q} = R_{p,q} - b_{p,q}^2/theta_m - f_{p,q}^2/sigma_n`.
pub fn cross_utility(menu: &ContractMenu, grid: &TypeGrid, m: usize, n: usize, p: usize, q: usize) -> Result<f64> {
    let (rows, cols) = grid.dim();
    if m >= rows || n >= cols {
        return Err(Error::IndexOutOfRange(format!("type ({m}, {n}) in a {rows}x{cols} grid")));
    }
    let item = menu
        .get(p, q)
        .ok_or_else(|| Error::IndexOutOfRange(format!("item ({p}, {q}) in a {:?} menu", menu.dim())))?;
    Ok(item.r - item.b * item.b / grid.theta()[m] - item.f * item.f / grid.sigma()[n])
}

fn utility_unchecked(menu: &ContractMenu, grid: &TypeGrid, m: usize, n: usize, p: usize, q: usize) -> f64 {
    let item = &menu.items()[(p, q)];
    item.r - item.b * item.b / grid.theta()[m] - item.f * item.f / grid.sigma()[n]
}

fn ir_at(menu: &ContractMenu, grid: &TypeGrid, m: usize, n: usize, report: &mut FeasibilityReport) {
    let slack = utility_unchecked(menu, grid, m, n, m, n);
    report.constraints_checked += 1;
    if slack < -SLACK_TOL {
        report.ir_violations.push(IrViolation { m, n, slack });
    }
}

fn ic_at(menu: &ContractMenu, grid: &TypeGrid, (m, n): (usize, usize), (p, q): (usize, usize), report: &mut FeasibilityReport) {
    let slack = utility_unchecked(menu, grid, m, n, m, n) - utility_unchecked(menu, grid, m, n, p, q);
    report.constraints_checked += 1;
    if slack < -SLACK_TOL {
        report.ic_violations.push(IcViolation { m, n, p, q, slack });
    }
}

/// Lists every type whose own item leaves it with negative utility.
pub fn check_ir(menu: &ContractMenu, grid: &TypeGrid) -> Result<FeasibilityReport> {
    menu.expect_dims(grid)?;
    let mut report = FeasibilityReport::default();
    let (rows, cols) = grid.dim();
    for m in 0..rows {
        for n in 0..cols {
            ir_at(menu, grid, m, n, &mut report);
        }
    }
    Ok(report)
}

/// Evaluates all `MN(MN - 1)` pairwise IC constraints.
pub fn check_ic_full(menu: &ContractMenu, grid: &TypeGrid) -> Result<FeasibilityReport> {
    menu.expect_dims(grid)?;
    let mut report = FeasibilityReport::default();
    let (rows, cols) = grid.dim();
    for m in 0..rows {
        for n in 0..cols {
            for p in 0..rows {
                for q in 0..cols {
                    if (m, n) != (p, q) {
                        ic_at(menu, grid, (m, n), (p, q), &mut report);
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Checks `x_{i,j} <= max{x_{i,n}, x_{m,j}} <= x_{m,n}` for all `m > i`, `n > j`.
pub fn monotone_violations(x: ArrayView2<f64>, resource: Resource) -> Vec<MonotoneViolation> {
    let (rows, cols) = x.dim();
    let mut out = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            for m in i + 1..rows {
                for n in j + 1..cols {
                    let side = x[(i, n)].max(x[(m, j)]);
                    let below = side - x[(i, j)];
                    if below < -SLACK_TOL {
                        out.push(MonotoneViolation {
                            resource,
                            rule: MonotoneRule::CornerBelowMax,
                            lower: (i, j),
                            upper: (m, n),
                            slack: below,
                        });
                    }
                    let above = x[(m, n)] - side;
                    if above < -SLACK_TOL {
                        out.push(MonotoneViolation {
                            resource,
                            rule: MonotoneRule::MaxBelowCorner,
                            lower: (i, j),
                            upper: (m, n),
                            slack: above,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Lists places where a resource shrinks between neighbouring types.
pub fn axis_monotone_violations(x: ArrayView2<f64>, resource: Resource) -> Vec<MonotoneViolation> {
    let (rows, cols) = x.dim();
    let mut out = Vec::new();
    for m in 0..rows {
        for n in 0..cols {
            for (um, un) in [(m + 1, n), (m, n + 1)] {
                if um < rows && un < cols {
                    let slack = x[(um, un)] - x[(m, n)];
                    if slack < -SLACK_TOL {
                        out.push(MonotoneViolation {
                            resource,
                            rule: MonotoneRule::Axis,
                            lower: (m, n),
                            upper: (um, un),
                            slack,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Resource monotonicity of both the bandwidth and frequency grids.
pub fn check_monotone(menu: &ContractMenu) -> Vec<MonotoneViolation> {
    let mut out = monotone_violations(menu.bandwidth().view(), Resource::Bandwidth);
    out.extend(monotone_violations(menu.frequency().view(), Resource::Frequency));
    out
}

/// Whether both resources grow weakly along each type axis.
pub fn check_axis_monotone(menu: &ContractMenu) -> Vec<MonotoneViolation> {
    let mut out = axis_monotone_violations(menu.bandwidth().view(), Resource::Bandwidth);
    out.extend(axis_monotone_violations(menu.frequency().view(), Resource::Frequency));
    out
}

fn monotone_report(menu: &ContractMenu) -> FeasibilityReport {
    let (rows, cols) = menu.dim();
    let pairs = rows * (rows - 1) / 2 * (cols * (cols - 1) / 2);
    FeasibilityReport {
        monotonicity_violations: check_monotone(menu),
        constraints_checked: 4 * pairs,
        ..Default::default()
    }
}

/// IR for every type, all pairwise IC constraints, and resource monotonicity.
pub fn check_full(menu: &ContractMenu, grid: &TypeGrid) -> Result<FeasibilityReport> {
    Ok(check_ir(menu, grid)?.merge(check_ic_full(menu, grid)?).merge(monotone_report(menu)))
}

/// The local constraint set: IR at the lowest type, IC against the three
/// lower and three upper neighbours of every type, and monotonicity.
pub fn check_reduced(menu: &ContractMenu, grid: &TypeGrid) -> Result<FeasibilityReport> {
    menu.expect_dims(grid)?;
    let mut report = FeasibilityReport::default();
    ir_at(menu, grid, 0, 0, &mut report);
    let (rows, cols) = grid.dim();
    for m in 0..rows {
        for n in 0..cols {
            let down = [(0isize, -1isize), (-1, 0), (-1, -1)];
            let up = [(0isize, 1isize), (1, 0), (1, 1)];
            for (dm, dn) in down.into_iter().chain(up) {
                let (p, q) = (m as isize + dm, n as isize + dn);
                if p >= 0 && q >= 0 && (p as usize) < rows && (q as usize) < cols {
                    ic_at(menu, grid, (m, n), (p as usize, q as usize), &mut report);
                }
            }
        }
    }
    Ok(report.merge(monotone_report(menu)))
}

/// Successive gaps of the inverse cost types.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaLambda {
    /// `1/theta_i - 1/theta_{i+1}`, length `M - 1`.
    pub delta: Vec<f64>,
    /// `1/sigma_j - 1/sigma_{j+1}`, length `N - 1`.
    pub lambda: Vec<f64>,
}

impl DeltaLambda {
    pub fn new(grid: &TypeGrid) -> Self {
        let gaps = |v: &[f64]| v.windows(2).map(|w| 1.0 / w[0] - 1.0 / w[1]).collect();
        DeltaLambda { delta: gaps(grid.theta()), lambda: gaps(grid.sigma()) }
    }
}

fn resource_inputs(b: &Array2<f64>, f: &Array2<f64>, grid: &TypeGrid) -> Result<(Costs, Vec<f64>, Vec<f64>)> {
    for (name, x) in [("bandwidth", b), ("frequency", f)] {
        if x.dim() != grid.dim() {
            return Err(Error::dims(format!("{:?} {name} grid", grid.dim()), format!("{:?}", x.dim())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("{name} grid has non-finite entries")));
        }
    }
    let sq = |x: &Array2<f64>| x.iter().map(|v| v * v).collect::<Vec<_>>();
    Ok((Costs::new(grid.theta(), grid.sigma()), sq(b), sq(f)))
}

fn into_matrix(dim: (usize, usize), v: Vec<f64>) -> Array2<f64> {
    Array2::from_shape_vec(dim, v).expect("buffer length matches grid")
}

/// Minimal information rents from the local downward recurrence.
///
/// `V_{1,1} = 0`; every other type takes the largest bound implied by its
/// in-range neighbours `(m, n-1)`, `(m-1, n)` and `(m-1, n-1)`, visited in
/// row-major order. Inputs must satisfy [`monotone_violations`].
pub fn recurrence_utilities(b: &Array2<f64>, f: &Array2<f64>, grid: &TypeGrid) -> Result<Array2<f64>> {
    let (costs, bsq, fsq) = resource_inputs(b, f, grid)?;
    let mut bad = monotone_violations(b.view(), Resource::Bandwidth);
    bad.extend(monotone_violations(f.view(), Resource::Frequency));
    if let Some(v) = bad.first() {
        return Err(Error::NotMonotone(format!(
            "{} violation(s), first between ({}, {}) and ({}, {}) for {:?}",
            bad.len(),
            v.lower.0 + 1,
            v.lower.1 + 1,
            v.upper.0 + 1,
            v.upper.1 + 1,
            v.resource
        )));
    }
    let mut v = vec![0.0; costs.len()];
    kernel::recurrence(&costs, &bsq, &fsq, &mut v);
    Ok(into_matrix(grid.dim(), v))
}

/// Sign of the compute term when turning utilities back into rewards.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardSign {
    /// `R = V + b^2/theta + f^2/sigma`, the inverse of the RSU utility.
    #[default]
    Plus,
    /// `R = V + b^2/theta - f^2/sigma`, kept for comparison only. Menus built
    /// this way generally fail IR.
    Minus,
}

/// Rewards `R = V + b^2/theta_m +/- f^2/sigma_n` from the recurrence utilities.
pub fn optimal_rewards_with_sign(b: &Array2<f64>, f: &Array2<f64>, grid: &TypeGrid, sign: RewardSign) -> Result<Array2<f64>> {
    let v = recurrence_utilities(b, f, grid)?;
    let s = match sign {
        RewardSign::Plus => 1.0,
        RewardSign::Minus => -1.0,
    };
    Ok(Array2::from_shape_fn(grid.dim(), |(m, n)| {
        v[(m, n)] + b[(m, n)].powi(2) / grid.theta()[m] + s * f[(m, n)].powi(2) / grid.sigma()[n]
    }))
}

/// Rewards recovered from the recurrence utilities.
pub fn optimal_rewards(b: &Array2<f64>, f: &Array2<f64>, grid: &TypeGrid) -> Result<Array2<f64>> {
    optimal_rewards_with_sign(b, f, grid, RewardSign::Plus)
}

/// Result of the minimal-reward relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRewards {
    pub rewards: Array2<f64>,
    /// Relaxation sweeps until no bound moved, at most `MN`.
    pub passes: usize,
}

/// Componentwise-minimal rewards satisfying IR and all pairwise IC
/// constraints for the given resources.
///
/// The IC constraints are difference constraints on `R`, so the answer is the
/// longest-path fixpoint started from the IR bounds. A positive cycle means
/// no reward vector works and is reported as [`Error::Infeasible`].
pub fn minimal_reward_oracle(b: &Array2<f64>, f: &Array2<f64>, grid: &TypeGrid) -> Result<OracleRewards> {
    let (costs, bsq, fsq) = resource_inputs(b, f, grid)?;
    let mut r = vec![0.0; costs.len()];
    match kernel::minimal_rewards(&costs, &bsq, &fsq, &mut r) {
        Some(passes) => Ok(OracleRewards { rewards: into_matrix(grid.dim(), r), passes }),
        None => Err(Error::Infeasible(format!(
            "IC constraints on the {:?} grid contain a positive cycle",
            grid.dim()
        ))),
    }
}

/// Utilities `V_{m,n}^{m,n}` of every type under its own item.
pub fn own_utilities(menu: &ContractMenu, grid: &TypeGrid) -> Result<Array2<f64>> {
    menu.expect_dims(grid)?;
    Ok(Array2::from_shape_fn(grid.dim(), |(m, n)| utility_unchecked(menu, grid, m, n, m, n)))
}
