use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::commands::base_scenario;
use super::{run_record, write_file, RunOptions};
use crate::econ::{prob_weight, pt_value, ContractMenu, PtParams, TypeGrid};
use crate::error::{Error, Result};
use crate::feasibility::{
    check_axis_monotone, check_full, check_ic_full, check_ir, check_reduced, minimal_reward_oracle, optimal_rewards,
    own_utilities, FeasibilityReport, SLACK_TOL,
};
use crate::gdm::{forward_diffuse, ChainNoise, GdmAgent, NoiseSchedule, TrainingConfig};
use crate::nn::{gradient_check, relative_error, Activation, Mlp};
use crate::sampling::{monotone_grid, random_type_grid};
use crate::solver::{read_menu_csv, solve_grid};

/// Result of one property suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    /// First counterexample, if any.
    pub failure: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

type Check = std::result::Result<usize, String>;

fn random_case(rng: &mut ChaCha8Rng, dim: (usize, usize)) -> (TypeGrid, Array2<f64>, Array2<f64>) {
    let grid = random_type_grid(rng, dim, (10.0, 200.0), (10.0, 200.0)).expect("valid ranges");
    (grid, monotone_grid(rng, dim, 20.0), monotone_grid(rng, dim, 10.0))
}

fn ir_ic(menu: &ContractMenu, grid: &TypeGrid) -> Result<bool> {
    Ok(check_ir(menu, grid)?.merge(check_ic_full(menu, grid)?).feasible())
}

fn pt_identities() -> Check {
    let pt = PtParams::default();
    if pt_value(pt.u_ref, &pt) != 0.0 {
        return Err("pt_value(U_ref) is not 0".into());
    }
    for (p, want) in [(1.0, 1.0), ((-1f64).exp(), (-1f64).exp())] {
        let h = prob_weight(p, pt.weight_coeff).map_err(|e| e.to_string())?;
        if (h - want).abs() > 1e-12 {
            return Err(format!("H({p}) = {h}, expected {want}"));
        }
    }
    let eut = PtParams::expected_utility();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for u in (0..100).map(|_| rng.random_range(-50.0..50.0)) {
        if (pt_value(u, &eut) - u).abs() > 1e-12 {
            return Err(format!("expected-utility settings change {u}"));
        }
    }
    Ok(103)
}

fn full_implies_reduced(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    for dim in [(2, 2), (3, 3)] {
        for i in 0..250 {
            let (grid, b, f) = random_case(&mut rng, dim);
            let Ok(oracle) = minimal_reward_oracle(&b, &f, &grid) else { continue };
            let noise = if i % 2 == 0 { 0.0 } else { 0.3 };
            let r = oracle.rewards.mapv(|r| (r + noise * rng.random_range(-1.0..1.0)).max(0.0));
            let menu = ContractMenu::from_grids(&b, &f, &r).map_err(|e| e.to_string())?;
            let full = check_full(&menu, &grid).map_err(|e| e.to_string())?.feasible();
            if full && !check_reduced(&menu, &grid).map_err(|e| e.to_string())?.feasible() {
                return Err(format!("{dim:?} menu passes the full check but fails the local one"));
            }
            cases += 1;
        }
    }
    Ok(cases)
}

fn oracle_properties(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    while cases < 200 {
        let (grid, b, f) = random_case(&mut rng, (2, 2));
        let Ok(oracle) = minimal_reward_oracle(&b, &f, &grid) else { continue };
        let e = |e: Error| e.to_string();
        let menu = ContractMenu::from_grids(&b, &f, &oracle.rewards).map_err(e)?;
        if !check_full(&menu, &grid).map_err(e)?.feasible() {
            return Err("oracle rewards violate a constraint".into());
        }
        for t in 0..4 {
            let mut lower = oracle.rewards.clone();
            lower[(t / 2, t % 2)] -= 1e-6;
            if lower[(t / 2, t % 2)] >= 0.0 && ir_ic(&ContractMenu::from_grids(&b, &f, &lower).map_err(e)?, &grid).map_err(e)? {
                return Err("lowering an oracle reward keeps the menu feasible".into());
            }
        }
        let rec = optimal_rewards(&b, &f, &grid).map_err(e)?;
        let rec_menu = ContractMenu::from_grids(&b, &f, &rec).map_err(e)?;
        let rec_ic = ir_ic(&rec_menu, &grid).map_err(e)?;
        for (r, o) in rec.iter().zip(&oracle.rewards) {
            if *r > o + 1e-9 * (1.0 + o.abs()) {
                return Err(format!("local recurrence reward {r} exceeds oracle {o}"));
            }
            if rec_ic && (r - o).abs() > 1e-6 * (1.0 + o.abs()) {
                return Err(format!("IC recurrence menu differs from oracle: {r} vs {o}"));
            }
        }
        let v = own_utilities(&menu, &grid).map_err(e)?;
        for (lo, hi) in [((0, 0), (0, 1)), ((0, 0), (1, 0)), ((0, 1), (1, 1)), ((1, 0), (1, 1))] {
            if v[hi] < v[lo] - SLACK_TOL {
                return Err(format!("utility of type {hi:?} is below that of {lo:?}"));
            }
        }
        cases += 1;
    }
    Ok(cases)
}

fn nn_gradients(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..20 {
        let widths = [rng.random_range(1..5), rng.random_range(1..6), rng.random_range(1..6), rng.random_range(1..4)];
        let net = Mlp::new(&mut rng, &widths, Activation::Tanh, Activation::Identity).map_err(|e| e.to_string())?;
        let x = Array2::from_shape_simple_fn((3, widths[0]), || rng.random_range(-1.0..1.0));
        let up = Array2::from_shape_simple_fn((3, widths[3]), || rng.random_range(-1.0..1.0));
        let check = gradient_check(&net, x.view(), up.view(), 1e-5, 1e-6).map_err(|e| e.to_string())?;
        if check.max_rel() >= 1e-4 {
            return Err(format!("net {i}: relative gradient error {}", check.max_rel()));
        }
    }
    Ok(20)
}

fn actor_chain_gradient(seed: u64) -> Check {
    let cfg = TrainingConfig { hidden_width: 8, hidden_layers: 1, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agent = GdmAgent::new(&cfg, 1, 1, &mut rng).map_err(|e| e.to_string())?;
    let states = Array2::from_shape_simple_fn((4, 1), || rng.random_range(-1.0..1.0));
    let noise = ChainNoise::sample(&mut rng, 4, 1, cfg.denoise_steps);
    let (_, grads) = agent.actor_objective(states.view(), &noise).map_err(|e| e.to_string())?;
    let base = agent.actor.params_flat();
    let h = 1e-6;
    for (i, g) in grads.flat().into_iter().enumerate() {
        let loss = |d: f64| {
            let mut a = agent.clone();
            let mut p = base.clone();
            p[i] += d;
            a.actor.set_params_flat(&p).expect("same length");
            a.actor_objective(states.view(), &noise).map(|r| r.0)
        };
        let fd = (loss(h).map_err(|e| e.to_string())? - loss(-h).map_err(|e| e.to_string())?) / (2.0 * h);
        if relative_error(g, fd, 1e-6) >= 1e-3 {
            return Err(format!("actor parameter {i}: analytic {g}, finite difference {fd}"));
        }
    }
    Ok(base.len())
}

fn diffusion_marginals(seed: u64) -> Check {
    let s = NoiseSchedule::linear(3, 1e-4, 0.02).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 20_000;
    for k in 1..=3 {
        let draws: Vec<f64> = (0..n)
            .map(|_| forward_diffuse(&[0.5], k, &s, &[rng.sample(StandardNormal)]).expect("valid step")[0])
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let lh = s.lambda_hat(k).expect("valid step");
        let (mu, v) = (lh.sqrt() * 0.5, 1.0 - lh);
        if (mean - mu).abs() >= 3.0 * (v / n as f64).sqrt() || (var - v).abs() >= 3.0 * v * (2.0 / (n - 1) as f64).sqrt() {
            return Err(format!("step {k}: mean {mean} var {var}, expected {mu} and {v}"));
        }
    }
    Ok(3 * n)
}

fn solver_output(opts: &RunOptions) -> Check {
    let cfg = &opts.config;
    let scenario = base_scenario(cfg, opts.seed).map_err(|e| e.to_string())?;
    let result = solve_grid(&cfg.search, &scenario, &cfg.pt).map_err(|e| e.to_string())?;
    let report = check_full(&result.menu, &scenario.grid).map_err(|e| e.to_string())?;
    if !report.feasible() {
        return Err(format!("solver menu has {} violations", report.violation_count()));
    }
    if !check_axis_monotone(&result.menu).is_empty() {
        return Err("solver menu is not monotone".into());
    }
    Ok(1)
}

/// The invariant suites `verify` runs, with randomness derived from `seed`.
pub fn property_suites(opts: &RunOptions) -> Vec<SuiteOutcome> {
    let seed = opts.seed;
    let suites: Vec<(&'static str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("pt_identities", Box::new(pt_identities)),
        ("full_check_implies_local_check", Box::new(move || full_implies_reduced(seed))),
        ("oracle_rewards", Box::new(move || oracle_properties(seed.wrapping_add(1)))),
        ("nn_gradients", Box::new(move || nn_gradients(seed.wrapping_add(2)))),
        ("actor_chain_gradient", Box::new(move || actor_chain_gradient(seed.wrapping_add(3)))),
        ("diffusion_marginals", Box::new(move || diffusion_marginals(seed.wrapping_add(4)))),
        ("solver_output", Box::new(move || solver_output(opts))),
    ];
    suites
        .into_iter()
        .map(|(name, run)| match run() {
            Ok(cases) => SuiteOutcome { name, cases, failure: None },
            Err(msg) => SuiteOutcome { name, cases: 0, failure: Some(msg) },
        })
        .collect()
}

/// Output of `verify`.
#[derive(Debug, Clone)]
pub struct VerifySummary {
    pub suites: Vec<SuiteOutcome>,
    /// Constraint check of the menu passed with `--menu`.
    pub menu_report: Option<FeasibilityReport>,
    pub files: Vec<PathBuf>,
}

impl VerifySummary {
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .suites
            .iter()
            .filter_map(|s| s.failure.as_ref().map(|f| format!("{}: {f}", s.name)))
            .collect();
        if let Some(r) = &self.menu_report {
            if !r.feasible() {
                out.push(format!("menu violates {} constraints", r.violation_count()));
            }
        }
        out
    }
}

/// Runs the property suites and, given a menu CSV, checks it against the
/// run's base scenario. Writes `verify_suites.csv`, `verify_menu.csv` and `run.csv`.
pub fn cmd_verify(opts: &RunOptions, menu: Option<&Path>) -> Result<VerifySummary> {
    let started = Instant::now();
    opts.config.validate()?;
    let menu_report = match menu {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let menu = read_menu_csv(&text)?;
            let scenario = base_scenario(&opts.config, opts.seed)?;
            Some(check_full(&menu, &scenario.grid)?)
        }
        None => None,
    };
    let suites = property_suites(opts);
    let mut csv = String::from("suite,cases,passed,failure\n");
    for s in &suites {
        let _ = writeln!(csv, "{},{},{},{}", s.name, s.cases, s.passed(), s.failure.as_deref().unwrap_or("").replace(',', ";"));
    }
    let dir = &opts.out;
    let mut files = vec![write_file(dir, "verify_suites.csv", &csv)?];
    if let Some(r) = &menu_report {
        files.push(write_file(dir, "verify_menu.csv", &r.to_csv())?);
    }
    let summary = VerifySummary { suites, menu_report, files };
    let failures = summary.failures().len();
    let mut summary = summary;
    summary.files.push(write_file(dir, "run.csv", &run_record("verify", opts, &[("failures", failures.to_string())]))?);
    summary.files.push(write_file(dir, "timing.txt", &format!("seconds,{:.3}\n", started.elapsed().as_secs_f64()))?);
    Ok(summary)
}
