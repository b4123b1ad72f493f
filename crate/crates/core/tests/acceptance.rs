//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use twin_contract::econ::{prob_weight, pt_value, ContractMenu, PtParams, TypeGrid};
use twin_contract::feasibility::{
    check_axis_monotone, check_full, check_reduced, minimal_reward_oracle, optimal_rewards, own_utilities,
};
use twin_contract::gdm::{forward_diffuse, ChainNoise, GdmAgent, NoiseSchedule, TrainingConfig};
use twin_contract::harness::{cmd_solve, cmd_sweep, cmd_train, train_run, ExperimentConfig, RunOptions, TrainOutcome};
use twin_contract::nn::{gradient_check, relative_error, Activation, Mlp};
use twin_contract::sampling::{monotone_grid, random_type_grid};
use twin_contract::scenario::ScenarioConfig;

const SEEDS: [u64; 3] = [1, 2, 3];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn desk_config() -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    ExperimentConfig::load(&path).expect("desk config loads")
}

fn random_case(rng: &mut ChaCha8Rng, dim: (usize, usize)) -> (TypeGrid, Array2<f64>, Array2<f64>) {
    let grid = random_type_grid(rng, dim, (10.0, 200.0), (10.0, 200.0)).unwrap();
    (grid, monotone_grid(rng, dim, 20.0), monotone_grid(rng, dim, 10.0))
}

/// Reduced-check verdict equals the full verdict on oracle-feasible and
/// perturbed menus.
fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut menus, mut disagree, mut first) = (0, 0, None);
    for dim in [(2, 2), (3, 3)] {
        let mut made = 0;
        while made < 600 {
            let (grid, b, f) = random_case(&mut rng, dim);
            let Ok(oracle) = minimal_reward_oracle(&b, &f, &grid) else { continue };
            let r = if made % 2 == 0 {
                oracle.rewards
            } else {
                oracle.rewards.mapv(|r| (r + rng.random_range(-0.5..0.5)).max(0.0))
            };
            let menu = ContractMenu::from_grids(&b, &f, &r).unwrap();
            let full = check_full(&menu, &grid).unwrap().feasible();
            let reduced = check_reduced(&menu, &grid).unwrap().feasible();
            if full != reduced {
                disagree += 1;
                first.get_or_insert(format!("{dim:?} full={full} reduced={reduced}"));
            }
            made += 1;
            menus += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        disagree == 0 && secs < 60.0,
        format!("{menus} menus, {disagree} disagreements (first: {}), {secs:.1}s", first.unwrap_or_else(|| "none".into())),
    )
}

struct OracleCase {
    grid: TypeGrid,
    menu: ContractMenu,
}

/// Recurrence rewards match the oracle to 1e-6 relative and the completed
/// menu passes the full checker.
fn criterion_2(oracle_menus: &mut Vec<OracleCase>) -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut mismatched, mut infeasible_menus, mut oracle_infeasible, mut worst) = (0, 0, 0, 0.0f64);
    for _ in 0..200 {
        let (grid, b, f) = random_case(&mut rng, (2, 2));
        let rec = optimal_rewards(&b, &f, &grid).unwrap();
        let rec_menu = ContractMenu::from_grids(&b, &f, &rec).unwrap();
        if !check_full(&rec_menu, &grid).unwrap().feasible() {
            infeasible_menus += 1;
        }
        match minimal_reward_oracle(&b, &f, &grid) {
            Ok(o) => {
                let err = rec
                    .iter()
                    .zip(&o.rewards)
                    .map(|(r, o)| if r == o { 0.0 } else { (r - o).abs() / r.abs().max(o.abs()) })
                    .fold(0.0, f64::max);
                worst = worst.max(err);
                if err > 1e-6 {
                    mismatched += 1;
                }
                oracle_menus.push(OracleCase { menu: ContractMenu::from_grids(&b, &f, &o.rewards).unwrap(), grid });
            }
            Err(_) => oracle_infeasible += 1,
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        mismatched == 0 && infeasible_menus == 0 && oracle_infeasible == 0 && secs < 60.0,
        format!(
            "200 grids: {mismatched} reward mismatches (worst rel {worst:.3e}), {infeasible_menus} recurrence menus fail the full check, {oracle_infeasible} grids with no feasible rewards, {secs:.1}s"
        ),
    )
}

/// Higher types get weakly higher own-item utility on every oracle menu.
fn criterion_3(cases: &[OracleCase]) -> Verdict {
    let mut bad = 0;
    for c in cases {
        let v = own_utilities(&c.menu, &c.grid).unwrap();
        let tol = 1e-9;
        let top = v[(1, 1)] >= v[(0, 1)].max(v[(1, 0)]).max(v[(0, 0)]) - tol;
        let mid = v[(0, 1)] >= v[(0, 0)] - tol && v[(1, 0)] >= v[(0, 0)] - tol;
        if !(top && mid) {
            bad += 1;
        }
    }
    verdict(!cases.is_empty() && bad == 0, format!("{} oracle menus, {bad} ordering violations", cases.len()))
}

fn criterion_4() -> Verdict {
    let mut notes = Vec::new();
    let pt = PtParams::default();
    for u_ref in [0.0, 5.0, 10.0, 20.0] {
        let p = PtParams { u_ref, ..pt };
        if pt_value(u_ref, &p) != 0.0 {
            notes.push(format!("pt_value(U_ref={u_ref}) != 0"));
        }
    }
    let eut = PtParams { delta_plus: 1.0, delta_minus: 1.0, u_ref: 0.0, use_weighting: false, ..PtParams::expected_utility() };
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let cfg = ScenarioConfig::default();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let sc = cfg.sample(&mut rng).unwrap();
        let menu = ContractMenu::from_grids(
            &Array2::from_shape_simple_fn((2, 2), || rng.random_range(0.0..80.0)),
            &Array2::from_shape_simple_fn((2, 2), || rng.random_range(0.0..40.0)),
            &Array2::from_shape_simple_fn((2, 2), || rng.random_range(0.0..60.0)),
        )
        .unwrap();
        worst = worst.max((sc.pt_expected(&menu, &eut).unwrap() - sc.eut_expected(&menu).unwrap()).abs());
    }
    if worst > 1e-12 {
        notes.push(format!("EUT recovery error {worst:e}"));
    }
    let e1 = (-1f64).exp();
    let h1 = prob_weight(1.0, pt.weight_coeff).unwrap();
    let he = prob_weight(e1, pt.weight_coeff).unwrap();
    if (h1 - 1.0).abs() > 1e-12 || (he - e1).abs() > 1e-12 {
        notes.push(format!("H(1)={h1}, H(1/e)={he}"));
    }
    verdict(
        notes.is_empty(),
        format!("EUT recovery worst {worst:.1e} over 200 menus; {}", if notes.is_empty() { "all identities hold".into() } else { notes.join("; ") }),
    )
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_nn = 0.0f64;
    for _ in 0..100 {
        let depth = rng.random_range(1..4);
        let mut widths = vec![rng.random_range(1..6)];
        widths.extend((0..depth).map(|_| rng.random_range(1..8)));
        widths.push(rng.random_range(1..4));
        let hidden = if rng.random_bool(0.5) { Activation::Tanh } else { Activation::Relu };
        let net = Mlp::new(&mut rng, &widths, hidden, Activation::Identity).unwrap();
        let x = Array2::from_shape_simple_fn((3, widths[0]), || rng.random_range(-1.0..1.0));
        let up = Array2::from_shape_simple_fn((3, *widths.last().unwrap()), || rng.random_range(-1.0..1.0));
        worst_nn = worst_nn.max(gradient_check(&net, x.view(), up.view(), 1e-5, 1e-6).unwrap().max_rel());
    }

    let cfg = TrainingConfig { hidden_width: 8, hidden_layers: 1, denoise_steps: 3, ..Default::default() };
    let agent = GdmAgent::new(&cfg, 1, 1, &mut rng).unwrap();
    let states = Array2::from_shape_simple_fn((4, 1), || rng.random_range(-1.0..1.0));
    let noise = ChainNoise::sample(&mut rng, 4, 1, 3);
    let (_, grads) = agent.actor_objective(states.view(), &noise).unwrap();
    let base = agent.actor.params_flat();
    let h = 1e-6;
    let mut worst_chain = 0.0f64;
    for (i, g) in grads.flat().into_iter().enumerate() {
        let loss = |d: f64| {
            let mut a = agent.clone();
            let mut p = base.clone();
            p[i] += d;
            a.actor.set_params_flat(&p).unwrap();
            a.actor_objective(states.view(), &noise).unwrap().0
        };
        worst_chain = worst_chain.max(relative_error(g, (loss(h) - loss(-h)) / (2.0 * h), 1e-6));
    }
    verdict(
        worst_nn < 1e-4 && worst_chain < 1e-3,
        format!("max rel error {worst_nn:.2e} over 100 nets, {worst_chain:.2e} through the K=3 chain"),
    )
}

fn criterion_6() -> Verdict {
    let s = NoiseSchedule::linear(3, 1e-4, 0.02).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let n = 100_000;
    let x0 = [0.8, -0.3];
    let mut worst = 0.0f64;
    for k in 1..=3 {
        let lh = s.lambda_hat(k).unwrap();
        let v = 1.0 - lh;
        let mut draws = vec![Vec::with_capacity(n); 2];
        for _ in 0..n {
            let z: [f64; 2] = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
            let x = forward_diffuse(&x0, k, &s, &z).unwrap();
            draws[0].push(x[0]);
            draws[1].push(x[1]);
        }
        for (d, x) in draws.iter().zip(x0) {
            let mean = d.iter().sum::<f64>() / n as f64;
            let var = d.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let z_mean = (mean - lh.sqrt() * x).abs() / (v / n as f64).sqrt();
            let z_var = (var - v).abs() / (v * (2.0 / (n - 1) as f64).sqrt());
            worst = worst.max(z_mean).max(z_var);
        }
    }
    verdict(worst < 3.0, format!("largest deviation {worst:.2} standard errors over k=1..3, 1e5 draws"))
}

fn criterion_7(runs: &[(u64, TrainOutcome, Duration)], final_epochs: usize) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (seed, run, took) in runs {
        let (g, r, gr) = run.final_means(final_epochs).unwrap();
        ok &= g >= gr && g >= r && took.as_secs_f64() < 600.0;
        parts.push(format!("seed {seed}: gdm {g:.1} random {r:.1} greedy {gr:.1} ({:.0}s)", took.as_secs_f64()));
    }
    verdict(ok, parts.join("; "))
}

fn trend(curve: &[(f64, f64, f64, f64)], name: &str) -> Verdict {
    let mut c = curve.to_vec();
    c.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ok = c.len() >= 2 && c.windows(2).all(|w| w[1].1 <= w[0].1);
    let shown: Vec<String> = c.iter().map(|(v, g, _, _)| format!("{name}={v}: {g:.2}")).collect();
    verdict(ok, format!("seed-averaged final reward {}", shown.join(", ")))
}

fn criterion_10(config: &ExperimentConfig, runs: &[(u64, TrainOutcome, Duration)]) -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut solver_bad = 0;
    for seed in SEEDS {
        let o = RunOptions::new(config.clone(), Some(seed), None, Some(dir.path().join(seed.to_string()))).unwrap();
        let s = cmd_solve(&o).unwrap();
        solver_bad += s.axis_violations.len();
    }
    let mut agent_bad = Vec::new();
    for (seed, run, _) in runs {
        let (_, menu) = run.final_menu(*seed, config.training.episodes).unwrap();
        agent_bad.push(check_axis_monotone(&menu.menu).len());
    }
    verdict(
        solver_bad == 0,
        format!("solver: {solver_bad} monotonicity violations over 3 seeds; agent menus (reported): {agent_bad:?} violations per seed"),
    )
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn criterion_11(config: &ExperimentConfig) -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for cmd in ["solve", "train"] {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{cmd}{rep}"));
            let o = RunOptions::new(config.clone(), Some(7), None, Some(out.clone())).unwrap();
            match cmd {
                "solve" => drop(cmd_solve(&o).unwrap()),
                _ => drop(cmd_train(&o).unwrap()),
            }
            outputs.push(csv_bytes(&out));
        }
        let same = outputs[0] == outputs[1] && !outputs[0].is_empty();
        ok &= same;
        parts.push(format!("{cmd}: {} CSVs {}", outputs[0].len(), if same { "identical" } else { "differ" }));
    }
    verdict(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let config = desk_config();
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut report = |n: u32, name: &'static str, v: Verdict| {
        println!("{} criterion {n:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((n, name, v));
    };

    report(1, "local constraint check agrees with full check", criterion_1());
    let mut oracle_menus = Vec::new();
    report(2, "local recurrence matches minimal-reward oracle", criterion_2(&mut oracle_menus));
    report(3, "utility ordering on oracle menus", criterion_3(&oracle_menus));
    report(4, "prospect-theory identities", criterion_4());
    report(5, "gradient correctness", criterion_5());
    report(6, "forward diffusion marginals", criterion_6());

    let runs: Vec<(u64, TrainOutcome, Duration)> = SEEDS
        .iter()
        .map(|&seed| {
            let start = Instant::now();
            let run = train_run(&config, seed).expect("training run");
            (seed, run, start.elapsed())
        })
        .collect();
    report(7, "trained agent beats random and greedy", criterion_7(&runs, config.final_epochs));

    let sweep_dir = tempfile::tempdir().unwrap();
    let sweep_opts = RunOptions::new(config.clone(), Some(SEEDS[0]), None, Some(sweep_dir.path().to_path_buf())).unwrap();
    let sweep = cmd_sweep(&sweep_opts).expect("sweep");
    report(8, "reward nonincreasing in U_ref", trend(&sweep.curve("u_ref"), "U_ref"));
    report(9, "reward nonincreasing in kappa", trend(&sweep.curve("kappa"), "kappa"));
    report(10, "menu monotonicity", criterion_10(&config, &runs));
    report(11, "byte-identical reruns", criterion_11(&config));

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
