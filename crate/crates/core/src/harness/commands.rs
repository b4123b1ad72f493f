use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;

use super::plot::{emit_plotdata, PlotSeries};
use super::{run_record, write_file, ExperimentConfig, RunOptions};
use crate::econ::{PtParams, Scenario, TypeGrid};
use crate::error::{Error, Result};
use crate::feasibility::{check_axis_monotone, check_full, FeasibilityReport, MonotoneViolation};
use crate::gdm::{baseline_trace, stream_rng, train, BaselineRow, ContractEnv, GdmAgent, Stream, TrainLog};
use crate::solver::{refine_local, solve_grid, SolveResult};

fn timing(dir: &std::path::Path, started: Instant) -> Result<PathBuf> {
    write_file(dir, "timing.txt", &format!("seconds,{:.3}\n", started.elapsed().as_secs_f64()))
}

/// The fixed scenario of a run: the one the training environment is built on.
pub fn base_scenario(config: &ExperimentConfig, seed: u64) -> Result<Scenario> {
    config.scenario.sample(&mut stream_rng(seed, Stream::Scenario, 0, 0))
}

fn types_csv(grid: &TypeGrid) -> String {
    let mut s = String::from("m,n,theta,sigma,q\n");
    let (rows, cols) = grid.dim();
    for m in 0..rows {
        for n in 0..cols {
            let _ = writeln!(s, "{},{},{},{},{}", m + 1, n + 1, grid.theta()[m], grid.sigma()[n], grid.q()[(m, n)]);
        }
    }
    s
}

/// Output of `solve`.
#[derive(Debug, Clone)]
pub struct SolveSummary {
    pub scenario: Scenario,
    pub result: SolveResult,
    pub report: FeasibilityReport,
    /// Places where `b` or `f` falls along a type axis.
    pub axis_violations: Vec<MonotoneViolation>,
    pub files: Vec<PathBuf>,
}

impl SolveSummary {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.report.feasible() {
            out.push(format!("solver menu violates {} constraints", self.report.violation_count()));
        }
        if !self.axis_violations.is_empty() {
            out.push(format!("solver menu is not monotone along {} type steps", self.axis_violations.len()));
        }
        out
    }
}

/// Solves the run's base scenario on the search lattice, refines locally and
/// writes `solve_menu.csv`, `types.csv`, `feasibility.csv` and `run.csv`.
pub fn cmd_solve(opts: &RunOptions) -> Result<SolveSummary> {
    let started = Instant::now();
    let cfg = &opts.config;
    cfg.validate()?;
    let scenario = base_scenario(cfg, opts.seed)?;
    let mut result = solve_grid(&cfg.search, &scenario, &cfg.pt)?;
    if cfg.search.refine_iters > 0 && result.feasible {
        result = refine_local(&result, &cfg.search, &scenario, &cfg.pt)?;
    }
    let report = check_full(&result.menu, &scenario.grid)?;
    let axis_violations = check_axis_monotone(&result.menu);
    let dir = &opts.out;
    let files = vec![
        write_file(dir, "solve_menu.csv", &result.to_csv())?,
        write_file(dir, "types.csv", &types_csv(&scenario.grid))?,
        write_file(dir, "feasibility.csv", &report.to_csv())?,
        write_file(
            dir,
            "run.csv",
            &run_record(
                "solve",
                opts,
                &[
                    ("objective", result.objective.to_string()),
                    ("evaluations", result.evaluations.to_string()),
                    ("violations", report.violation_count().to_string()),
                ],
            ),
        )?,
        timing(dir, started)?,
    ];
    Ok(SolveSummary { scenario, result, report, axis_violations, files })
}

/// A finished training run and the baselines on its state sequence.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub env: ContractEnv,
    pub agent: GdmAgent,
    pub log: TrainLog,
    pub baselines: Vec<BaselineRow>,
}

impl TrainOutcome {
    /// `(epoch, gdm, random, greedy)` mean rewards.
    pub fn epoch_table(&self) -> Vec<(usize, f64, f64, f64)> {
        let mut sums: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
        for b in &self.baselines {
            let e = sums.entry(b.epoch).or_default();
            *e = (e.0 + b.random, e.1 + b.greedy, e.2 + 1);
        }
        self.log
            .epoch_means()
            .into_iter()
            .map(|(epoch, g)| {
                let (r, gr, n) = sums[&epoch];
                (epoch, g, r / n as f64, gr / n as f64)
            })
            .collect()
    }

    /// `(gdm, random, greedy)` means over the last `epochs` epochs.
    pub fn final_means(&self, epochs: usize) -> Option<(f64, f64, f64)> {
        let t = self.epoch_table();
        let tail = &t[t.len().saturating_sub(epochs)..];
        if tail.is_empty() {
            return None;
        }
        let n = tail.len() as f64;
        let sum = tail.iter().fold((0.0, 0.0, 0.0), |a, r| (a.0 + r.1, a.1 + r.2, a.2 + r.3));
        Some((sum.0 / n, sum.1 / n, sum.2 / n))
    }

    /// The trained policy's menu for the first state after training, drawn
    /// with the action stream of that step.
    pub fn final_menu(&self, seed: u64, episodes: usize) -> Result<(Scenario, SolveResult)> {
        let state = self.env.state_at(seed, episodes, 0)?;
        let s = Array2::from_shape_vec((1, self.env.state_dim()), state.vector).expect("state width");
        let a = self.agent.generate(s.view(), &mut stream_rng(seed, Stream::Action, episodes as u64, 0))?;
        let menu = self.env.action_box.to_menu(a.as_slice().expect("contiguous"), self.env.dim())?;
        let result = SolveResult::evaluate(menu, &state.scenario, &self.env.pt, 0)?;
        Ok((state.scenario, result))
    }
}

/// Builds the environment and agent for `seed`, trains, and scores the
/// random and greedy baselines on the same states.
pub fn train_run(config: &ExperimentConfig, seed: u64) -> Result<TrainOutcome> {
    config.validate()?;
    let t = &config.training;
    let action_box = t.action_box(config.search.b_range, config.search.f_range)?;
    let env = ContractEnv::new(config.scenario.clone(), config.pt, action_box, t.reward, seed)?;
    let mut agent = GdmAgent::new(t, env.state_dim(), env.action_dim(), &mut stream_rng(seed, Stream::Init, 0, 0))?;
    let log = train(&mut agent, &env, t, seed)?;
    let baselines = baseline_trace(&env, t, seed)?;
    Ok(TrainOutcome { env, agent, log, baselines })
}

/// Output of `train`.
#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub outcome: TrainOutcome,
    /// `(gdm, random, greedy)` over the final epochs; absent for zero episodes.
    pub final_means: Option<(f64, f64, f64)>,
    pub agent_menu: SolveResult,
    pub agent_report: FeasibilityReport,
    pub axis_violations: Vec<MonotoneViolation>,
    pub files: Vec<PathBuf>,
}

fn epoch_csv(rows: &[(usize, f64, f64, f64)]) -> String {
    let mut s = String::from("epoch,gdm,random,greedy\n");
    for (e, g, r, gr) in rows {
        let _ = writeln!(s, "{e},{g},{r},{gr}");
    }
    s
}

/// Trains and writes `train_log.csv`, `epochs.csv`, `plotdata.csv`,
/// `agent_menu.csv`, `agent_feasibility.csv`, network checkpoints and `run.csv`.
pub fn cmd_train(opts: &RunOptions) -> Result<TrainSummary> {
    let started = Instant::now();
    let cfg = &opts.config;
    let outcome = train_run(cfg, opts.seed)?;
    let (state_scenario, agent_menu) = outcome.final_menu(opts.seed, cfg.training.episodes)?;
    let agent_report = check_full(&agent_menu.menu, &state_scenario.grid)?;
    let axis_violations = check_axis_monotone(&agent_menu.menu);
    let final_means = outcome.final_means(cfg.final_epochs);
    let table = outcome.epoch_table();

    let dir = &opts.out;
    let mut files = vec![
        write_file(dir, "train_log.csv", &outcome.log.to_csv())?,
        write_file(dir, "epochs.csv", &epoch_csv(&table))?,
        write_file(dir, "agent_menu.csv", &agent_menu.to_csv())?,
        write_file(dir, "agent_feasibility.csv", &agent_report.to_csv())?,
    ];
    if !table.is_empty() {
        let series = |name: &str, pick: fn(&(usize, f64, f64, f64)) -> f64| {
            PlotSeries::new("reward_vs_epoch", name, table.iter().map(|r| (r.0 as f64, pick(r))).collect())
        };
        let plot = emit_plotdata(&[series("gdm", |r| r.1), series("random", |r| r.2), series("greedy", |r| r.3)])?;
        files.push(write_file(dir, "plotdata.csv", &plot)?);
    }
    for (name, net) in [
        ("actor.ckpt", &outcome.agent.actor),
        ("critic1.ckpt", &outcome.agent.critic1),
        ("critic2.ckpt", &outcome.agent.critic2),
    ] {
        files.push(write_file(dir, name, &net.to_text())?);
    }
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let record = run_record(
        "train",
        opts,
        &[
            ("final_reward", fmt(final_means.map(|m| m.0))),
            ("random_final", fmt(final_means.map(|m| m.1))),
            ("greedy_final", fmt(final_means.map(|m| m.2))),
            ("agent_violations", agent_report.violation_count().to_string()),
            ("agent_axis_violations", axis_violations.len().to_string()),
        ],
    );
    files.push(write_file(dir, "run.csv", &record)?);
    files.push(timing(dir, started)?);
    Ok(TrainSummary { outcome, final_means, agent_menu, agent_report, axis_violations, files })
}

/// Final rewards of one sweep run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub parameter: &'static str,
    pub value: f64,
    pub seed: u64,
    pub gdm: f64,
    pub random: f64,
    pub greedy: f64,
}

/// Output of `sweep`.
#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub points: Vec<SweepPoint>,
    pub files: Vec<PathBuf>,
}

impl SweepSummary {
    /// `(value, mean gdm, mean random, mean greedy)` over seeds, in sweep order.
    pub fn curve(&self, parameter: &str) -> Vec<(f64, f64, f64, f64)> {
        let mut out: Vec<(f64, f64, f64, f64, usize)> = Vec::new();
        for p in self.points.iter().filter(|p| p.parameter == parameter) {
            match out.iter_mut().find(|c| c.0 == p.value) {
                Some(c) => {
                    c.1 += p.gdm;
                    c.2 += p.random;
                    c.3 += p.greedy;
                    c.4 += 1;
                }
                None => out.push((p.value, p.gdm, p.random, p.greedy, 1)),
            }
        }
        out.into_iter().map(|(v, g, r, gr, n)| (v, g / n as f64, r / n as f64, gr / n as f64)).collect()
    }

    /// Increases of the seed-averaged GDM reward along each swept parameter.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for parameter in ["u_ref", "kappa"] {
            let mut c = self.curve(parameter);
            c.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in c.windows(2) {
                if w[1].1 > w[0].1 {
                    out.push(format!(
                        "final reward rises from {} at {parameter}={} to {} at {parameter}={}",
                        w[0].1, w[0].0, w[1].1, w[1].0
                    ));
                }
            }
        }
        out
    }
}

fn sweep_settings(cfg: &ExperimentConfig) -> Vec<(&'static str, f64, PtParams)> {
    let s = &cfg.sweep;
    let u = s.u_ref.iter().map(|&v| ("u_ref", v, PtParams { u_ref: v, ..cfg.pt }));
    let k = s.kappa.iter().map(|&v| ("kappa", v, PtParams { kappa: v, u_ref: s.kappa_u_ref, ..cfg.pt }));
    u.chain(k).collect()
}

/// Trains every setting of `sweep` under the common seeds and writes one CSV
/// per setting under `sweep/`, plus `summary.csv`, `plotdata.csv` and `run.csv`.
pub fn cmd_sweep(opts: &RunOptions) -> Result<SweepSummary> {
    let started = Instant::now();
    let cfg = &opts.config;
    cfg.validate()?;
    let settings = sweep_settings(cfg);
    if settings.is_empty() {
        return Err(Error::Usage("sweep has no u_ref or kappa values".into()));
    }
    for (_, _, pt) in &settings {
        pt.validate().map_err(|e| Error::Config(e.to_string()))?;
    }
    let seeds: Vec<u64> = (0..cfg.sweep.seed_count).map(|i| opts.seed.wrapping_add(i)).collect();

    // Settings that coincide (the default point of both sweeps) train once.
    let key = |pt: &PtParams, seed: u64| (pt.u_ref.to_bits(), pt.kappa.to_bits(), seed);
    let mut jobs: BTreeMap<(u64, u64, u64), PtParams> = BTreeMap::new();
    for (_, _, pt) in &settings {
        for &seed in &seeds {
            jobs.insert(key(pt, seed), *pt);
        }
    }
    let jobs: Vec<_> = jobs.into_iter().collect();
    let runs: Vec<_> = jobs
        .par_iter()
        .map(|(k, pt)| {
            let run_cfg = ExperimentConfig { pt: *pt, ..cfg.clone() };
            train_run(&run_cfg, k.2).map(|o| (*k, o.epoch_table()))
        })
        .collect::<Result<_>>()?;
    let runs: BTreeMap<_, _> = runs.into_iter().collect();

    let dir = opts.out.join("sweep");
    let mut files = Vec::new();
    let mut points = Vec::new();
    for (parameter, value, pt) in &settings {
        let mut csv = String::from("seed,epoch,gdm,random,greedy\n");
        for &seed in &seeds {
            let table = &runs[&key(pt, seed)];
            for (e, g, r, gr) in table {
                let _ = writeln!(csv, "{seed},{e},{g},{r},{gr}");
            }
            let tail = &table[table.len().saturating_sub(cfg.final_epochs)..];
            if tail.is_empty() {
                return Err(Error::Usage("sweep needs at least one training episode".into()));
            }
            let n = tail.len() as f64;
            let mean = |f: fn(&(usize, f64, f64, f64)) -> f64| tail.iter().map(f).sum::<f64>() / n;
            points.push(SweepPoint {
                parameter,
                value: *value,
                seed,
                gdm: mean(|r| r.1),
                random: mean(|r| r.2),
                greedy: mean(|r| r.3),
            });
        }
        files.push(write_file(&dir, &format!("{parameter}_{value}.csv"), &csv)?);
    }
    let mut summary = String::from("parameter,value,seed,gdm_final,random_final,greedy_final\n");
    for p in &points {
        let _ = writeln!(summary, "{},{},{},{},{},{}", p.parameter, p.value, p.seed, p.gdm, p.random, p.greedy);
    }
    files.push(write_file(&opts.out, "summary.csv", &summary)?);

    let mut out = SweepSummary { points, files };
    let mut series = Vec::new();
    for parameter in ["u_ref", "kappa"] {
        let c = out.curve(parameter);
        if c.is_empty() {
            continue;
        }
        let fig = format!("reward_vs_{parameter}");
        series.push(PlotSeries::new(&fig, "gdm", c.iter().map(|r| (r.0, r.1)).collect()));
        series.push(PlotSeries::new(&fig, "random", c.iter().map(|r| (r.0, r.2)).collect()));
        series.push(PlotSeries::new(&fig, "greedy", c.iter().map(|r| (r.0, r.3)).collect()));
    }
    out.files.push(write_file(&opts.out, "plotdata.csv", &emit_plotdata(&series)?)?);
    let metrics = [("runs", runs.len().to_string()), ("trend_violations", out.failures().len().to_string())];
    out.files.push(write_file(&opts.out, "run.csv", &run_record("sweep", opts, &metrics))?);
    out.files.push(timing(&opts.out, started)?);
    Ok(out)
}
