use std::fs;
use std::path::Path;

use super::*;
use crate::error::Error;

fn quick_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.search.grid_points = 5;
    c.search.refine_iters = 20;
    c.training.episodes = 3;
    c.training.steps_per_episode = 3;
    c.training.batch_size = 8;
    c.training.warmup = 4;
    c.training.hidden_width = 16;
    c.training.hidden_layers = 2;
    c.training.actor_lr = 1e-3;
    c.training.critic_lr = 1e-3;
    c.final_epochs = 2;
    c
}

fn opts(config: ExperimentConfig, out: &Path) -> RunOptions {
    RunOptions::new(config, None, None, Some(out.to_path_buf())).unwrap()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = walk(dir)
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "ckpt"))
        .map(|p| (p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn canonical_form_round_trips() {
    let c = quick_config();
    let back = ExperimentConfig::from_toml(&c.canonical()).unwrap();
    assert_eq!(ExperimentConfig { output_dir: c.output_dir.clone(), ..back }, c);
    assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
}

#[test]
fn unknown_and_invalid_keys_are_rejected() {
    assert!(matches!(ExperimentConfig::from_toml("sede = 3"), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::from_toml("[training]\nepisodez = 3"), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::from_toml("[pt]\ndelta_plus = 2.0"), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::from_toml("[search]\ngrid_points = 1"), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::from_toml("seed = \"x\""), Err(Error::Config(_))));
}

#[test]
fn hash_tracks_content_not_location() {
    let a = quick_config();
    let h = a.hash();
    assert_eq!(h.len(), 64);
    assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
    let moved = ExperimentConfig { output_dir: "elsewhere".into(), ..a.clone() };
    assert_eq!(moved.hash(), h);
    let reseeded = ExperimentConfig { seed: 2, ..a.clone() };
    assert_ne!(reseeded.hash(), h);
    let parsed = ExperimentConfig::from_toml("seed = 1\n[search]\ngrid_points = 9\n").unwrap();
    assert_eq!(parsed.hash(), ExperimentConfig::default().hash());
}

#[test]
fn seed_precedence() {
    assert_eq!(resolve_seed(Some(4), Some("5"), 6).unwrap(), 4);
    assert_eq!(resolve_seed(None, Some(" 5 "), 6).unwrap(), 5);
    assert_eq!(resolve_seed(None, None, 6).unwrap(), 6);
    assert!(matches!(resolve_seed(None, Some("five"), 6), Err(Error::Usage(_))));
    let o = RunOptions::new(quick_config(), None, Some("9"), None).unwrap();
    assert_eq!((o.seed, o.config.seed, o.out.as_path()), (9, 9, Path::new("out")));
}

#[test]
fn plotdata_layout() {
    assert!(matches!(emit_plotdata(&[]), Err(Error::Usage(_))));
    let one = emit_plotdata(&[PlotSeries::new("fig", "gdm", vec![(0.0, 1.5), (1.0, 2.0)])]).unwrap();
    assert_eq!(one, "figure_id,series,x,y\nfig,gdm,0,1.5\nfig,gdm,1,2\n");
    assert!(emit_plotdata(&[PlotSeries::new("a,b", "s", vec![])]).is_err());
}

#[test]
fn solve_is_reproducible_and_verifies() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let s1 = cmd_solve(&opts(quick_config(), d1.path())).unwrap();
    cmd_solve(&opts(quick_config(), d2.path())).unwrap();
    assert!(s1.failures().is_empty(), "{:?}", s1.failures());
    assert_eq!(csv_files(d1.path()), csv_files(d2.path()));
    assert!(d1.path().join("timing.txt").exists());

    let menu = d1.path().join("solve_menu.csv");
    let vdir = tempfile::tempdir().unwrap();
    let v = cmd_verify(&opts(quick_config(), vdir.path()), Some(&menu)).unwrap();
    assert!(v.failures().is_empty(), "{:?}", v.failures());
    assert_eq!(v.menu_report.unwrap().violation_count(), 0);
}

#[test]
fn verify_flags_a_bad_menu() {
    let dir = tempfile::tempdir().unwrap();
    let menu = dir.path().join("menu.csv");
    fs::write(&menu, "kind,m,n,b,f,r\ntype,1,1,0,0,0\ntype,1,2,0,0,0\ntype,2,1,50,20,0\ntype,2,2,0,0,0\n").unwrap();
    let v = cmd_verify(&opts(quick_config(), dir.path()), Some(&menu)).unwrap();
    assert!(!v.menu_report.as_ref().unwrap().feasible());
    assert_eq!(v.failures().len(), 1);
    let missing = dir.path().join("absent.csv");
    assert!(matches!(cmd_verify(&opts(quick_config(), dir.path()), Some(&missing)), Err(Error::Io { .. })));
}

#[test]
fn train_is_reproducible() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let t1 = cmd_train(&opts(quick_config(), d1.path())).unwrap();
    cmd_train(&opts(quick_config(), d2.path())).unwrap();
    assert_eq!(csv_files(d1.path()), csv_files(d2.path()));
    let plot = fs::read_to_string(d1.path().join("plotdata.csv")).unwrap();
    assert_eq!(plot.lines().count(), 1 + 3 * 3);
    assert!(t1.final_means.is_some());
    let log = fs::read_to_string(d1.path().join("train_log.csv")).unwrap();
    assert_eq!(log.lines().next().unwrap(), crate::gdm::TrainLog::HEADER);
    assert_eq!(log.lines().count(), 1 + 9);
}

#[test]
fn sweep_writes_one_file_per_setting() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = quick_config();
    c.sweep = SweepConfig { u_ref: vec![5.0, 10.0], kappa: vec![0.5], kappa_u_ref: 10.0, seed_count: 2 };
    let s = cmd_sweep(&opts(c, dir.path())).unwrap();
    for name in ["u_ref_5.csv", "u_ref_10.csv", "kappa_0.5.csv"] {
        assert!(dir.path().join("sweep").join(name).exists(), "{name}");
    }
    assert_eq!(s.points.len(), 3 * 2);
    assert_eq!(s.curve("u_ref").len(), 2);
    // The default point appears in both sweeps and trains once.
    let same = |p: &str| s.points.iter().filter(|q| q.parameter == p && q.value == if p == "u_ref" { 10.0 } else { 0.5 }).map(|q| q.gdm).collect::<Vec<_>>();
    assert_eq!(same("u_ref"), same("kappa"));
    let plot = fs::read_to_string(dir.path().join("plotdata.csv")).unwrap();
    assert_eq!(plot.lines().count(), 1 + 3 * 2 + 3);
}

#[test]
fn property_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    let v = cmd_verify(&opts(quick_config(), dir.path()), None).unwrap();
    assert!(v.failures().is_empty(), "{:?}", v.failures());
    assert!(v.suites.iter().all(|s| s.cases > 0));
}
