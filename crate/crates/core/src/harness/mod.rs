//! Experiment configuration, the `solve`/`train`/`verify`/`sweep` commands
//! and their CSV outputs.
//!
//! Every command writes into its output directory:
//! `run.csv` (`key,value` rows naming the command, config hash, seed and
//! headline metrics) plus command-specific CSVs. Wall-clock time goes to
//! `timing.txt` so the CSVs stay byte-identical for a fixed config and seed.

mod commands;
mod plot;
mod verify;

pub use commands::{
    cmd_solve, cmd_sweep, cmd_train, train_run, SolveSummary, SweepPoint, SweepSummary, TrainOutcome, TrainSummary,
};
pub use plot::{emit_plotdata, PlotSeries, PLOTDATA_HEADER};
pub use verify::{cmd_verify, property_suites, SuiteOutcome, VerifySummary};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::econ::PtParams;
use crate::error::{Error, Result};
use crate::gdm::TrainingConfig;
use crate::scenario::ScenarioConfig;
use crate::solver::SearchSpec;

/// Environment variable that overrides the config seed.
pub const SEED_ENV: &str = "TWIN_CONTRACT_SEED";

/// Settings swept by `sweep`. Each `u_ref` value runs with the config's other
/// PT parameters; each `kappa` value runs with `U_ref = kappa_u_ref`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub u_ref: Vec<f64>,
    pub kappa: Vec<f64>,
    pub kappa_u_ref: f64,
    /// Runs per setting, with seeds `seed, seed + 1, ...` shared by every setting.
    pub seed_count: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            u_ref: vec![5.0, 10.0, 15.0, 20.0],
            kappa: vec![0.5, 1.0, 1.5, 2.0],
            kappa_u_ref: 10.0,
            seed_count: 3,
        }
    }
}

/// Everything a command needs. Unknown keys are rejected and every key is
/// optional, falling back to the defaults documented on each field's type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Trailing epochs averaged into a training run's final reward.
    pub final_epochs: usize,
    pub scenario: ScenarioConfig,
    pub pt: PtParams,
    pub training: TrainingConfig,
    pub search: SearchSpec,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            output_dir: PathBuf::from("out"),
            final_epochs: 20,
            scenario: ScenarioConfig::default(),
            pt: PtParams::default(),
            training: TrainingConfig::default(),
            search: SearchSpec::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.pt.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.training.validate()?;
        self.search.validate()?;
        self.training.action_box(self.search.b_range, self.search.f_range)?;
        if self.sweep.seed_count == 0 || self.final_epochs == 0 {
            return Err(Error::Config("final_epochs and sweep.seed_count must be positive".into()));
        }
        Ok(())
    }

    /// Canonical TOML of everything that affects results. The output
    /// directory is left out, so moving a run does not change its hash.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        toml::to_string(&c).expect("config serialises")
    }

    /// Hex SHA-256 of [`ExperimentConfig::canonical`].
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Seed precedence: command-line flag, then environment variable, then config.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, config: u64) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{SEED_ENV}={v:?} is not a nonnegative integer"))),
        None => Ok(config),
    }
}

/// A resolved command invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub out: PathBuf,
}

impl RunOptions {
    /// Applies seed precedence and the `--out` override to a loaded config.
    pub fn new(config: ExperimentConfig, seed_flag: Option<u64>, seed_env: Option<&str>, out: Option<PathBuf>) -> Result<Self> {
        let seed = resolve_seed(seed_flag, seed_env, config.seed)?;
        let out = out.unwrap_or_else(|| config.output_dir.clone());
        Ok(RunOptions { config: ExperimentConfig { seed, ..config }, seed, out })
    }
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// `run.csv`: command, config hash and seed, then the given metrics.
pub(crate) fn run_record(command: &str, opts: &RunOptions, metrics: &[(&str, String)]) -> String {
    let mut s = String::from("key,value\n");
    let _ = writeln!(s, "command,{command}");
    let _ = writeln!(s, "config_hash,{}", opts.config.hash());
    let _ = writeln!(s, "seed,{}", opts.seed);
    for (k, v) in metrics {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

#[cfg(test)]
mod tests;
