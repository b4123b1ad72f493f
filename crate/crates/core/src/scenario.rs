//! Random market scenarios in the units the rest of the crate uses.
//!
//! Bandwidth `b` is in MHz and compute frequency `f` in hundreds of MHz.
//! The noise density is converted to watts per bandwidth unit so the rate
//! formula can take `b` directly.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::econ::{dbm_to_watts, db_to_linear, ChannelParams, HmdParams, Scenario, SensitivityParams, TypeGrid};
use crate::error::{Error, Result};
use crate::sampling::random_probabilities;

/// How type probabilities are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QMode {
    /// Every type equally likely.
    Uniform,
    /// Independent uniforms, normalised.
    #[default]
    Random,
}

/// Parameter ranges a scenario is drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Total number of RSUs in the market. Only enters the agent's state.
    pub rsu_count: usize,
    /// Number of bandwidth-cost and compute-cost types `[M, N]`.
    pub types: [usize; 2],
    /// Stratum edges for `theta`: `theta_m` is drawn from
    /// `[edges[m], edges[m + 1]]`. Two edges are split evenly over `M` strata.
    pub theta_edges: Vec<f64>,
    pub sigma_edges: Vec<f64>,
    pub q_mode: QMode,
    pub tx_power_dbm: [f64; 2],
    /// Power gain `g^2` in dB.
    pub gain_db: [f64; 2],
    pub noise_dbm_per_hz: f64,
    /// Hz per unit of `b`.
    pub bandwidth_unit_hz: f64,
    pub spectrum_efficiency: [f64; 2],
    pub resolution: f64,
    pub framerate: f64,
    pub render_threshold: f64,
    pub zeta: [f64; 2],
    /// Per-type compute rendering coefficient range.
    pub mu: [f64; 2],
    pub alpha_imm: f64,
    pub beta_lat: f64,
    /// Latency per unit of bandwidth and distance.
    pub latency_coeff: f64,
    pub distance_m: [f64; 2],
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            rsu_count: 5,
            types: [2, 2],
            theta_edges: vec![10.0, 100.0, 200.0],
            sigma_edges: vec![10.0, 100.0, 200.0],
            q_mode: QMode::Random,
            tx_power_dbm: [20.0, 25.0],
            gain_db: [-25.0, -22.0],
            noise_dbm_per_hz: -95.0,
            bandwidth_unit_hz: 1e6,
            spectrum_efficiency: [1.0, 3.0],
            resolution: 2160.0 * 1200.0,
            framerate: 90.0,
            render_threshold: 1e7,
            zeta: [0.5, 0.5],
            mu: [1.5, 2.5],
            alpha_imm: 0.04,
            beta_lat: 1.0,
            latency_coeff: 0.004,
            distance_m: [50.0, 150.0],
        }
    }
}

fn strata(edges: &[f64], count: usize, name: &str) -> Result<Vec<(f64, f64)>> {
    let edges: Vec<f64> = match edges.len() {
        l if l == count + 1 => edges.to_vec(),
        2 => (0..=count).map(|i| edges[0] + (edges[1] - edges[0]) * i as f64 / count as f64).collect(),
        l => {
            return Err(Error::Config(format!(
                "{name} has {l} edges; expected 2 or {} for {count} types",
                count + 1
            )))
        }
    };
    if !(edges[0] > 0.0 && edges.windows(2).all(|w| w[0] < w[1])) {
        return Err(Error::Config(format!("{name} must be positive and strictly increasing")));
    }
    Ok(edges.windows(2).map(|w| (w[0], w[1])).collect())
}

fn range(name: &str, [lo, hi]: [f64; 2]) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo <= hi {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} range [{lo}, {hi}] is not ordered")))
    }
}

fn draw<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn draw_types<R: Rng + ?Sized>(rng: &mut R, strata: &[(f64, f64)]) -> Vec<f64> {
    loop {
        let v: Vec<f64> = strata.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
        if v.windows(2).all(|w| w[0] < w[1]) {
            return v;
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let [m, n] = self.types;
        if m == 0 || n == 0 {
            return Err(Error::Config("types must be at least [1, 1]".into()));
        }
        if self.rsu_count == 0 {
            return Err(Error::Config("rsu_count must be positive".into()));
        }
        strata(&self.theta_edges, m, "theta_edges")?;
        strata(&self.sigma_edges, n, "sigma_edges")?;
        for (name, r) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("gain_db", self.gain_db),
            ("spectrum_efficiency", self.spectrum_efficiency),
            ("mu", self.mu),
            ("distance_m", self.distance_m),
        ] {
            range(name, r)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.types[0], self.types[1])
    }

    /// Draws cost types from their strata and type probabilities per `q_mode`.
    pub fn sample_grid<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TypeGrid> {
        let dim = self.dim();
        let theta = draw_types(rng, &strata(&self.theta_edges, dim.0, "theta_edges")?);
        let sigma = draw_types(rng, &strata(&self.sigma_edges, dim.1, "sigma_edges")?);
        let q = match self.q_mode {
            QMode::Uniform => Array2::from_elem(dim, 1.0 / (dim.0 * dim.1) as f64),
            QMode::Random => random_probabilities(rng, dim),
        };
        TypeGrid::new(theta, sigma, q)
    }

    /// Draws one scenario. Parameter checks happen in the econ constructors.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Scenario> {
        self.validate()?;
        let dim = self.dim();
        let grid = self.sample_grid(rng)?;

        let p = Array2::from_shape_fn(dim, |_| dbm_to_watts(draw(rng, self.tx_power_dbm)));
        let g2 = Array2::from_shape_fn(dim, |_| db_to_linear(draw(rng, self.gain_db)));
        let d = Array2::from_shape_fn(dim, |_| draw(rng, self.distance_m));
        let n0 = dbm_to_watts(self.noise_dbm_per_hz) * self.bandwidth_unit_hz;
        let channel = ChannelParams::new(p, g2, n0, self.latency_coeff, d)?;

        let s_eff = draw(rng, self.spectrum_efficiency);
        let mu = Array2::from_shape_fn(dim, |_| draw(rng, self.mu));
        let hmd = HmdParams::new(
            self.resolution,
            self.framerate,
            s_eff,
            self.render_threshold,
            self.zeta[0],
            self.zeta[1],
            mu,
        )?;
        let sens = SensitivityParams::new(self.alpha_imm, self.beta_lat)?;
        Scenario::new(grid, channel, hmd, sens)
    }
}
