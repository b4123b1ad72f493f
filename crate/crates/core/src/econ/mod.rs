//! Utility mathematics for RSUs and the AV: resource costs, immersion,
//! latency, expected utility and prospect-theory transforms.
//!
//! Everything here is a pure function of its arguments.

mod prospect;
mod types;
mod units;
mod utility;

pub use prospect::{prob_weight, pt_aggregate, pt_expected, pt_value, type_weights};
pub use types::{
    ChannelParams, ContractItem, ContractMenu, HmdParams, Link, PtParams, Render, SensitivityParams, TypeGrid,
    PROBABILITY_MASS_TOL,
};
pub use units::{db_to_linear, dbm_to_watts};
pub use utility::{
    av_type_utility, av_utilities, downlink_rate, eut_expected, immersion, latency, rendering_gain, rsu_utility,
    service_value,
};

use ndarray::Array2;

use crate::error::{Error, Result};

/// Everything the AV's utility depends on apart from the menu itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: TypeGrid,
    pub channel: ChannelParams,
    pub hmd: HmdParams,
    pub sens: SensitivityParams,
}

impl Scenario {
    pub fn new(grid: TypeGrid, channel: ChannelParams, hmd: HmdParams, sens: SensitivityParams) -> Result<Self> {
        if channel.dim() != grid.dim() || hmd.dim() != grid.dim() {
            return Err(Error::dims(
                format!("{:?} per-pair parameters", grid.dim()),
                format!("channel {:?}, HMD {:?}", channel.dim(), hmd.dim()),
            ));
        }
        Ok(Self { grid, channel, hmd, sens })
    }

    /// Same scenario with a different type grid of the same shape.
    pub fn with_grid(&self, grid: TypeGrid) -> Result<Self> {
        Self::new(grid, self.channel.clone(), self.hmd.clone(), self.sens)
    }

    pub fn dim(&self) -> (usize, usize) {
        self.grid.dim()
    }

    /// `alpha M - beta D` for the type at `(m, n)` receiving `(b, f)`.
    pub fn service_value(&self, m: usize, n: usize, b: f64, f: f64) -> Result<f64> {
        service_value(b, f, &self.channel.link(m, n), &self.hmd.render(m, n), &self.sens)
    }

    pub fn av_utilities(&self, menu: &ContractMenu) -> Result<Array2<f64>> {
        av_utilities(menu, &self.grid, &self.channel, &self.hmd, &self.sens)
    }

    pub fn eut_expected(&self, menu: &ContractMenu) -> Result<f64> {
        eut_expected(menu, &self.grid, &self.channel, &self.hmd, &self.sens)
    }

    pub fn pt_expected(&self, menu: &ContractMenu, pt: &PtParams) -> Result<f64> {
        pt_expected(menu, &self.grid, &self.channel, &self.hmd, &self.sens, pt)
    }
}
