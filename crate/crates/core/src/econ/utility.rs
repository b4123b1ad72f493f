use ndarray::Array2;

use super::types::{ChannelParams, ContractItem, ContractMenu, HmdParams, Link, Render, SensitivityParams, TypeGrid};
use crate::error::{Error, Result};

/// Utility of a type-(theta, sigma) RSU holding `item`: `R - b^2/theta - f^2/sigma`.
pub fn rsu_utility(item: &ContractItem, theta: f64, sigma: f64) -> Result<f64> {
    if !(theta > 0.0 && sigma > 0.0) {
        return Err(Error::Domain(format!("RSU type ({theta}, {sigma}) must be positive")));
    }
    Ok(item.r - item.b * item.b / theta - item.f * item.f / sigma)
}

/// Shannon-style downlink rate `b ln(1 + p g^2 / (b N0))`.
///
/// At `b = 0` this returns the limit value 0 instead of evaluating `0 * inf`.
pub fn downlink_rate(b: f64, link: &Link) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    b * (link.p * link.g2 / (b * link.n0)).ln_1p()
}

/// Log rendering gain `ln(D v (zeta1 S b + zeta2 mu f^2) / T_th)`.
pub fn rendering_gain(b: f64, f: f64, render: &Render) -> Result<f64> {
    let load = render.zeta1 * render.s_eff * b + render.zeta2 * render.mu * f * f;
    let arg = render.resolution * render.framerate * load;
    if !(arg > 0.0) {
        return Err(Error::Domain(format!(
            "rendering load must be positive (b = {b}, f = {f})"
        )));
    }
    Ok((arg / render.t_th).ln())
}

/// Immersion metric: downlink rate times rendering gain. Zero bandwidth
/// gives zero immersion whatever the frequency.
pub fn immersion(b: f64, f: f64, link: &Link, render: &Render) -> Result<f64> {
    if b <= 0.0 {
        return Ok(0.0);
    }
    Ok(downlink_rate(b, link) * rendering_gain(b, f, render)?)
}

/// Transmission latency `c d b`.
pub fn latency(b: f64, link: &Link) -> f64 {
    link.c * link.d * b
}

/// The AV's benefit from an item before paying for it: `alpha M - beta D`.
pub fn service_value(b: f64, f: f64, link: &Link, render: &Render, sens: &SensitivityParams) -> Result<f64> {
    Ok(sens.alpha_imm * immersion(b, f, link, render)? - sens.beta_lat * latency(b, link))
}

/// AV utility from one type's item: `alpha M - beta D - R`.
pub fn av_type_utility(item: &ContractItem, link: &Link, render: &Render, sens: &SensitivityParams) -> Result<f64> {
    Ok(service_value(item.b, item.f, link, render, sens)? - item.r)
}

/// Per-type AV utilities for a whole menu.
pub fn av_utilities(
    menu: &ContractMenu,
    grid: &TypeGrid,
    ch: &ChannelParams,
    hmd: &HmdParams,
    sens: &SensitivityParams,
) -> Result<Array2<f64>> {
    menu.expect_dims(grid)?;
    if ch.dim() != grid.dim() || hmd.dim() != grid.dim() {
        return Err(Error::dims(
            format!("{:?} channel and HMD parameters", grid.dim()),
            format!("channel {:?}, HMD {:?}", ch.dim(), hmd.dim()),
        ));
    }
    let (rows, cols) = grid.dim();
    let mut out = Array2::zeros((rows, cols));
    for m in 0..rows {
        for n in 0..cols {
            out[(m, n)] = av_type_utility(&menu.items()[(m, n)], &ch.link(m, n), &hmd.render(m, n), sens)?;
        }
    }
    Ok(out)
}

/// Expected AV utility under the type distribution.
pub fn eut_expected(
    menu: &ContractMenu,
    grid: &TypeGrid,
    ch: &ChannelParams,
    hmd: &HmdParams,
    sens: &SensitivityParams,
) -> Result<f64> {
    let u = av_utilities(menu, grid, ch, hmd, sens)?;
    Ok(grid.q().iter().zip(u.iter()).map(|(q, u)| q * u).sum())
}
