//! Prospect-theory transforms of AV utility.

use ndarray::Array2;

use super::types::{ChannelParams, ContractMenu, HmdParams, PtParams, SensitivityParams, TypeGrid};
use super::utility::av_utilities;
use crate::error::{Error, Result};

/// Inverse-S probability weighting `exp(-(-ln p)^coeff)`.
pub fn prob_weight(p: f64, coeff: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("probability {p} outside (0, 1]")));
    }
    if !(coeff > 0.0) {
        return Err(Error::Domain(format!("weighting coefficient {coeff} is not positive")));
    }
    Ok((-(-p.ln()).powf(coeff)).exp())
}

/// Gain/loss value of utility `u` relative to the reference point.
pub fn pt_value(u: f64, pt: &PtParams) -> f64 {
    if u >= pt.u_ref {
        (u - pt.u_ref).powf(pt.delta_plus)
    } else {
        -pt.kappa * (pt.u_ref - u).powf(pt.delta_minus)
    }
}

/// Decision weight of every type: `Q` itself, or `H(Q)` when weighting is on.
///
/// Types with zero probability keep weight zero under either mode.
pub fn type_weights(grid: &TypeGrid, pt: &PtParams) -> Result<Array2<f64>> {
    if !pt.use_weighting {
        return Ok(grid.q().clone());
    }
    let mut w = Array2::zeros(grid.dim());
    for (dst, &q) in w.iter_mut().zip(grid.q().iter()) {
        *dst = if q > 0.0 { prob_weight(q, pt.weight_coeff)? } else { 0.0 };
    }
    Ok(w)
}

/// Prospect-theory objective for precomputed per-type utilities.
pub fn pt_aggregate(utilities: &Array2<f64>, weights: &Array2<f64>, pt: &PtParams) -> f64 {
    weights
        .iter()
        .zip(utilities.iter())
        .map(|(w, u)| w * pt_value(*u, pt))
        .sum()
}

/// Prospect-theory expected utility of the AV over all RSU types.
pub fn pt_expected(
    menu: &ContractMenu,
    grid: &TypeGrid,
    ch: &ChannelParams,
    hmd: &HmdParams,
    sens: &SensitivityParams,
    pt: &PtParams,
) -> Result<f64> {
    let u = av_utilities(menu, grid, ch, hmd, sens)?;
    Ok(pt_aggregate(&u, &type_weights(grid, pt)?, pt))
}
