use ndarray::{Array2, ArrayView2};

use super::{Gradients, Mlp};
use crate::error::Result;

/// Worst disagreement between analytic and central-difference gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_rel_param: f64,
    pub max_rel_input: f64,
    pub entries: usize,
}

impl GradCheck {
    pub fn max_rel(&self) -> f64 {
        self.max_rel_param.max(self.max_rel_input)
    }
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

fn objective(net: &Mlp, x: ArrayView2<f64>, upstream: ArrayView2<f64>) -> Result<f64> {
    Ok((net.forward(x)? * upstream).sum())
}

/// Compares [`Mlp::backward`] with central differences of
/// `sum(forward(x) * upstream)` for every parameter and input entry.
///
/// `floor` keeps the relative error finite where both gradients vanish.
pub fn gradient_check(net: &Mlp, x: ArrayView2<f64>, upstream: ArrayView2<f64>, h: f64, floor: f64) -> Result<GradCheck> {
    let (_, tape) = net.forward_taped(x)?;
    let mut grads = Gradients::zeros_like(net);
    let input_grad = net.backward(&tape, upstream, &mut grads)?;

    let mut probe = net.clone();
    let params = net.params_flat();
    let mut max_rel_param: f64 = 0.0;
    for (i, analytic) in grads.flat().into_iter().enumerate() {
        let mut p = params.clone();
        p[i] = params[i] + h;
        probe.set_params_flat(&p)?;
        let up = objective(&probe, x, upstream)?;
        p[i] = params[i] - h;
        probe.set_params_flat(&p)?;
        let down = objective(&probe, x, upstream)?;
        max_rel_param = max_rel_param.max(relative_error(analytic, (up - down) / (2.0 * h), floor));
    }

    let mut max_rel_input: f64 = 0.0;
    let mut xs: Array2<f64> = x.to_owned();
    for idx in 0..xs.len() {
        let pos = (idx / xs.ncols(), idx % xs.ncols());
        let orig = xs[pos];
        xs[pos] = orig + h;
        let up = objective(net, xs.view(), upstream)?;
        xs[pos] = orig - h;
        let down = objective(net, xs.view(), upstream)?;
        xs[pos] = orig;
        max_rel_input = max_rel_input.max(relative_error(input_grad[pos], (up - down) / (2.0 * h), floor));
    }
    Ok(GradCheck { max_rel_param, max_rel_input, entries: params.len() + xs.len() })
}
