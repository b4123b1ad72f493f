//! Small fully connected networks with hand-written backpropagation.
//!
//! Every pass works on a batch: inputs are `batch x in` matrices and each
//! layer computes `act(x W + b)` with `W` stored `in x out`.

mod adam;
mod checkpoint;
mod gradcheck;

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adam::Adam;
pub use gradcheck::{gradient_check, relative_error, GradCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative given the pre-activation `z` and output `y`.
    fn slope(self, z: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `in x out`.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub act: Activation,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize, act: Activation) -> Self {
        Layer { w: Array2::zeros((fan_in, fan_out)), b: Array1::zeros(fan_out), act }
    }

    /// Weights and biases from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn uniform<R: Rng + ?Sized>(rng: &mut R, fan_in: usize, fan_out: usize, act: Activation) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let mut draw = || rng.random_range(-bound..bound);
        let w = Array2::from_shape_simple_fn((fan_in, fan_out), &mut draw);
        let b = Array1::from_shape_simple_fn(fan_out, &mut draw);
        Layer { w, b, act }
    }

    pub fn fan_in(&self) -> usize {
        self.w.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.w.ncols()
    }
}

/// Inputs and pre-activations recorded by [`Mlp::forward_taped`].
#[derive(Debug, Clone)]
pub struct GradTape {
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
    outputs: Array2<f64>,
}

impl GradTape {
    pub fn output(&self) -> &Array2<f64> {
        &self.outputs
    }
}

/// Parameter gradients with the same shapes as the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w: Vec<Array2<f64>>,
    pub b: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            w: net.layers.iter().map(|l| Array2::zeros(l.w.raw_dim())).collect(),
            b: net.layers.iter().map(|l| Array1::zeros(l.b.raw_dim())).collect(),
        }
    }

    pub fn fill_zero(&mut self) {
        self.w.iter_mut().for_each(|w| w.fill(0.0));
        self.b.iter_mut().for_each(|b| b.fill(0.0));
    }

    pub fn scale(&mut self, s: f64) {
        self.w.iter_mut().for_each(|w| *w *= s);
        self.b.iter_mut().for_each(|b| *b *= s);
    }

    /// Entries in layer order, weights before biases, row-major.
    pub fn flat(&self) -> Vec<f64> {
        self.w.iter().zip(&self.b).flat_map(|(w, b)| w.iter().chain(b.iter()).copied()).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.w.iter().all(|w| w.iter().all(|v| v.is_finite())) && self.b.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

impl Mlp {
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Domain("a network needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].fan_out() != pair[1].fan_in() {
                return Err(Error::dims(
                    format!("layer {} input width {}", i + 1, pair[0].fan_out()),
                    pair[1].fan_in(),
                ));
            }
        }
        for (i, l) in layers.iter().enumerate() {
            if l.b.len() != l.fan_out() {
                return Err(Error::dims(format!("layer {i} bias length {}", l.fan_out()), l.b.len()));
            }
        }
        Ok(Mlp { layers })
    }

    /// Randomly initialised network with the given widths, `hidden` on every
    /// layer but the last and `output` on the last.
    pub fn new<R: Rng + ?Sized>(rng: &mut R, widths: &[usize], hidden: Activation, output: Activation) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::Domain(format!("invalid layer widths {widths:?}")));
        }
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, w)| Layer::uniform(rng, w[0], w[1], if i == last { output } else { hidden }))
            .collect();
        Mlp::from_layers(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].fan_out()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Parameters in the order used by [`Gradients::flat`].
    pub fn params_flat(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(l.b.iter()).copied()).collect()
    }

    pub fn set_params_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::dims(self.param_count(), values.len()));
        }
        let mut it = values.iter().copied();
        for l in &mut self.layers {
            l.w.iter_mut().chain(l.b.iter_mut()).for_each(|p| *p = it.next().expect("length checked"));
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.layers.iter().all(|l| l.w.iter().chain(l.b.iter()).all(|v| v.is_finite()))
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::dims(format!("input width {}", self.input_dim()), x.ncols()));
        }
        Ok(())
    }

    fn layer_forward(layer: &Layer, x: &ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
        let pre = x.dot(&layer.w) + &layer.b;
        let out = pre.mapv(|z| layer.act.apply(z));
        (pre, out)
    }

    /// Batch forward pass.
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut h = Self::layer_forward(&self.layers[0], &x).1;
        for layer in &self.layers[1..] {
            h = Self::layer_forward(layer, &h.view()).1;
        }
        Ok(h)
    }

    /// Forward pass for one input vector.
    pub fn forward_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        Ok(self.forward(x)?.into_raw_vec_and_offset().0)
    }

    /// Forward pass that records what [`Mlp::backward`] needs.
    pub fn forward_taped(&self, x: ArrayView2<f64>) -> Result<(Array2<f64>, GradTape)> {
        self.check_input(&x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        for layer in &self.layers {
            let (z, out) = Self::layer_forward(layer, &h.view());
            inputs.push(h);
            pre.push(z);
            h = out;
        }
        let tape = GradTape { inputs, pre, outputs: h.clone() };
        Ok((h, tape))
    }

    /// Adds the gradients of `sum(output * upstream)` with respect to every
    /// parameter into `grads` and returns the gradient with respect to the input.
    pub fn backward(&self, tape: &GradTape, upstream: ArrayView2<f64>, grads: &mut Gradients) -> Result<Array2<f64>> {
        if upstream.dim() != tape.outputs.dim() {
            return Err(Error::dims(format!("upstream {:?}", tape.outputs.dim()), format!("{:?}", upstream.dim())));
        }
        if tape.inputs.len() != self.layers.len() || grads.w.len() != self.layers.len() {
            return Err(Error::dims(format!("{} layers", self.layers.len()), "tape or gradients of another net"));
        }
        let mut delta = upstream.to_owned();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let out = if i + 1 == self.layers.len() { &tape.outputs } else { &tape.inputs[i + 1] };
            Zip::from(&mut delta).and(&tape.pre[i]).and(out).for_each(|d, &z, &y| *d *= layer.act.slope(z, y));
            grads.w[i] += &tape.inputs[i].t().dot(&delta);
            grads.b[i] += &delta.sum_axis(Axis(0));
            delta = delta.dot(&layer.w.t());
        }
        Ok(delta)
    }

    /// `self <- tau * online + (1 - tau) * self`.
    pub fn soft_update_from(&mut self, online: &Mlp, tau: f64) -> Result<()> {
        if self.param_count() != online.param_count() || self.layers.len() != online.layers.len() {
            return Err(Error::dims("networks of the same shape", "different shapes"));
        }
        for (t, o) in self.layers.iter_mut().zip(&online.layers) {
            if t.w.dim() != o.w.dim() {
                return Err(Error::dims(format!("{:?}", o.w.dim()), format!("{:?}", t.w.dim())));
            }
            Zip::from(&mut t.w).and(&o.w).for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
            Zip::from(&mut t.b).and(&o.b).for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
        }
        Ok(())
    }

    /// Euclidean distance between the parameters of two same-shaped nets.
    pub fn distance(&self, other: &Mlp) -> f64 {
        self.params_flat().iter().zip(other.params_flat()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}
