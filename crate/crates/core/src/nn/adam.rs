use ndarray::Zip;

use super::{Gradients, Mlp};
use crate::error::{Error, Result};

/// Adaptive-moment optimiser with bias correction. Steps descend the gradient.
#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Gradients,
    v: Gradients,
}

impl Adam {
    pub fn new(net: &Mlp) -> Self {
        Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: Gradients::zeros_like(net), v: Gradients::zeros_like(net) }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients, lr: f64) -> Result<()> {
        if grads.w.len() != self.m.w.len() {
            return Err(Error::dims(format!("{} layers of gradients", self.m.w.len()), grads.w.len()));
        }
        self.t += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let c1 = 1.0 - b1.powf(self.t as f64);
        let c2 = 1.0 - b2.powf(self.t as f64);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for (i, layer) in net.layers_mut().iter_mut().enumerate() {
            if layer.w.dim() != grads.w[i].dim() {
                return Err(Error::dims(format!("{:?}", layer.w.dim()), format!("{:?}", grads.w[i].dim())));
            }
            Zip::from(&mut layer.w)
                .and(&mut self.m.w[i])
                .and(&mut self.v.w[i])
                .and(&grads.w[i])
                .for_each(|p, m, v, &g| update(p, m, v, g));
            Zip::from(&mut layer.b)
                .and(&mut self.m.b[i])
                .and(&mut self.v.b[i])
                .and(&grads.b[i])
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
        Ok(())
    }
}
