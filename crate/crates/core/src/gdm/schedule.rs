use crate::error::{Error, Result};

/// Per-step noise levels `iota_k` with `lambda_k = 1 - iota_k` and
/// `lambda_hat_k = lambda_1 * ... * lambda_k`. Steps are numbered from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    iota: Vec<f64>,
    lambda: Vec<f64>,
    lambda_hat: Vec<f64>,
}

impl NoiseSchedule {
    pub fn new(iota: Vec<f64>) -> Result<Self> {
        if iota.is_empty() {
            return Err(Error::Domain("noise schedule needs at least one step".into()));
        }
        if let Some(bad) = iota.iter().find(|&&i| !(i > 0.0 && i < 1.0)) {
            return Err(Error::Domain(format!("noise level {bad} outside (0, 1)")));
        }
        let lambda: Vec<f64> = iota.iter().map(|i| 1.0 - i).collect();
        let lambda_hat = lambda
            .iter()
            .scan(1.0, |acc, l| {
                *acc *= l;
                Some(*acc)
            })
            .collect();
        Ok(NoiseSchedule { iota, lambda, lambda_hat })
    }

    /// `steps` levels spaced evenly over `[lo, hi]`; a single step uses `lo`.
    pub fn linear(steps: usize, lo: f64, hi: f64) -> Result<Self> {
        let iota = (0..steps)
            .map(|i| if steps == 1 { lo } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 })
            .collect();
        Self::new(iota)
    }

    pub fn steps(&self) -> usize {
        self.iota.len()
    }

    fn index(&self, k: usize) -> Result<usize> {
        if k == 0 || k > self.steps() {
            return Err(Error::IndexOutOfRange(format!("diffusion step {k} outside 1..={}", self.steps())));
        }
        Ok(k - 1)
    }

    pub fn iota(&self, k: usize) -> Result<f64> {
        Ok(self.iota[self.index(k)?])
    }

    pub fn lambda(&self, k: usize) -> Result<f64> {
        Ok(self.lambda[self.index(k)?])
    }

    pub fn lambda_hat(&self, k: usize) -> Result<f64> {
        Ok(self.lambda_hat[self.index(k)?])
    }

    /// Coefficient on the predicted noise in the reverse step from `k`.
    pub fn eps_coeff(&self, k: usize) -> Result<f64> {
        let i = self.index(k)?;
        Ok(self.iota[i] / (self.lambda[i] * (1.0 - self.lambda_hat[i])).sqrt())
    }

    /// Standard deviation of the fresh noise in the reverse step from `k`.
    /// Zero for the last step, which makes the output deterministic.
    pub fn reverse_std(&self, k: usize) -> Result<f64> {
        let i = self.index(k)?;
        Ok(if k == 1 { 0.0 } else { self.iota[i].sqrt() })
    }
}

/// Samples `x_k` given `x_0` in closed form:
/// `sqrt(lambda_hat_k) x_0 + sqrt(1 - lambda_hat_k) noise`.
pub fn forward_diffuse(x0: &[f64], k: usize, schedule: &NoiseSchedule, noise: &[f64]) -> Result<Vec<f64>> {
    if noise.len() != x0.len() {
        return Err(Error::dims(x0.len(), noise.len()));
    }
    let lh = schedule.lambda_hat(k)?;
    let (a, s) = (lh.sqrt(), (1.0 - lh).sqrt());
    Ok(x0.iter().zip(noise).map(|(x, z)| a * x + s * z).collect())
}

/// One forward kernel step: `sqrt(lambda_k) x_{k-1} + sqrt(iota_k) noise`.
pub fn forward_step(x_prev: &[f64], k: usize, schedule: &NoiseSchedule, noise: &[f64]) -> Result<Vec<f64>> {
    if noise.len() != x_prev.len() {
        return Err(Error::dims(x_prev.len(), noise.len()));
    }
    let (a, s) = (schedule.lambda(k)?.sqrt(), schedule.iota(k)?.sqrt());
    Ok(x_prev.iter().zip(noise).map(|(x, z)| a * x + s * z).collect())
}
