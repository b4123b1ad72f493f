//! Allocation-free constraint kernels over row-major flat buffers.
//!
//! Index `t = m * cols + n`. `x[m] = 1/theta_m`, `y[n] = 1/sigma_n`,
//! `bsq[t] = b_t^2`, `fsq[t] = f_t^2`.

#[derive(Debug, Clone)]
pub(crate) struct Costs {
    pub rows: usize,
    pub cols: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Costs {
    pub fn new(theta: &[f64], sigma: &[f64]) -> Self {
        Costs {
            rows: theta.len(),
            cols: sigma.len(),
            x: theta.iter().map(|t| 1.0 / t).collect(),
            y: sigma.iter().map(|s| 1.0 / s).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    fn xy(&self, t: usize) -> (f64, f64) {
        (self.x[t / self.cols], self.y[t % self.cols])
    }

    /// Cost type `t` pays for resources `(bsq, fsq)`.
    #[inline]
    pub fn cost(&self, t: usize, bsq: f64, fsq: f64) -> f64 {
        let (x, y) = self.xy(t);
        x * bsq + y * fsq
    }
}

/// Utilities from the LDIC recurrence: `V_0 = 0`, then each type takes the
/// largest bound implied by its in-range lower neighbours.
pub(crate) fn recurrence(c: &Costs, bsq: &[f64], fsq: &[f64], v: &mut [f64]) {
    let cols = c.cols;
    for m in 0..c.rows {
        for n in 0..cols {
            let t = m * cols + n;
            if t == 0 {
                v[0] = 0.0;
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for (dm, dn) in [(0usize, 1usize), (1, 0), (1, 1)] {
                if m < dm || n < dn {
                    continue;
                }
                let (sm, sn) = (m - dm, n - dn);
                let s = sm * cols + sn;
                let bound = v[s] + (c.x[sm] - c.x[m]) * bsq[s] + (c.y[sn] - c.y[n]) * fsq[s];
                best = best.max(bound);
            }
            v[t] = best;
        }
    }
}

/// Whether every type weakly prefers its own item over every other one.
pub(crate) fn ic_holds(c: &Costs, bsq: &[f64], fsq: &[f64], r: &[f64], tol: f64) -> bool {
    let k = c.len();
    for t in 0..k {
        let own = r[t] - c.cost(t, bsq[t], fsq[t]);
        for s in 0..k {
            if s != t && own - (r[s] - c.cost(t, bsq[s], fsq[s])) < -tol {
                return false;
            }
        }
    }
    true
}

/// Longest-path relaxation from the IR bounds. Returns the number of sweeps
/// used, or `None` when the constraint graph has a positive cycle.
pub(crate) fn minimal_rewards(c: &Costs, bsq: &[f64], fsq: &[f64], r: &mut [f64]) -> Option<usize> {
    let k = c.len();
    for t in 0..k {
        r[t] = c.cost(t, bsq[t], fsq[t]);
    }
    for pass in 1..=k {
        let mut changed = false;
        for t in 0..k {
            let own = c.cost(t, bsq[t], fsq[t]);
            for s in 0..k {
                if s == t {
                    continue;
                }
                let bound = r[s] + own - c.cost(t, bsq[s], fsq[s]);
                if bound > r[t] + 1e-12 * (1.0 + r[t].abs()) {
                    r[t] = bound;
                    changed = true;
                }
            }
        }
        if !changed {
            return Some(pass);
        }
    }
    None
}
