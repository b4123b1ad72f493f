use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of the type distribution.
pub const PROBABILITY_MASS_TOL: f64 = 1e-12;

/// The M x N lattice of RSU types.
///
/// `theta[m]` divides the bandwidth cost `b^2` and `sigma[n]` divides the
/// compute cost `f^2`. Both sequences are strictly increasing, so index
/// `(0, 0)` is the costliest type and `(M-1, N-1)` the cheapest.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeGrid {
    theta: Vec<f64>,
    sigma: Vec<f64>,
    q: Array2<f64>,
}

impl TypeGrid {
    pub fn new(theta: Vec<f64>, sigma: Vec<f64>, q: Array2<f64>) -> Result<Self> {
        if theta.is_empty() || sigma.is_empty() {
            return Err(Error::Domain("type grid needs at least one type per axis".into()));
        }
        if q.dim() != (theta.len(), sigma.len()) {
            return Err(Error::dims(
                format!("{}x{} probability matrix", theta.len(), sigma.len()),
                format!("{}x{}", q.nrows(), q.ncols()),
            ));
        }
        check_increasing("theta", &theta)?;
        check_increasing("sigma", &sigma)?;
        if let Some(p) = q.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::Domain(format!("type probability {p} is not a probability")));
        }
        let mass: f64 = q.sum();
        if (mass - 1.0).abs() > PROBABILITY_MASS_TOL {
            return Err(Error::Domain(format!("type probabilities sum to {mass}, not 1")));
        }
        Ok(Self { theta, sigma, q })
    }

    /// Grid with equal probability on every type.
    pub fn uniform(theta: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let cells = (theta.len() * sigma.len()).max(1);
        let q = Array2::from_elem((theta.len(), sigma.len()), 1.0 / cells as f64);
        Self::new(theta, sigma, q)
    }

    pub fn rows(&self) -> usize {
        self.theta.len()
    }

    pub fn cols(&self) -> usize {
        self.sigma.len()
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn q(&self) -> &Array2<f64> {
        &self.q
    }
}

fn check_increasing(name: &str, xs: &[f64]) -> Result<()> {
    if let Some(x) = xs.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!("{name} entry {x} is not positive")));
    }
    if let Some(w) = xs.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Domain(format!(
            "{name} must be strictly increasing, got {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// One contract item: bandwidth, CPU frequency and the reward paid for them.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ContractItem {
    pub b: f64,
    pub f: f64,
    pub r: f64,
}

impl ContractItem {
    pub fn new(b: f64, f: f64, r: f64) -> Self {
        Self { b, f, r }
    }
}

/// An M x N menu of contract items, one per RSU type.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractMenu {
    items: Array2<ContractItem>,
}

impl ContractMenu {
    pub fn new(items: Array2<ContractItem>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Domain("contract menu is empty".into()));
        }
        if let Some(it) = items
            .iter()
            .find(|it| !(it.b >= 0.0 && it.f >= 0.0 && it.r >= 0.0))
        {
            return Err(Error::Domain(format!("contract item {it:?} has a negative field")));
        }
        Ok(Self { items })
    }

    /// Assemble a menu from per-type bandwidth, frequency and reward grids.
    pub fn from_grids(b: &Array2<f64>, f: &Array2<f64>, r: &Array2<f64>) -> Result<Self> {
        if b.dim() != f.dim() || b.dim() != r.dim() {
            return Err(Error::dims(
                format!("{:?} for every grid", b.dim()),
                format!("f {:?}, r {:?}", f.dim(), r.dim()),
            ));
        }
        let items = Array2::from_shape_fn(b.dim(), |ix| ContractItem::new(b[ix], f[ix], r[ix]));
        Self::new(items)
    }

    /// Menu with every cell set to the same item.
    pub fn constant(dim: (usize, usize), item: ContractItem) -> Result<Self> {
        Self::new(Array2::from_elem(dim, item))
    }

    pub fn dim(&self) -> (usize, usize) {
        self.items.dim()
    }

    pub fn get(&self, m: usize, n: usize) -> Option<&ContractItem> {
        self.items.get((m, n))
    }

    pub fn items(&self) -> &Array2<ContractItem> {
        &self.items
    }

    pub fn bandwidth(&self) -> Array2<f64> {
        self.items.mapv(|it| it.b)
    }

    pub fn frequency(&self) -> Array2<f64> {
        self.items.mapv(|it| it.f)
    }

    pub fn rewards(&self) -> Array2<f64> {
        self.items.mapv(|it| it.r)
    }

    /// Fails unless the menu has one item per type of `grid`.
    pub fn expect_dims(&self, grid: &TypeGrid) -> Result<()> {
        if self.dim() != grid.dim() {
            return Err(Error::dims(format!("{:?} menu", grid.dim()), format!("{:?}", self.dim())));
        }
        Ok(())
    }
}

/// Radio link between the AV and one RSU type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    /// Transmit power (W).
    pub p: f64,
    /// Squared channel gain (linear).
    pub g2: f64,
    /// Noise spectral density (W per bandwidth unit).
    pub n0: f64,
    /// Latency per bandwidth unit per metre.
    pub c: f64,
    /// Distance (m).
    pub d: f64,
}

/// Per-type-pair channel parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub p: Array2<f64>,
    pub g2: Array2<f64>,
    pub n0: f64,
    pub c: f64,
    pub d: Array2<f64>,
}

impl ChannelParams {
    pub fn new(p: Array2<f64>, g2: Array2<f64>, n0: f64, c: f64, d: Array2<f64>) -> Result<Self> {
        if p.dim() != g2.dim() || p.dim() != d.dim() {
            return Err(Error::dims(format!("{:?}", p.dim()), format!("g2 {:?}, d {:?}", g2.dim(), d.dim())));
        }
        if p.iter().chain(g2.iter()).any(|v| !(*v > 0.0)) || !(n0 > 0.0) {
            return Err(Error::Domain("power, gain and noise density must be positive".into()));
        }
        if !(c >= 0.0) || d.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Domain("latency coefficient and distances must be nonnegative".into()));
        }
        Ok(Self { p, g2, n0, c, d })
    }

    /// Same link for every type pair.
    pub fn uniform(dim: (usize, usize), link: Link) -> Result<Self> {
        Self::new(
            Array2::from_elem(dim, link.p),
            Array2::from_elem(dim, link.g2),
            link.n0,
            link.c,
            Array2::from_elem(dim, link.d),
        )
    }

    pub fn dim(&self) -> (usize, usize) {
        self.p.dim()
    }

    pub fn link(&self, m: usize, n: usize) -> Link {
        Link {
            p: self.p[(m, n)],
            g2: self.g2[(m, n)],
            n0: self.n0,
            c: self.c,
            d: self.d[(m, n)],
        }
    }
}

/// HMD rendering parameters seen through one RSU type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Render {
    pub resolution: f64,
    pub framerate: f64,
    pub s_eff: f64,
    pub t_th: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HmdParams {
    /// Pixel count D.
    pub resolution: f64,
    /// Frames per second v.
    pub framerate: f64,
    /// Spectrum efficiency S.
    pub s_eff: f64,
    /// Rendering threshold T_th.
    pub t_th: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    /// Effective capacitance coefficient per type pair.
    pub mu: Array2<f64>,
}

impl HmdParams {
    pub fn new(
        resolution: f64,
        framerate: f64,
        s_eff: f64,
        t_th: f64,
        zeta1: f64,
        zeta2: f64,
        mu: Array2<f64>,
    ) -> Result<Self> {
        if !(zeta1 > 0.0 && zeta2 > 0.0) || (zeta1 + zeta2 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "rendering weights must be positive and sum to 1, got {zeta1} and {zeta2}"
            )));
        }
        if !(t_th > 0.0) || mu.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Domain("rendering threshold and capacitance must be positive".into()));
        }
        if !(resolution > 0.0 && framerate > 0.0 && s_eff > 0.0) {
            return Err(Error::Domain("resolution, framerate and spectrum efficiency must be positive".into()));
        }
        Ok(Self { resolution, framerate, s_eff, t_th, zeta1, zeta2, mu })
    }

    pub fn dim(&self) -> (usize, usize) {
        self.mu.dim()
    }

    pub fn render(&self, m: usize, n: usize) -> Render {
        Render {
            resolution: self.resolution,
            framerate: self.framerate,
            s_eff: self.s_eff,
            t_th: self.t_th,
            zeta1: self.zeta1,
            zeta2: self.zeta2,
            mu: self.mu[(m, n)],
        }
    }
}

/// How strongly the AV values immersion (alpha) and dislikes latency (beta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityParams {
    pub alpha_imm: f64,
    pub beta_lat: f64,
}

impl SensitivityParams {
    pub fn new(alpha_imm: f64, beta_lat: f64) -> Result<Self> {
        if !(alpha_imm >= 0.0 && beta_lat >= 0.0) {
            return Err(Error::Domain("sensitivities must be nonnegative".into()));
        }
        Ok(Self { alpha_imm, beta_lat })
    }
}

/// Prospect-theory parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PtParams {
    /// Gain curvature, in (0, 1].
    pub delta_plus: f64,
    /// Loss curvature, in (0, 1].
    pub delta_minus: f64,
    /// Loss aversion.
    pub kappa: f64,
    /// Reference utility separating gains from losses.
    pub u_ref: f64,
    /// Exponent of the probability weighting function.
    pub weight_coeff: f64,
    /// Weight outcomes by `prob_weight(Q)` instead of `Q`.
    pub use_weighting: bool,
}

impl PtParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |d: f64| d > 0.0 && d <= 1.0;
        if !unit(self.delta_plus) || !unit(self.delta_minus) {
            return Err(Error::Domain(format!(
                "gain/loss exponents must lie in (0, 1], got {} and {}",
                self.delta_plus, self.delta_minus
            )));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::Domain(format!("loss aversion {} is negative", self.kappa)));
        }
        if !(self.weight_coeff > 0.0) {
            return Err(Error::Domain(format!("weighting coefficient {} is not positive", self.weight_coeff)));
        }
        if !self.u_ref.is_finite() {
            return Err(Error::Domain("reference utility must be finite".into()));
        }
        Ok(())
    }

    /// Settings under which the prospect-theory objective reduces to plain
    /// expected utility.
    pub fn expected_utility() -> Self {
        Self {
            delta_plus: 1.0,
            delta_minus: 1.0,
            kappa: 1.0,
            u_ref: 0.0,
            weight_coeff: 1.0,
            use_weighting: false,
        }
    }
}

impl Default for PtParams {
    fn default() -> Self {
        Self {
            delta_plus: 0.88,
            delta_minus: 0.88,
            kappa: 0.5,
            u_ref: 10.0,
            weight_coeff: 0.7,
            use_weighting: false,
        }
    }
}
