//! Random type grids and resource matrices for tests, sweeps and examples.

use ndarray::Array2;
use rand::Rng;

use crate::econ::TypeGrid;
use crate::error::Result;

/// Resource matrix that grows weakly along both type axes.
///
/// Each entry adds an independent `U[0, max_step)` increment to the larger of
/// its upper and left neighbours.
pub fn monotone_grid<R: Rng + ?Sized>(rng: &mut R, dim: (usize, usize), max_step: f64) -> Array2<f64> {
    let mut x = Array2::zeros(dim);
    for m in 0..dim.0 {
        for n in 0..dim.1 {
            let up = if m > 0 { x[(m - 1, n)] } else { 0.0 };
            let left = if n > 0 { x[(m, n - 1)] } else { 0.0 };
            x[(m, n)] = f64::max(up, left) + rng.random::<f64>() * max_step;
        }
    }
    x
}

/// Resource matrix that depends on one type axis only: `x_{m,n} = g_m` when
/// `by_row`, otherwise `x_{m,n} = g_n`, with `g` nondecreasing.
pub fn separable_grid<R: Rng + ?Sized>(rng: &mut R, dim: (usize, usize), max_step: f64, by_row: bool) -> Array2<f64> {
    let len = if by_row { dim.0 } else { dim.1 };
    let mut g = Vec::with_capacity(len);
    let mut acc = 0.0;
    for _ in 0..len {
        acc += rng.random::<f64>() * max_step;
        g.push(acc);
    }
    Array2::from_shape_fn(dim, |(m, n)| if by_row { g[m] } else { g[n] })
}

/// Strictly increasing values drawn uniformly from `[lo, hi]` and sorted.
pub fn increasing_types<R: Rng + ?Sized>(rng: &mut R, count: usize, lo: f64, hi: f64) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..count).map(|_| rng.random_range(lo..=hi)).collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[0] < w[1]) {
            return v;
        }
    }
}

/// Normalised type probabilities from independent uniforms.
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, dim: (usize, usize)) -> Array2<f64> {
    let raw = Array2::from_shape_fn(dim, |_| rng.random_range(0.05..1.0));
    let total = raw.sum();
    raw / total
}

/// Type grid with `theta` and `sigma` drawn from the given ranges.
pub fn random_type_grid<R: Rng + ?Sized>(
    rng: &mut R,
    dim: (usize, usize),
    theta_range: (f64, f64),
    sigma_range: (f64, f64),
) -> Result<TypeGrid> {
    let theta = increasing_types(rng, dim.0, theta_range.0, theta_range.1);
    let sigma = increasing_types(rng, dim.1, sigma_range.0, sigma_range.1);
    let q = random_probabilities(rng, dim);
    TypeGrid::new(theta, sigma, q)
}
