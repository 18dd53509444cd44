//! Gaussian limit processes on grids: Brownian motion, the Brownian bridge
//! and `Λ_h(y) = B°(Ψ_h(y)) + y Ψ_h'(y) ∫_0^1 |Ψ_h^{-1}(u)| dB°(u)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, domain};

use super::spectral::SpectralModel;

/// Default number of uniform cells discretizing the stochastic integral.
pub const DEFAULT_INTEGRAL_CELLS: usize = 2048;

/// Dyadic subdivisions of the last uniform cell, where `|Ψ^{-1}|` blows up.
const TAIL_REFINEMENT: i32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    BrownianMotion,
    BrownianBridge,
    Lambda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPath {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: PathKind,
}

fn check_unit_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid("need at least the points 0 and 1".into()));
    }
    if grid.iter().any(|u| !(0.0..=1.0).contains(u)) {
        return Err(Error::InvalidGrid("points must lie in [0, 1]".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    if grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
        return Err(Error::InvalidGrid("grid must start at 0 and end at 1".into()));
    }
    Ok(())
}

/// Standard Brownian motion started at zero on an increasing grid with
/// `grid[0] = 0`.
fn motion_on<R: Rng + ?Sized>(grid: &[f64], rng: &mut R) -> Vec<f64> {
    let mut values = Vec::with_capacity(grid.len());
    let mut b = 0.0;
    let mut prev = grid[0];
    values.push(0.0);
    for &u in &grid[1..] {
        let z: f64 = rng.sample(StandardNormal);
        b += (u - prev).sqrt() * z;
        prev = u;
        values.push(b);
    }
    values
}

/// `B°(u) = B(u) - u B(1)` on a grid spanning `[0, 1]`; endpoints are exactly 0.
fn bridge_on<R: Rng + ?Sized>(grid: &[f64], rng: &mut R) -> Vec<f64> {
    let mut values = motion_on(grid, rng);
    let last = values.len() - 1;
    let b1 = values[last];
    for (v, &u) in values.iter_mut().zip(grid) {
        *v -= u * b1;
    }
    values[0] = 0.0;
    values[last] = 0.0;
    values
}

pub fn simulate_brownian_motion(grid: &[f64], seed: u64) -> Result<LimitPath> {
    check_unit_grid(grid)?;
    let mut rng = rng::stream(seed, domain::PATHS, 0);
    Ok(LimitPath {
        grid: grid.to_vec(),
        values: motion_on(grid, &mut rng),
        kind: PathKind::BrownianMotion,
    })
}

pub fn simulate_brownian_bridge(grid: &[f64], seed: u64) -> Result<LimitPath> {
    simulate_brownian_bridge_path(grid, seed, 0)
}

/// Path number `index` of the family of bridges generated from `seed`.
pub fn simulate_brownian_bridge_path(grid: &[f64], seed: u64, index: u64) -> Result<LimitPath> {
    check_unit_grid(grid)?;
    let mut rng = rng::stream(seed, domain::PATHS, index);
    Ok(LimitPath {
        grid: grid.to_vec(),
        values: bridge_on(grid, &mut rng),
        kind: PathKind::BrownianBridge,
    })
}

/// Precomputed discretization of `Λ_h` on a `y` grid.
///
/// The bridge lives on the union of the integration knots and the values
/// `Ψ_h(y_j)`, so that `B°(Ψ_h(y_j))` is exact. The knots are a uniform grid
/// of `cells + 1` points whose last cell is split dyadically towards 1. The
/// stochastic integral is the sum over cells of `|Ψ_h^{-1}(midpoint)|` times
/// the bridge increment.
#[derive(Debug, Clone)]
pub struct LambdaSimulator {
    y_grid: Vec<f64>,
    nodes: Vec<f64>,
    psi_nodes: Vec<usize>,
    slopes: Vec<f64>,
    cells: Vec<(usize, usize, f64)>,
}

impl LambdaSimulator {
    pub fn new(model: &SpectralModel, y_grid: &[f64]) -> Result<Self> {
        Self::with_cells(model, y_grid, DEFAULT_INTEGRAL_CELLS)
    }

    pub fn with_cells(model: &SpectralModel, y_grid: &[f64], cells: usize) -> Result<Self> {
        let psi = model.psi()?;
        if y_grid.is_empty() {
            return Err(Error::InvalidGrid("empty y grid".into()));
        }
        if y_grid.iter().any(|y| !y.is_finite()) || y_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "y grid must be finite and strictly increasing".into(),
            ));
        }
        if cells == 0 {
            return Err(Error::param("cells", "need at least one cell"));
        }

        let probs: Vec<f64> = y_grid.iter().map(|&y| psi.cdf(y).clamp(0.0, 1.0)).collect();
        let slopes = y_grid
            .iter()
            .enumerate()
            .map(|(j, &y)| {
                let d = psi
                    .density(y)
                    .unwrap_or_else(|| central_difference(|t| psi.cdf(t), y_grid, j));
                y * d
            })
            .collect();

        let width = 1.0 / cells as f64;
        let knots: Vec<f64> = (0..cells)
            .map(|i| i as f64 * width)
            .chain((1..=TAIL_REFINEMENT).map(|j| 1.0 - width * 0.5f64.powi(j)))
            .chain(std::iter::once(1.0))
            .collect();

        // merge knots with Ψ(y_j)
        let mut tagged: Vec<(f64, Option<usize>)> = knots
            .iter()
            .map(|&u| (u, None))
            .chain(probs.iter().enumerate().map(|(j, &p)| (p, Some(j))))
            .collect();
        tagged.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite probabilities"));
        let mut nodes: Vec<f64> = Vec::with_capacity(tagged.len());
        let mut psi_nodes = vec![0; y_grid.len()];
        let mut knot_nodes = Vec::with_capacity(knots.len());
        for (u, tag) in tagged {
            if nodes.last() != Some(&u) {
                nodes.push(u);
            }
            let idx = nodes.len() - 1;
            match tag {
                Some(j) => psi_nodes[j] = idx,
                None => knot_nodes.push(idx),
            }
        }
        let cells = knot_nodes
            .windows(2)
            .zip(knots.windows(2))
            .map(|(w, u)| (w[0], w[1], psi.quantile(0.5 * (u[0] + u[1])).abs()))
            .collect();

        Ok(LambdaSimulator {
            y_grid: y_grid.to_vec(),
            nodes,
            psi_nodes,
            slopes,
            cells,
        })
    }

    pub fn y_grid(&self) -> &[f64] {
        &self.y_grid
    }

    /// One path of `Λ_h` on the `y` grid.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let bridge = bridge_on(&self.nodes, rng);
        let integral: f64 = self
            .cells
            .iter()
            .map(|&(a, b, w)| w * (bridge[b] - bridge[a]))
            .sum();
        self.psi_nodes
            .iter()
            .zip(&self.slopes)
            .map(|(&i, &s)| bridge[i] + s * integral)
            .collect()
    }

    /// Path `index` of the family generated from `seed`.
    pub fn path(&self, seed: u64, index: u64) -> LimitPath {
        let mut rng = rng::stream(seed, domain::PATHS, index);
        LimitPath {
            grid: self.y_grid.clone(),
            values: self.sample(&mut rng),
            kind: PathKind::Lambda,
        }
    }

    /// `sup_y |Λ_h(y)|` for `n_paths` paths, in path order. Identical for any
    /// thread count.
    pub fn sup_samples(&self, n_paths: usize, seed: u64) -> Vec<f64> {
        (0..n_paths as u64)
            .into_par_iter()
            .map(|p| {
                let mut rng = rng::stream(seed, domain::PATHS, p);
                self.sample(&mut rng)
                    .into_iter()
                    .fold(0.0, |acc: f64, v| acc.max(v.abs()))
            })
            .collect()
    }
}

fn central_difference(cdf: impl Fn(f64) -> f64, grid: &[f64], j: usize) -> f64 {
    let y = grid[j];
    let left = (j > 0).then(|| y - grid[j - 1]);
    let right = grid.get(j + 1).map(|&next| next - y);
    let step = match (left, right) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => 1e-4 * y.abs().max(1.0),
    };
    (cdf(y + step) - cdf(y - step)) / (2.0 * step)
}

pub fn simulate_lambda_path(model: &SpectralModel, y_grid: &[f64], seed: u64) -> Result<LimitPath> {
    Ok(LambdaSimulator::new(model, y_grid)?.path(seed, 0))
}

/// Empirical `(1 - level)` quantile of `sup_y |Λ_h(y)|` over simulated paths.
/// `level = 0` returns the largest simulated supremum.
pub fn ks_critical_value(
    model: &SpectralModel,
    level: f64,
    n_paths: usize,
    y_grid: &[f64],
    seed: u64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&level) {
        return Err(Error::param("level", format!("must lie in [0, 1), got {level}")));
    }
    if n_paths < 100 {
        return Err(Error::param("n_paths", format!("need at least 100, got {n_paths}")));
    }
    let sim = LambdaSimulator::new(model, y_grid)?;
    let mut sups = sim.sup_samples(n_paths, seed);
    sups.sort_by(|a, b| a.partial_cmp(b).expect("finite suprema"));
    Ok(upper_quantile(&sups, level))
}

/// Smallest sample value with at least `(1 - level) n` values at or below it.
fn upper_quantile(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    let rank = ((1.0 - level) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::spectral::{
        spectral_sampler_expar, PsiOracle, UniformPsi, WLaw, ZeroDerivative,
    };
    use std::sync::Arc;

    fn unit_grid(m: usize) -> Vec<f64> {
        (0..=m).map(|i| i as f64 / m as f64).collect()
    }

    #[test]
    fn bridge_endpoints_are_zero() {
        let grid = unit_grid(37);
        for seed in 0..20 {
            let p = simulate_brownian_bridge(&grid, seed).unwrap();
            assert_eq!(p.values[0], 0.0);
            assert_eq!(*p.values.last().unwrap(), 0.0);
            assert_eq!(p.kind, PathKind::BrownianBridge);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(simulate_brownian_bridge(&[0.0, 0.5], 1).is_err());
        assert!(simulate_brownian_bridge(&[0.1, 1.0], 1).is_err());
        assert!(simulate_brownian_bridge(&[0.0, 0.6, 0.5, 1.0], 1).is_err());
        assert!(simulate_brownian_bridge(&[0.0, 1.5], 1).is_err());
        assert!(simulate_brownian_bridge(&[0.0, 1.0], 1).is_ok());
    }

    #[test]
    fn bridge_covariance() {
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let n = 10_000;
        let paths: Vec<Vec<f64>> = (0..n)
            .map(|i| simulate_brownian_bridge_path(&grid, 9, i).unwrap().values)
            .collect();
        let mean = |j: usize| paths.iter().map(|p| p[j]).sum::<f64>() / n as f64;
        let cov = |a: usize, b: usize| {
            let (ma, mb) = (mean(a), mean(b));
            paths.iter().map(|p| (p[a] - ma) * (p[b] - mb)).sum::<f64>() / (n - 1) as f64
        };
        assert!((cov(2, 2) - 0.25).abs() < 0.01);
        assert!((cov(1, 3) - 0.0625).abs() < 0.01);
        assert!((cov(1, 1) - 0.1875).abs() < 0.01);
    }

    #[test]
    fn motion_variance() {
        let grid = [0.0, 0.5, 1.0];
        let n = 10_000u64;
        let var = (0..n)
            .map(|i| {
                let mut rng = rng::stream(4, domain::PATHS, i);
                motion_on(&grid, &mut rng)[2].powi(2)
            })
            .sum::<f64>()
            / n as f64;
        assert!((var - 1.0).abs() < 0.05);
    }

    fn expar(alpha: f64) -> SpectralModel {
        spectral_sampler_expar(0.5, alpha, 1).unwrap()
    }

    #[test]
    fn lambda_requires_psi() {
        let m = SpectralModel::new(2.0, 0.5, 1, WLaw::Pareto { alpha: 2.0 }).unwrap();
        assert!(matches!(
            simulate_lambda_path(&m, &[1.0], 1),
            Err(Error::MissingCapability(_))
        ));
    }

    #[test]
    fn zero_derivative_reduces_to_the_bridge() {
        let flat = expar(4.0).with_psi(Arc::new(ZeroDerivative(UniformPsi)));
        let y = [0.1, 0.4, 0.7];
        let sim = LambdaSimulator::new(&flat, &y).unwrap();
        let mut rng = rng::stream(3, domain::PATHS, 0);
        let lam = sim.sample(&mut rng);
        let mut rng = rng::stream(3, domain::PATHS, 0);
        let bridge = bridge_on(&sim.nodes, &mut rng);
        for (j, &i) in sim.psi_nodes.iter().enumerate() {
            assert_eq!(lam[j], bridge[i]);
            assert_eq!(sim.nodes[i], y[j]);
        }
    }

    #[test]
    fn lambda_is_centered() {
        let m = expar(4.0);
        let y = [0.7, 1.0, 1.5];
        let sim = LambdaSimulator::new(&m, &y).unwrap();
        let n = 10_000u64;
        let paths: Vec<Vec<f64>> = (0..n).map(|p| sim.path(17, p).values).collect();
        for j in 0..y.len() {
            let mean = paths.iter().map(|p| p[j]).sum::<f64>() / n as f64;
            let sd = (paths.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
            assert!(mean.abs() < 3.0 * sd / 100.0, "y {}: mean {mean}, sd {sd}", y[j]);
        }
    }

    #[test]
    fn critical_value_monotone_in_level_and_deterministic() {
        let m = expar(4.0);
        let y: Vec<f64> = (1..40).map(|i| 0.1 * i as f64).collect();
        let c0 = ks_critical_value(&m, 0.0, 500, &y, 5).unwrap();
        let c05 = ks_critical_value(&m, 0.05, 500, &y, 5).unwrap();
        let c20 = ks_critical_value(&m, 0.2, 500, &y, 5).unwrap();
        assert!(c0 >= c05 && c05 >= c20);
        assert_eq!(c05, ks_critical_value(&m, 0.05, 500, &y, 5).unwrap());
        let sim = LambdaSimulator::new(&m, &y).unwrap();
        let max = sim.sup_samples(500, 5).into_iter().fold(0.0, f64::max);
        assert_eq!(c0, max);
        assert!(ks_critical_value(&m, 0.05, 99, &y, 5).is_err());
        assert!(ks_critical_value(&m, 1.0, 500, &y, 5).is_err());
    }

    /// Var Λ(y) = p(1-p) + c²(∫q² - (∫q)²) + 2c(∫_0^p q - p∫q) with
    /// p = Ψ(y), c = yΨ'(y), q = |Ψ^{-1}|. Quadrature after u = 1 - s², which
    /// removes the singularity of q² at 1.
    fn lambda_variance_oracle(psi: &dyn PsiOracle, y: f64) -> f64 {
        let m = 1_000_000;
        let p = psi.cdf(y);
        let c = y * psi.density(y).unwrap();
        let (mut i1, mut i2, mut ip) = (0.0, 0.0, 0.0);
        for i in 0..m {
            let s = (i as f64 + 0.5) / m as f64;
            let u = 1.0 - s * s;
            let q = psi.quantile(u).abs();
            let w = 2.0 * s / m as f64;
            i1 += q * w;
            i2 += q * q * w;
            if u < p {
                ip += q * w;
            }
        }
        p * (1.0 - p) + c * c * (i2 - i1 * i1) + 2.0 * c * (ip - p * i1)
    }

    #[test]
    fn lambda_variance_matches_covariance_oracle() {
        let m = expar(4.0);
        let y = [0.8, 1.0, 1.6];
        let sim = LambdaSimulator::new(&m, &y).unwrap();
        let n = 10_000u64;
        let paths: Vec<Vec<f64>> = (0..n).map(|p| sim.path(23, p).values).collect();
        for (j, &yj) in y.iter().enumerate() {
            let mean = paths.iter().map(|p| p[j]).sum::<f64>() / n as f64;
            let var = paths.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let truth = lambda_variance_oracle(m.psi().unwrap(), yj);
            assert!((var / truth - 1.0).abs() < 0.05, "y {yj}: {var} vs {truth}");
        }
    }

    #[test]
    fn flat_derivative_recovers_kolmogorov_quantile() {
        let m = SpectralModel::new(4.0, 0.5, 1, WLaw::Constant(1.0))
            .unwrap()
            .with_psi(Arc::new(ZeroDerivative(UniformPsi)));
        let y: Vec<f64> = (1..2000).map(|i| i as f64 / 2000.0).collect();
        let c = ks_critical_value(&m, 0.05, 10_000, &y, 1).unwrap();
        assert!((c / 1.358 - 1.0).abs() < 0.03, "{c}");
    }

    #[test]
    fn critical_value_is_stable_across_seeds() {
        let m = expar(4.0);
        let y: Vec<f64> = (1..60).map(|i| 0.05 * i as f64).collect();
        let a = ks_critical_value(&m, 0.05, 10_000, &y, 100).unwrap();
        let b = ks_critical_value(&m, 0.05, 10_000, &y, 200).unwrap();
        assert!((a / b - 1.0).abs() < 0.05, "{a} {b}");
    }

    #[test]
    fn upper_quantile_ranks() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(upper_quantile(&v, 0.0), 100.0);
        assert_eq!(upper_quantile(&v, 0.05), 95.0);
        assert_eq!(upper_quantile(&v, 0.999), 1.0);
    }
}
