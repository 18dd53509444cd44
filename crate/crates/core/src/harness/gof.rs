use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::conditional_cdf_hat;
use crate::limits::{ks_critical_value, PsiOracle, SpectralModel};
use crate::series::{Series, TailSide};

use super::float;

pub const DEFAULT_KS_POINTS: usize = 200;

/// Outcome of a Kolmogorov-Smirnov type test of `Ψ_h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub h: usize,
    pub k: usize,
    pub level: f64,
    pub n_paths: usize,
    pub grid_points: usize,
    #[serde(with = "float")]
    pub statistic: f64,
    #[serde(with = "float")]
    pub critical_value: f64,
    pub reject: bool,
}

/// `points` quantiles of `Ψ_0` at `i / (points + 1)`, duplicates removed.
pub fn ks_grid(psi: &dyn PsiOracle, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::param("points", "need at least one grid point"));
    }
    let mut grid: Vec<f64> = (1..=points)
        .map(|i| psi.quantile(i as f64 / (points + 1) as f64))
        .filter(|y| y.is_finite())
        .collect();
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::InvalidGrid("the reference law has no finite quantiles".into()));
    }
    Ok(grid)
}

/// `√k sup_y |Ψ̂_h(y) - Ψ_0(y)|` over `grid`.
pub fn ks_statistic(
    series: &Series<f64>,
    h: usize,
    k: usize,
    psi: &dyn PsiOracle,
    grid: &[f64],
    side: TailSide,
) -> Result<f64> {
    let cdf = conditional_cdf_hat(series, h, k, grid, side)?;
    Ok((k as f64).sqrt() * cdf.sup_distance(|y| psi.cdf(y)))
}

/// Tests `Ψ_h = Ψ_0`, with `Ψ_0` taken from `model`, against the simulated
/// `(1 - level)` quantile of `sup |Λ_h|` on the same grid.
#[allow(clippy::too_many_arguments)]
pub fn ks_test(
    series: &Series<f64>,
    h: usize,
    k: usize,
    model: &SpectralModel,
    level: f64,
    n_paths: usize,
    seed: u64,
    side: TailSide,
) -> Result<KsReport> {
    let psi = model.psi()?;
    let grid = ks_grid(psi, DEFAULT_KS_POINTS)?;
    let statistic = ks_statistic(series, h, k, psi, &grid, side)?;
    let critical_value = ks_critical_value(model, level, n_paths, &grid, seed)?;
    Ok(KsReport {
        h,
        k,
        level,
        n_paths,
        grid_points: grid.len(),
        statistic,
        critical_value,
        reject: statistic > critical_value,
    })
}
