use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{order_statistic, Series, TailSide};

/// Estimate of the scaling function at the random threshold
/// `|X|_(n:n-k)`:
///
/// ```text
/// b̂ = (1/k) Σ_{j=1..n-h} |X_{j+h}| 1{|X_j| > |X|_(n:n-k)}
/// ```
///
/// Normalized by the configured `k`, not by the realized number of
/// exceedances inside `1..n-h`. Returns zero when no exceedance falls there.
pub fn scaling_estimate<T: Scalar>(series: &Series<T>, h: usize, k: usize) -> Result<T> {
    let n = series.len();
    check_lag(h, n)?;
    let threshold = threshold(series, k, TailSide::Absolute)?;
    let x = series.values();
    let sum = x[..n - h]
        .iter()
        .zip(&x[h..])
        .filter(|(lead, _)| lead.abs() > threshold)
        .fold(T::zero(), |acc, (_, follow)| acc + follow.abs());
    Ok(sum / T::of_usize(k))
}

/// Empirical conditional distribution function on a grid of `y` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf<T> {
    pub grid: Vec<T>,
    pub probs: Vec<T>,
    pub k: usize,
    pub h: usize,
    /// The scaling estimate `b̂` used to normalize the lagged values.
    pub scale: T,
}

impl<T: Scalar> EmpiricalCdf<T> {
    /// `sup_y |Ψ̂(y) - reference(y)|` over the grid.
    pub fn sup_distance(&self, reference: impl Fn(T) -> T) -> T {
        self.grid
            .iter()
            .zip(&self.probs)
            .map(|(&y, &p)| (p - reference(y)).abs())
            .fold(T::zero(), T::max)
    }
}

/// Estimator of the limiting conditional distribution `Ψ_h`:
///
/// ```text
/// Ψ̂(y) = (1/k) Σ_{j=1..n-h} 1{X_j > X_(n:n-k)} 1{X_{j+h} <= b̂ y}
/// ```
///
/// The exceedance indicator uses the tail key of `side`; `b̂` is always the
/// absolute-value scaling estimate. The grid must be strictly increasing and
/// may contain infinities.
pub fn conditional_cdf_hat<T: Scalar>(
    series: &Series<T>,
    h: usize,
    k: usize,
    grid: &[T],
    side: TailSide,
) -> Result<EmpiricalCdf<T>> {
    check_grid(grid)?;
    let n = series.len();
    check_lag(h, n)?;
    let scale = scaling_estimate(series, h, k)?;
    if scale == T::zero() {
        return Err(Error::DegenerateScaling);
    }
    let threshold = threshold(series, k, side)?;
    let x = series.values();
    let mut followers: Vec<T> = x[..n - h]
        .iter()
        .zip(&x[h..])
        .filter(|(&lead, _)| side.key(lead) > threshold)
        .map(|(_, &follow)| follow)
        .collect();
    followers.sort_by(|a, b| a.partial_cmp(b).expect("series values are finite"));
    let kf = T::of_usize(k);
    let probs = grid
        .iter()
        .map(|&y| {
            let bound = scale * y;
            T::of_usize(followers.partition_point(|&v| v <= bound)) / kf
        })
        .collect();
    Ok(EmpiricalCdf {
        grid: grid.to_vec(),
        probs,
        k,
        h,
        scale,
    })
}

fn threshold<T: Scalar>(series: &Series<T>, k: usize, side: TailSide) -> Result<T> {
    if k == 0 {
        return Err(Error::RankOutOfRange { k, n: series.len() });
    }
    order_statistic(series, k, side)
}

fn check_lag(h: usize, n: usize) -> Result<()> {
    if h == 0 || h >= n {
        return Err(Error::LagOutOfRange { h, n });
    }
    Ok(())
}

pub(crate) fn check_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    if grid.iter().any(|y| y.is_nan()) {
        return Err(Error::InvalidGrid("grid contains NaN".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Series<f64> {
        Series::new(v.to_vec()).unwrap()
    }

    #[test]
    fn scaling_hand_example() {
        // threshold |X|_(4:3) = 3; only j = 1 exceeds, followed by 3.
        let x = s(&[10.0, 3.0, 1.0, 2.0]);
        assert_eq!(scaling_estimate(&x, 1, 1).unwrap(), 3.0);
    }

    #[test]
    fn scaling_constant_follower() {
        let x = s(&[9.0, 2.0, 8.0, 2.0, 7.0, 2.0, 1.0, 2.0]);
        // top 3 of |X|: 9, 8, 7 all followed by 2
        assert_eq!(scaling_estimate(&x, 1, 3).unwrap(), 2.0);
    }

    #[test]
    fn scaling_divides_by_k_not_by_count() {
        // the largest value sits at the end, outside 1..n-h
        let x = s(&[5.0, 4.0, 1.0, 1.0, 9.0]);
        assert_eq!(scaling_estimate(&x, 1, 2).unwrap(), 4.0 / 2.0);
        let x = s(&[1.0, 1.0, 9.0]);
        assert_eq!(scaling_estimate(&x, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn lag_errors() {
        let x = s(&[1.0, 2.0, 3.0]);
        assert!(matches!(scaling_estimate(&x, 0, 1), Err(Error::LagOutOfRange { .. })));
        assert!(matches!(scaling_estimate(&x, 3, 1), Err(Error::LagOutOfRange { .. })));
        assert!(matches!(scaling_estimate(&x, 1, 3), Err(Error::RankOutOfRange { .. })));
    }

    #[test]
    fn cdf_edges() {
        let x = s(&[9.0, 2.0, 8.0, 3.0, 7.0, 4.0, 1.0, 0.5, 6.0, 1.0]);
        let k = 3;
        let grid = [-1.0, 0.0, 0.5, 1.0, 2.0, f64::INFINITY];
        let cdf = conditional_cdf_hat(&x, 1, k, &grid, TailSide::Absolute).unwrap();
        // exceedances of |X|_(10:7) = 6: values 9, 8, 7 followed by 2, 3, 4
        assert_eq!(cdf.scale, 3.0);
        assert_eq!(cdf.probs[0], 0.0);
        assert_eq!(*cdf.probs.last().unwrap(), 1.0);
        assert!(cdf.probs.windows(2).all(|w| w[0] <= w[1]));
        // y = 1 -> X_{j+1} <= 3 -> {2, 3}
        assert!((cdf.probs[3] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cdf_degenerate_scaling() {
        let x = s(&[5.0, 0.0, 4.0, 0.0, 1.0]);
        assert_eq!(
            conditional_cdf_hat(&x, 1, 2, &[1.0], TailSide::Absolute),
            Err(Error::DegenerateScaling)
        );
    }

    #[test]
    fn cdf_grid_validation() {
        let x = s(&[5.0, 1.0, 4.0, 2.0, 1.0]);
        assert!(conditional_cdf_hat(&x, 1, 2, &[1.0, 1.0], TailSide::Absolute).is_err());
        assert!(conditional_cdf_hat(&x, 1, 2, &[f64::NAN], TailSide::Absolute).is_err());
    }

    #[test]
    fn upper_side_ignores_negative_extremes() {
        let x = s(&[-100.0, 5.0, 3.0, 1.0, 2.0, 4.0, 1.0]);
        let abs = conditional_cdf_hat(&x, 1, 1, &[f64::INFINITY], TailSide::Absolute).unwrap();
        let upper = conditional_cdf_hat(&x, 1, 1, &[1.0, f64::INFINITY], TailSide::Upper).unwrap();
        assert_eq!(abs.probs, vec![1.0]);
        // upper threshold X_(7:6) = 4, exceedance j = 2 (value 5) followed by 3
        assert_eq!(upper.probs[1], 1.0);
        assert_eq!(upper.scale, abs.scale);
    }
}
