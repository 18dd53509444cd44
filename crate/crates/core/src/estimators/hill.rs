use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{Series, SortedAbs, TailSide};

use super::interval::TailEstimate;

/// Hill estimator of the extreme value index `γ = 1/α` from the top `k`
/// order statistics:
///
/// ```text
/// γ̂ = (1/k) Σ_{j=1..k} log(|X|_(n:n-j+1) / |X|_(n:n-k))
/// ```
///
/// Runs in linear time via selection.
pub fn hill<T: Scalar>(series: &Series<T>, k: usize, side: TailSide) -> Result<T> {
    let n = series.len();
    if k == 0 || k >= n {
        return Err(Error::RankOutOfRange { k, n });
    }
    let mut keys: Vec<T> = series.values().iter().map(|&x| side.key(x)).collect();
    let (_, &mut threshold, top) = keys.select_nth_unstable_by(n - 1 - k, |a, b| {
        a.partial_cmp(b).expect("series values are finite")
    });
    hill_from_parts(threshold, top, k)
}

/// Same estimator on pre-sorted data, for evaluating many `k` on one sample.
pub fn hill_sorted<T: Scalar>(sorted: &SortedAbs<T>, k: usize) -> Result<T> {
    let n = sorted.len();
    if k == 0 || k >= n {
        return Err(Error::RankOutOfRange { k, n });
    }
    let s = sorted.sorted();
    hill_from_parts(s[n - 1 - k], &s[n - k..], k)
}

fn hill_from_parts<T: Scalar>(threshold: T, top: &[T], k: usize) -> Result<T> {
    if threshold <= T::zero() {
        return Err(Error::NonPositiveOrderStatistic {
            rank: k,
            value: threshold.as_f64(),
        });
    }
    let sum = top
        .iter()
        .fold(T::zero(), |acc, &x| acc + (x / threshold).ln());
    Ok(sum / T::of_usize(k))
}

/// Interval `γ̂ ± z γ̂/√k` for the extreme value index.
pub fn hill_ci<T: Scalar>(gamma_hat: T, k: usize, level: f64) -> Result<TailEstimate<T>> {
    check_relative_inputs(gamma_hat, k)?;
    let se = gamma_hat / T::of_usize(k).sqrt();
    TailEstimate::normal(gamma_hat, se, k, level, "hill")
}

/// Interval `α̂ ± z α̂/√k` for the tail index `α̂ = 1/γ̂`.
pub fn alpha_ci<T: Scalar>(gamma_hat: T, k: usize, level: f64) -> Result<TailEstimate<T>> {
    check_relative_inputs(gamma_hat, k)?;
    let alpha = gamma_hat.recip();
    let se = alpha / T::of_usize(k).sqrt();
    TailEstimate::normal(alpha, se, k, level, "tail_index")
}

fn check_relative_inputs<T: Scalar>(gamma_hat: T, k: usize) -> Result<()> {
    if !(gamma_hat > T::zero()) || !gamma_hat.is_finite() {
        return Err(Error::param(
            "gamma_hat",
            format!("must be positive and finite, got {gamma_hat}"),
        ));
    }
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    Ok(())
}
