use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::series::check_level;

/// Two-sided standard normal quantile `z` with `P(|N| <= z) = level`.
pub fn normal_quantile(level: f64) -> Result<f64> {
    check_level(level)?;
    Ok(Normal::standard().inverse_cdf(0.5 + 0.5 * level))
}

/// A point estimate with its asymptotic standard error and normal interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate<T> {
    pub value: T,
    pub std_err: T,
    pub ci_low: T,
    pub ci_high: T,
    pub k: usize,
    pub estimator: String,
}

impl<T: Scalar> TailEstimate<T> {
    /// `value ± z(level) * std_err`. An infinite standard error yields the
    /// whole real line.
    pub fn normal(
        value: T,
        std_err: T,
        k: usize,
        level: f64,
        estimator: impl Into<String>,
    ) -> Result<Self> {
        let z = T::of(normal_quantile(level)?);
        let half = if std_err.is_infinite() {
            T::infinity()
        } else {
            z * std_err
        };
        Ok(TailEstimate {
            value,
            std_err,
            ci_low: value - half,
            ci_high: value + half,
            k,
            estimator: estimator.into(),
        })
    }

    pub fn covers(&self, truth: T) -> bool {
        self.ci_low <= truth && truth <= self.ci_high
    }

    pub fn width(&self) -> T {
        self.ci_high - self.ci_low
    }
}
