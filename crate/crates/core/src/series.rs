//! Sample containers, order statistics and exceedance bookkeeping.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which tail an exceedance refers to.
///
/// `Absolute` compares `|X_j|` with the threshold, `Upper` compares the
/// signed value `X_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSide {
    #[default]
    Absolute,
    Upper,
}

impl TailSide {
    #[inline]
    pub fn key<T: Scalar>(self, x: T) -> T {
        match self {
            TailSide::Absolute => x.abs(),
            TailSide::Upper => x,
        }
    }
}

impl fmt::Display for TailSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailSide::Absolute => "absolute",
            TailSide::Upper => "upper",
        })
    }
}

impl FromStr for TailSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" | "abs" => Ok(TailSide::Absolute),
            "upper" => Ok(TailSide::Upper),
            other => Err(Error::param(
                "tail_side",
                format!("expected `absolute` or `upper`, got `{other}`"),
            )),
        }
    }
}

/// An ordered sample of finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    values: Vec<T>,
    name: Option<String>,
}

impl<T: Scalar> Series<T> {
    /// Fails on the first NaN or infinite entry.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some((index, value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                value: value.as_f64(),
            });
        }
        Ok(Series { values, name: None })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiplies every value by `c`; the result is checked like any new series.
    pub fn scaled(&self, c: T) -> Result<Self> {
        let mut out = Series::new(self.values.iter().map(|&x| x * c).collect())?;
        out.name = self.name.clone();
        Ok(out)
    }

    pub fn sorted(&self, side: TailSide) -> SortedAbs<T> {
        SortedAbs::new(self, side)
    }

    /// The (k+1)-th largest value of the tail key, i.e. `|X|_(n:n-k)`.
    pub fn order_statistic(&self, k: usize, side: TailSide) -> Result<T> {
        order_statistic(self, k, side)
    }

    pub fn exceedance_indices(&self, threshold: T, max_index: usize, side: TailSide) -> Vec<usize> {
        exceedance_indices(self, threshold, max_index, side)
    }
}

/// Order statistics of a series' tail key together with the original
/// positions. Ties keep their original relative order.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedAbs<T> {
    sorted: Vec<T>,
    permutation: Vec<usize>,
    side: TailSide,
}

impl<T: Scalar> SortedAbs<T> {
    pub fn new(series: &Series<T>, side: TailSide) -> Self {
        let keys: Vec<T> = series.values().iter().map(|&x| side.key(x)).collect();
        let mut permutation: Vec<usize> = (0..keys.len()).collect();
        // Stable sort: equal keys stay in index order.
        permutation.sort_by(|&a, &b| {
            keys[a]
                .partial_cmp(&keys[b])
                .expect("series values are finite")
        });
        let sorted = permutation.iter().map(|&i| keys[i]).collect();
        SortedAbs {
            sorted,
            permutation,
            side,
        }
    }

    /// Ascending order statistics `|X|_(n:1) <= ... <= |X|_(n:n)`.
    pub fn sorted(&self) -> &[T] {
        &self.sorted
    }

    /// `permutation()[i]` is the original index of `sorted()[i]`.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn side(&self) -> TailSide {
        self.side
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `|X|_(n:n-k)`: the value with `k` order statistics above it.
    pub fn from_top(&self, k: usize) -> Result<T> {
        let n = self.sorted.len();
        if k >= n {
            return Err(Error::RankOutOfRange { k, n });
        }
        Ok(self.sorted[n - 1 - k])
    }
}

/// `|X|_(n:n-k)` (or the signed `X_(n:n-k)` in upper mode) without a full sort.
pub fn order_statistic<T: Scalar>(series: &Series<T>, k: usize, side: TailSide) -> Result<T> {
    let n = series.len();
    if k >= n {
        return Err(Error::RankOutOfRange { k, n });
    }
    let mut keys: Vec<T> = series.values().iter().map(|&x| side.key(x)).collect();
    let (_, v, _) = keys.select_nth_unstable_by(n - 1 - k, |a, b| {
        a.partial_cmp(b).expect("series values are finite")
    });
    Ok(*v)
}

/// Zero-based positions `j < max_index` whose tail key strictly exceeds
/// `threshold`. `max_index` is clamped to the series length.
pub fn exceedance_indices<T: Scalar>(
    series: &Series<T>,
    threshold: T,
    max_index: usize,
    side: TailSide,
) -> Vec<usize> {
    let end = max_index.min(series.len());
    series.values()[..end]
        .iter()
        .enumerate()
        .filter(|(_, &x)| side.key(x) > threshold)
        .map(|(j, _)| j)
        .collect()
}

/// The estimation parameters shared by the feasible estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    /// Number of upper order statistics.
    pub k: usize,
    /// Lag.
    pub h: usize,
    #[serde(default)]
    pub tail_side: TailSide,
    /// Confidence level of reported intervals.
    pub level: f64,
}

impl EstimationConfig {
    pub fn new(k: usize, h: usize, level: f64) -> Self {
        EstimationConfig {
            k,
            h,
            tail_side: TailSide::Absolute,
            level,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k >= n {
            return Err(Error::RankOutOfRange { k: self.k, n });
        }
        if self.h >= n {
            return Err(Error::LagOutOfRange { h: self.h, n });
        }
        check_level(self.level)
    }
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::param("level", format!("must lie in (0, 1), got {level}")))
    }
}
