//! Inference for heavy-tailed time series whose extremes are asymptotically
//! independent across lags.
//!
//! Given a sample `X_1, …, X_n` and a number `k` of upper order statistics,
//! the crate estimates the tail index, the conditional scaling exponent
//! `κ_h` (from the tail of the lagged products `|X_j X_{j+h}|`), the
//! scaling function `b_h` and the limiting conditional law `Ψ_h` of
//! `X_{j+h} / b_h` given `|X_j|` large, with normal confidence intervals
//! and simulated Kolmogorov-Smirnov critical values.
//!
//! Series, estimators and detrending are generic over [`Scalar`] (`f32` or
//! `f64`); the Monte Carlo layers work in `f64`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod harness;
pub mod limits;
pub mod models;
pub mod rng;
pub mod scalar;
pub mod series;

pub use error::{Error, Result};
pub use estimators::{
    alpha_ci, conditional_cdf_hat, hill, hill_ci, kappa_ci, kappa_hat, lagged_products,
    scaling_estimate, tail_empirical_distribution, tail_empirical_function, EmpiricalCdf,
    TailEstimate,
};
pub use limits::{
    ks_critical_value, simulate_brownian_bridge, simulate_lambda_path, spectral_sampler_expar,
    variance_factor, LimitPath, PathKind, PsiOracle, SpectralModel,
};
pub use harness::{detrend_linear, load_series, write_results, StudyConfig, StudyResult};
pub use models::{simulate_expar, simulate_iid_pareto, simulate_sv, ModelSpec, ModelTruth};
pub use scalar::Scalar;
pub use series::{
    exceedance_indices, order_statistic, EstimationConfig, Series, SortedAbs, TailSide,
};

pub type Series64 = Series<f64>;
pub type Series32 = Series<f32>;
pub type SortedAbs64 = SortedAbs<f64>;
pub type SortedAbs32 = SortedAbs<f32>;
pub type TailEstimate64 = TailEstimate<f64>;
pub type TailEstimate32 = TailEstimate<f32>;
pub type EmpiricalCdf64 = EmpiricalCdf<f64>;
pub type EmpiricalCdf32 = EmpiricalCdf<f32>;
