//! Generative models with known tail behaviour: the exponential AR(1)
//! process, a stochastic volatility model with Pareto noise, and i.i.d.
//! Pareto draws.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{spectral_pareto, spectral_sampler_expar, SpectralModel};
use crate::rng::{self, domain, open_unit};
use crate::series::Series;

pub const DEFAULT_BURN_IN: usize = 1000;

/// A simulator and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelSpec {
    /// `X_j = exp(ξ_j)`, `ξ_j = φ ξ_{j-1} + ε_j`, `ε_j` exponential(α).
    Expar { phi: f64, alpha: f64 },
    /// `X_j = ε_j exp(Y_j)` with `Y` a Gaussian AR(1) and `ε_j` Pareto(α).
    Sv { alpha: f64, ar_coeff: f64 },
    IidPareto { alpha: f64 },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        let alpha = self.alpha();
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
        }
        match *self {
            ModelSpec::Expar { phi, .. } if !(phi > 0.0 && phi < 1.0) => {
                Err(Error::param("phi", format!("must lie in (0, 1), got {phi}")))
            }
            ModelSpec::Sv { ar_coeff, .. } if !(ar_coeff.abs() < 1.0) => Err(Error::param(
                "ar_coeff",
                format!("must lie in (-1, 1), got {ar_coeff}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            ModelSpec::Expar { alpha, .. }
            | ModelSpec::Sv { alpha, .. }
            | ModelSpec::IidPareto { alpha } => alpha,
        }
    }

    pub fn truth(&self) -> ModelTruth {
        ModelTruth { spec: *self }
    }

    /// Replicate `replicate` of a length-`n` path. Every replicate draws
    /// from its own streams, so replicates can be generated in any order.
    pub fn simulate(
        &self,
        n: usize,
        burn_in: usize,
        seed: u64,
        replicate: u64,
    ) -> Result<(Series<f64>, ModelTruth)> {
        self.validate()?;
        if n == 0 {
            return Err(Error::param("n", "need at least one observation"));
        }
        let mut noise = rng::stream(seed, domain::SERIES, replicate);
        let values = match *self {
            ModelSpec::Expar { phi, alpha } => {
                let mut xi = 1.0 / (alpha * (1.0 - phi));
                let mut out = Vec::with_capacity(n);
                for t in 0..burn_in + n {
                    xi = phi * xi - open_unit(&mut noise).ln() / alpha;
                    if t >= burn_in {
                        out.push(xi.exp());
                    }
                }
                out
            }
            ModelSpec::Sv { alpha, ar_coeff } => {
                let mut vol = rng::stream(seed, domain::VOLATILITY, replicate);
                let mut y = 0.0;
                let mut out = Vec::with_capacity(n);
                for t in 0..burn_in + n {
                    let z: f64 = vol.sample(StandardNormal);
                    y = if t == 0 {
                        z / (1.0 - ar_coeff * ar_coeff).sqrt()
                    } else {
                        ar_coeff * y + z
                    };
                    let eps = open_unit(&mut noise).powf(-1.0 / alpha);
                    if t >= burn_in {
                        out.push(eps * y.exp());
                    }
                }
                out
            }
            ModelSpec::IidPareto { alpha } => (0..n)
                .map(|_| open_unit(&mut noise).powf(-1.0 / alpha))
                .collect(),
        };
        let series = Series::new(values)?.with_name(self.to_string());
        Ok((series, self.truth()))
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ModelSpec::Expar { phi, alpha } => write!(f, "expar(phi={phi}, alpha={alpha})"),
            ModelSpec::Sv { alpha, ar_coeff } => write!(f, "sv(alpha={alpha}, ar={ar_coeff})"),
            ModelSpec::IidPareto { alpha } => write!(f, "pareto(alpha={alpha})"),
        }
    }
}

pub fn simulate_expar(
    phi: f64,
    alpha: f64,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<(Series<f64>, ModelTruth)> {
    ModelSpec::Expar { phi, alpha }.simulate(n, burn_in, seed, 0)
}

pub fn simulate_sv(
    alpha: f64,
    ar_coeff: f64,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<(Series<f64>, ModelTruth)> {
    ModelSpec::Sv { alpha, ar_coeff }.simulate(n, burn_in, seed, 0)
}

pub fn simulate_iid_pareto(alpha: f64, n: usize, seed: u64) -> Result<(Series<f64>, ModelTruth)> {
    ModelSpec::IidPareto { alpha }.simulate(n, 0, seed, 0)
}

/// Analytically known tail quantities of a simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelTruth {
    spec: ModelSpec,
}

impl ModelTruth {
    pub fn spec(&self) -> ModelSpec {
        self.spec
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha()
    }

    pub fn gamma(&self) -> f64 {
        1.0 / self.alpha()
    }

    /// Conditional scaling exponent `κ_h`. At lag 0 the product is a square,
    /// so `κ_0 = 1` for every model.
    pub fn kappa(&self, h: usize) -> f64 {
        if h == 0 {
            return 1.0;
        }
        match self.spec {
            ModelSpec::Expar { phi, .. } => phi.powi(h as i32),
            ModelSpec::Sv { .. } | ModelSpec::IidPareto { .. } => 0.0,
        }
    }

    /// `b_h(x)` up to a constant factor: `x^{κ_h}`.
    pub fn scaling_shape(&self, h: usize, x: f64) -> f64 {
        x.powf(self.kappa(h))
    }

    /// Whether `κ_h` can be read off the tail index of lagged products.
    /// This fails when the products inherit their tail from the noise alone.
    pub fn product_method_applicable(&self) -> bool {
        matches!(self.spec, ModelSpec::Expar { .. })
    }

    /// Spectral description at lag `h >= 1`, when known. None for the
    /// stochastic volatility model.
    pub fn spectral(&self, h: usize) -> Result<Option<SpectralModel>> {
        if h == 0 {
            return Err(Error::param("h", "lag must be at least 1"));
        }
        match self.spec {
            ModelSpec::Expar { phi, alpha } => spectral_sampler_expar(phi, alpha, h).map(Some),
            ModelSpec::IidPareto { alpha } => spectral_pareto(alpha, 0.0, h).map(Some),
            ModelSpec::Sv { .. } => Ok(None),
        }
    }

    pub fn summary(&self, lags: &[usize]) -> TruthSummary {
        TruthSummary {
            model: self.spec,
            alpha: self.alpha(),
            gamma: self.gamma(),
            kappa: lags.iter().map(|&h| LagTruth { h, kappa: self.kappa(h) }).collect(),
            b_shape: "x^kappa".into(),
            product_method_applicable: self.product_method_applicable(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagTruth {
    pub h: usize,
    pub kappa: f64,
}

/// Serializable echo of a [`ModelTruth`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSummary {
    pub model: ModelSpec,
    pub alpha: f64,
    pub gamma: f64,
    pub kappa: Vec<LagTruth>,
    pub b_shape: String,
    pub product_method_applicable: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::hill;
    use crate::series::TailSide;

    #[test]
    fn parameter_checks() {
        assert!(simulate_expar(1.0, 2.0, 10, 0, 1).is_err());
        assert!(simulate_expar(0.5, 0.0, 10, 0, 1).is_err());
        assert!(simulate_expar(0.5, 2.0, 0, 0, 1).is_err());
        assert!(simulate_sv(2.0, 1.0, 10, 0, 1).is_err());
        assert!(simulate_iid_pareto(-1.0, 10, 1).is_err());
    }

    #[test]
    fn reproducible_and_positive() {
        let (a, truth) = simulate_expar(0.5, 2.0, 500, DEFAULT_BURN_IN, 1).unwrap();
        let (b, _) = simulate_expar(0.5, 2.0, 500, DEFAULT_BURN_IN, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 500);
        assert!(a.values().iter().all(|&x| x > 0.0));
        assert_eq!(truth.kappa(1), 0.5);
        assert_eq!(truth.kappa(3), 0.125);
        let (c, _) = simulate_expar(0.5, 2.0, 500, DEFAULT_BURN_IN, 2).unwrap();
        assert_ne!(a, c);
        let (s, t) = simulate_sv(2.0, 0.5, 1000, DEFAULT_BURN_IN, 3).unwrap();
        assert!(s.values().iter().all(|&x| x > 0.0));
        assert_eq!(t.kappa(4), 0.0);
        assert!(!t.product_method_applicable());
        assert!(t.spectral(1).unwrap().is_none());
    }

    #[test]
    fn expar_log_mean_is_stationary() {
        let (phi, alpha, n) = (0.5, 2.0, 1_000_000);
        let (s, _) = simulate_expar(phi, alpha, n, DEFAULT_BURN_IN, 11).unwrap();
        let logs: Vec<f64> = s.values().iter().map(|x| x.ln()).collect();
        let half = n / 2;
        let m1 = logs[..half].iter().sum::<f64>() / half as f64;
        let m2 = logs[half..].iter().sum::<f64>() / half as f64;
        // long-run sd of a half mean: sd(ε)/((1-φ)√half)
        let se = (1.0 / alpha) / ((1.0 - phi) * (half as f64).sqrt());
        assert!((m1 - m2).abs() < 3.0 * se * 2f64.sqrt(), "{m1} {m2}");
        let truth = 1.0 / (alpha * (1.0 - phi));
        assert!((m1 - truth).abs() < 4.0 * se);
    }

    #[test]
    fn expar_marginal_tail() {
        let (s, _) = simulate_expar(0.5, 2.0, 1_000_000, DEFAULT_BURN_IN, 5).unwrap();
        let g = hill(&s, 1000, TailSide::Absolute).unwrap();
        assert!((g - 0.5).abs() < 0.05, "{g}");
    }

    #[test]
    fn sv_breiman_constant() {
        let (alpha, ar) = (2.0, 0.5);
        let (s, _) = simulate_sv(alpha, ar, 1_000_000, DEFAULT_BURN_IN, 8).unwrap();
        let mut v = s.into_values();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q = v[(0.999 * v.len() as f64) as usize];
        let ratio = 0.001 / q.powf(-alpha);
        let var_y = 1.0 / (1.0 - ar * ar);
        let breiman = (alpha * alpha * var_y / 2.0).exp();
        assert!((ratio / breiman - 1.0).abs() < 0.15, "{ratio} vs {breiman}");
    }

    #[test]
    fn sv_without_dependence_is_iid_lognormal_mixture() {
        let (a, _) = simulate_sv(2.0, 0.0, 200, 0, 4).unwrap();
        let mut noise = rng::stream(4, domain::SERIES, 0);
        let mut vol = rng::stream(4, domain::VOLATILITY, 0);
        for &x in a.values() {
            let z: f64 = vol.sample(StandardNormal);
            let eps = open_unit(&mut noise).powf(-0.5);
            assert_eq!(x, eps * z.exp());
        }
    }

    #[test]
    fn pareto_support_and_median() {
        let alpha = 2.0;
        let (s, _) = simulate_iid_pareto(alpha, 1_000_000, 9).unwrap();
        assert!(s.values().iter().all(|&x| x >= 1.0));
        let mut v = s.into_values();
        let mid = v.len() / 2;
        let (_, m, _) = v.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
        let truth = 2f64.powf(1.0 / alpha);
        assert!((*m / truth - 1.0).abs() < 0.01);
    }

    #[test]
    fn pareto_hill_concentrates() {
        let (s, _) = simulate_iid_pareto(2.0, 1_000_000, 10).unwrap();
        let g = hill(&s, 1000, TailSide::Absolute).unwrap();
        assert!((g - 0.5).abs() < 0.05);
    }

    #[test]
    fn spec_serde_round_trip() {
        let spec = ModelSpec::Expar { phi: 0.5, alpha: 2.0 };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"name":"expar","phi":0.5,"alpha":2.0}"#);
        assert_eq!(serde_json::from_str::<ModelSpec>(&json).unwrap(), spec);
        let sv: ModelSpec = serde_json::from_str(r#"{"name":"sv","alpha":2,"ar_coeff":0.5}"#).unwrap();
        assert_eq!(sv, ModelSpec::Sv { alpha: 2.0, ar_coeff: 0.5 });
    }
}
