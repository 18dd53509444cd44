use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{Series, TailSide};

use super::hill::hill;
use super::interval::TailEstimate;

/// `V_j = |X_j X_{j+h}|` for `j = 1..n-h`.
pub fn lagged_products<T: Scalar>(series: &Series<T>, h: usize) -> Result<Series<T>> {
    let n = series.len();
    if h >= n {
        return Err(Error::LagOutOfRange { h, n });
    }
    let x = series.values();
    Series::new(
        x.iter()
            .zip(&x[h..])
            .map(|(&a, &b)| (a * b).abs())
            .collect(),
    )
}

/// The two Hill estimates behind `κ̂_h` and the ratio itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaComponents<T> {
    /// Hill estimate on `|X_j|`.
    pub gamma: T,
    /// Hill estimate on `|X_j X_{j+h}|`, same `k`.
    pub gamma_h: T,
    /// `gamma_h / gamma - 1`.
    pub kappa: T,
}

pub fn kappa_components<T: Scalar>(
    series: &Series<T>,
    h: usize,
    k: usize,
) -> Result<KappaComponents<T>> {
    let products = lagged_products(series, h)?;
    let gamma = hill(series, k, TailSide::Absolute)?;
    let gamma_h = hill(&products, k, TailSide::Absolute)?;
    if gamma == T::zero() {
        return Err(Error::DegenerateHill { k });
    }
    Ok(KappaComponents {
        gamma,
        gamma_h,
        kappa: gamma_h / gamma - T::one(),
    })
}

/// Conditional scaling exponent estimate `κ̂_h = γ̂_h / γ̂ - 1`.
pub fn kappa_hat<T: Scalar>(series: &Series<T>, h: usize, k: usize) -> Result<T> {
    kappa_components(series, h, k).map(|c| c.kappa)
}

/// Interval `κ̂ ± z (1+κ̂) √factor / √k`, where `factor = E| |W_h|^β - 1 |`.
///
/// An infinite factor (the moment does not exist) gives an unbounded interval.
pub fn kappa_ci<T: Scalar>(
    kappa_hat: T,
    k: usize,
    variance_factor: T,
    level: f64,
) -> Result<TailEstimate<T>> {
    if variance_factor.is_nan() || variance_factor < T::zero() {
        return Err(Error::param(
            "variance_factor",
            format!("must be nonnegative, got {variance_factor}"),
        ));
    }
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    let se = if variance_factor.is_infinite() {
        T::infinity()
    } else {
        (T::one() + kappa_hat).abs() * variance_factor.sqrt() / T::of_usize(k).sqrt()
    };
    TailEstimate::normal(kappa_hat, se, k, level, "scaling_exponent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[f64]) -> Series<f64> {
        Series::new(v.to_vec()).unwrap()
    }

    #[test]
    fn product_examples() {
        assert_eq!(lagged_products(&s(&[1.0, -2.0, 3.0]), 1).unwrap().values(), &[2.0, 6.0]);
        assert_eq!(
            lagged_products(&s(&[1.0, -2.0, 3.0]), 0).unwrap().values(),
            &[1.0, 4.0, 9.0]
        );
        assert_eq!(
            lagged_products(&s(&[2.0, 3.0, 4.0, 5.0]), 2).unwrap().values(),
            &[8.0, 15.0]
        );
        assert!(matches!(
            lagged_products(&s(&[1.0, 2.0]), 2),
            Err(Error::LagOutOfRange { h: 2, n: 2 })
        ));
    }

    #[test]
    fn constant_tail_is_degenerate() {
        let x = s(&[2.0; 50]);
        assert!(matches!(kappa_hat(&x, 1, 10), Err(Error::DegenerateHill { k: 10 })));
    }

    #[test]
    fn equal_hill_values_give_zero() {
        // Triples (b, 1, 0): the lag-1 products keep every b once and zero
        // out the rest, so both samples share their top order statistics.
        let v: Vec<f64> = (0..10)
            .flat_map(|i| [2.0 + i as f64 * 1.7, 1.0, 0.0])
            .collect();
        let x = s(&v);
        let c = kappa_components(&x, 1, 5).unwrap();
        assert!((c.gamma_h - c.gamma).abs() < 1e-12);
        assert!(c.kappa.abs() < 1e-12);
        let sq = kappa_components(&x, 0, 5).unwrap();
        assert!((sq.kappa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interval_examples() {
        let ci = kappa_ci(0.5f64, 100, 2.0, 0.95).unwrap();
        assert!((ci.ci_low - 0.084).abs() < 1e-3 && (ci.ci_high - 0.916).abs() < 1e-3);
        let ci = kappa_ci(0.0f64, 400, 1.0, 0.95).unwrap();
        assert!((ci.ci_low + 0.098).abs() < 1e-3 && (ci.ci_high - 0.098).abs() < 1e-3);
        let ci = kappa_ci(0.3f64, 50, 0.0, 0.95).unwrap();
        assert_eq!((ci.ci_low, ci.ci_high), (0.3, 0.3));
        let ci = kappa_ci(0.3, 50, f64::INFINITY, 0.95).unwrap();
        assert!(ci.ci_low == f64::NEG_INFINITY && ci.ci_high == f64::INFINITY);
        assert!(kappa_ci(0.3, 50, -1.0, 0.95).is_err());
        assert!(kappa_ci(0.3, 50, f64::NAN, 0.95).is_err());
    }

    proptest! {
        #[test]
        fn scale_invariance(
            v in prop::collection::vec(0.01f64..100.0, 30..120),
            c in prop::sample::select(vec![1e-6, 1e-3, 0.5, 1.0, 7.0, 1e6]),
            k_raw in 1usize..20,
        ) {
            let x = s(&v);
            let k = k_raw.min(x.len() - 2);
            let a = kappa_components(&x, 1, k);
            let b = kappa_components(&x.scaled(c).unwrap(), 1, k);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    prop_assert!((a.gamma - b.gamma).abs() <= 1e-12 * a.gamma.abs().max(1e-12));
                    prop_assert!((a.kappa - b.kappa).abs() <= 1e-12 * a.kappa.abs().max(1.0));
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }
    }
}
