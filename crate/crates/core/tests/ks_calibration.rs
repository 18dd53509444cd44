//! Size and power of the goodness-of-fit test over many simulated series.

use std::sync::Arc;

use rayon::prelude::*;

use cev_core::harness::{ks_grid, ks_statistic, DEFAULT_KS_POINTS};
use cev_core::limits::{
    ks_critical_value, spectral_sampler_expar, HypoexponentialPsi, PsiOracle, SpectralModel,
};
use cev_core::models::simulate_expar;
use cev_core::TailSide;

const PHI: f64 = 0.5;
const ALPHA: f64 = 4.0;
const SEEDS: u64 = 200;

/// `Ψ(y - shift)`.
#[derive(Debug)]
struct Shifted {
    inner: Arc<dyn PsiOracle>,
    shift: f64,
}

impl PsiOracle for Shifted {
    fn cdf(&self, y: f64) -> f64 {
        self.inner.cdf(y - self.shift)
    }
    fn quantile(&self, u: f64) -> f64 {
        self.inner.quantile(u) + self.shift
    }
    fn density(&self, y: f64) -> Option<f64> {
        self.inner.density(y - self.shift)
    }
}

fn rejection_rate(model: &SpectralModel) -> f64 {
    let psi = model.psi().unwrap();
    let grid = ks_grid(psi, DEFAULT_KS_POINTS).unwrap();
    let crit = ks_critical_value(model, 0.05, 10_000, &grid, 17).unwrap();
    let rejected = (0..SEEDS)
        .into_par_iter()
        .filter(|&seed| {
            let (x, _) = simulate_expar(PHI, ALPHA, 100_000, 1000, 5000 + seed).unwrap();
            ks_statistic(&x, 1, 2000, psi, &grid, TailSide::Absolute).unwrap() > crit
        })
        .count();
    rejected as f64 / SEEDS as f64
}

#[test]
fn null_rejection_rate_is_near_level() {
    let model = spectral_sampler_expar(PHI, ALPHA, 1).unwrap();
    let rate = rejection_rate(&model);
    println!("rejection rate under the null: {rate:.3}");
    assert!(rate <= 0.15, "rate {rate}");
}

#[test]
fn shifted_reference_is_rejected() {
    let truth = spectral_sampler_expar(PHI, ALPHA, 1).unwrap();
    let wrong = truth.clone().with_psi(Arc::new(Shifted {
        inner: Arc::new(HypoexponentialPsi::new(vec![ALPHA, ALPHA / PHI]).unwrap()),
        shift: 1.0,
    }));
    let rate = rejection_rate(&wrong);
    println!("rejection rate against a shifted law: {rate:.3}");
    assert!(rate >= 0.95, "rate {rate}");
}
