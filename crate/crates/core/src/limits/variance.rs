use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, domain};

use super::spectral::{spectral_pareto, SpectralModel};

/// Number of dyadic strata refining the extreme end of the driving uniform.
const DYADIC_STRATA: usize = 64;

/// Monte Carlo estimate of `E| |W_h|^{β_h} - 1 |` with `β_h = α/(1+κ_h)`,
/// the factor in the asymptotic variance `(1+κ_h)^2 E| |W_h|^{β_h} - 1 |`
/// of the scaling exponent estimator.
///
/// `|W|^β` is typically heavy tailed with infinite variance, so plain
/// averaging converges at rate `n^{1/p - 1}` only. The uniform driving the
/// heaviest factor of `W` is stratified instead: `n_mc - 64` equal strata on
/// `[1/m, 1]`, and 64 dyadic strata `[2^{-j-1}/m, 2^{-j}/m)` below, one draw
/// each. Returns `+∞` when the moment does not exist (`β_h` at or above the
/// tail index of `W`, or `1 + κ_h <= 0`).
pub fn variance_factor(model: &SpectralModel, n_mc: usize, seed: u64) -> Result<f64> {
    let mut rng = rng::stream(seed, domain::FACTOR, model.lag as u64);
    variance_factor_with(model, n_mc, &mut rng)
}

/// [`variance_factor`] drawing from a caller-supplied generator.
pub fn variance_factor_with<R: Rng + ?Sized>(
    model: &SpectralModel,
    n_mc: usize,
    rng: &mut R,
) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::param("n_mc", "need at least one draw"));
    }
    if !(1.0 + model.kappa > 0.0) {
        return Ok(f64::INFINITY);
    }
    let beta = model.beta();
    if beta >= model.w.tail_index() {
        return Ok(f64::INFINITY);
    }
    let g = |w: f64| (w.abs().powf(beta) - 1.0).abs();

    let (regular, dyadic) = if n_mc > 2 * DYADIC_STRATA {
        (n_mc - DYADIC_STRATA + 1, DYADIC_STRATA)
    } else {
        (n_mc, 0)
    };
    let m = regular as f64;
    let first = if dyadic > 0 { 1 } else { 0 };
    let mut total = 0.0;
    for i in first..regular {
        let v: f64 = rng.random();
        // stratum i is (i/m, (i+1)/m]
        let u = (i as f64 + 1.0 - v) / m;
        total += g(model.w.draw_with(u, rng)) / m;
    }
    let mut width = 1.0 / m;
    for _ in 0..dyadic {
        width *= 0.5;
        let v: f64 = rng.random();
        let u = width * (1.0 + v);
        total += width * g(model.w.draw_with(u, rng));
    }
    Ok(total)
}

/// Variance factor with estimated parameters plugged in: `W` Pareto(α̂),
/// `κ = κ̂`.
pub fn plug_in_variance_factor(
    alpha_hat: f64,
    kappa_hat: f64,
    n_mc: usize,
    seed: u64,
) -> Result<f64> {
    let model = spectral_pareto(alpha_hat, kappa_hat, 1)?;
    variance_factor(&model, n_mc, seed)
}
