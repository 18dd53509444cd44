//! Spectral vectors `(Y_0, W_h)` and the limiting conditional laws `Ψ_h`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, domain, open_unit};

/// The limiting conditional distribution function `Ψ_h`, normalized to unit
/// first absolute moment.
pub trait PsiOracle: Send + Sync + fmt::Debug {
    fn cdf(&self, y: f64) -> f64;

    /// Generalized inverse on `(0, 1)`.
    fn quantile(&self, u: f64) -> f64;

    /// Analytic density, when one is available. Callers fall back to
    /// finite differences of [`PsiOracle::cdf`] otherwise.
    fn density(&self, _y: f64) -> Option<f64> {
        None
    }
}

/// Law of `Z / E[Z]` where `log Z` is a sum of independent exponentials
/// with pairwise distinct rates (a hypoexponential law).
///
/// For the exponential AR(1) model at lag `h`, `log(Y_0^{κ_h} W_h)` is such
/// a sum with rates `α/φ^i`, `i = 0..=h`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypoexponentialPsi {
    rates: Vec<f64>,
    weights: Vec<f64>,
    mean: f64,
}

impl HypoexponentialPsi {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() || rates.iter().any(|&r| !(r > 1.0) || !r.is_finite()) {
            return Err(Error::param(
                "rates",
                "need at least one rate, all finite and above 1 so that the mean exists",
            ));
        }
        for (i, a) in rates.iter().enumerate() {
            if rates[i + 1..].iter().any(|b| (a - b).abs() <= 1e-9 * a.max(*b)) {
                return Err(Error::param("rates", "rates must be pairwise distinct"));
            }
        }
        let weights = rates
            .iter()
            .enumerate()
            .map(|(i, &li)| {
                rates
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &lj)| lj / (lj - li))
                    .product()
            })
            .collect();
        let mean = rates.iter().map(|&l| l / (l - 1.0)).product();
        Ok(HypoexponentialPsi {
            rates,
            weights,
            mean,
        })
    }

    /// `E[Z]`, the normalizing constant.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `P(log Z > t)` for `t >= 0`.
    fn survival_log(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        let s: f64 = self
            .rates
            .iter()
            .zip(&self.weights)
            .map(|(&l, &c)| c * (-l * t).exp())
            .sum();
        s.clamp(0.0, 1.0)
    }

    fn density_log(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let f: f64 = self
            .rates
            .iter()
            .zip(&self.weights)
            .map(|(&l, &c)| c * l * (-l * t).exp())
            .sum();
        f.max(0.0)
    }
}

impl PsiOracle for HypoexponentialPsi {
    fn cdf(&self, y: f64) -> f64 {
        let z = self.mean * y;
        if z <= 1.0 {
            return 0.0;
        }
        1.0 - self.survival_log(z.ln())
    }

    fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 1.0 / self.mean;
        }
        if u >= 1.0 {
            return f64::INFINITY;
        }
        let target = 1.0 - u;
        let mut lo = 0.0;
        let mut hi = 1.0 / self.rates.iter().cloned().fold(f64::INFINITY, f64::min);
        while self.survival_log(hi) > target {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.survival_log(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        (0.5 * (lo + hi)).exp() / self.mean
    }

    fn density(&self, y: f64) -> Option<f64> {
        let z = self.mean * y;
        if z <= 1.0 {
            return Some(0.0);
        }
        Some(self.density_log(z.ln()) / y)
    }
}

/// Piecewise-linear distribution function through tabulated points.
/// Flat outside the table.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPsi {
    ys: Vec<f64>,
    ps: Vec<f64>,
}

impl TabulatedPsi {
    pub fn new(ys: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        if ys.len() < 2 || ys.len() != ps.len() {
            return Err(Error::param(
                "table",
                "need at least two (y, cdf) pairs of matching length",
            ));
        }
        if ys.iter().any(|y| !y.is_finite()) || ys.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "tabulated y values must be finite and strictly increasing".into(),
            ));
        }
        if ps.iter().any(|p| !(0.0..=1.0).contains(p)) || ps.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::param(
                "table",
                "tabulated probabilities must be nondecreasing within [0, 1]",
            ));
        }
        Ok(TabulatedPsi { ys, ps })
    }

    /// Table of empirical quantiles of the draws at `points + 1` equally
    /// spaced probabilities.
    pub fn from_draws(mut draws: Vec<f64>, points: usize) -> Result<Self> {
        if draws.len() < 2 || points < 1 {
            return Err(Error::param("draws", "need at least two draws and one point"));
        }
        if draws.iter().any(|d| !d.is_finite()) {
            return Err(Error::param("draws", "draws must be finite"));
        }
        draws.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
        let mut ys = Vec::with_capacity(points + 1);
        let mut ps = Vec::with_capacity(points + 1);
        for i in 0..=points {
            let p = i as f64 / points as f64;
            let y = empirical_quantile(&draws, p);
            if ys.last().is_some_and(|&last| y <= last) {
                // keep the latest probability reached at a repeated value
                *ps.last_mut().expect("nonempty") = p;
                continue;
            }
            ys.push(y);
            ps.push(p);
        }
        if ys.len() < 2 {
            return Err(Error::param("draws", "draws are all equal"));
        }
        TabulatedPsi::new(ys, ps)
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn ps(&self) -> &[f64] {
        &self.ps
    }

    fn segment(&self, y: f64) -> Option<usize> {
        if y < self.ys[0] || y >= self.ys[self.ys.len() - 1] {
            return None;
        }
        Some(self.ys.partition_point(|&v| v <= y) - 1)
    }
}

impl PsiOracle for TabulatedPsi {
    fn cdf(&self, y: f64) -> f64 {
        match self.segment(y) {
            Some(i) => {
                let t = (y - self.ys[i]) / (self.ys[i + 1] - self.ys[i]);
                self.ps[i] + t * (self.ps[i + 1] - self.ps[i])
            }
            None if y < self.ys[0] => self.ps[0],
            None => self.ps[self.ps.len() - 1],
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        let last = self.ps.len() - 1;
        if u <= self.ps[0] {
            return self.ys[0];
        }
        if u >= self.ps[last] {
            return self.ys[last];
        }
        let i = self.ps.partition_point(|&p| p < u);
        let (p0, p1) = (self.ps[i - 1], self.ps[i]);
        let t = (u - p0) / (p1 - p0);
        self.ys[i - 1] + t * (self.ys[i] - self.ys[i - 1])
    }

    fn density(&self, y: f64) -> Option<f64> {
        Some(match self.segment(y) {
            Some(i) => (self.ps[i + 1] - self.ps[i]) / (self.ys[i + 1] - self.ys[i]),
            None => 0.0,
        })
    }
}

/// Wraps an oracle and reports a zero derivative everywhere, which reduces
/// the limit process `Λ_h` to the bridge term `B°(Ψ_h(y))`.
#[derive(Debug, Clone)]
pub struct ZeroDerivative<P>(pub P);

impl<P: PsiOracle> PsiOracle for ZeroDerivative<P> {
    fn cdf(&self, y: f64) -> f64 {
        self.0.cdf(y)
    }

    fn quantile(&self, u: f64) -> f64 {
        self.0.quantile(u)
    }

    fn density(&self, _y: f64) -> Option<f64> {
        Some(0.0)
    }
}

/// Uniform law on `[0, 1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformPsi;

impl PsiOracle for UniformPsi {
    fn cdf(&self, y: f64) -> f64 {
        y.clamp(0.0, 1.0)
    }

    fn quantile(&self, u: f64) -> f64 {
        u.clamp(0.0, 1.0)
    }

    fn density(&self, y: f64) -> Option<f64> {
        Some(if (0.0..=1.0).contains(&y) { 1.0 } else { 0.0 })
    }
}

/// Law of the spectral component `W_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WLaw {
    /// Degenerate at a point.
    Constant(f64),
    /// `P(W > w) = w^{-α}`, `w >= 1`.
    Pareto { alpha: f64 },
    /// `exp(Σ_{i<lag} φ^i ε_i)` with `ε_i` i.i.d. exponential(α).
    ExparLag { alpha: f64, phi: f64, lag: usize },
}

impl WLaw {
    /// Draws `W` with its heaviest-tailed factor driven by the uniform
    /// `u ∈ (0, 1]` (small `u`, large `W`). Remaining factors use `rng`.
    pub fn draw_with<R: Rng + ?Sized>(&self, u: f64, rng: &mut R) -> f64 {
        match *self {
            WLaw::Constant(c) => c,
            WLaw::Pareto { alpha } => u.powf(-1.0 / alpha),
            WLaw::ExparLag { alpha, phi, lag } => {
                let mut log_w = -u.ln() / alpha;
                let mut coef = 1.0;
                for _ in 1..lag {
                    coef *= phi;
                    log_w += coef * (-open_unit(rng).ln() / alpha);
                }
                log_w.exp()
            }
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = open_unit(rng);
        self.draw_with(u, rng)
    }

    /// Index of regular variation of `P(|W| > w)`; infinite for a bounded law.
    /// `E|W|^p` is finite exactly when `p` is below it.
    pub fn tail_index(&self) -> f64 {
        match *self {
            WLaw::Constant(_) => f64::INFINITY,
            WLaw::Pareto { alpha } | WLaw::ExparLag { alpha, .. } => alpha,
        }
    }
}

/// The spectral description of one lag: tail index `α`, scaling exponent
/// `κ_h`, the law of `W_h`, and optionally the normalized limit `Ψ_h`.
#[derive(Clone)]
pub struct SpectralModel {
    pub alpha: f64,
    pub kappa: f64,
    pub lag: usize,
    pub w: WLaw,
    psi: Option<Arc<dyn PsiOracle>>,
}

impl fmt::Debug for SpectralModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralModel")
            .field("alpha", &self.alpha)
            .field("kappa", &self.kappa)
            .field("lag", &self.lag)
            .field("w", &self.w)
            .field("psi", &self.psi)
            .finish()
    }
}

impl SpectralModel {
    pub fn new(alpha: f64, kappa: f64, lag: usize, w: WLaw) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
        }
        if !kappa.is_finite() {
            return Err(Error::param("kappa", "must be finite"));
        }
        Ok(SpectralModel {
            alpha,
            kappa,
            lag,
            w,
            psi: None,
        })
    }

    pub fn with_psi(mut self, psi: Arc<dyn PsiOracle>) -> Self {
        self.psi = Some(psi);
        self
    }

    pub fn psi(&self) -> Result<&dyn PsiOracle> {
        self.psi.as_deref().ok_or_else(|| {
            Error::MissingCapability(format!(
                "no limiting conditional distribution for lag {}",
                self.lag
            ))
        })
    }

    pub fn has_psi(&self) -> bool {
        self.psi.is_some()
    }

    /// Tail index of the lagged product, `β_h = α / (1 + κ_h)`.
    pub fn beta(&self) -> f64 {
        self.alpha / (1.0 + self.kappa)
    }

    pub fn draw_w<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.w.draw(rng)
    }

    /// One draw of `(Y_0, Y_0^{κ_h} W_h)` with `Y_0` Pareto(α) independent of `W_h`.
    pub fn draw_limit<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let y0 = open_unit(rng).powf(-1.0 / self.alpha);
        let w = self.w.draw(rng);
        (y0, y0.powf(self.kappa) * w)
    }
}

/// Spectral model of the exponential AR(1) process at lag `h >= 1`:
/// `κ_h = φ^h`, `W_h = exp(Σ_{i<h} φ^i ε_{h-i})` and an analytic `Ψ_h`
/// (available for `α > 1`, where the normalizing mean exists).
pub fn spectral_sampler_expar(phi: f64, alpha: f64, h: usize) -> Result<SpectralModel> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::param("phi", format!("must lie in (0, 1), got {phi}")));
    }
    if h == 0 {
        return Err(Error::param("h", "lag must be at least 1"));
    }
    let kappa = phi.powi(h as i32);
    let model = SpectralModel::new(alpha, kappa, h, WLaw::ExparLag { alpha, phi, lag: h })?;
    if alpha > 1.0 {
        let rates = (0..=h).map(|i| alpha / phi.powi(i as i32)).collect();
        let psi = HypoexponentialPsi::new(rates)?;
        Ok(model.with_psi(Arc::new(psi)))
    } else {
        Ok(model)
    }
}

/// Spectral model with Pareto(α) `W_h` and a given `κ`. Used for plug-in
/// variance factors and for i.i.d. Pareto data (`κ = 0`).
pub fn spectral_pareto(alpha: f64, kappa: f64, h: usize) -> Result<SpectralModel> {
    SpectralModel::new(alpha, kappa, h, WLaw::Pareto { alpha })
}

/// Monte Carlo version of `Ψ_h`: empirical quantiles of `Y_0^{κ} W_h`
/// divided by their sample mean, tabulated at `points + 1` probabilities.
pub fn monte_carlo_psi(
    model: &SpectralModel,
    n_draws: usize,
    points: usize,
    seed: u64,
) -> Result<TabulatedPsi> {
    if n_draws < 2 {
        return Err(Error::param("n_draws", "need at least two draws"));
    }
    let mut rng = rng::stream(seed, domain::ORACLE, model.lag as u64);
    let draws: Vec<f64> = (0..n_draws).map(|_| model.draw_limit(&mut rng).1).collect();
    let mean = draws.iter().sum::<f64>() / n_draws as f64;
    TabulatedPsi::from_draws(draws.into_iter().map(|z| z / mean).collect(), points)
}

/// Type 7 (linear interpolation) quantile of sorted data.
pub(crate) fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let t = pos - lo as f64;
    sorted[lo] + t * (sorted[hi] - sorted[lo])
}
