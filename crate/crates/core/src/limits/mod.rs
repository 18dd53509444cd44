//! Limit objects: spectral vectors, the variance factor of the scaling
//! exponent estimator, and the Gaussian limit processes used for
//! goodness-of-fit.

mod paths;
mod spectral;
mod variance;

pub use paths::{
    ks_critical_value, simulate_brownian_bridge, simulate_brownian_bridge_path,
    simulate_brownian_motion, simulate_lambda_path, LambdaSimulator, LimitPath, PathKind,
    DEFAULT_INTEGRAL_CELLS,
};
pub(crate) use spectral::empirical_quantile;
pub use spectral::{
    monte_carlo_psi, spectral_pareto, spectral_sampler_expar, HypoexponentialPsi, PsiOracle,
    SpectralModel, TabulatedPsi, UniformPsi, WLaw, ZeroDerivative,
};
pub use variance::{plug_in_variance_factor, variance_factor, variance_factor_with};
