//! Feasible and oracle-mode estimators: Hill, lagged products, the
//! conditional scaling exponent, the scaling function, the limiting
//! conditional distribution and the tail empirical distribution.

mod conditional;
mod hill;
mod interval;
mod kappa;
mod tep;

pub use conditional::{conditional_cdf_hat, scaling_estimate, EmpiricalCdf};
pub use hill::{alpha_ci, hill, hill_ci, hill_sorted};
pub use interval::{normal_quantile, TailEstimate};
pub use kappa::{kappa_ci, kappa_components, kappa_hat, lagged_products, KappaComponents};
pub use tep::{tail_empirical_distribution, tail_empirical_function};
