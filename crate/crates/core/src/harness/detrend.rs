use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::Series;

/// Residuals of the least-squares line `X_j ≈ a + b j`.
///
/// Works with centered index and values, so the fit stays accurate for long
/// series and large offsets.
pub fn detrend_linear<T: Scalar>(series: &Series<T>) -> Result<Series<T>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::param("series", "detrending needs at least two values"));
    }
    let x = series.values();
    let nt = T::of_usize(n);
    let t_bar = T::of_usize(n - 1) / T::of(2.0);
    let x_bar = x.iter().fold(T::zero(), |s, &v| s + v) / nt;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (j, &v) in x.iter().enumerate() {
        let dt = T::of_usize(j) - t_bar;
        sxy = sxy + dt * (v - x_bar);
        sxx = sxx + dt * dt;
    }
    let slope = sxy / sxx;
    let residuals = x
        .iter()
        .enumerate()
        .map(|(j, &v)| v - x_bar - slope * (T::of_usize(j) - t_bar))
        .collect();
    let out = Series::new(residuals)?;
    Ok(match series.name() {
        Some(name) => out.with_name(name),
        None => out,
    })
}
