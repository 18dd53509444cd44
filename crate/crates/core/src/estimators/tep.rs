use crate::scalar::Scalar;
use crate::series::Series;

/// Infeasible tail empirical distribution with known threshold `u_n` and
/// scaling `b_h = b_h(u_n)`:
///
/// ```text
/// T̃(s, y) = (1/k) Σ_{j=1..n-h} 1{|X_j| > u_n s, X_{j+h} <= b_h y}
/// ```
///
/// `k` stands for `n F̄_0(u_n)` and is supplied by the caller; it need not be
/// an integer.
pub fn tail_empirical_distribution<T: Scalar>(
    series: &Series<T>,
    h: usize,
    u_n: T,
    b_h: T,
    s: T,
    y: T,
    k: T,
) -> T {
    let x = series.values();
    let n = x.len();
    if h >= n {
        return T::zero();
    }
    let level = u_n * s;
    let bound = b_h * y;
    let count = x[..n - h]
        .iter()
        .zip(&x[h..])
        .filter(|(lead, &follow)| lead.abs() > level && follow <= bound)
        .count();
    T::of_usize(count) / k
}

/// One-dimensional tail empirical function `k⁻¹ #{j : |X_j| > u_n s}`.
pub fn tail_empirical_function<T: Scalar>(series: &Series<T>, u_n: T, k: usize, s: T) -> T {
    let level = u_n * s;
    let count = series.values().iter().filter(|x| x.abs() > level).count();
    T::of_usize(count) / T::of_usize(k)
}
