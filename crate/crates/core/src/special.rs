//! Small special-function helpers.

use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// Volume of the unit ball in `R^k`: `pi^(k/2) / Gamma(k/2 + 1)`.
pub fn omega(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        _ => omega(k - 2) * 2.0 * PI / k as f64,
    }
}

/// Binomial coefficient as a float.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Euler beta function `B(x, y)` for positive arguments.
pub fn beta(x: f64, y: f64) -> f64 {
    (ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp()
}

/// Canonical weight exponent `a = (n - j - 1) / 2`.
pub fn canonical_exponent(n: usize, j: usize) -> f64 {
    (n as f64 - j as f64 - 1.0) / 2.0
}
