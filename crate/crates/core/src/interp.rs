//! Local Lagrange interpolation on sorted nodes.

use crate::error::{Result, ZonalError};

/// Piecewise polynomial interpolant: on each node interval the polynomial through a fixed
/// stencil of neighbouring nodes is used, so the interpolant is smooth inside intervals
/// and continuous across nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalLagrange {
    x: Vec<f64>,
    y: Vec<f64>,
    stencil: usize,
}

impl LocalLagrange {
    /// `x` must be strictly increasing.
    pub fn new(x: Vec<f64>, y: Vec<f64>, stencil: usize) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(ZonalError::Validation("interpolation needs at least two matching nodes".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ZonalError::Validation("interpolation nodes must be strictly increasing".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(ZonalError::Validation("interpolation values must be finite".into()));
        }
        let stencil = stencil.clamp(2, x.len());
        Ok(LocalLagrange { x, y, stencil })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Index `i` with `x[i] <= t < x[i+1]`, clamped to the valid interval range.
    pub fn interval(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.interval(t);
        let n = self.x.len();
        let p = self.stencil;
        let start = (i + 1).saturating_sub(p / 2).min(n - p);
        let xs = &self.x[start..start + p];
        let ys = &self.y[start..start + p];
        let mut sum = 0.0;
        for k in 0..p {
            let mut l = 1.0;
            for m in 0..p {
                if m != k {
                    l *= (t - xs[m]) / (xs[k] - xs[m]);
                }
            }
            sum += ys[k] * l;
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quintics() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin() + i as f64).collect();
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t.powi(3) - 0.01 * t.powi(5);
        let y = x.iter().map(|&t| f(t)).collect();
        let li = LocalLagrange::new(x, y, 6).unwrap();
        for k in 0..200 {
            let t = -0.5 + k as f64 * 0.1;
            assert!((li.eval(t) - f(t)).abs() < 1e-8 * f(t).abs().max(1.0), "t={t}");
        }
    }

    #[test]
    fn interpolates_nodes() {
        let li = LocalLagrange::new(vec![0.0, 1.0, 3.0], vec![2.0, -1.0, 5.0], 6).unwrap();
        assert_eq!(li.eval(1.0), -1.0);
        assert!((li.eval(3.0) - 5.0).abs() < 1e-14);
    }
}
