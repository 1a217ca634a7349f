//! Densities `ζ` of functional intrinsic volumes and the transform `R^{n-j}`.
//!
//! `R^k(ζ)[t] = t^k ζ(t) + k ∫_t^∞ ζ(s) s^(k-1) ds` with `k = n - j`. On the family
//! `u_t(x) = max(0, |x| - t)` the functional intrinsic volume with density `ζ` equals
//! `ω_n binom(n, j) R^{n-j}(ζ)[t]`, which is how `ζ` is recovered from samples.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, ZonalError};
use crate::geometry::ConvexBody;
use crate::interp::LocalLagrange;
use crate::quadrature::{adaptive_breaks, half_line_breaks, QuadConfig};
use crate::special::{binom, omega};
use crate::tolerances::INTERP_STENCIL;

type ZFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum ZetaRepr {
    Analytic { f: ZFn, breaks: Vec<f64> },
    Sampled { interp: LocalLagrange },
}

/// A density on `(0, ∞)` vanishing beyond its support radius.
#[derive(Clone)]
pub struct ZetaDensity {
    repr: ZetaRepr,
    support: f64,
}

impl fmt::Debug for ZetaDensity {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            ZetaRepr::Analytic { .. } => write!(fm, "ZetaDensity::Analytic {{ support: {} }}", self.support),
            ZetaRepr::Sampled { interp } => {
                write!(fm, "ZetaDensity::Sampled {{ nodes: {}, support: {} }}", interp.nodes().len(), self.support)
            }
        }
    }
}

/// Near-zero and tail diagnostics of a density for `k = n - j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaDiagnostics {
    /// `t^k ζ(t)` along `t = R 2^-m`.
    pub scaled_values: Vec<f64>,
    /// `∫_t^∞ ζ(s) s^(k-1) ds` along the same sequence.
    pub partials: Vec<f64>,
    pub limit_ok: bool,
    pub cauchy_ok: bool,
}

impl ZetaDensity {
    /// Closure on `(0, support)`, zero beyond; `breaks` are kinks inside the support.
    pub fn analytic<F>(f: F, support: f64, breaks: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(support > 0.0 && support.is_finite()) {
            return Err(ZonalError::Validation(format!("support radius must be positive and finite, got {support}")));
        }
        Ok(ZetaDensity { repr: ZetaRepr::Analytic { f: Arc::new(f), breaks }, support })
    }

    /// `(R - s)_+`
    pub fn hat(support: f64) -> Result<Self> {
        Self::analytic(move |s| (support - s).max(0.0), support, vec![])
    }

    /// Samples on ascending nodes; the last node is the support radius.
    pub fn sampled(t: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        let support = *t.last().ok_or_else(|| ZonalError::Validation("empty sample".into()))?;
        if t[0] < 0.0 {
            return Err(ZonalError::Validation("density nodes must be non-negative".into()));
        }
        let interp = LocalLagrange::new(t, z, INTERP_STENCIL)?;
        if !(support > 0.0) {
            return Err(ZonalError::Validation("support radius must be positive".into()));
        }
        Ok(ZetaDensity { repr: ZetaRepr::Sampled { interp }, support })
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn nodes(&self) -> Option<(&[f64], &[f64])> {
        match &self.repr {
            ZetaRepr::Sampled { interp } => Some((interp.nodes(), interp.values())),
            ZetaRepr::Analytic { .. } => None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t >= self.support || t < 0.0 {
            return 0.0;
        }
        match &self.repr {
            ZetaRepr::Analytic { f, .. } => f(t),
            ZetaRepr::Sampled { interp } => interp.eval(t),
        }
    }

    fn breaks(&self) -> Vec<f64> {
        match &self.repr {
            ZetaRepr::Analytic { breaks, .. } => breaks.clone(),
            ZetaRepr::Sampled { interp } => interp.nodes().to_vec(),
        }
    }

    /// Checks `t^k ζ(t) → 0` and the Cauchy behaviour of the tail integral as `t → 0`.
    pub fn diagnostics(&self, k: usize) -> Result<ZetaDiagnostics> {
        let ts: Vec<f64> = (4..=30).map(|m| self.support * 2f64.powi(-m)).collect();
        let scaled: Vec<f64> = ts.iter().map(|&t| t.powi(k as i32) * self.eval(t)).collect();
        let partials = ts.iter().map(|&t| tail_integral(self, k, t)).collect::<Result<Vec<f64>>>()?;
        let tail = |v: &[f64]| v[v.len() - 6..].iter().map(|x| x.abs()).fold(0.0, f64::max);
        let head = scaled.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
        let limit_ok = tail(&scaled) <= 1e-3 * head.max(1.0) && scaled.iter().all(|v| v.is_finite());
        let diffs: Vec<f64> = partials.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let scale = partials.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
        let cauchy_ok = partials.iter().all(|v| v.is_finite()) && tail(&diffs) <= 1e-4 * scale.max(1.0);
        Ok(ZetaDiagnostics { scaled_values: scaled, partials, limit_ok, cauchy_ok })
    }
}

/// `∫_t^∞ ζ(s) s^(k-1) ds`, integrated in `x = ln s`.
fn tail_integral(z: &ZetaDensity, k: usize, t: f64) -> Result<f64> {
    if t >= z.support {
        return Ok(0.0);
    }
    let cfg = QuadConfig::default();
    let top = z.support.ln();
    let h = |x: f64| {
        let s = x.exp();
        z.eval(s) * s.powi(k as i32)
    };
    let lo = if t > 0.0 { t.ln() } else { f64::NEG_INFINITY };
    let breaks: Vec<f64> = z.breaks().into_iter().filter(|&b| b > t && b < z.support).map(f64::ln).collect();
    let est = if lo.is_finite() {
        adaptive_breaks(h, lo, top, &breaks, &cfg)?
    } else {
        half_line_breaks(h, top, -1.0, &breaks, &cfg)?
    };
    Ok(est.value)
}

fn check_degree(n: usize, j: usize) -> Result<usize> {
    if n < 2 || j == 0 || j >= n {
        return Err(ZonalError::Domain(format!("need 1 <= j <= n-1, got n={n}, j={j}")));
    }
    Ok(n - j)
}

/// `R^{n-j}(ζ)[t]`.
pub fn r_transform_eval(z: &ZetaDensity, n: usize, j: usize, t: f64) -> Result<f64> {
    let k = check_degree(n, j)?;
    if !(t >= 0.0) {
        return Err(ZonalError::Domain(format!("R-transform is defined for t >= 0, got {t}")));
    }
    if t >= z.support {
        return Ok(0.0);
    }
    let head = if t > 0.0 { t.powi(k as i32) * z.eval(t) } else { 0.0 };
    Ok(head + k as f64 * tail_integral(z, k, t)?)
}

/// `R^{n-j}(ζ)` on a grid; fails when the density is not admissible near `0`.
pub fn r_transform(z: &ZetaDensity, n: usize, j: usize, grid: &[f64]) -> Result<Vec<f64>> {
    let k = check_degree(n, j)?;
    let d = z.diagnostics(k)?;
    if !d.limit_ok || !d.cauchy_ok {
        return Err(ZonalError::Domain(format!(
            "density is not admissible near 0 (t^k zeta(t) -> 0: {}, tail integral converges: {})",
            d.limit_ok, d.cauchy_ok
        )));
    }
    grid.iter().map(|&t| r_transform_eval(z, n, j, t)).collect()
}

/// `u_t(x) = max(0, |x| - t)`.
pub fn u_t_eval(t: f64, x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>().sqrt() - t).max(0.0)
}

/// `V*_{j,ζ}(u_t) = ω_n binom(n, j) R^{n-j}(ζ)[t]`.
pub fn v_star_on_ut(z: &ZetaDensity, n: usize, j: usize, t: f64) -> Result<f64> {
    Ok(omega(n) * binom(n, j) * r_transform_eval(z, n, j, t)?)
}

/// Inverse transform output.
#[derive(Debug, Clone)]
pub struct RInverse {
    pub zeta: ZetaDensity,
    /// `max |R(ζ̂)(t_i) - φ(t_i)|`
    pub residual: f64,
    pub warnings: Vec<String>,
}

/// Fourth-order finite-difference derivative on a uniform grid, one-sided near the ends.
fn derivative(f: &[f64], h: f64) -> Vec<f64> {
    let m = f.len();
    let mut d = vec![0.0; m];
    for i in 0..m {
        d[i] = if i >= 2 && i + 2 < m {
            f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]
        } else if i == 0 {
            -25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]
        } else if i == 1 {
            -3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]
        } else if i == m - 1 {
            25.0 * f[m - 1] - 48.0 * f[m - 2] + 36.0 * f[m - 3] - 16.0 * f[m - 4] + 3.0 * f[m - 5]
        } else {
            3.0 * f[m - 1] + 10.0 * f[m - 2] - 18.0 * f[m - 3] + 6.0 * f[m - 4] - f[m - 5]
        } / (12.0 * h);
    }
    d
}

/// Integral of the cubic through four neighbouring samples over `[t_i, t_{i+1}]`.
fn interval_integral(f: &[f64], i: usize, h: f64) -> f64 {
    let m = f.len();
    h / 24.0
        * if i >= 1 && i + 2 < m {
            -f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]
        } else if i == 0 {
            9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
        } else {
            9.0 * f[m - 1] + 19.0 * f[m - 2] - 5.0 * f[m - 3] + f[m - 4]
        }
}

/// `ζ(t) = -∫_t^∞ φ'(s) s^-(n-j) ds` for `φ` sampled on a uniform grid whose last node
/// bounds the support of `φ`.
pub fn r_inverse(t: &[f64], phi: &[f64], n: usize, j: usize) -> Result<RInverse> {
    let k = check_degree(n, j)? as i32;
    let m = t.len();
    if m < 8 || phi.len() != m {
        return Err(ZonalError::Validation("inverse transform needs at least 8 matching samples".into()));
    }
    let h = (t[m - 1] - t[0]) / (m - 1) as f64;
    if !(h > 0.0)
        || t.iter().enumerate().any(|(i, &x)| (x - t[0] - i as f64 * h).abs() > 1e-9 * t[m - 1].abs().max(1.0))
    {
        return Err(ZonalError::Validation("samples must lie on a uniform ascending grid".into()));
    }
    if t[0] < 0.0 || phi.iter().any(|v| !v.is_finite()) {
        return Err(ZonalError::Validation("samples need t >= 0 and finite values".into()));
    }
    let mut warnings = Vec::new();
    let scale = phi.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if phi[m - 1].abs() > 1e-12 * scale.max(1e-300) {
        warnings.push(format!(
            "samples end at {:.3e} instead of 0: the valuation looks not compactly supported or not of degree >= 1",
            phi[m - 1]
        ));
    }
    let zp: Vec<f64> = if t[0] == 0.0 {
        // φ(t) - φ(0) = t^(k+1) ψ(t) with ψ smooth, so φ'/t^k = (k+1) ψ + t ψ' avoids dividing
        // derivative errors by t^k near 0.
        let mut psi: Vec<f64> = t.iter().zip(phi).map(|(&ti, &p)| (p - phi[0]) / ti.powi(k + 1)).collect();
        psi[0] = 4.0 * psi[1] - 6.0 * psi[2] + 4.0 * psi[3] - psi[4];
        let dpsi = derivative(&psi, h);
        let near: Vec<f64> = psi.iter().zip(&dpsi).zip(t).map(|((p, dp), &ti)| (k + 1) as f64 * p + ti * dp).collect();
        let d = derivative(phi, h);
        // ψ loses accuracy to cancellation once t^(k+1) is no longer small
        near.iter()
            .zip(&d)
            .zip(t)
            .map(|((nv, di), &ti)| if ti < 0.25 * t[m - 1] { *nv } else { di / ti.powi(k) })
            .collect()
    } else {
        derivative(phi, h).iter().zip(t).map(|(di, &ti)| di / ti.powi(k)).collect()
    };
    let mut z = vec![0.0; m];
    for i in (0..m - 1).rev() {
        z[i] = z[i + 1] - interval_integral(&zp, i, h);
    }
    let zeta = ZetaDensity::sampled(t.to_vec(), z)?;
    let mut residual: f64 = 0.0;
    for (i, &ti) in t.iter().enumerate() {
        residual = residual.max((r_transform_eval(&zeta, n, j, ti)? - phi[i]).abs());
    }
    if residual > 1e-6 * scale.max(1.0) {
        warnings.push(format!("derivative looks noisy: round-trip residual {residual:.3e}"));
    }
    Ok(RInverse { zeta, residual, warnings })
}

/// `ζ = r_inverse(φ) / (ω_n binom(n, j))` from samples `φ(t) = μ(u_t)`; the residual is that of
/// `V*` on `u_t` against the samples.
pub fn reconstruct_zeta(t: &[f64], phi: &[f64], n: usize, j: usize) -> Result<RInverse> {
    check_degree(n, j)?;
    let c = omega(n) * binom(n, j);
    let scaled: Vec<f64> = phi.iter().map(|v| v / c).collect();
    let mut out = r_inverse(t, &scaled, n, j)?;
    out.residual *= c;
    for w in out.warnings.iter_mut() {
        if w.starts_with("derivative") {
            *w = format!("derivative looks noisy: round-trip residual {:.3e}", out.residual);
        }
    }
    Ok(out)
}

/// `max_x |h_{C_h}((x, -1)) - (u_{-h}(x) - h)|` over `samples` random points of `[-3, 3]^n`
/// and the origin, with `C_h ⊂ R^{n+1}`.
pub fn cone_bridge_residual(n: usize, h: f64, samples: usize, seed: u64) -> Result<f64> {
    if !(h <= 0.0) {
        return Err(ZonalError::Domain(format!("the bridge identity needs h <= 0, got {h}")));
    }
    let cone = ConvexBody::cone(n + 1, h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..=samples {
        let mut y: Vec<f64> = if i == 0 { vec![0.0; n] } else { (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect() };
        let want = u_t_eval(-h, &y) - h;
        y.push(-1.0);
        worst = worst.max((cone.support(&y) - want).abs());
    }
    Ok(worst)
}

/// Values of a functional valuation with density `ζ` on `h_{C_{-t}}(·, -1)` for each `t` in the
/// grid. Each such function is checked to be `u_t` plus a constant, which the valuation
/// ignores, so the value is `V*` on `u_t`.
pub fn v_star_on_cones(z: &ZetaDensity, n: usize, j: usize, grid: &[f64]) -> Result<Vec<f64>> {
    let probe: Vec<Vec<f64>> = (0..12)
        .map(|i| {
            let mut x = vec![0.0; n];
            x[i % n] = 0.25 * i as f64;
            x
        })
        .collect();
    grid.iter()
        .map(|&t| {
            let cone = ConvexBody::cone(n + 1, -t)?;
            let at = |x: &[f64]| {
                let mut y = x.to_vec();
                y.push(-1.0);
                cone.support(&y)
            };
            let t_est = at(&vec![0.0; n]);
            let shifts: Vec<f64> = probe.iter().map(|x| at(x) - u_t_eval(t_est, x)).collect();
            let spread = shifts.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
                - shifts.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            if spread > 1e-12 * (1.0 + t) {
                return Err(ZonalError::Numerical(format!("cone support at t = {t} is not u_t plus a constant")));
            }
            v_star_on_ut(z, n, j, t_est)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hat_transform() {
        let z = ZetaDensity::hat(1.0).unwrap();
        for t in [0.0, 0.2, 0.5, 0.9, 1.0, 1.7] {
            let want = if t < 1.0 { (1.0 - t * t * t) / 3.0 } else { 0.0 };
            assert!((r_transform_eval(&z, 3, 1, t).unwrap() - want).abs() < 1e-10, "t={t}");
        }
        assert!((v_star_on_ut(&z, 3, 1, 0.5).unwrap() - 4.0 * PI / 3.0 * (1.0 - 0.125)).abs() < 1e-10);
    }

    #[test]
    fn u_t_values() {
        assert_eq!(u_t_eval(2.0, &[3.0, 0.0, 0.0]), 1.0);
        assert_eq!(u_t_eval(0.0, &[3.0, 4.0]), 5.0);
        assert_eq!(u_t_eval(1.0, &[0.5, 0.0]), 0.0);
    }

    #[test]
    fn inverse_of_cubic() {
        let t: Vec<f64> = (0..256).map(|i| i as f64 / 255.0).collect();
        let phi: Vec<f64> = t.iter().map(|x| (1.0 - x * x * x) / 3.0).collect();
        let inv = r_inverse(&t, &phi, 3, 1).unwrap();
        let (nodes, z) = inv.zeta.nodes().unwrap();
        for (x, v) in nodes.iter().zip(z) {
            assert!((v - (1.0 - x)).abs() < 1e-9, "t={x}: {v}");
        }
        assert!(inv.warnings.is_empty(), "{:?}", inv.warnings);
    }

    #[test]
    fn zero_samples() {
        let t: Vec<f64> = (0..32).map(|i| i as f64 / 31.0).collect();
        let inv = reconstruct_zeta(&t, &vec![0.0; 32], 3, 1).unwrap();
        assert!(inv.zeta.nodes().unwrap().1.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bridge_examples() {
        let c = ConvexBody::cone(4, -1.0).unwrap();
        assert!((c.support(&[0.0, 0.0, 0.0, -1.0]) - 1.0).abs() < 1e-15);
        for h in [-2.0, -1.0, -0.5, 0.0] {
            assert!(cone_bridge_residual(3, h, 1000, 1).unwrap() <= 1e-12);
        }
    }
}
