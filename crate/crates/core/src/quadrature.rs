//! Adaptive Gauss-Kronrod quadrature.
//!
//! Improper integrals over `(-1, 1)` are handled by the caller through the substitution
//! `t = tanh(theta)`, which turns endpoint singularities into exponentially decaying tails;
//! [`half_line`] then compactifies the tail with `theta = theta0 + x / (1 - x)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Result, ZonalError};
use crate::tolerances::{QUAD_ABS_TOL, QUAD_PANEL_CAP, QUAD_REL_TOL};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// An integral value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, err: 0.0 };

    pub fn add(self, o: Estimate) -> Estimate {
        Estimate { value: self.value + o.value, err: self.err + o.err }
    }

    pub fn scale(self, c: f64) -> Estimate {
        Estimate { value: c * self.value, err: c.abs() * self.err }
    }
}

/// Quadrature controls.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub rel: f64,
    pub abs: f64,
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { rel: QUAD_REL_TOL, abs: QUAD_ABS_TOL, max_panels: QUAD_PANEL_CAP }
    }
}

/// One 15-point Kronrod rule on `[a, b]` with the embedded 7-point Gauss error.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    gk15_abs(f, a, b).0
}

/// Kronrod rule that also returns the integral of `|f|` (for the round-off floor).
fn gk15_abs<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (Estimate, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    for i in 0..7 {
        let x = h * XGK[i];
        let f1 = f(c - x);
        let f2 = f(c + x);
        resk += WGK[i] * (f1 + f2);
        resabs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            resg += WG[i / 2] * (f1 + f2);
        }
    }
    let value = resk * h;
    let err = ((resk - resg) * h).abs();
    (Estimate { value, err }, (resabs * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    est: Estimate,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.est.err == o.est.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.est.err.partial_cmp(&o.est.err).unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive integration of `f` over `[a, b]`.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::ZERO);
    }
    let (first, first_abs) = gk15_abs(&mut f, a, b);
    if !first.value.is_finite() {
        return Err(ZonalError::Numerical(format!("non-finite integrand on [{a}, {b}]")));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, est: first, abs: first_abs });
    let mut total = first;
    let mut absint = first_abs;
    let mut panels = 1usize;
    loop {
        let tol = cfg.abs.max(cfg.rel * total.value.abs()).max(64.0 * f64::EPSILON * absint);
        if total.err <= tol {
            return Ok(total);
        }
        if panels >= cfg.max_panels {
            return Err(ZonalError::Numerical(format!(
                "quadrature panel cap reached on [{a}, {b}]: value {} error {}",
                total.value, total.err
            )));
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // Interval exhausted at machine precision: accept its contribution.
            heap.push(Panel { est: Estimate { value: worst.est.value, err: 0.0 }, ..worst });
            total = heap.iter().fold(Estimate::ZERO, |acc, p| acc.add(p.est));
            if heap.iter().all(|p| p.est.err == 0.0) {
                return Ok(total);
            }
            continue;
        }
        let (l, labs) = gk15_abs(&mut f, worst.a, m);
        let (r, rabs) = gk15_abs(&mut f, m, worst.b);
        if !(l.value.is_finite() && r.value.is_finite()) {
            return Err(ZonalError::Numerical(format!("non-finite integrand near {m}")));
        }
        total.value += l.value + r.value - worst.est.value;
        total.err += l.err + r.err - worst.est.err;
        absint += labs + rabs - worst.abs;
        heap.push(Panel { a: worst.a, b: m, est: l, abs: labs });
        heap.push(Panel { a: m, b: worst.b, est: r, abs: rabs });
        panels += 1;
        if panels % 64 == 0 {
            // Re-sum to keep drift out of the running totals.
            total = heap.iter().fold(Estimate::ZERO, |acc, p| acc.add(p.est));
        }
    }
}

/// Adaptive integration over `[a, b]` split at the given interior break points.
pub fn adaptive_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<Estimate> {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut total = Estimate::ZERO;
    let mut prev = lo;
    for x in pts.into_iter().chain(std::iter::once(hi)) {
        if x > prev {
            total = total.add(adaptive(&mut f, prev, x, cfg)?);
        }
        prev = x;
    }
    Ok(total.scale(sign))
}

/// Integral of `f` over `[theta0, +inf)` (`dir > 0`) or `(-inf, theta0]` (`dir < 0`).
///
/// The integrand must decay at infinity; the map `theta = theta0 ± x / (1 - x)` sends the
/// half line to `[0, 1)`.
pub fn half_line<F: FnMut(f64) -> f64>(mut f: F, theta0: f64, dir: f64, cfg: &QuadConfig) -> Result<Estimate> {
    let g = |x: f64| {
        let y = 1.0 - x;
        let t = theta0 + dir * x / y;
        if !t.is_finite() {
            return 0.0;
        }
        let v = f(t) / (y * y);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    adaptive(g, 0.0, 1.0, cfg)
}

/// Half-line integral with break points (given in the `theta` variable).
pub fn half_line_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    theta0: f64,
    dir: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<Estimate> {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&b| (b - theta0) * dir > 0.0).collect();
    if pts.is_empty() {
        return half_line(f, theta0, dir, cfg);
    }
    pts.sort_by(|x, y| ((x - theta0) * dir).partial_cmp(&((y - theta0) * dir)).unwrap());
    let last = *pts.last().unwrap();
    // adaptive_breaks is oriented; flip so both directions give the positive-measure integral.
    let total = adaptive_breaks(&mut f, theta0, last, &pts, cfg)?.scale(dir.signum());
    let tail = half_line(&mut f, last, dir, cfg)?;
    Ok(total.add(tail))
}

/// Composite fixed rule: `[a, b]` split into `m` equal panels of 15-point Kronrod each.
pub fn composite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, m: usize) -> Estimate {
    let h = (b - a) / m as f64;
    let mut total = Estimate::ZERO;
    for i in 0..m {
        let lo = a + h * i as f64;
        let hi = if i + 1 == m { b } else { lo + h };
        total = total.add(gk15(&mut f, lo, hi));
    }
    total
}

/// Nodes and weights of the 15-point Kronrod rule mapped to `[a, b]`, ascending.
pub fn kronrod_nodes(a: f64, b: f64) -> Vec<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = Vec::with_capacity(15);
    for i in 0..7 {
        out.push((c - h * XGK[i], h * WGK[i]));
    }
    out.push((c, h * WGK[7]));
    for i in (0..7).rev() {
        out.push((c + h * XGK[i], h * WGK[i]));
    }
    out
}

/// `S[k][l] = ∫_{-1}^{t_k} L_l(t) dt` for the Lagrange basis `L_l` on the 15 Kronrod nodes of
/// `[-1, 1]` (ascending); on `[a, b]` the cumulative integral of `f` up to node `k` is
/// `(b - a)/2 · Σ_l S[k][l] f(x_l)`.
pub fn kronrod_cumulative() -> &'static [[f64; 15]; 15] {
    static S: OnceLock<[[f64; 15]; 15]> = OnceLock::new();
    S.get_or_init(|| {
        let t: Vec<f64> = kronrod_nodes(-1.0, 1.0).into_iter().map(|(x, _)| x).collect();
        // Legendre values P_0..P_15 at x
        let legendre = |x: f64| {
            let mut p = vec![1.0, x];
            for l in 1..15 {
                let lf = l as f64;
                p.push(((2.0 * lf + 1.0) * x * p[l] - lf * p[l - 1]) / (lf + 1.0));
            }
            p
        };
        let v = DMatrix::from_fn(15, 15, |k, l| legendre(t[k])[l]);
        let anti = DMatrix::from_fn(15, 15, |k, l| {
            let p = legendre(t[k]);
            if l == 0 {
                t[k] + 1.0
            } else {
                (p[l + 1] - p[l - 1]) / (2.0 * l as f64 + 1.0)
            }
        });
        let inv = v.try_inverse().expect("Legendre Vandermonde on Kronrod nodes is invertible");
        let s = anti * inv;
        let mut out = [[0.0; 15]; 15];
        for (k, row) in out.iter_mut().enumerate() {
            for (l, x) in row.iter_mut().enumerate() {
                *x = s[(k, l)];
            }
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_matrix_integrates_polynomials() {
        let s = kronrod_cumulative();
        let nodes = kronrod_nodes(-1.0, 1.0);
        for (k, &(t, _)) in nodes.iter().enumerate() {
            let got: f64 = (0..15).map(|l| s[k][l] * nodes[l].0.powi(9)).sum();
            assert!((got - (t.powi(10) - 1.0) / 10.0).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_exact() {
        let e = gk15(&mut |x: f64| x.powi(10), -1.0, 1.0);
        assert!((e.value - 2.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_sqrt_singularity() {
        let e = adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn half_line_exponential() {
        let e = half_line(|t: f64| (-t).exp(), 0.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        let e = half_line(|t: f64| t.exp(), 0.0, -1.0, &QuadConfig::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_line_with_breaks_matches() {
        let cfg = QuadConfig::default();
        let f = |t: f64| (-(t * t)).exp();
        let a = half_line(f, 0.0, -1.0, &cfg).unwrap().value;
        let b = half_line_breaks(f, 0.0, -1.0, &[-0.5, -1.0, -3.0], &cfg).unwrap().value;
        assert!((a - b).abs() < 1e-12);
        assert!((a - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn kronrod_nodes_integrate() {
        let s: f64 = kronrod_nodes(0.0, 2.0).iter().map(|(x, w)| w * x * x).sum();
        assert!((s - 8.0 / 3.0).abs() < 1e-14);
    }
}
