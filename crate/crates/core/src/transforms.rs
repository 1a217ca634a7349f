//! The transform pair `I_a : D^a -> C` and `J_a : C -> D^a`.
//!
//! Profiles `u` on `[-1, 1] \ {0}` are handled through `v(s) = |s| u(s)`, which is bounded
//! and has one-sided limits at `0`. In terms of the weighted density `g`,
//!
//! - `v_I(s) = g(s) + 2a |s| ∫ g(tanh θ) dθ` over `θ` between `-sign(s)·∞` and `atanh s`;
//! - `g_J(s) = -|s| w^a u(1)/2 + v(s) - 2a |s| w^a M(s)` with `w = 1 - s^2` and
//!   `M(s) = ∫ v(tanh θ) w^-a dθ` over `θ` between `0` and `atanh s`.
//!
//! Every integral runs in the tanh variable, so endpoint behaviour is exponential decay.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use serde::Serialize;

use crate::dspace::{Parity, ZonalDensity};
use crate::error::{Result, ZonalError};
use crate::interp::LocalLagrange;
use crate::point::Pt;
use crate::quadrature::{adaptive, gk15, kronrod_cumulative, kronrod_nodes, QuadConfig};
use crate::tolerances::{
    CONE_S_MIN, INTERP_STENCIL, NORM_GRID, SWEEP_EXPONENT_MAX, SWEEP_PANEL, SWEEP_PANEL_GROWTH, SWEEP_THETA_MAX,
};

type VFn = Arc<dyn Fn(Pt) -> f64 + Send + Sync>;

/// Profile sampled on both halves, interpolated in `ψ = node angle of |s|` per half.
#[derive(Debug, Clone)]
pub struct SampledProfile {
    nodes: Vec<Pt>,
    u: Vec<f64>,
    u_end: (f64, f64),
    limits: (f64, f64),
    neg: LocalLagrange,
    pos: LocalLagrange,
}

impl SampledProfile {
    pub fn nodes(&self) -> &[Pt] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }
}

#[derive(Clone)]
enum ProfileRepr {
    Analytic { v: VFn, u_end: f64, limits: (f64, f64), parity: Option<Parity> },
    Sampled(SampledProfile),
    Image(ZonalDensity),
}

/// An element of the profile space `C`.
#[derive(Clone)]
pub struct ConeProfile {
    repr: ProfileRepr,
}

impl std::fmt::Debug for ConeProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.repr {
            ProfileRepr::Analytic { u_end, limits, .. } => {
                write!(f, "ConeProfile::Analytic {{ u(±1): {u_end}, limits: {limits:?} }}")
            }
            ProfileRepr::Sampled(s) => write!(f, "ConeProfile::Sampled({} nodes)", s.nodes.len()),
            ProfileRepr::Image(d) => write!(f, "ConeProfile::Image({d:?})"),
        }
    }
}

/// Consistency diagnostics of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileDiagnostics {
    /// `|u(1) - u(-1)|`
    pub endpoint_gap: f64,
    /// One-sided limits of `|s| u(s)` at `0` from the left and right.
    pub limits: (f64, f64),
    pub limit_gap: f64,
}

impl ConeProfile {
    /// Analytic profile given through `v(s) = |s| u(s)`, the common value `u(±1)` and the
    /// one-sided limits of `v` at `0`.
    pub fn analytic<F>(v: F, u_end: f64, limits: (f64, f64), parity: Option<Parity>) -> Self
    where
        F: Fn(Pt) -> f64 + Send + Sync + 'static,
    {
        ConeProfile { repr: ProfileRepr::Analytic { v: Arc::new(v), u_end, limits, parity } }
    }

    /// `u ≡ c`
    pub fn constant(c: f64) -> Self {
        Self::analytic(move |p| c * p.s.abs(), c, (0.0, 0.0), Some(Parity::Even))
    }

    /// Sampled profile from `(s, u(s))` rows with `0 < |s| < 1`, endpoint values `u(-1)`, `u(1)` and
    /// optional one-sided zero limits of `|s| u(s)`; missing limits are extrapolated.
    pub fn sampled(s: &[f64], u: &[f64], u_end: (f64, f64), limits: Option<(f64, f64)>) -> Result<Self> {
        let pts: Vec<Pt> = s.iter().map(|&x| Pt::from_s(x)).collect();
        Self::sampled_pts(pts, u.to_vec(), u_end, limits)
    }

    pub fn sampled_pts(nodes: Vec<Pt>, u: Vec<f64>, u_end: (f64, f64), limits: Option<(f64, f64)>) -> Result<Self> {
        if nodes.len() != u.len() {
            return Err(ZonalError::Validation("profile nodes and values differ in length".into()));
        }
        if nodes.iter().any(|p| !(p.s != 0.0 && p.s.abs() < 1.0)) {
            return Err(ZonalError::Validation("profile nodes must satisfy 0 < |s| < 1".into()));
        }
        if u.iter().any(|x| !x.is_finite()) || !u_end.0.is_finite() || !u_end.1.is_finite() {
            return Err(ZonalError::Validation("profile values must be finite".into()));
        }
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&i, &k| nodes[i].s.partial_cmp(&nodes[k].s).unwrap());
        let nodes: Vec<Pt> = order.iter().map(|&i| nodes[i]).collect();
        let u: Vec<f64> = order.iter().map(|&i| u[i]).collect();
        let half = |sign: f64, end: f64, lim: Option<f64>| -> Result<LocalLagrange> {
            let mut xy: Vec<(f64, f64)> = nodes
                .iter()
                .zip(&u)
                .filter(|(p, _)| p.s * sign > 0.0)
                .map(|(p, v)| (p.abs().node_angle(), p.s.abs() * v))
                .collect();
            if xy.is_empty() {
                return Err(ZonalError::Validation("profile needs nodes on both sides of 0".into()));
            }
            xy.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let lim = match lim {
                Some(l) => l,
                None => {
                    let (x, y): (Vec<f64>, Vec<f64>) = xy.iter().copied().unzip();
                    LocalLagrange::new(x, y, INTERP_STENCIL.min(xy.len()))
                        .map(|li| li.eval(FRAC_PI_2))
                        .unwrap_or(xy.last().unwrap().1)
                }
            };
            let mut x = vec![0.0];
            let mut y = vec![end];
            for (a, b) in xy {
                x.push(a);
                y.push(b);
            }
            x.push(FRAC_PI_2);
            y.push(lim);
            LocalLagrange::new(x, y, INTERP_STENCIL)
                .map_err(|_| ZonalError::Validation("profile nodes must be distinct".into()))
        };
        let neg = half(-1.0, u_end.0, limits.map(|l| l.0))?;
        let pos = half(1.0, u_end.1, limits.map(|l| l.1))?;
        let limits = (neg.eval(FRAC_PI_2), pos.eval(FRAC_PI_2));
        Ok(ConeProfile { repr: ProfileRepr::Sampled(SampledProfile { nodes, u, u_end, limits, neg, pos }) })
    }

    /// The profile `I_a(f)`, evaluated on demand.
    pub fn image(f: &ZonalDensity) -> Result<Self> {
        f.ensure_member()?;
        Ok(ConeProfile { repr: ProfileRepr::Image(f.clone()) })
    }

    pub fn as_sampled(&self) -> Option<&SampledProfile> {
        match &self.repr {
            ProfileRepr::Sampled(s) => Some(s),
            _ => None,
        }
    }

    pub fn parity(&self) -> Option<Parity> {
        match &self.repr {
            ProfileRepr::Analytic { parity, .. } => *parity,
            ProfileRepr::Sampled(_) => None,
            ProfileRepr::Image(f) => f.parity(),
        }
    }

    /// `v(s) = |s| u(s)`; at `s = ±1` this is `u(±1)`.
    pub fn v(&self, p: Pt) -> Result<f64> {
        if p.s == 0.0 {
            return Err(ZonalError::Domain("profiles are not defined at s = 0".into()));
        }
        if p.om <= 0.0 || p.op <= 0.0 {
            return self.endpoint(p.s.signum());
        }
        match &self.repr {
            ProfileRepr::Analytic { v, .. } => Ok(v(p)),
            ProfileRepr::Sampled(d) => {
                let psi = p.abs().node_angle();
                Ok(if p.s > 0.0 { d.pos.eval(psi) } else { d.neg.eval(psi) })
            }
            ProfileRepr::Image(f) => i_weighted(f, p),
        }
    }

    /// `v` at many points, sharing work for images of densities.
    pub fn v_many(&self, pts: &[Pt]) -> Result<Vec<f64>> {
        match &self.repr {
            ProfileRepr::Image(f) if pts.iter().all(|p| p.s != 0.0 && p.om > 0.0 && p.op > 0.0) => {
                i_weighted_many(f, pts)
            }
            _ => pts.iter().map(|p| self.v(*p)).collect(),
        }
    }

    /// `u(s)` for `s ∈ [-1, 1] \ {0}`.
    pub fn u(&self, s: f64) -> Result<f64> {
        if !(s.abs() <= 1.0) {
            return Err(ZonalError::Domain(format!("profiles are defined on [-1, 1], got {s}")));
        }
        Ok(self.v(Pt::from_s(s))? / s.abs())
    }

    /// `u(1)` (`sign > 0`) or `u(-1)`.
    pub fn endpoint(&self, sign: f64) -> Result<f64> {
        match &self.repr {
            ProfileRepr::Analytic { u_end, .. } => Ok(*u_end),
            ProfileRepr::Sampled(d) => Ok(if sign > 0.0 { d.u_end.1 } else { d.u_end.0 }),
            ProfileRepr::Image(f) => i_endpoint(f),
        }
    }

    /// One-sided limits `lim_{s -> 0∓} |s| u(s)`.
    pub fn limits(&self) -> (f64, f64) {
        match &self.repr {
            ProfileRepr::Analytic { limits, .. } => *limits,
            ProfileRepr::Sampled(d) => d.limits,
            ProfileRepr::Image(f) => {
                let g0 = f.g(Pt::from_s(0.0));
                (g0, g0)
            }
        }
    }

    /// Break points (tanh variable) of sampled profiles.
    fn theta_breaks(&self) -> Vec<f64> {
        match &self.repr {
            ProfileRepr::Sampled(d) => d.nodes.iter().map(|p| p.atanh()).collect(),
            _ => Vec::new(),
        }
    }

    pub fn diagnostics(&self) -> Result<ProfileDiagnostics> {
        let up = self.endpoint(1.0)?;
        let um = self.endpoint(-1.0)?;
        let limits = self.limits();
        Ok(ProfileDiagnostics { endpoint_gap: (up - um).abs(), limits, limit_gap: (limits.1 - limits.0).abs() })
    }

    /// Domain error unless `u(1) = u(-1)` and the zero limits exist and agree within `tol`
    /// (relative to the profile scale).
    pub fn ensure_member(&self, tol: f64) -> Result<()> {
        let d = self.diagnostics()?;
        let scale = self.endpoint(1.0)?.abs().max(d.limits.0.abs()).max(d.limits.1.abs()).max(1.0);
        if !(d.endpoint_gap <= tol * scale) {
            return Err(ZonalError::Domain(format!(
                "profile violates u(1) = u(-1): u(1) - u(-1) = {:e}",
                self.endpoint(1.0)? - self.endpoint(-1.0)?
            )));
        }
        if !(d.limits.0.is_finite() && d.limits.1.is_finite()) {
            return Err(ZonalError::Domain("limit of |s| u(s) at 0 is not finite".into()));
        }
        if !(d.limit_gap <= tol * scale) {
            return Err(ZonalError::Domain(format!(
                "one-sided limits of |s| u(s) at 0 disagree: {} vs {}",
                d.limits.0, d.limits.1
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// I_a

/// `f(±1)` for bounded densities with `a = 0`.
fn bounded_endpoint(f: &ZonalDensity, sign: f64) -> f64 {
    f.g(if sign > 0.0 { Pt::from_om(0.0) } else { Pt::from_op(0.0) })
}

/// `I_a(f)[±1]`.
pub fn i_endpoint(f: &ZonalDensity) -> Result<f64> {
    if f.a() == 0.0 {
        return Ok(bounded_endpoint(f, 1.0) + bounded_endpoint(f, -1.0));
    }
    Ok(2.0 * f.a() * f.full_integral()?.value)
}

/// `|s| I_a(f)[s]` for `s ≠ 0`; linear parts of `f` contribute exactly zero.
pub fn i_weighted(f: &ZonalDensity, p: Pt) -> Result<f64> {
    if p.s == 0.0 {
        return Err(ZonalError::Domain("I_a(f) is not defined at s = 0".into()));
    }
    if p.om <= 0.0 || p.op <= 0.0 {
        return i_endpoint(f);
    }
    let f = f.strip_linear();
    let a = f.a();
    let g = f.g(p);
    if a == 0.0 {
        return Ok(g + p.s.abs() * bounded_endpoint(&f, -p.s.signum()));
    }
    let th = p.atanh();
    let tail = if p.s > 0.0 { f.theta_integral(f64::NEG_INFINITY, th)? } else { f.theta_integral(th, f64::INFINITY)? };
    Ok(g + 2.0 * a * p.s.abs() * tail.value)
}

/// `I_a(f)[s]` for `s ∈ [-1, 1] \ {0}`.
pub fn i_value(f: &ZonalDensity, s: f64) -> Result<f64> {
    if !(s.abs() <= 1.0) || s == 0.0 {
        return Err(ZonalError::Domain(format!("I_a(f) is defined on [-1, 1] \\ {{0}}, got {s}")));
    }
    Ok(i_weighted(f, Pt::from_s(s))? / s.abs())
}

/// `|s| I_a(f)[s]` at many points, sharing cumulative integrals.
pub fn i_weighted_many(f: &ZonalDensity, pts: &[Pt]) -> Result<Vec<f64>> {
    if pts.iter().any(|p| p.s == 0.0) {
        return Err(ZonalError::Domain("I_a(f) is not defined at s = 0".into()));
    }
    let f = f.strip_linear();
    let a = f.a();
    let mut out = vec![0.0; pts.len()];
    if a == 0.0 {
        for (o, p) in out.iter_mut().zip(pts) {
            *o = i_weighted(&f, *p)?;
        }
        return Ok(out);
    }
    let end = i_endpoint(&f)?;
    let gm = f.theta_integral(f64::NEG_INFINITY, 0.0)?.value;
    let gp = f.theta_integral(0.0, f64::INFINITY)?.value;
    for sign in [1.0, -1.0] {
        let mut idx: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].s * sign > 0.0).collect();
        idx.sort_by(|&i, &k| pts[i].s.abs().partial_cmp(&pts[k].s.abs()).unwrap());
        let (mut acc, mut prev) = (0.0, 0.0);
        for i in idx {
            let p = pts[i];
            if p.om <= 0.0 || p.op <= 0.0 {
                out[i] = end;
                continue;
            }
            let x = p.atanh().abs();
            acc += if sign > 0.0 { f.theta_integral(prev, x)?.value } else { f.theta_integral(-x, -prev)?.value };
            prev = x;
            let other = if sign > 0.0 { gm } else { gp };
            out[i] = f.g(p) + 2.0 * a * p.s.abs() * (other + acc);
        }
    }
    Ok(out)
}

/// `I_a(f)` as a profile.
pub fn transform_i(f: &ZonalDensity) -> Result<ConeProfile> {
    ConeProfile::image(f)
}

// ---------------------------------------------------------------------------
// J_a

fn check_a(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(ZonalError::Domain(format!("J_a needs a > 0, got {a}")));
    }
    Ok(())
}

/// Nodes `0 = x_0 < x_1 < ...` covering `[0, xmax]` with panels of width `SWEEP_PANEL`, growing
/// geometrically past `SWEEP_PANEL_GROWTH`, and containing every extra point.
fn sweep_nodes(extra: impl Iterator<Item = f64>, xmax: f64, a: f64) -> Vec<f64> {
    // (1 - s^2)^-a changes by at most e^1.5 per panel
    let widest = (0.75 / a).max(SWEEP_PANEL);
    let step = |x: f64| (SWEEP_PANEL * (x / SWEEP_PANEL_GROWTH).max(1.0)).min(widest);
    let mut xs: Vec<f64> =
        std::iter::successors(Some(0.0), |&x: &f64| Some(x + step(x))).take_while(|&x| x < xmax).collect();
    xs.push(xmax);
    xs.extend(extra.filter(|&x| x > 0.0 && x <= xmax));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

/// Weighted values `g_J = (1 - s^2)^a J_a(u)[s]` at the given points.
pub fn j_weighted_many(u: &ConeProfile, a: f64, pts: &[Pt]) -> Result<Vec<f64>> {
    check_a(a)?;
    let u1 = u.endpoint(1.0)?;
    let cfg = QuadConfig::default();
    let breaks = u.theta_breaks();
    let mut out = vec![0.0; pts.len()];
    for sign in [1.0, -1.0] {
        let idx: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].s * sign > 0.0).collect();
        if idx.is_empty() {
            continue;
        }
        let finite: Vec<f64> = idx.iter().map(|&i| pts[i].atanh().abs()).filter(|x| x.is_finite()).collect();
        let xmax = finite.iter().copied().fold(0.0, f64::max);
        let xs =
            sweep_nodes(finite.iter().copied().chain(breaks.iter().map(|b| b * sign).filter(|b| *b > 0.0)), xmax, a);
        let mut err: Option<ZonalError> = None;
        let mut integrand = |x: f64| {
            let p = Pt::from_tanh(sign * x);
            match u.v(p) {
                Ok(v) => v * p.w().powf(-a),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        };
        let mut m = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            m[i] = m[i - 1] + adaptive(&mut integrand, xs[i - 1], xs[i], &cfg)?.value;
        }
        if let Some(e) = err {
            return Err(e);
        }
        for i in idx {
            let p = pts[i];
            if p.om <= 0.0 || p.op <= 0.0 {
                out[i] = 0.0;
                continue;
            }
            let x = p.atanh().abs();
            let mk = m[xs.partition_point(|&y| y < x)];
            let s = p.s.abs();
            let wa = p.w().powf(a);
            out[i] = -s * wa * u1 / 2.0 + u.v(p)? - 2.0 * a * s * wa * mk;
        }
    }
    Ok(out)
}

/// `J_a(u)[s]` for `s ∈ (-1, 1)`; at `s = 0` the mean of the one-sided limits.
pub fn j_value(u: &ConeProfile, a: f64, s: f64) -> Result<f64> {
    check_a(a)?;
    if !(s.abs() < 1.0) {
        return Err(ZonalError::Domain(format!("J_a(u) is defined on (-1, 1), got {s}")));
    }
    if s == 0.0 {
        let l = u.limits();
        return Ok(0.5 * (l.0 + l.1));
    }
    let p = Pt::from_s(s);
    Ok(j_weighted_many(u, a, &[p])?[0] / p.w().powf(a))
}

/// Default node angles for sampled output: Chebyshev nodes `(k + 1/2) π / m`.
pub fn chebyshev_angles(m: usize) -> Vec<f64> {
    (0..m).map(|k| (k as f64 + 0.5) * PI / m as f64).collect()
}

/// `J_a(u)` sampled at the given node angles (tail exponents estimated from the outer nodes).
pub fn transform_j(u: &ConeProfile, a: f64, angles: &[f64]) -> Result<ZonalDensity> {
    u.ensure_member(1e-9)?;
    let l = u.limits();
    let pts: Vec<Pt> = angles.iter().map(|&phi| Pt::from_node_angle(phi)).collect();
    let inner: Vec<Pt> = pts.iter().copied().filter(|p| p.s != 0.0).collect();
    let vals = j_weighted_many(u, a, &inner)?;
    let mut it = vals.into_iter();
    let g: Vec<f64> = pts.iter().map(|p| if p.s == 0.0 { 0.5 * (l.0 + l.1) } else { it.next().unwrap() }).collect();
    let tail = estimate_tail(&pts, &g);
    ZonalDensity::sampled_angles(a, angles.to_vec(), g, tail, tail.is_none())
}

/// Decay exponents of `|g|` towards `-1` and `+1` from the two outermost nodes per side.
pub fn estimate_tail(pts: &[Pt], g: &[f64]) -> Option<(f64, f64)> {
    let side = |sign: f64| -> Option<f64> {
        let mut v: Vec<(f64, f64)> = pts
            .iter()
            .zip(g)
            .filter(|(p, _)| p.s * sign > 0.0)
            .map(|(p, &y)| (if sign > 0.0 { p.om } else { p.op }, y.abs()))
            .collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if v.len() < 2 {
            return None;
        }
        let (d1, y1) = v[0];
        let (d2, y2) = v[1];
        if y1 == 0.0 && y2 == 0.0 {
            return Some(1.0);
        }
        let e = (y1.max(1e-300) / y2.max(1e-300)).ln() / (d1 / d2).ln();
        (e.is_finite() && e > 0.0).then_some(e)
    };
    Some((side(-1.0)?, side(1.0)?))
}

/// `‖u‖_C = sup |s| |u(s)|` over a node-angle grid and the endpoints.
pub fn norm_c(u: &ConeProfile) -> Result<f64> {
    let pts: Vec<Pt> =
        (0..=NORM_GRID).map(|k| Pt::from_node_angle(PI * k as f64 / NORM_GRID as f64)).filter(|p| p.s != 0.0).collect();
    let vals = u.v_many(&pts)?;
    let l = u.limits();
    Ok(vals
        .into_iter()
        .map(f64::abs)
        .chain([u.endpoint(1.0)?.abs(), u.endpoint(-1.0)?.abs(), l.0.abs(), l.1.abs()])
        .fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// Round trips

/// Worst residual over a set of test points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundTrip {
    pub residual: f64,
    pub worst_s: f64,
    /// Linear correction `c` removed from odd parts (JI only).
    pub correction: f64,
}

/// Test points: Chebyshev nodes in `arcsin(s)`, a tanh-spaced grid reaching close to `±1`, and `±1`.
pub fn default_test_points(m: usize) -> Vec<Pt> {
    let mut pts: Vec<Pt> = (0..m)
        .map(|k| {
            let x = FRAC_PI_2 * ((k as f64 + 0.5) * PI / m as f64).cos();
            Pt::from_s(x.sin())
        })
        .filter(|p| p.s.abs() >= CONE_S_MIN)
        .collect();
    for k in 1..=40 {
        let th = 0.5 * k as f64;
        pts.push(Pt::from_tanh(th));
        pts.push(Pt::from_tanh(-th));
    }
    pts.push(Pt::from_om(0.0));
    pts.push(Pt::from_op(0.0));
    pts
}

/// Cumulative data of one half of a sweep, in `x = |θ| ≥ 0`.
struct Half {
    xs: Vec<f64>,
    cum: Vec<f64>,
}

impl Half {
    /// Cumulative integral of `h` on the nodes, one Kronrod rule per gap.
    fn build(xs: Vec<f64>, h: &mut dyn FnMut(f64) -> f64) -> Half {
        let mut cum = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            cum[i] = cum[i - 1] + gk15(&mut &mut *h, xs[i - 1], xs[i]).value;
        }
        Half { xs, cum }
    }

    /// Cumulative value at `y` inside the gap ending at node `i`.
    fn at(&self, i: usize, y: f64, h: &mut dyn FnMut(f64) -> f64) -> f64 {
        self.cum[i - 1] + gk15(&mut &mut *h, self.xs[i - 1], y).value
    }

    fn index_of(&self, x: f64) -> usize {
        self.xs.partition_point(|&y| y < x)
    }
}

/// Splits test points per side into the `x = |atanh s|` values (finite, positive).
fn side_xs(pts: &[Pt], sign: f64) -> Vec<f64> {
    pts.iter().filter(|p| p.s * sign > 0.0 && p.om > 0.0 && p.op > 0.0).map(|p| p.atanh().abs()).collect()
}

/// `sup |s| |I_a(J_a(u))[s] - u(s)|` over the test points (including `s = ±1`).
pub fn roundtrip_ij(u: &ConeProfile, a: f64, pts: &[Pt]) -> Result<RoundTrip> {
    check_a(a)?;
    u.ensure_member(1e-9)?;
    let u1 = u.endpoint(1.0)?;
    let smat = kronrod_cumulative();
    let breaks = u.theta_breaks();
    let mut halves = Vec::new();
    for sign in [1.0, -1.0] {
        let tests = side_xs(pts, sign);
        let xmax = tests.iter().copied().fold(SWEEP_THETA_MAX.min(SWEEP_EXPONENT_MAX / (2.0 * a)), f64::max);
        let xs =
            sweep_nodes(tests.iter().copied().chain(breaks.iter().map(|b| b * sign).filter(|b| *b > 0.0)), xmax, a);
        let panels = xs.len() - 1;
        // all Kronrod nodes (panel by panel), then the sweep nodes
        let mut at: Vec<f64> = Vec::with_capacity(16 * panels);
        for i in 1..xs.len() {
            at.extend(kronrod_nodes(xs[i - 1], xs[i]).into_iter().map(|(y, _)| y));
        }
        at.extend(xs.iter().skip(1));
        let vals = u.v_many(&at.iter().map(|&x| Pt::from_tanh(sign * x)).collect::<Vec<_>>())?;
        let (v_k, v_x) = vals.split_at(15 * panels);
        let weight = |x: f64| Pt::from_tanh(x).w();
        let gj = |x: f64, m: f64, v: f64| {
            let p = Pt::from_tanh(x);
            let wa = p.w().powf(a);
            -p.s * wa * u1 / 2.0 + v - 2.0 * a * p.s * wa * m
        };
        let mut m_cum = vec![0.0; xs.len()];
        let mut g_cum = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            let nodes = kronrod_nodes(xs[i - 1], xs[i]);
            let h = 0.5 * (xs[i] - xs[i - 1]);
            let v = &v_k[15 * (i - 1)..15 * i];
            let vw: Vec<f64> = nodes.iter().zip(v).map(|(&(y, _), v)| v * weight(y).powf(-a)).collect();
            let mut g_acc = 0.0;
            for (k, &(y, wk)) in nodes.iter().enumerate() {
                let m = m_cum[i - 1] + h * smat[k].iter().zip(&vw).map(|(c, f)| c * f).sum::<f64>();
                g_acc += wk * gj(y, m, v[k]);
            }
            m_cum[i] = m_cum[i - 1] + nodes.iter().zip(&vw).map(|(&(_, wk), f)| wk * f).sum::<f64>();
            g_cum[i] = g_cum[i - 1] + g_acc;
        }
        let mut gj_nodes = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            gj_nodes[i] = gj(xs[i], m_cum[i], v_x[i - 1]);
        }
        halves.push((xs, g_cum, gj_nodes));
    }
    let total = |h: &(Vec<f64>, Vec<f64>, Vec<f64>)| *h.1.last().unwrap();
    let (tp, tm) = (total(&halves[0]), total(&halves[1]));
    let mut worst = RoundTrip { residual: 0.0, worst_s: f64::NAN, correction: 0.0 };
    let mut record = |r: f64, s: f64| {
        if r > worst.residual || worst.worst_s.is_nan() {
            worst.residual = worst.residual.max(r);
            worst.worst_s = s;
        }
    };
    for p in pts {
        if p.om <= 0.0 || p.op <= 0.0 {
            record((2.0 * a * (tp + tm) - u.endpoint(p.s.signum())?).abs(), p.s);
            continue;
        }
        let (h, other) = if p.s > 0.0 { (&halves[0], tm) } else { (&halves[1], tp) };
        let x = p.atanh().abs();
        let i = h.0.partition_point(|&y| y < x);
        let v = u.v(*p)?;
        let vij = h.2[i] + 2.0 * a * p.s.abs() * (other + h.1[i]);
        record((vij - v).abs(), p.s);
    }
    Ok(worst)
}

/// Weighted residual of `J_a(I_a(f)) = f - c s` with `c = a (∫_0^∞ g - ∫_{-∞}^0 g)`, which is
/// zero for even `f` and `2a ∫_0^1 f (1-t^2)^(a-1) dt` for odd `f`.
pub fn roundtrip_ji(f: &ZonalDensity, pts: &[Pt]) -> Result<RoundTrip> {
    let a = f.a();
    check_a(a)?;
    f.ensure_member()?;
    let f = f.strip_linear();
    let gm0 = f.theta_integral(f64::NEG_INFINITY, 0.0)?.value;
    let gp0 = f.theta_integral(0.0, f64::INFINITY)?.value;
    let u1 = 2.0 * a * (gm0 + gp0);
    let c_o = a * (gp0 - gm0);
    let breaks = f.theta_breaks();
    let mut worst = RoundTrip { residual: 0.0, worst_s: f64::NAN, correction: c_o };
    for sign in [1.0, -1.0] {
        let h = |x: f64| f.g(Pt::from_tanh(sign * x));
        let other = if sign > 0.0 { gm0 } else { gp0 };
        let tests = side_xs(pts, sign);
        let xmax = tests.iter().copied().fold(0.0, f64::max);
        let xs = sweep_nodes(tests.iter().copied().chain(breaks.iter().map(|b| b * sign)), xmax, a);
        let mut hm = h;
        let gh = Half::build(xs.clone(), &mut hm);
        // v_I(x) from the cumulative integral H(x).
        let v_of = |x: f64, hx: f64| {
            let s = x.tanh();
            h(x) + 2.0 * a * s * (other + hx)
        };
        let mut m = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            let mut acc = 0.0;
            for (y, w) in kronrod_nodes(xs[i - 1], xs[i]) {
                let mut hh = h;
                let hy = gh.at(i, y, &mut hh);
                acc += w * v_of(y, hy) * Pt::from_tanh(y).w().powf(-a);
            }
            m[i] = m[i - 1] + acc;
        }
        for x in tests {
            let i = gh.index_of(x);
            let p = Pt::from_tanh(x);
            let s = p.s;
            let wa = p.w().powf(a);
            let v = v_of(x, gh.cum[i]);
            let gj = -s * wa * u1 / 2.0 + v - 2.0 * a * s * wa * m[i];
            let g = h(x);
            let res = (gj - g + sign * s * wa * c_o).abs();
            if res > worst.residual || worst.worst_s.is_nan() {
                worst.residual = worst.residual.max(res);
                worst.worst_s = sign * s;
            }
        }
    }
    if worst.worst_s.is_nan() {
        worst.worst_s = 0.0;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_of_constant() {
        let f = ZonalDensity::constant(1.0, 1.0).unwrap();
        assert!((i_value(&f, 0.5).unwrap() - 4.5).abs() < 1e-10);
        assert!((i_value(&f, -0.5).unwrap() - 4.5).abs() < 1e-10);
        assert!((i_value(&f, 1.0).unwrap() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn i_kills_linear() {
        let f = ZonalDensity::linear(0.5, 1.0).unwrap();
        for s in [-0.9, -0.1, 0.3, 1.0] {
            assert_eq!(i_value(&f, s).unwrap(), 0.0);
        }
    }

    #[test]
    fn j_of_constant() {
        let u = ConeProfile::constant(2.0);
        for s in [-0.7, 0.2, 0.95] {
            assert!((j_value(&u, 1.5, s).unwrap() - s.abs()).abs() < 1e-9, "s={s}");
        }
        let inv = ConeProfile::analytic(|_| 1.0, 1.0, (1.0, 1.0), Some(Parity::Even));
        assert_eq!(j_value(&inv, 1.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn round_trips_basic() {
        let pts = default_test_points(32);
        let r = roundtrip_ij(&ConeProfile::constant(1.0), 1.0, &pts).unwrap();
        assert!(r.residual < 1e-8, "{r:?}");
        let r = roundtrip_ji(&ZonalDensity::constant(1.0, 1.0).unwrap(), &pts).unwrap();
        assert!(r.residual < 1e-8, "{r:?}");
        let r = roundtrip_ji(&ZonalDensity::poly(1.0, vec![0.0, 0.0, 0.0, 1.0]).unwrap(), &pts).unwrap();
        assert!(r.residual < 1e-8, "{r:?}");
    }

    #[test]
    fn norm_c_examples() {
        assert!((norm_c(&ConeProfile::constant(-3.0)).unwrap() - 3.0).abs() < 1e-15);
        let inv = ConeProfile::analytic(|_| 1.0, 1.0, (1.0, 1.0), None);
        assert_eq!(norm_c(&inv).unwrap(), 1.0);
        assert_eq!(norm_c(&ConeProfile::constant(0.0)).unwrap(), 0.0);
    }
}
