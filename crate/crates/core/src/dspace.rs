//! Weighted density spaces `D^a`.
//!
//! A density `f` on `(-1, 1)` is handled through its weighted form `g = (1 - s^2)^a f`,
//! which is bounded and vanishes at `±1` for members. Integrals of the type
//! `∫ f (1 - t^2)^(a-1) dt` become `∫ g(tanh θ) dθ` under `t = tanh θ`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZonalError};
use crate::geometry::maximize_on_grid;
use crate::interp::LocalLagrange;
use crate::point::Pt;
use crate::quadrature::{adaptive_breaks, half_line_breaks, Estimate, QuadConfig};
use crate::special;
use crate::tolerances::{INTERP_STENCIL, NORM_GRID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Sampled weighted values, interpolated in the node angle with zero anchors at `±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledData {
    s: Vec<f64>,
    angles: Vec<f64>,
    g: Vec<f64>,
    /// Exponent the stored values are weighted with.
    weight: f64,
    tail: Option<(f64, f64)>,
    trusted: bool,
    interp: LocalLagrange,
}

impl SampledData {
    pub fn nodes(&self) -> &[f64] {
        &self.s
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn weighted_values(&self) -> &[f64] {
        &self.g
    }

    pub fn tail(&self) -> Option<(f64, f64)> {
        self.tail
    }

    pub fn trusted(&self) -> bool {
        self.trusted
    }

    fn at(&self, p: Pt) -> f64 {
        self.interp.eval(p.node_angle())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Repr {
    /// `f(t) = (1 - t^2)^(-beta)`
    Power {
        beta: f64,
    },
    /// `f(t) = sum c_k t^k`
    Poly {
        coeffs: Vec<f64>,
    },
    Sampled(SampledData),
    /// `f(clamp(t, -r, r))`
    Truncated {
        inner: Box<Repr>,
        r: f64,
    },
    /// `f(-t)`
    Reflected(Box<Repr>),
    Combo(Vec<(f64, Repr)>),
}

impl Repr {
    fn g(&self, p: Pt, a: f64) -> f64 {
        match self {
            Repr::Power { beta } => p.w().powf(a - beta),
            Repr::Poly { coeffs } => {
                let v = coeffs.iter().rev().fold(0.0, |acc, c| acc * p.s + c);
                if v == 0.0 {
                    0.0
                } else {
                    v * p.w().powf(a)
                }
            }
            Repr::Sampled(d) => {
                let v = d.at(p);
                if a == d.weight {
                    v
                } else {
                    v * p.w().powf(a - d.weight)
                }
            }
            Repr::Truncated { inner, r } => {
                if p.s.abs() <= *r {
                    inner.g(p, a)
                } else {
                    let q = Pt::from_s(r.copysign(p.s));
                    let fq = inner.g(q, a) / q.w().powf(a);
                    if fq == 0.0 {
                        0.0
                    } else {
                        fq * p.w().powf(a)
                    }
                }
            }
            Repr::Reflected(inner) => inner.g(p.neg(), a),
            Repr::Combo(terms) => terms.iter().map(|(c, r)| c * r.g(p, a)).sum(),
        }
    }

    fn parity(&self) -> Option<Parity> {
        match self {
            Repr::Power { .. } => Some(Parity::Even),
            Repr::Poly { coeffs } => {
                let odd_zero = coeffs.iter().skip(1).step_by(2).all(|&c| c == 0.0);
                let even_zero = coeffs.iter().step_by(2).all(|&c| c == 0.0);
                if odd_zero {
                    Some(Parity::Even)
                } else if even_zero {
                    Some(Parity::Odd)
                } else {
                    None
                }
            }
            Repr::Sampled(_) => None,
            Repr::Truncated { inner, .. } | Repr::Reflected(inner) => inner.parity(),
            Repr::Combo(terms) => {
                let mut it = terms.iter().filter(|(c, _)| *c != 0.0).map(|(_, r)| r.parity());
                let first = it.next().unwrap_or(Some(Parity::Even));
                if it.all(|p| p == first) {
                    first
                } else {
                    None
                }
            }
        }
    }

    fn theta_breaks(&self, out: &mut Vec<f64>) {
        match self {
            Repr::Power { .. } | Repr::Poly { .. } => {}
            Repr::Sampled(d) => out.extend(d.angles.iter().map(|&phi| Pt::from_node_angle(phi).atanh())),
            Repr::Truncated { inner, r } => {
                let tr = r.atanh();
                let mut sub = Vec::new();
                inner.theta_breaks(&mut sub);
                out.extend(sub.into_iter().filter(|x| x.abs() < tr));
                out.push(-tr);
                out.push(tr);
            }
            Repr::Reflected(inner) => {
                let mut sub = Vec::new();
                inner.theta_breaks(&mut sub);
                out.extend(sub.into_iter().map(|x| -x));
            }
            Repr::Combo(terms) => terms.iter().for_each(|(_, r)| r.theta_breaks(out)),
        }
    }

    fn strip_linear(&self) -> Repr {
        match self {
            Repr::Poly { coeffs } => {
                let mut c = coeffs.clone();
                if c.len() > 1 {
                    c[1] = 0.0;
                }
                Repr::Poly { coeffs: c }
            }
            Repr::Reflected(inner) => Repr::Reflected(Box::new(inner.strip_linear())),
            Repr::Combo(terms) => Repr::Combo(terms.iter().map(|(c, r)| (*c, r.strip_linear())).collect()),
            other => other.clone(),
        }
    }

    fn is_bounded(&self) -> bool {
        match self {
            Repr::Power { beta } => *beta <= 0.0,
            Repr::Poly { .. } | Repr::Truncated { .. } => true,
            Repr::Sampled(d) => d.tail.map(|(m, p)| m >= d.weight && p >= d.weight).unwrap_or(false),
            Repr::Reflected(inner) => inner.is_bounded(),
            Repr::Combo(terms) => terms.iter().all(|(_, r)| r.is_bounded()),
        }
    }

    /// Exact membership in `D^a` when decidable from the representation.
    fn member_exact(&self, a: f64) -> Option<bool> {
        match self {
            Repr::Power { beta } => Some(*beta < a || (a == 0.0 && *beta <= 0.0)),
            Repr::Poly { .. } | Repr::Truncated { .. } => Some(true),
            Repr::Sampled(d) => d.tail.map(|(m, p)| m > 0.0 && p > 0.0),
            Repr::Reflected(inner) => inner.member_exact(a),
            Repr::Combo(terms) => {
                if terms.iter().all(|(c, r)| *c == 0.0 || r.member_exact(a) == Some(true)) {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }

    /// Largest power exponent `beta` among analytic power components (0 if none).
    pub(crate) fn max_power(&self) -> f64 {
        match self {
            Repr::Power { beta } => *beta,
            Repr::Poly { .. } | Repr::Truncated { .. } => 0.0,
            Repr::Sampled(d) => match d.tail {
                Some((m, p)) => d.weight - m.min(p),
                None => f64::INFINITY,
            },
            Repr::Reflected(inner) => inner.max_power(),
            Repr::Combo(terms) => {
                terms.iter().filter(|(c, _)| *c != 0.0).map(|(_, r)| r.max_power()).fold(0.0, f64::max)
            }
        }
    }

    fn center(&self, n: usize, a: f64) -> Result<Repr> {
        match self {
            Repr::Power { .. } => Ok(self.clone()),
            Repr::Poly { coeffs } => {
                let m = (n as f64 - 3.0) / 2.0;
                let den = special::beta(1.5, m + 1.0);
                let mut c = 0.0;
                for (k, ck) in coeffs.iter().enumerate().skip(1).step_by(2) {
                    if *ck != 0.0 {
                        let ratio = if k == 1 { 1.0 } else { special::beta(k as f64 / 2.0 + 1.0, m + 1.0) / den };
                        c += ck * ratio;
                    }
                }
                let mut out = coeffs.clone();
                if out.len() < 2 {
                    out.resize(2, 0.0);
                }
                out[1] -= c;
                Ok(Repr::Poly { coeffs: out })
            }
            Repr::Combo(terms) => {
                Ok(Repr::Combo(terms.iter().map(|(c, r)| Ok((*c, r.center(n, a)?))).collect::<Result<Vec<_>>>()?))
            }
            _ => {
                let c = centered_moment(self, n, a)?;
                if c == 0.0 {
                    Ok(self.clone())
                } else {
                    Ok(Repr::Combo(vec![(1.0, self.clone()), (-c, Repr::Poly { coeffs: vec![0.0, 1.0] })]))
                }
            }
        }
    }
}

/// `∫ f t (1-t^2)^((n-3)/2) dt / ∫ t^2 (1-t^2)^((n-3)/2) dt`
fn centered_moment(r: &Repr, n: usize, a: f64) -> Result<f64> {
    let m = (n as f64 - 3.0) / 2.0;
    let e = m + 1.0 - a;
    let mut breaks = Vec::new();
    r.theta_breaks(&mut breaks);
    let num = theta_integral(|p| r.g(p, a) * p.s * p.w().powf(e), f64::NEG_INFINITY, f64::INFINITY, &breaks)
        .map_err(|err| ZonalError::Domain(format!("centering moment does not converge: {err}")))?;
    Ok(num.value / special::beta(1.5, m + 1.0))
}

/// `∫_lo^hi h(tanh θ) dθ` with possibly infinite limits (`lo <= hi`).
pub(crate) fn theta_integral<F: FnMut(Pt) -> f64>(mut h: F, lo: f64, hi: f64, breaks: &[f64]) -> Result<Estimate> {
    let cfg = QuadConfig::default();
    let mut f = |th: f64| h(Pt::from_tanh(th));
    // The weighted form lives near θ = 0 and decays exponentially; a half line starting far
    // out would squeeze that region into a sliver of the compactified variable, so such
    // integrals are split at 0 with dyadic breaks in between.
    let with_dyadic = |a: f64, b: f64| {
        let mut v = breaks.to_vec();
        let mut x = 8.0;
        while x < a.abs().max(b.abs()) {
            v.extend([x, -x]);
            x *= 2.0;
        }
        v
    };
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adaptive_breaks(f, lo, hi, &with_dyadic(lo, hi), &cfg),
        (false, true) if hi > 0.0 => {
            let left = half_line_breaks(&mut f, 0.0, -1.0, breaks, &cfg)?;
            Ok(left.add(adaptive_breaks(&mut f, 0.0, hi, &with_dyadic(0.0, hi), &cfg)?))
        }
        (true, false) if lo < 0.0 => {
            let right = half_line_breaks(&mut f, 0.0, 1.0, breaks, &cfg)?;
            Ok(adaptive_breaks(&mut f, lo, 0.0, &with_dyadic(lo, 0.0), &cfg)?.add(right))
        }
        (false, true) => half_line_breaks(f, hi, -1.0, breaks, &cfg),
        (true, false) => half_line_breaks(f, lo, 1.0, breaks, &cfg),
        (false, false) => {
            let left = half_line_breaks(&mut f, 0.0, -1.0, breaks, &cfg)?;
            let right = half_line_breaks(&mut f, 0.0, 1.0, breaks, &cfg)?;
            Ok(left.add(right))
        }
    }
}

/// An element of `D^a` (or a candidate, before membership is checked).
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalDensity {
    a: f64,
    repr: Repr,
}

/// Outcome of the numerical membership test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub limit_ok: bool,
    pub integral_ok: bool,
    /// True when the booleans were decided from the representation rather than numerically.
    pub exact: bool,
    /// `(1 - |s_k|, g(s_k), g(-s_k))` along `|s_k| -> 1`.
    pub weighted: Vec<(f64, f64, f64)>,
    /// `(1 - |s_k|, P(s_k), P(-s_k))` with `P(s) = ∫_0^s f (1-t^2)^(a-1) dt`.
    pub partial: Vec<(f64, f64, f64)>,
    /// Fitted decay exponents of `|g|` towards `-1` and `+1`.
    pub decay: (f64, f64),
}

impl ZonalDensity {
    pub fn new(a: f64, repr: Repr) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(ZonalError::Validation(format!("weight exponent must be non-negative, got {a}")));
        }
        check_repr(&repr)?;
        if a == 0.0 && !repr.is_bounded() {
            return Err(ZonalError::Domain("exponent 0 requires a bounded continuous density".into()));
        }
        Ok(ZonalDensity { a, repr })
    }

    pub fn power(a: f64, beta: f64) -> Result<Self> {
        Self::new(a, Repr::Power { beta })
    }

    pub fn poly(a: f64, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(a, Repr::Poly { coeffs })
    }

    pub fn constant(a: f64, c: f64) -> Result<Self> {
        Self::poly(a, vec![c])
    }

    /// `f(t) = c t`
    pub fn linear(a: f64, c: f64) -> Result<Self> {
        Self::poly(a, vec![0.0, c])
    }

    /// Sampled weighted values at nodes `s_k` (any order, distinct, inside `(-1, 1)`).
    pub fn sampled(a: f64, s: Vec<f64>, g: Vec<f64>, tail: Option<(f64, f64)>, trusted: bool) -> Result<Self> {
        if s.iter().any(|x| !(x.abs() < 1.0)) {
            return Err(ZonalError::Validation("sample nodes must lie in (-1, 1)".into()));
        }
        let angles = s.iter().map(|&x| Pt::from_s(x).node_angle()).collect();
        Self::sampled_angles(a, angles, g, tail, trusted)
    }

    /// Sampled weighted values at node angles `phi_k` in `(0, pi)`, `s = sin((pi/2) cos phi)`.
    pub fn sampled_angles(
        a: f64,
        angles: Vec<f64>,
        g: Vec<f64>,
        tail: Option<(f64, f64)>,
        trusted: bool,
    ) -> Result<Self> {
        let data = make_sampled(a, angles, g, tail, trusted)?;
        Self::new(a, Repr::Sampled(data))
    }

    /// Linear combination of densities sharing the exponent of the first term.
    pub fn combo(terms: Vec<(f64, ZonalDensity)>) -> Result<Self> {
        let a = terms.first().map(|t| t.1.a).ok_or_else(|| ZonalError::Validation("empty combination".into()))?;
        if terms.iter().any(|t| t.1.a != a) {
            return Err(ZonalError::Validation("combined densities must share the weight exponent".into()));
        }
        Self::new(a, Repr::Combo(terms.into_iter().map(|(c, d)| (c, d.repr)).collect()))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    /// The same function `f` viewed in `D^b`.
    pub fn with_weight(&self, b: f64) -> Result<Self> {
        Self::new(b, self.repr.clone())
    }

    /// Weighted form `g(s) = (1 - s^2)^a f(s)`.
    pub fn g(&self, p: Pt) -> f64 {
        self.repr.g(p, self.a)
    }

    /// `f` at an interior point.
    pub fn f_at(&self, p: Pt) -> f64 {
        let g = self.g(p);
        if g == 0.0 {
            0.0
        } else {
            g / p.w().powf(self.a)
        }
    }

    pub fn eval_f(&self, s: f64) -> Result<f64> {
        if !(s.abs() < 1.0) {
            return Err(ZonalError::Domain(format!("f is defined on (-1, 1), got s = {s}")));
        }
        Ok(self.f_at(Pt::from_s(s)))
    }

    pub fn eval_weighted(&self, s: f64) -> Result<f64> {
        if !(s.abs() <= 1.0) {
            return Err(ZonalError::Domain(format!("weighted form is defined on [-1, 1], got s = {s}")));
        }
        Ok(self.g(Pt::from_s(s)))
    }

    pub fn parity(&self) -> Option<Parity> {
        self.repr.parity()
    }

    pub fn is_bounded(&self) -> bool {
        self.repr.is_bounded()
    }

    pub fn reflected(&self) -> Self {
        ZonalDensity { a: self.a, repr: Repr::Reflected(Box::new(self.repr.clone())) }
    }

    pub fn scaled(&self, c: f64) -> Self {
        ZonalDensity { a: self.a, repr: Repr::Combo(vec![(c, self.repr.clone())]) }
    }

    pub fn sub(&self, o: &ZonalDensity) -> Self {
        ZonalDensity { a: self.a, repr: Repr::Combo(vec![(1.0, self.repr.clone()), (-1.0, o.repr.clone())]) }
    }

    pub fn add(&self, o: &ZonalDensity) -> Self {
        ZonalDensity { a: self.a, repr: Repr::Combo(vec![(1.0, self.repr.clone()), (1.0, o.repr.clone())]) }
    }

    pub fn even_part(&self) -> Self {
        match self.parity() {
            Some(Parity::Even) => self.clone(),
            _ => ZonalDensity {
                a: self.a,
                repr: Repr::Combo(vec![(0.5, self.repr.clone()), (0.5, Repr::Reflected(Box::new(self.repr.clone())))]),
            },
        }
    }

    pub fn odd_part(&self) -> Self {
        match self.parity() {
            Some(Parity::Odd) => self.clone(),
            _ => ZonalDensity {
                a: self.a,
                repr: Repr::Combo(vec![(0.5, self.repr.clone()), (-0.5, Repr::Reflected(Box::new(self.repr.clone())))]),
            },
        }
    }

    /// The same density with exactly linear polynomial parts removed.
    pub fn strip_linear(&self) -> Self {
        ZonalDensity { a: self.a, repr: self.repr.strip_linear() }
    }

    /// Break points (in the tanh variable) where the weighted form is not smooth.
    pub fn theta_breaks(&self) -> Vec<f64> {
        let mut b = Vec::new();
        self.repr.theta_breaks(&mut b);
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup();
        b
    }

    /// `∫_lo^hi g(tanh θ) dθ`, i.e. `∫ f (1 - t^2)^(a-1) dt` between `tanh lo` and `tanh hi`.
    pub fn theta_integral(&self, lo: f64, hi: f64) -> Result<Estimate> {
        if lo > hi {
            return Ok(self.theta_integral(hi, lo)?.scale(-1.0));
        }
        theta_integral(|p| self.g(p), lo, hi, &self.theta_breaks())
    }

    /// `∫_{-1}^1 f (1 - t^2)^(a-1) dt`; odd polynomial terms are dropped exactly.
    pub fn full_integral(&self) -> Result<Estimate> {
        let mut exact = 0.0;
        let rest = split_poly(&self.repr, &mut |coeffs| {
            for (k, c) in coeffs.iter().enumerate().step_by(2) {
                if *c != 0.0 {
                    exact += c * special::beta((k as f64 + 1.0) / 2.0, self.a);
                }
            }
        });
        let quad = match rest {
            Some(r) => theta_integral(|p| r.g(p, self.a), f64::NEG_INFINITY, f64::INFINITY, &self.theta_breaks())?,
            None => Estimate::ZERO,
        };
        Ok(Estimate { value: quad.value + exact, err: quad.err })
    }

    /// `sup |g|` on `[-1, 1]` (node-angle grid plus golden-section refinement).
    pub fn sup_weighted(&self) -> f64 {
        maximize_on_grid(|phi| self.g(Pt::from_node_angle(phi)).abs(), 0.0, std::f64::consts::PI, NORM_GRID)
    }

    /// The `D^a` norm `sup |g| + sup_s |∫_0^s f (1 - t^2)^(a-1) dt|`.
    pub fn norm_da(&self) -> Result<Estimate> {
        self.ensure_member()?;
        let sup_g = self.sup_weighted();
        let plus = self.theta_integral(0.0, f64::INFINITY)?;
        let minus = self.theta_integral(f64::NEG_INFINITY, 0.0)?;
        let mut best = Estimate { value: plus.value.abs(), err: plus.err };
        if minus.value.abs() > best.value {
            best = Estimate { value: minus.value.abs(), err: minus.err };
        }
        // Interior extrema of the partial integral sit at sign changes of g.
        let m = NORM_GRID;
        let h = std::f64::consts::PI / m as f64;
        let gphi = |phi: f64| self.g(Pt::from_node_angle(phi));
        let mut prev = gphi(h * 0.5);
        for k in 1..m {
            let phi = h * (k as f64 + 0.5);
            let cur = gphi(phi);
            if prev != 0.0 && cur != 0.0 && (prev > 0.0) != (cur > 0.0) {
                let (mut lo, mut hi) = (phi - h, phi);
                let sl = prev > 0.0;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if (gphi(mid) > 0.0) == sl {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let th = Pt::from_node_angle(0.5 * (lo + hi)).atanh();
                let part = self.theta_integral(0.0, th)?;
                if part.value.abs() > best.value {
                    best = Estimate { value: part.value.abs(), err: part.err };
                }
            }
            prev = cur;
        }
        Ok(Estimate { value: sup_g + best.value, err: best.err })
    }

    /// `f^r`: equal to `f` on `[-r, r]` and frozen at `f(±r)` outside.
    pub fn truncate(&self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(ZonalError::Domain(format!("truncation level must lie in (0, 1), got {r}")));
        }
        Self::new(self.a, Repr::Truncated { inner: Box::new(self.repr.clone()), r })
    }

    /// Checks the two defining conditions of `D^a` along `1 - |s_k| = 2^-k`.
    pub fn membership_check(&self) -> MembershipReport {
        const LEVELS: i32 = 40;
        let mut weighted = Vec::with_capacity(LEVELS as usize);
        let mut partial = Vec::with_capacity(LEVELS as usize);
        let (mut pp, mut pm) = (0.0, 0.0);
        let (mut th_prev_p, mut th_prev_m) = (0.0, 0.0);
        let mut inc_p = Vec::new();
        let mut inc_m = Vec::new();
        let mut quad_ok = true;
        for k in 1..=LEVELS {
            let d = 2f64.powi(-k);
            let p = Pt::from_om(d);
            let q = Pt::from_op(d);
            weighted.push((d, self.g(p), self.g(q)));
            let (thp, thm) = (p.atanh(), q.atanh());
            match (self.theta_integral(th_prev_p, thp), self.theta_integral(thm, th_prev_m)) {
                (Ok(a), Ok(b)) => {
                    pp += a.value;
                    pm -= b.value;
                    inc_p.push(a.value.abs());
                    inc_m.push(b.value.abs());
                }
                _ => quad_ok = false,
            }
            th_prev_p = thp;
            th_prev_m = thm;
            partial.push((d, pp, pm));
        }
        let decay_m = decay_exponent(weighted.iter().map(|w| (w.0, w.2)));
        let decay_p = decay_exponent(weighted.iter().map(|w| (w.0, w.1)));
        let (limit_ok, integral_ok, exact) = match self.repr.member_exact(self.a) {
            Some(b) => (b, b, true),
            None => {
                let lim = decay_m > 1e-3 && decay_p > 1e-3;
                let int = quad_ok && increments_decay(&inc_p) && increments_decay(&inc_m);
                (lim, int, false)
            }
        };
        MembershipReport { limit_ok, integral_ok, exact, weighted, partial, decay: (decay_m, decay_p) }
    }

    /// Domain error unless both membership conditions hold.
    pub fn ensure_member(&self) -> Result<()> {
        if self.repr.member_exact(self.a) == Some(true) {
            return Ok(());
        }
        let rep = self.membership_check();
        if rep.limit_ok && rep.integral_ok {
            Ok(())
        } else {
            Err(ZonalError::Domain(format!(
                "density is not in D^{}: weighted limit {}, partial integrals {} (decay exponents {:.3}, {:.3})",
                self.a,
                if rep.limit_ok { "ok" } else { "fails" },
                if rep.integral_ok { "ok" } else { "fail" },
                rep.decay.0,
                rep.decay.1
            )))
        }
    }

    /// Whether `∫ |f| (1 - t^2)^((n-j-3)/2) dt` converges, for `a = (n - j - 1) / 2`.
    pub fn integrability_check(&self, n: usize, j: usize) -> Result<bool> {
        if j < 1 || j + 2 > n {
            return Err(ZonalError::Domain(format!("integrability criterion needs 1 <= j <= n-2, got n={n}, j={j}")));
        }
        check_exponent(self.a, n, j)?;
        if let Some(b) = self.repr.member_exact(self.a) {
            return Ok(b);
        }
        let rep = self.membership_check();
        Ok(rep.decay.0 > 1e-3 && rep.decay.1 > 1e-3)
    }

    /// Removes the multiple of `t` that makes the zonal extension centred in `R^n`.
    pub fn center_project(&self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(ZonalError::Validation(format!("dimension must be at least 2, got {n}")));
        }
        Ok(ZonalDensity { a: self.a, repr: self.repr.center(n, self.a)? })
    }

    /// The centring coefficient `c` with `center_project(f) = f - c t`.
    pub fn center_coefficient(&self, n: usize) -> Result<f64> {
        let centred = self.center_project(n)?;
        let diff = self.sub(&centred);
        let p = Pt::from_s(0.5);
        Ok(diff.f_at(p) / 0.5)
    }
}

/// Checks `a = (n - j - 1) / 2`.
pub fn check_exponent(a: f64, n: usize, j: usize) -> Result<()> {
    let want = special::canonical_exponent(n, j);
    if (a - want).abs() > crate::tolerances::EXPONENT_MATCH_TOL {
        return Err(ZonalError::Validation(format!(
            "density exponent {a} does not match (n-j-1)/2 = {want} for n={n}, j={j}"
        )));
    }
    Ok(())
}

/// Hands exact polynomial parts of a combination to `poly` and returns the remainder.
fn split_poly(r: &Repr, poly: &mut dyn FnMut(&[f64])) -> Option<Repr> {
    match r {
        Repr::Poly { coeffs } => {
            poly(coeffs);
            None
        }
        Repr::Combo(terms) => {
            let mut rest = Vec::new();
            for (c, t) in terms {
                let mut scaled = |cs: &[f64]| poly(&cs.iter().map(|x| c * x).collect::<Vec<_>>());
                if let Some(x) = split_poly(t, &mut scaled) {
                    rest.push((*c, x));
                }
            }
            if rest.is_empty() {
                None
            } else {
                Some(Repr::Combo(rest))
            }
        }
        Repr::Reflected(inner) if matches!(**inner, Repr::Poly { .. }) => {
            if let Repr::Poly { coeffs } = &**inner {
                let flipped: Vec<f64> =
                    coeffs.iter().enumerate().map(|(k, c)| if k % 2 == 1 { -c } else { *c }).collect();
                poly(&flipped);
            }
            None
        }
        other => Some(other.clone()),
    }
}

/// Slope of `log |g|` against `log d` over the deepest levels.
fn decay_exponent(seq: impl Iterator<Item = (f64, f64)>) -> f64 {
    let pts: Vec<(f64, f64)> = seq.collect();
    let tail = &pts[pts.len().saturating_sub(10)..];
    if tail.iter().all(|p| p.1.abs() < 1e-300) {
        return f64::INFINITY;
    }
    let xs: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1.abs().max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Increments of a series decay geometrically over the deepest levels.
fn increments_decay(inc: &[f64]) -> bool {
    let tail = &inc[inc.len().saturating_sub(10)..];
    if tail.iter().all(|&x| x < 1e-300) {
        return true;
    }
    let first = tail[0].max(1e-300);
    let last = tail[tail.len() - 1].max(1e-300);
    (last / first).ln() < -1e-2 * tail.len() as f64
}

fn make_sampled(a: f64, angles: Vec<f64>, g: Vec<f64>, tail: Option<(f64, f64)>, trusted: bool) -> Result<SampledData> {
    if angles.len() != g.len() || angles.is_empty() {
        return Err(ZonalError::Validation("sampled density needs matching non-empty node and value lists".into()));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(ZonalError::Validation("sampled weighted values must be finite".into()));
    }
    match tail {
        Some((m, p)) if !(m > 0.0 && p > 0.0) => {
            return Err(ZonalError::Validation(format!("tail exponents must be positive, got ({m}, {p})")))
        }
        None if !trusted => {
            return Err(ZonalError::Validation(
                "sampled density without tail exponents must be explicitly marked trusted".into(),
            ))
        }
        _ => {}
    }
    let mut order: Vec<usize> = (0..angles.len()).collect();
    order.sort_by(|&i, &k| angles[i].partial_cmp(&angles[k]).unwrap_or(std::cmp::Ordering::Equal));
    let angles: Vec<f64> = order.iter().map(|&i| angles[i]).collect();
    let g: Vec<f64> = order.iter().map(|&i| g[i]).collect();
    if angles.iter().any(|&x| !(x > 0.0 && x < std::f64::consts::PI)) {
        return Err(ZonalError::Validation("sample nodes must lie strictly inside (-1, 1)".into()));
    }
    let mut x = Vec::with_capacity(angles.len() + 2);
    let mut y = Vec::with_capacity(angles.len() + 2);
    x.push(0.0);
    y.push(0.0);
    x.extend(&angles);
    y.extend(&g);
    x.push(std::f64::consts::PI);
    y.push(0.0);
    let interp = LocalLagrange::new(x, y, INTERP_STENCIL)
        .map_err(|_| ZonalError::Validation("sample nodes must be distinct".into()))?;
    let s = angles.iter().map(|&phi| Pt::from_node_angle(phi).s).collect();
    Ok(SampledData { s, angles, g, weight: a, tail, trusted, interp })
}

fn check_repr(r: &Repr) -> Result<()> {
    match r {
        Repr::Power { beta } => {
            if !beta.is_finite() {
                return Err(ZonalError::Validation("power exponent must be finite".into()));
            }
        }
        Repr::Poly { coeffs } => {
            if coeffs.iter().any(|c| !c.is_finite()) {
                return Err(ZonalError::Validation("polynomial coefficients must be finite".into()));
            }
        }
        Repr::Sampled(_) => {}
        Repr::Truncated { inner, r } => {
            if !(*r > 0.0 && *r < 1.0) {
                return Err(ZonalError::Domain(format!("truncation level must lie in (0, 1), got {r}")));
            }
            check_repr(inner)?;
        }
        Repr::Reflected(inner) => check_repr(inner)?,
        Repr::Combo(terms) => {
            for (c, t) in terms {
                if !c.is_finite() {
                    return Err(ZonalError::Validation("combination coefficients must be finite".into()));
                }
                check_repr(t)?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// JSON form

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ReprSpec {
    Power {
        beta: f64,
    },
    Poly {
        coeffs: Vec<f64>,
    },
    Sampled {
        nodes: Vec<f64>,
        g: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<[f64; 2]>,
        #[serde(default)]
        trusted: bool,
        /// Node angles; when present they take precedence over `nodes`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angles: Option<Vec<f64>>,
        /// Exponent the values are weighted with, if different from the density's.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<f64>,
    },
    Truncated {
        inner: Box<ReprSpec>,
        r: f64,
    },
    Reflected {
        inner: Box<ReprSpec>,
    },
    Combo {
        terms: Vec<(f64, ReprSpec)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    pub a: f64,
    #[serde(flatten)]
    pub repr: ReprSpec,
}

impl ReprSpec {
    fn build(&self, a: f64) -> Result<Repr> {
        Ok(match self {
            ReprSpec::Power { beta } => Repr::Power { beta: *beta },
            ReprSpec::Poly { coeffs } => Repr::Poly { coeffs: coeffs.clone() },
            ReprSpec::Sampled { nodes, g, tail, trusted, angles, weight } => {
                let angles = match angles {
                    Some(v) => v.clone(),
                    None => {
                        if nodes.iter().any(|x| !(x.abs() < 1.0)) {
                            return Err(ZonalError::Validation("sample nodes must lie in (-1, 1)".into()));
                        }
                        nodes.iter().map(|&x| Pt::from_s(x).node_angle()).collect()
                    }
                };
                let mut d = make_sampled(weight.unwrap_or(a), angles, g.clone(), tail.map(|t| (t[0], t[1])), *trusted)?;
                if !nodes.is_empty() && nodes.len() == d.s.len() {
                    let mut sorted = nodes.clone();
                    sorted.sort_by(|x, y| y.partial_cmp(x).unwrap());
                    d.s = sorted;
                }
                Repr::Sampled(d)
            }
            ReprSpec::Truncated { inner, r } => Repr::Truncated { inner: Box::new(inner.build(a)?), r: *r },
            ReprSpec::Reflected { inner } => Repr::Reflected(Box::new(inner.build(a)?)),
            ReprSpec::Combo { terms } => {
                Repr::Combo(terms.iter().map(|(c, t)| Ok((*c, t.build(a)?))).collect::<Result<Vec<_>>>()?)
            }
        })
    }

    fn from_repr(r: &Repr, a: f64) -> ReprSpec {
        match r {
            Repr::Power { beta } => ReprSpec::Power { beta: *beta },
            Repr::Poly { coeffs } => ReprSpec::Poly { coeffs: coeffs.clone() },
            Repr::Sampled(d) => ReprSpec::Sampled {
                nodes: d.s.clone(),
                g: d.g.clone(),
                tail: d.tail.map(|(m, p)| [m, p]),
                trusted: d.trusted,
                angles: Some(d.angles.clone()),
                weight: if d.weight == a { None } else { Some(d.weight) },
            },
            Repr::Truncated { inner, r } => ReprSpec::Truncated { inner: Box::new(Self::from_repr(inner, a)), r: *r },
            Repr::Reflected(inner) => ReprSpec::Reflected { inner: Box::new(Self::from_repr(inner, a)) },
            Repr::Combo(terms) => {
                ReprSpec::Combo { terms: terms.iter().map(|(c, t)| (*c, Self::from_repr(t, a))).collect() }
            }
        }
    }
}

impl TryFrom<DensitySpec> for ZonalDensity {
    type Error = ZonalError;
    fn try_from(spec: DensitySpec) -> Result<Self> {
        let repr = spec.repr.build(spec.a)?;
        ZonalDensity::new(spec.a, repr)
    }
}

impl From<&ZonalDensity> for DensitySpec {
    fn from(d: &ZonalDensity) -> Self {
        DensitySpec { a: d.a, repr: ReprSpec::from_repr(&d.repr, d.a) }
    }
}

impl Serialize for ZonalDensity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensitySpec::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ZonalDensity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = DensitySpec::deserialize(d)?;
        ZonalDensity::try_from(spec).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let f = ZonalDensity::power(0.5, 0.25).unwrap();
        assert_eq!(f.eval_f(0.0).unwrap(), 1.0);
        assert_eq!(f.eval_weighted(0.0).unwrap(), 1.0);
        assert_eq!(f.eval_weighted(1.0).unwrap(), 0.0);
        let t = ZonalDensity::linear(1.0, 1.0).unwrap();
        assert!((t.eval_f(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((t.eval_weighted(0.5).unwrap() - 0.375).abs() < 1e-15);
        assert!(f.eval_f(1.0).is_err());
    }

    #[test]
    fn norm_of_constant() {
        let n = ZonalDensity::constant(1.0, 1.0).unwrap().norm_da().unwrap();
        assert!((n.value - 2.0).abs() < 1e-9);
        let z = ZonalDensity::constant(1.0, 0.0).unwrap().norm_da().unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn truncation_clamps() {
        let t = ZonalDensity::linear(1.0, 1.0).unwrap().truncate(0.5).unwrap();
        assert!((t.eval_f(0.75).unwrap() - 0.5).abs() < 1e-14);
        assert!((t.eval_f(-0.75).unwrap() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn membership_examples() {
        let ok = ZonalDensity::power(0.5, 0.25).unwrap().membership_check();
        assert!(ok.limit_ok && ok.integral_ok);
        let bad = ZonalDensity::power(0.5, 0.5).unwrap().membership_check();
        assert!(!bad.limit_ok);
    }

    #[test]
    fn centering_examples() {
        let t = ZonalDensity::linear(0.5, 1.0).unwrap().center_project(3).unwrap();
        assert_eq!(t.eval_f(0.3).unwrap(), 0.0);
        let f = ZonalDensity::poly(0.5, vec![1.0, 1.0]).unwrap().center_project(3).unwrap();
        assert_eq!(f.eval_f(0.3).unwrap(), 1.0);
    }

    #[test]
    fn sampled_requires_tail_or_trust() {
        assert!(ZonalDensity::sampled(0.5, vec![0.0, 0.5], vec![1.0, 0.5], None, false).is_err());
        assert!(ZonalDensity::sampled(0.5, vec![0.0, 0.5], vec![1.0, 0.5], None, true).is_ok());
        assert!(ZonalDensity::sampled(0.5, vec![0.0, 0.5], vec![1.0, 0.5], Some((0.5, 0.5)), false).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let f: ZonalDensity = serde_json::from_str(r#"{"a":0.5,"type":"power","beta":0.25}"#).unwrap();
        assert_eq!(f, ZonalDensity::power(0.5, 0.25).unwrap());
        let back: ZonalDensity = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }
}
