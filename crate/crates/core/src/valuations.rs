//! Evaluation of the zonal valuations `Φ_j(f)`.
//!
//! Closed forms cover cones, disks, cylinders, balls and (by inclusion-exclusion over
//! frustums) bodies of revolution. Other bodies go through the principal value computed from
//! banded Monte Carlo Steiner estimates.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dspace::ZonalDensity;
use crate::error::{Result, ZonalError};
use crate::geometry::{ConvexBody, Shape};
use crate::measures::{closed_form_measure, cube_measure, empirical_firey_constant, mc_observables, McConfig};
use crate::point::Pt;
use crate::special::{binom, canonical_exponent, omega};
use crate::tolerances::{FIREY_SAFETY, PV_MAX_LEVEL};
use crate::transforms::{i_endpoint, i_weighted};

fn check_degree(n: usize, j: usize) -> Result<()> {
    if n < 2 {
        return Err(ZonalError::Validation(format!("dimension must be at least 2, got {n}")));
    }
    if j == 0 || j >= n {
        return Err(ZonalError::Domain(format!("degree must satisfy 1 <= j <= n-1, got n={n}, j={j}")));
    }
    Ok(())
}

/// Checks that `f` is an admissible density for `Φ_j` in `R^n`.
pub fn validate_density(n: usize, j: usize, f: &ZonalDensity) -> Result<()> {
    check_degree(n, j)?;
    crate::dspace::check_exponent(f.a(), n, j)?;
    if j == n - 1 && !f.is_bounded() {
        return Err(ZonalError::Domain("degree n-1 needs a bounded continuous density".into()));
    }
    f.ensure_member()
}

fn prepare(n: usize, j: usize, f: &ZonalDensity) -> Result<()> {
    check_degree(n, j)?;
    crate::dspace::check_exponent(f.a(), n, j)
}

/// `Φ_j(f)[C_h] = ω_{n-1} I_a(f)[s]` with `s = sign(h) (1 + h^2)^(-1/2)`.
pub fn phi_cone(n: usize, j: usize, f: &ZonalDensity, h: f64) -> Result<f64> {
    prepare(n, j, f)?;
    if !h.is_finite() {
        return Err(ZonalError::Domain("cone apex height must be finite".into()));
    }
    if h == 0.0 {
        return Ok(omega(n - 1) * i_endpoint(f)?);
    }
    let p = Pt::from_apex(h);
    Ok(omega(n - 1) * i_weighted(f, p)? / p.s.abs())
}

/// `Φ_j(f)[r D^{n-1}]`.
pub fn phi_disk(n: usize, j: usize, f: &ZonalDensity, r: f64) -> Result<f64> {
    prepare(n, j, f)?;
    if !(r > 0.0) {
        return Err(ZonalError::Domain(format!("disk radius must be positive, got {r}")));
    }
    Ok(r.powi(j as i32) * omega(n - 1) * i_endpoint(f)?)
}

/// `Φ_j(f)[r D^{n-1} × [0, L]]`.
pub fn phi_cylinder(n: usize, j: usize, f: &ZonalDensity, r: f64, len: f64) -> Result<f64> {
    let disk = phi_disk(n, j, f, 1.0)?;
    if !(len >= 0.0) {
        return Err(ZonalError::Domain(format!("cylinder height must be non-negative, got {len}")));
    }
    let rate = omega(n - 1) * f.f_at(Pt::from_s(0.0));
    Ok(r.powi(j as i32) * (disk + j as f64 * (len / r) * rate))
}

/// Which way a frustum narrows along `e_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Up,
    Down,
}

/// Frustum with radius `big` at its wide end, `small` at its narrow end and height `len`.
pub fn phi_frustum(
    n: usize,
    j: usize,
    f: &ZonalDensity,
    big: f64,
    small: f64,
    len: f64,
    orientation: Orientation,
) -> Result<f64> {
    prepare(n, j, f)?;
    if !(big > 0.0 && small >= 0.0 && len > 0.0) {
        return Err(ZonalError::Domain(format!("bad frustum R={big}, rho={small}, L={len}")));
    }
    if small > big {
        return Err(ZonalError::Domain(format!(
            "frustum radii out of order (R={big} < rho={small}); swap them and flip the orientation"
        )));
    }
    if small == big {
        return phi_cylinder(n, j, f, big, len);
    }
    let eps = 1.0 - small / big;
    let h = len / (big - small);
    let f = match orientation {
        Orientation::Up => f.clone(),
        Orientation::Down => f.reflected(),
    };
    let keep = (1.0 - eps).powi(j as i32);
    let cone = phi_cone(n, j, &f, h)?;
    let disk = phi_disk(n, j, &f, 1.0)?;
    Ok(big.powi(j as i32) * ((1.0 - keep) * cone + keep * disk))
}

/// Inclusion-exclusion over the frustums of a concave piecewise-linear profile `(t, r)`.
pub fn phi_revolution(n: usize, j: usize, f: &ZonalDensity, profile: &[[f64; 2]]) -> Result<f64> {
    ConvexBody::revolution(n, profile.to_vec())?;
    let mut total = 0.0;
    for w in profile.windows(2) {
        let ([t0, r0], [t1, r1]) = (w[0], w[1]);
        let len = t1 - t0;
        total += if r1 <= r0 {
            phi_frustum(n, j, f, r0, r1, len, Orientation::Up)?
        } else {
            phi_frustum(n, j, f, r1, r0, len, Orientation::Down)?
        };
    }
    let disk = phi_disk(n, j, f, 1.0)?;
    for p in &profile[1..profile.len() - 1] {
        total -= p[1].powi(j as i32) * disk;
    }
    Ok(total)
}

/// `Φ_j(f)[K]` by a closed form, or `None` when the body has none.
///
/// Ball sums `K + tB` are expanded as `Σ_i binom(j, i) t^(j-i) ∫ f dS_i(K)` when `K` has a
/// closed-form area measure.
pub fn phi_exact(n: usize, j: usize, f: &ZonalDensity, k: &ConvexBody) -> Result<Option<f64>> {
    prepare(n, j, f)?;
    if k.n() != n {
        return Err(ZonalError::Validation(format!("body lives in R^{}, valuation in R^{n}", k.n())));
    }
    let lam = k.scale().powi(j as i32);
    let v = match k.shape() {
        Shape::Cone { h } => phi_cone(n, j, f, *h)?,
        Shape::Disk { radius } => phi_disk(n, j, f, *radius)?,
        Shape::Cylinder { radius, height } => phi_cylinder(n, j, f, *radius, *height)?,
        Shape::Revolution { .. } => return Ok(Some(closed_form_measure(k, j)?.expect("revolution").integrate(f)?)),
        Shape::Ball { .. } => return Ok(Some(closed_form_measure(k, j)?.expect("ball").integrate(f)?)),
        Shape::BallSum { base, t } => {
            let mut total = 0.0;
            let st = k.scale() * t;
            for i in 0..=j {
                let Some(m) = closed_form_measure(base, i)? else {
                    return Ok(None);
                };
                total += binom(j, i) * st.powi((j - i) as i32) * k.scale().powi(i as i32) * m.integrate(f)?;
            }
            return Ok(Some(total));
        }
        Shape::Polytope { .. } => return Ok(None),
    };
    Ok(Some(lam * v))
}

/// Truncated integral `∫_{|t| <= r} f dS_j(K)` for bodies with a closed-form measure.
pub fn truncated_exact(n: usize, j: usize, f: &ZonalDensity, k: &ConvexBody, r: f64) -> Result<Option<f64>> {
    prepare(n, j, f)?;
    match closed_form_measure(k, j)? {
        Some(m) => Ok(Some(m.truncated(r).integrate(f)?)),
        None => Ok(None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    pub r: f64,
    pub value: f64,
    pub stderr: f64,
    pub tail_bound: f64,
}

/// Principal value with its error budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrincipalValue {
    pub value: f64,
    /// Standard error plus the analytic tail bound at the accepted level.
    pub err: f64,
    pub stderr: f64,
    pub tail_bound: f64,
    pub truncations: Vec<Truncation>,
    /// Empirical cap constant (with safety factor); not certified.
    pub firey_constant: f64,
    pub converged: bool,
    pub samples: usize,
    pub seed: u64,
}

/// `sup_{|s| >= r} (1 - s^2)^a |f(s)|` on a grid in the tanh variable.
fn tail_sup(f: &ZonalDensity, r: f64) -> f64 {
    let x0 = r.atanh();
    let mut best: f64 = 0.0;
    for i in 0..=800 {
        let x = x0 + 0.05 * i as f64;
        for sign in [1.0, -1.0] {
            best = best.max(f.g(Pt::from_tanh(sign * x)).abs());
        }
    }
    best
}

/// `Φ_j(f)[K]` as the limit of truncated Monte Carlo integrals over `|v·axis| <= r_k`,
/// `r_k = 1 - 2^-k`; stops at the first level whose change is below `tol`.
pub fn phi_general(
    n: usize,
    j: usize,
    f: &ZonalDensity,
    k: &ConvexBody,
    tol: f64,
    cfg: &McConfig,
) -> Result<PrincipalValue> {
    validate_density(n, j, f)?;
    let a = canonical_exponent(n, j);
    let diam = k.diameter();
    let firey = FIREY_SAFETY * empirical_firey_constant(n, j, PV_MAX_LEVEL)?;
    let levels: Vec<f64> = (1..=PV_MAX_LEVEL).map(|l| 1.0 - 2f64.powi(-(l as i32))).collect();
    let (obs_fns, full): (Vec<Box<dyn Fn(f64) -> f64 + Sync>>, bool) = if j == n - 1 {
        let b = f.with_weight(0.0)?;
        (vec![Box::new(move |t: f64| b.g(Pt::from_s(t)))], true)
    } else {
        (
            levels
                .iter()
                .map(|&r| {
                    let f = f.clone();
                    Box::new(move |t: f64| if t.abs() <= r { f.f_at(Pt::from_s(t)) } else { 0.0 })
                        as Box<dyn Fn(f64) -> f64 + Sync>
                })
                .collect(),
            false,
        )
    };
    let refs: Vec<&(dyn Fn(f64) -> f64 + Sync)> = obs_fns.iter().map(|b| b.as_ref()).collect();
    let (vals, _) = mc_observables(k, j, cfg, &refs)?;
    if full {
        let v = vals[0];
        return Ok(PrincipalValue {
            value: v.mass,
            err: v.stderr,
            stderr: v.stderr,
            tail_bound: 0.0,
            truncations: vec![Truncation { r: 1.0, value: v.mass, stderr: v.stderr, tail_bound: 0.0 }],
            firey_constant: firey,
            converged: true,
            samples: cfg.samples,
            seed: cfg.seed,
        });
    }
    let truncations: Vec<Truncation> = levels
        .iter()
        .zip(&vals)
        .map(|(&r, v)| Truncation {
            r,
            value: v.mass,
            stderr: v.stderr,
            tail_bound: 2.0 * firey * diam.powi(j as i32) * (1.0 - r * r).powf(a) * tail_sup(f, r),
        })
        .collect();
    let accepted = (1..truncations.len()).find(|&i| (truncations[i].value - truncations[i - 1].value).abs() < tol);
    let i = accepted.unwrap_or(truncations.len() - 1);
    let t = truncations[i];
    Ok(PrincipalValue {
        value: t.value,
        err: t.stderr + t.tail_bound,
        stderr: t.stderr,
        tail_bound: t.tail_bound,
        truncations,
        firey_constant: firey,
        converged: accepted.is_some(),
        samples: cfg.samples,
        seed: cfg.seed,
    })
}

// ---------------------------------------------------------------------------
// Valuation handles

pub type BodyFn = dyn Fn(&ConvexBody) -> Result<f64> + Send + Sync;

#[derive(Clone)]
pub enum Backend {
    BuiltinPhi(ZonalDensity),
    /// Values on listed bodies only.
    Table(Vec<(ConvexBody, f64)>),
    Callable(Arc<BodyFn>),
}

impl fmt::Debug for Backend {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::BuiltinPhi(d) => fm.debug_tuple("BuiltinPhi").field(d).finish(),
            Backend::Table(t) => write!(fm, "Table({} rows)", t.len()),
            Backend::Callable(_) => write!(fm, "Callable"),
        }
    }
}

/// A translation-invariant, `SO(n-1)`-invariant valuation homogeneous of degree `j`.
#[derive(Debug, Clone)]
pub struct ValuationHandle {
    pub n: usize,
    pub j: usize,
    pub backend: Backend,
    /// Monte Carlo fallback for bodies without closed forms (built-in backend only).
    pub mc: Option<McConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueReport {
    pub value: f64,
    pub err: f64,
    pub backend: &'static str,
    pub n: usize,
    pub j: usize,
}

impl ValuationHandle {
    pub fn builtin(n: usize, j: usize, f: ZonalDensity) -> Result<Self> {
        validate_density(n, j, &f)?;
        Ok(ValuationHandle { n, j, backend: Backend::BuiltinPhi(f), mc: None })
    }

    pub fn table(n: usize, j: usize, rows: Vec<(ConvexBody, f64)>) -> Result<Self> {
        check_degree(n, j)?;
        if let Some((b, _)) = rows.iter().find(|(b, _)| b.n() != n) {
            return Err(ZonalError::Validation(format!("table body lives in R^{}, valuation in R^{n}", b.n())));
        }
        Ok(ValuationHandle { n, j, backend: Backend::Table(rows), mc: None })
    }

    pub fn callable<F>(n: usize, j: usize, f: F) -> Result<Self>
    where
        F: Fn(&ConvexBody) -> Result<f64> + Send + Sync + 'static,
    {
        check_degree(n, j)?;
        Ok(ValuationHandle { n, j, backend: Backend::Callable(Arc::new(f)), mc: None })
    }

    pub fn with_mc(mut self, cfg: McConfig) -> Self {
        self.mc = Some(cfg);
        self
    }

    pub fn density(&self) -> Option<&ZonalDensity> {
        match &self.backend {
            Backend::BuiltinPhi(f) => Some(f),
            _ => None,
        }
    }

    pub fn eval(&self, k: &ConvexBody) -> Result<f64> {
        Ok(self.report(k)?.value)
    }

    pub fn report(&self, k: &ConvexBody) -> Result<ValueReport> {
        if k.n() != self.n {
            return Err(ZonalError::Validation(format!("body lives in R^{}, valuation in R^{}", k.n(), self.n)));
        }
        let exact = |value| ValueReport { value, err: 0.0, backend: "closed-form", n: self.n, j: self.j };
        match &self.backend {
            Backend::BuiltinPhi(f) => {
                if let Some(v) = phi_exact(self.n, self.j, f, k)? {
                    return Ok(exact(v));
                }
                let Some(cfg) = &self.mc else {
                    return Err(ZonalError::Capability(
                        "no closed form for this body; supply Monte Carlo settings".into(),
                    ));
                };
                let pv = phi_general(self.n, self.j, f, k, 0.0, cfg)?;
                Ok(ValueReport { value: pv.value, err: pv.err, backend: "mc", n: self.n, j: self.j })
            }
            Backend::Table(rows) => rows
                .iter()
                .find(|(b, _)| same_body(b, k))
                .map(|(_, v)| exact(*v))
                .ok_or_else(|| ZonalError::Capability("body not present in the valuation table".into())),
            Backend::Callable(c) => Ok(exact(c(k)?)),
        }
    }
}

/// Structural equality of bodies up to a relative tolerance of `1e-12` in every number.
pub fn same_body(a: &ConvexBody, b: &ConvexBody) -> bool {
    fn close(x: &serde_json::Value, y: &serde_json::Value) -> bool {
        use serde_json::Value::*;
        match (x, y) {
            (Number(p), Number(q)) => {
                let (p, q) = (p.as_f64().unwrap_or(f64::NAN), q.as_f64().unwrap_or(f64::NAN));
                (p - q).abs() <= 1e-12 * p.abs().max(q.abs()).max(1.0)
            }
            (Array(p), Array(q)) => p.len() == q.len() && p.iter().zip(q).all(|(u, v)| close(u, v)),
            (Object(p), Object(q)) => {
                p.len() == q.len() && p.iter().all(|(k, u)| q.get(k).is_some_and(|v| close(u, v)))
            }
            _ => x == y,
        }
    }
    match (serde_json::to_value(a), serde_json::to_value(b)) {
        (Ok(x), Ok(y)) => close(&x, &y),
        _ => false,
    }
}

/// Chebyshev nodes on `[0, 1]`.
fn chebyshev01(m: usize) -> Vec<f64> {
    (0..m).map(|k| 0.5 * (1.0 + ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * m) as f64).cos())).collect()
}

/// `Λμ(K) = d/dt μ(K + tB)` at `t = 0`, from the degree-`n` polynomial through `n + 1`
/// Chebyshev nodes in `[0, 1]`.
pub fn lefschetz(mu: &ValuationHandle, k: &ConvexBody) -> Result<f64> {
    let nodes = chebyshev01(mu.n + 1);
    let mut vals = Vec::with_capacity(nodes.len());
    for &t in &nodes {
        let body = crate::geometry::minkowski_ball(k, t)?;
        vals.push(mu.eval(&body).map_err(|e| match e {
            ZonalError::Capability(m) => ZonalError::Capability(format!("Lefschetz operator needs K + tB: {m}")),
            other => other,
        })?);
    }
    let mut d = 0.0;
    for (i, &ti) in nodes.iter().enumerate() {
        let mut deriv = 0.0;
        for (m, &tm) in nodes.iter().enumerate() {
            if m == i {
                continue;
            }
            let mut prod = 1.0 / (ti - tm);
            for (l, &tl) in nodes.iter().enumerate() {
                if l != i && l != m {
                    prod *= (0.0 - tl) / (ti - tl);
                }
            }
            deriv += prod;
        }
        d += vals[i] * deriv;
    }
    Ok(d)
}

/// Rotation `g` with `g e_n = y`; `twist` rotates the `(e_1, e_2)` plane first, giving a
/// different representative of the same `SO(n-1)` coset.
pub fn rotation_to(y: &[f64], twist: f64) -> Result<Vec<Vec<f64>>> {
    let n = y.len();
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n < 2 || !(norm > 0.0) {
        return Err(ZonalError::Validation("direction must be a non-zero vector".into()));
    }
    let y: Vec<f64> = y.iter().map(|v| v / norm).collect();
    let mut g: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|k| if i == k { 1.0 } else { 0.0 }).collect()).collect();
    let mut u = y.iter().map(|v| -v).collect::<Vec<f64>>();
    u[n - 1] += 1.0;
    let uu: f64 = u.iter().map(|v| v * v).sum();
    if uu > 1e-30 {
        for i in 0..n {
            for k in 0..n {
                g[i][k] -= 2.0 * u[i] * u[k] / uu;
            }
        }
        for row in g.iter_mut() {
            row[0] = -row[0];
        }
    }
    if n >= 3 && twist != 0.0 {
        let (c, s) = (twist.cos(), twist.sin());
        for row in g.iter_mut() {
            let (x0, x1) = (row[0], row[1]);
            row[0] = c * x0 + s * x1;
            row[1] = -s * x0 + c * x1;
        }
    }
    Ok(g)
}

/// `Φ_j(f)[g_y^{-1} K]` with the Monte Carlo error (zero for closed forms).
pub fn zonal_convolution_eval(
    n: usize,
    j: usize,
    f: &ZonalDensity,
    k: &ConvexBody,
    y: &[f64],
    twist: f64,
    cfg: &McConfig,
) -> Result<(f64, f64)> {
    validate_density(n, j, f)?;
    if y.len() != n {
        return Err(ZonalError::Validation("direction has the wrong dimension".into()));
    }
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let yn = y[n - 1] / norm;
    if matches!(k.shape(), Shape::Ball { .. }) || (k.is_axial() && (yn.abs() - 1.0).abs() < 1e-15) {
        let f = if yn < 0.0 && !matches!(k.shape(), Shape::Ball { .. }) { f.reflected() } else { f.clone() };
        if let Some(v) = phi_exact(n, j, &f, k)? {
            return Ok((v, 0.0));
        }
    }
    let pv = if let Shape::Polytope { .. } = k.shape() {
        let g = rotation_to(y, twist)?;
        let gt: Vec<Vec<f64>> = (0..n).map(|c| (0..n).map(|r| g[r][c]).collect()).collect();
        phi_general(n, j, f, &k.map_polytope(&gt)?, 0.0, cfg)?
    } else {
        let mut c = cfg.clone();
        c.axis = Some(y.to_vec());
        phi_general(n, j, f, k, 0.0, &c)?
    };
    Ok((pv.value, pv.err))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportRow {
    pub y: Vec<f64>,
    pub h: f64,
    pub err: f64,
}

/// Candidate support function with a subadditivity diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportCandidate {
    pub rows: Vec<SupportRow>,
    /// Pairs `(y1, y2)` checked for `h(y1 + y2) <= h(y1) + h(y2)`.
    pub checked: usize,
    /// Violations beyond the combined error.
    pub violations: usize,
    pub volume: f64,
}

/// `h(y) = c0 + Σ_j Φ_j(f_j)[g_y^{-1} K] + cn vol(K)` on a grid of directions;
/// `densities[i]` belongs to degree `i + 1`.
pub fn minkowski_support_candidate(
    c0: f64,
    cn: f64,
    densities: &[ZonalDensity],
    k: &ConvexBody,
    grid: &[Vec<f64>],
    cfg: &McConfig,
) -> Result<SupportCandidate> {
    let n = k.n();
    if densities.len() != n - 1 {
        return Err(ZonalError::Validation(format!(
            "need {} densities (degrees 1..n-1), got {}",
            n - 1,
            densities.len()
        )));
    }
    if !(c0 >= 0.0 && cn >= 0.0) {
        return Err(ZonalError::Domain("c0 and cn must be non-negative".into()));
    }
    let volume = match k.volume() {
        Some(v) => v,
        None => mc_observables(k, 1.min(n - 1), cfg, &[])?.1.mass,
    };
    let eval = |y: &[f64], idx: u64| -> Result<(f64, f64)> {
        let mut h = c0 + cn * volume;
        let mut err = 0.0;
        for (i, f) in densities.iter().enumerate() {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(idx.wrapping_mul(1_000_003)).wrapping_add(i as u64);
            let (v, e) = zonal_convolution_eval(n, i + 1, f, k, y, 0.0, &c)?;
            h += v;
            err += e;
        }
        Ok((h, err))
    };
    let mut rows = Vec::with_capacity(grid.len());
    for (i, y) in grid.iter().enumerate() {
        let (h, err) = eval(y, i as u64)?;
        rows.push(SupportRow { y: y.clone(), h, err });
    }
    let mut checked = 0;
    let mut violations = 0;
    let m = rows.len();
    for i in 0..m.min(16) {
        let kk = (i * 7 + 3) % m.max(1);
        if kk == i {
            continue;
        }
        let z: Vec<f64> = rows[i].y.iter().zip(&rows[kk].y).map(|(a, b)| a + b).collect();
        let zn = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if zn < 1e-9 {
            continue;
        }
        let zu: Vec<f64> = z.iter().map(|v| v / zn).collect();
        let (hz, ez) = eval(&zu, (m + i) as u64)?;
        checked += 1;
        if zn * hz > rows[i].h + rows[kk].h + zn * ez + rows[i].err + rows[kk].err {
            violations += 1;
        }
    }
    Ok(SupportCandidate { rows, checked, violations, volume })
}

/// Unit directions: a Fibonacci lattice for `n = 3`, a regular polygon for `n = 2`, and
/// the normalised `{-1, 0, 1}^n` vectors otherwise.
pub fn sphere_grid(n: usize, m: usize) -> Vec<Vec<f64>> {
    match n {
        2 => (0..m)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|i| {
                    let z = 1.0 - (2 * i + 1) as f64 / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut out = Vec::new();
            for code in 0..3usize.pow(n as u32) {
                let mut c = code;
                let v: Vec<f64> = (0..n)
                    .map(|_| {
                        let d = (c % 3) as f64 - 1.0;
                        c /= 3;
                        d
                    })
                    .collect();
                let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if nv > 0.0 {
                    out.push(v.iter().map(|x| x / nv).collect());
                }
            }
            out.truncate(m.max(1));
            out
        }
    }
}

// ---------------------------------------------------------------------------
// Norm-estimate sweep

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioEntry {
    pub body: String,
    pub beta: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSweep {
    pub n: usize,
    pub j: usize,
    pub level: usize,
    pub sup: f64,
    pub argmax: RatioEntry,
    pub entries: usize,
}

/// Empirical supremum of `|Φ_j(f)[K]| / (sup_norm_h(K)^j ||f||_{D^a})` over cones, disks and
/// cylinders (grids scaled by `level`) and the unit cube (exact measure), for
/// `f = (1 - t^2)^(-β)`, `β ∈ {a/4, a/2, 3a/4}`.
pub fn norm_ratio_sweep(n: usize, j: usize, level: usize) -> Result<RatioSweep> {
    check_degree(n, j)?;
    if j == n - 1 {
        return Err(ZonalError::Domain("the ratio sweep uses singular densities and needs j <= n-2".into()));
    }
    let level = level.max(1);
    let a = canonical_exponent(n, j);
    let betas = [a / 4.0, a / 2.0, 3.0 * a / 4.0];
    let m = 8 * level;
    let heights: Vec<f64> = (0..=m).map(|i| 2f64.powf(-4.0 + 8.0 * i as f64 / m as f64)).collect();
    let mut bodies: Vec<(String, ConvexBody)> = vec![(String::from("disk"), ConvexBody::disk(n, 1.0)?)];
    for &h in &heights {
        bodies.push((format!("cone h={h}"), ConvexBody::cone(n, h)?));
        bodies.push((format!("cone h={}", -h), ConvexBody::cone(n, -h)?));
        bodies.push((format!("cylinder L={h}"), ConvexBody::cylinder(n, 1.0, h)?));
    }
    let mut best = RatioEntry { body: String::new(), beta: 0.0, ratio: 0.0 };
    let mut count = 0;
    for &beta in &betas {
        let f = ZonalDensity::power(a, beta)?;
        let norm = f.norm_da()?.value;
        for (name, b) in &bodies {
            let v = phi_exact(n, j, &f, b)?.expect("closed-form family");
            let ratio = v.abs() / (b.sup_norm_h().powi(j as i32) * norm);
            count += 1;
            if ratio > best.ratio {
                best = RatioEntry { body: name.clone(), beta, ratio };
            }
        }
    }
    let cube = ConvexBody::cube(n)?;
    let cube_s = cube_measure(n, j)?;
    for &beta in &betas {
        let f = ZonalDensity::power(a, beta)?;
        let ratio = cube_s.integrate(&f)?.abs() / (cube.sup_norm_h().powi(j as i32) * f.norm_da()?.value);
        count += 1;
        if ratio > best.ratio {
            best = RatioEntry { body: "cube".into(), beta, ratio };
        }
    }
    Ok(RatioSweep { n, j, level, sup: best.ratio, argmax: best, entries: count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::cone_measure;
    use std::f64::consts::PI;

    fn one(n: usize, j: usize) -> ZonalDensity {
        ZonalDensity::constant(canonical_exponent(n, j), 1.0).unwrap()
    }

    #[test]
    fn cone_disk_cylinder_constants() {
        let f = one(3, 1);
        assert!((phi_cone(3, 1, &f, 1.0).unwrap() - PI * (1.0 + 0.75 * PI)).abs() < 1e-10);
        assert!((phi_disk(3, 1, &f, 1.0).unwrap() - PI * PI).abs() < 1e-10);
        assert!((phi_cone(3, 1, &f, 0.0).unwrap() - PI * PI).abs() < 1e-10);
        for len in [0.0, 0.5, 2.0] {
            assert!((phi_cylinder(3, 1, &f, 1.0, len).unwrap() - (PI * PI + PI * len)).abs() < 1e-10);
        }
    }

    #[test]
    fn cone_matches_measure_route() {
        for (n, j) in [(3, 1), (4, 1), (4, 2), (5, 2), (4, 3)] {
            let a = canonical_exponent(n, j);
            let f = if j == n - 1 {
                ZonalDensity::poly(a, vec![1.0, 0.3, 2.0]).unwrap()
            } else {
                ZonalDensity::power(a, a / 2.0).unwrap()
            };
            for h in [-2.0, -0.5, 0.7, 3.0] {
                let direct = phi_cone(n, j, &f, h).unwrap();
                let via = cone_measure(n, j, h).unwrap().integrate(&f).unwrap();
                assert!((direct - via).abs() < 1e-9 * direct.abs().max(1.0), "n={n} j={j} h={h}: {direct} vs {via}");
            }
        }
    }

    #[test]
    fn double_cone_split() {
        let f = ZonalDensity::power(1.0, 0.3).unwrap();
        let h = 1.5;
        let profile = [[-h, 0.0], [0.0, 1.0], [h, 0.0]];
        let want = phi_cone(4, 1, &f, h).unwrap() + phi_cone(4, 1, &f, -h).unwrap() - phi_disk(4, 1, &f, 1.0).unwrap();
        assert!((phi_revolution(4, 1, &f, &profile).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn revolution_routes_agree() {
        let profile = vec![[-0.5, 0.4], [0.0, 1.0], [1.0, 0.8], [1.6, 0.0]];
        for (n, j) in [(3, 1), (4, 1), (4, 2), (5, 3)] {
            let a = canonical_exponent(n, j);
            let f = ZonalDensity::power(a, a / 2.0).unwrap().add(&ZonalDensity::poly(a, vec![0.2, 0.0, 1.0]).unwrap());
            let k = ConvexBody::revolution(n, profile.clone()).unwrap();
            let direct = phi_revolution(n, j, &f, &profile).unwrap();
            let via = phi_exact(n, j, &f, &k).unwrap().unwrap();
            assert!((direct - via).abs() < 1e-9 * direct.abs(), "n={n} j={j}: {direct} vs {via}");
        }
    }

    #[test]
    fn lefschetz_of_volume_polynomial() {
        let mu = ValuationHandle::callable(3, 2, |k| match k.shape() {
            Shape::BallSum { t, .. } => Ok(1.0 + 6.0 * t + 3.0 * PI * t * t + 4.0 * PI / 3.0 * t.powi(3)),
            _ => Ok(1.0),
        })
        .unwrap();
        let d = lefschetz(&mu, &ConvexBody::cube(3).unwrap()).unwrap();
        assert!((d - 6.0).abs() < 1e-10);
    }

    #[test]
    fn rotation_maps_axis() {
        for y in [vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0], vec![0.6, 0.0, 0.8], vec![1.0, 2.0, -3.0]] {
            let g = rotation_to(&y, 0.7).unwrap();
            let nv = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            for i in 0..3 {
                assert!((g[i][2] - y[i] / nv).abs() < 1e-14);
            }
            let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
            assert!((det - 1.0).abs() < 1e-13);
        }
    }
}
