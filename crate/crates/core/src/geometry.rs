//! Convex bodies, support functions and metric projection.
//!
//! Every body is `scale * shape + translate`. Shapes with an `e_n` symmetry axis
//! (cone, disk, cylinder, revolution) are described by a radius profile over heights and
//! reduce projection and width computations to the meridian plane.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZonalError};
use crate::special;
use crate::tolerances::{WIDTH_GRID, WOLFE_MAX_ITER, WOLFE_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Polytope {
        vertices: Vec<Vec<f64>>,
    },
    /// Concave piecewise-linear radius profile `(height, radius)` around the `e_n` axis.
    Revolution {
        profile: Vec<[f64; 2]>,
    },
    /// `conv(unit disk in e_n^perp, h e_n)`.
    Cone {
        h: f64,
    },
    Disk {
        radius: f64,
    },
    Ball {
        radius: f64,
    },
    /// Disk of the given radius times `[0, height]` along `e_n`.
    Cylinder {
        radius: f64,
        height: f64,
    },
    /// `base + t B`.
    #[serde(rename = "ballsum")]
    BallSum {
        base: Box<ConvexBody>,
        t: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawBody {
    n: usize,
    #[serde(flatten)]
    shape: Shape,
    #[serde(default = "unit")]
    scale: f64,
    #[serde(default)]
    translate: Vec<f64>,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBody", into = "RawBody")]
pub struct ConvexBody {
    n: usize,
    shape: Shape,
    scale: f64,
    translate: Vec<f64>,
}

impl TryFrom<RawBody> for ConvexBody {
    type Error = ZonalError;
    fn try_from(r: RawBody) -> Result<Self> {
        let translate = if r.translate.is_empty() { vec![0.0; r.n] } else { r.translate };
        let body = ConvexBody { n: r.n, shape: r.shape, scale: r.scale, translate };
        body.validate()?;
        Ok(body)
    }
}

impl From<ConvexBody> for RawBody {
    fn from(b: ConvexBody) -> Self {
        RawBody { n: b.n, shape: b.shape, scale: b.scale, translate: b.translate }
    }
}

fn v_err(msg: impl Into<String>) -> ZonalError {
    ZonalError::Validation(msg.into())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ConvexBody {
    pub fn new(n: usize, shape: Shape) -> Result<Self> {
        let body = ConvexBody { n, shape, scale: 1.0, translate: vec![0.0; n] };
        body.validate()?;
        Ok(body)
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let n = vertices.first().map(|v| v.len()).unwrap_or(0);
        if vertices.is_empty() {
            return Err(v_err("polytope needs at least one vertex"));
        }
        Self::new(n, Shape::Polytope { vertices })
    }

    /// The cube `[0, 1]^n`.
    pub fn cube(n: usize) -> Result<Self> {
        let vertices = (0..1usize << n).map(|m| (0..n).map(|i| ((m >> i) & 1) as f64).collect()).collect();
        Self::polytope(vertices)
    }

    pub fn cone(n: usize, h: f64) -> Result<Self> {
        Self::new(n, Shape::Cone { h })
    }

    pub fn disk(n: usize, radius: f64) -> Result<Self> {
        Self::new(n, Shape::Disk { radius })
    }

    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        Self::new(n, Shape::Ball { radius })
    }

    pub fn cylinder(n: usize, radius: f64, height: f64) -> Result<Self> {
        Self::new(n, Shape::Cylinder { radius, height })
    }

    pub fn revolution(n: usize, profile: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(n, Shape::Revolution { profile })
    }

    /// Frustum with radius `r0` at height `0` and `r1` at height `len`.
    pub fn frustum(n: usize, r0: f64, r1: f64, len: f64) -> Result<Self> {
        Self::revolution(n, vec![[0.0, r0], [len, r1]])
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        self.scale = scale;
        self.validate()?;
        Ok(self)
    }

    pub fn with_translation(mut self, x: Vec<f64>) -> Result<Self> {
        self.translate = x;
        self.validate()?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn translation(&self) -> &[f64] {
        &self.translate
    }

    /// True for shapes with an `e_n` symmetry axis, including ball sums of such shapes.
    pub fn is_axial(&self) -> bool {
        match &self.shape {
            Shape::Polytope { .. } => false,
            Shape::Ball { .. } => true,
            Shape::BallSum { base, .. } => base.is_axial(),
            _ => true,
        }
    }

    fn allows_free_translation(&self) -> bool {
        match &self.shape {
            Shape::Polytope { .. } | Shape::Ball { .. } => true,
            Shape::BallSum { base, .. } => base.allows_free_translation(),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return Err(v_err(format!("dimension must be at least 2, got {n}")));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(v_err(format!("scale must be positive, got {}", self.scale)));
        }
        if self.translate.len() != n || self.translate.iter().any(|x| !x.is_finite()) {
            return Err(v_err(format!("translation must be a finite vector of length {n}")));
        }
        if !self.allows_free_translation() && self.translate[..n - 1].iter().any(|&x| x != 0.0) {
            return Err(v_err("bodies with an e_n axis may only be translated along e_n"));
        }
        match &self.shape {
            Shape::Polytope { vertices } => {
                if vertices.is_empty() {
                    return Err(v_err("polytope needs at least one vertex"));
                }
                for (i, v) in vertices.iter().enumerate() {
                    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
                        return Err(v_err(format!("vertex {i} is not a finite point of R^{n}")));
                    }
                }
            }
            Shape::Revolution { profile } => validate_profile(profile)?,
            Shape::Cone { h } => {
                if !h.is_finite() {
                    return Err(v_err("cone apex height must be finite"));
                }
            }
            Shape::Disk { radius } | Shape::Ball { radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(v_err(format!("radius must be positive, got {radius}")));
                }
            }
            Shape::Cylinder { radius, height } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(v_err(format!("cylinder radius must be positive, got {radius}")));
                }
                if !(*height >= 0.0 && height.is_finite()) {
                    return Err(v_err(format!("cylinder height must be non-negative, got {height}")));
                }
            }
            Shape::BallSum { base, t } => {
                if !(*t >= 0.0 && t.is_finite()) {
                    return Err(ZonalError::Domain(format!("ball-sum radius must be non-negative, got {t}")));
                }
                if base.n != n {
                    return Err(v_err("ball-sum base has a different dimension"));
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    /// Radius profile `(height, radius)` in local coordinates for shapes with an `e_n` axis.
    pub fn axis_profile(&self) -> Option<Vec<(f64, f64)>> {
        match &self.shape {
            Shape::Cone { h } => Some(if *h > 0.0 {
                vec![(0.0, 1.0), (*h, 0.0)]
            } else if *h < 0.0 {
                vec![(*h, 0.0), (0.0, 1.0)]
            } else {
                vec![(0.0, 1.0)]
            }),
            Shape::Disk { radius } => Some(vec![(0.0, *radius)]),
            Shape::Cylinder { radius, height } => {
                Some(if *height > 0.0 { vec![(0.0, *radius), (*height, *radius)] } else { vec![(0.0, *radius)] })
            }
            Shape::Revolution { profile } => Some(profile.iter().map(|p| (p[0], p[1])).collect()),
            _ => None,
        }
    }

    fn to_local(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.translate).map(|(a, b)| (a - b) / self.scale).collect()
    }

    fn to_global(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.translate).map(|(a, b)| a * self.scale + b).collect()
    }

    /// Support function `h_K(y) = sup_{x in K} <x, y>`.
    pub fn support(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.n);
        let local = match &self.shape {
            Shape::Polytope { vertices } => vertices.iter().map(|v| dot(v, y)).fold(f64::NEG_INFINITY, f64::max),
            Shape::Ball { radius } => radius * norm(y),
            Shape::BallSum { base, t } => base.support(y) + t * norm(y),
            _ => {
                let yr = norm(&y[..self.n - 1]);
                let yn = y[self.n - 1];
                self.axis_profile()
                    .expect("axial shape")
                    .iter()
                    .map(|&(t, r)| r * yr + t * yn)
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        };
        self.scale * local + dot(&self.translate, y)
    }

    /// Metric projection onto the body and the distance to it.
    pub fn nearest_point(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        debug_assert_eq!(x.len(), self.n);
        let xl = self.to_local(x);
        let (pl, dl) = match &self.shape {
            Shape::Ball { radius } => {
                let r = norm(&xl);
                if r <= *radius {
                    (xl.clone(), 0.0)
                } else {
                    (xl.iter().map(|c| c * radius / r).collect(), r - radius)
                }
            }
            Shape::Polytope { vertices } => wolfe_nearest(vertices, &xl)?,
            Shape::BallSum { base, t } => {
                let (p, d) = base.nearest_point(&xl)?;
                if d <= *t {
                    (xl.clone(), 0.0)
                } else {
                    let q = xl.iter().zip(&p).map(|(a, b)| b + t * (a - b) / d).collect();
                    (q, d - t)
                }
            }
            _ => {
                let n = self.n;
                let rho = norm(&xl[..n - 1]);
                let (pr, pz) = project_meridian(&self.axis_profile().expect("axial shape"), rho, xl[n - 1]);
                let mut p = vec![0.0; n];
                if rho > 0.0 {
                    for i in 0..n - 1 {
                        p[i] = xl[i] * pr / rho;
                    }
                }
                p[n - 1] = pz;
                let d = ((rho - pr).powi(2) + (xl[n - 1] - pz).powi(2)).sqrt();
                (p, d)
            }
        };
        Ok((self.to_global(&pl), dl * self.scale))
    }

    /// Diameter: exact vertex pairs for polytopes, polar-angle width search for axial shapes.
    pub fn diameter(&self) -> f64 {
        let local = match &self.shape {
            Shape::Polytope { vertices } => {
                let mut best: f64 = 0.0;
                for (i, a) in vertices.iter().enumerate() {
                    for b in &vertices[i + 1..] {
                        let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
                        best = best.max(d);
                    }
                }
                best.sqrt()
            }
            Shape::Ball { radius } => 2.0 * radius,
            Shape::BallSum { base, t } => base.diameter() + 2.0 * t,
            _ => {
                let prof = self.axis_profile().expect("axial shape");
                let width = |alpha: f64| {
                    let (sr, cz) = (alpha.sin(), alpha.cos());
                    let up = prof.iter().map(|&(t, r)| r * sr + t * cz).fold(f64::NEG_INFINITY, f64::max);
                    let down = prof.iter().map(|&(t, r)| r * sr - t * cz).fold(f64::NEG_INFINITY, f64::max);
                    up + down
                };
                maximize_on_grid(width, 0.0, std::f64::consts::FRAC_PI_2, WIDTH_GRID)
            }
        };
        local * self.scale
    }

    /// `sup_v |h_K(v)|` over unit vectors, which equals `max_{x in K} |x|`.
    pub fn sup_norm_h(&self) -> f64 {
        self.max_norm_affine(1.0, &vec![0.0; self.n])
    }

    /// `max_{x in K} |lam x + x0|`.
    fn max_norm_affine(&self, lam: f64, x0: &[f64]) -> f64 {
        let l = lam * self.scale;
        let c: Vec<f64> = self.translate.iter().zip(x0).map(|(t, o)| lam * t + o).collect();
        match &self.shape {
            Shape::Polytope { vertices } => vertices
                .iter()
                .map(|v| norm(&v.iter().zip(&c).map(|(a, b)| l * a + b).collect::<Vec<_>>()))
                .fold(0.0, f64::max),
            Shape::Ball { radius } => norm(&c) + l * radius,
            Shape::BallSum { base, t } => base.max_norm_affine(l, &c) + l * t,
            _ => {
                let n = self.n;
                let off = norm(&c[..n - 1]);
                self.axis_profile()
                    .expect("axial shape")
                    .iter()
                    .map(|&(t, r)| ((l * r + off).powi(2) + (l * t + c[n - 1]).powi(2)).sqrt())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Lebesgue volume where it has a closed form.
    pub fn volume(&self) -> Option<f64> {
        let n = self.n;
        let local = match &self.shape {
            Shape::Ball { radius } => Some(special::omega(n) * radius.powi(n as i32)),
            Shape::Polytope { .. } | Shape::BallSum { .. } => None,
            _ => {
                let prof = self.axis_profile().expect("axial shape");
                let mut v = 0.0;
                for w in prof.windows(2) {
                    let (t0, r0) = w[0];
                    let (t1, r1) = w[1];
                    let len = t1 - t0;
                    v += if (r1 - r0).abs() < 1e-15 * r0.abs().max(r1.abs()).max(1e-300) {
                        len * r0.powi(n as i32 - 1)
                    } else {
                        len * (r1.powi(n as i32) - r0.powi(n as i32)) / (n as f64 * (r1 - r0))
                    };
                }
                Some(special::omega(n - 1) * v)
            }
        };
        local.map(|v| v * self.scale.powi(n as i32))
    }

    /// Bounding box `[lo, hi]` from support values in the coordinate directions.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![0.0; self.n];
        let mut hi = vec![0.0; self.n];
        for i in 0..self.n {
            let mut e = vec![0.0; self.n];
            e[i] = 1.0;
            hi[i] = self.support(&e);
            e[i] = -1.0;
            lo[i] = -self.support(&e);
        }
        (lo, hi)
    }

    /// Image of a polytope under the linear map `x -> m x` (rows of `m`).
    pub fn map_polytope(&self, m: &[Vec<f64>]) -> Result<Self> {
        match &self.shape {
            Shape::Polytope { vertices } => {
                let verts = vertices
                    .iter()
                    .map(|v| {
                        let g = self.to_global(v);
                        m.iter().map(|row| dot(row, &g)).collect()
                    })
                    .collect();
                ConvexBody::polytope(verts)
            }
            _ => Err(ZonalError::Capability("only polytopes can be rotated".into())),
        }
    }
}

/// Volume of the unit ball in `R^k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    special::omega(k)
}

/// Returns `K + t B`; balls stay balls.
pub fn minkowski_ball(k: &ConvexBody, t: f64) -> Result<ConvexBody> {
    if !(t >= 0.0) {
        return Err(ZonalError::Domain(format!("ball-sum radius must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(k.clone());
    }
    match k.shape() {
        Shape::Ball { radius } => ConvexBody::new(k.n, Shape::Ball { radius: radius + t / k.scale })?
            .with_scale(k.scale)?
            .with_translation(k.translate.clone()),
        Shape::BallSum { base, t: t0 } => {
            ConvexBody::new(k.n, Shape::BallSum { base: base.clone(), t: t0 + t / k.scale })?
                .with_scale(k.scale)?
                .with_translation(k.translate.clone())
        }
        _ => ConvexBody::new(k.n, Shape::BallSum { base: Box::new(k.clone()), t }),
    }
}

/// Hausdorff distance estimated as the sup-norm of the support difference over directions.
pub fn hausdorff_on_grid(k: &ConvexBody, l: &ConvexBody, directions: &[Vec<f64>]) -> f64 {
    directions.iter().map(|u| (k.support(u) - l.support(u)).abs()).fold(0.0, f64::max)
}

fn validate_profile(profile: &[[f64; 2]]) -> Result<()> {
    if profile.len() < 2 {
        return Err(v_err("revolution profile needs at least two breakpoints"));
    }
    for (i, p) in profile.iter().enumerate() {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(v_err(format!("breakpoint {i} is not finite")));
        }
        if p[1] < 0.0 {
            return Err(v_err(format!("breakpoint {i} (t={}, r={}) has negative radius", p[0], p[1])));
        }
    }
    for (i, w) in profile.windows(2).enumerate() {
        if !(w[1][0] > w[0][0]) {
            return Err(v_err(format!("heights must increase strictly at breakpoint {}", i + 1)));
        }
    }
    if profile.iter().all(|p| p[1] == 0.0) {
        return Err(v_err("revolution profile needs a positive radius"));
    }
    let scale = profile.iter().map(|p| p[0].abs().max(p[1])).fold(0.0, f64::max);
    for i in 1..profile.len() - 1 {
        let (t0, r0) = (profile[i - 1][0], profile[i - 1][1]);
        let (t1, r1) = (profile[i][0], profile[i][1]);
        let (t2, r2) = (profile[i + 1][0], profile[i + 1][1]);
        let chord = r0 + (r2 - r0) * (t1 - t0) / (t2 - t0);
        if r1 < chord - 1e-12 * scale.max(1.0) {
            return Err(v_err(format!(
                "profile is not concave at breakpoint {i} (t={t1}, r={r1}; chord radius {chord})"
            )));
        }
    }
    Ok(())
}

/// Projection of `(rho, z)`, `rho >= 0`, onto the meridian section `{|rho| <= r(z)}`.
fn project_meridian(prof: &[(f64, f64)], rho: f64, z: f64) -> (f64, f64) {
    // Counter-clockwise polygon: right chain upwards, left chain downwards.
    let mut poly: Vec<(f64, f64)> = Vec::with_capacity(2 * prof.len());
    for &(t, r) in prof {
        poly.push((r, t));
    }
    for &(t, r) in prof.iter().rev() {
        if r > 0.0 {
            poly.push((-r, t));
        }
    }
    poly.dedup();
    if poly.len() >= 3 {
        let inside = (0..poly.len()).all(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            (b.0 - a.0) * (z - a.1) - (b.1 - a.1) * (rho - a.0) >= 0.0
        });
        if inside {
            return (rho, z);
        }
    }
    let mut best = (poly[0], f64::INFINITY);
    let m = poly.len();
    let edges = if m == 1 { 1 } else { m };
    for i in 0..edges {
        let a = poly[i];
        let b = poly[(i + 1) % m];
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        let u = if len2 > 0.0 { (((rho - a.0) * dx + (z - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
        let q = (a.0 + u * dx, a.1 + u * dy);
        let d = (rho - q.0).powi(2) + (z - q.1).powi(2);
        if d < best.1 {
            best = (q, d);
        }
    }
    best.0
}

/// Nearest point of `conv(vertices)` to `x` by Wolfe's minimum-norm-point iteration.
fn wolfe_nearest(vertices: &[Vec<f64>], x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let pts: Vec<Vec<f64>> = vertices.iter().map(|v| v.iter().zip(x).map(|(a, b)| a - b).collect()).collect();
    let scale2 = pts.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(1e-300);
    let start = (0..pts.len())
        .min_by(|&i, &j| dot(&pts[i], &pts[i]).partial_cmp(&dot(&pts[j], &pts[j])).unwrap())
        .expect("non-empty");
    let mut set = vec![start];
    let mut lam = vec![1.0];
    let mut y = pts[start].clone();
    let combine = |set: &[usize], lam: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (&i, &l) in set.iter().zip(lam) {
            for (o, p) in out.iter_mut().zip(&pts[i]) {
                *o += l * p;
            }
        }
        out
    };
    for _ in 0..WOLFE_MAX_ITER {
        let yy = dot(&y, &y);
        let (jmin, best) = (0..pts.len())
            .map(|i| (i, dot(&y, &pts[i])))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .expect("non-empty");
        if yy <= 1e-24 * scale2 {
            return Ok((x.to_vec(), 0.0));
        }
        if yy - best <= WOLFE_TOL * scale2 || set.contains(&jmin) {
            let p: Vec<f64> = y.iter().zip(x).map(|(a, b)| a + b).collect();
            return Ok((p, yy.sqrt()));
        }
        set.push(jmin);
        lam.push(0.0);
        loop {
            let alpha = affine_min_norm(&pts, &set)?;
            if alpha.iter().all(|&a| a > 1e-14) {
                lam = alpha;
                y = combine(&set, &lam);
                break;
            }
            let mut theta: f64 = 1.0;
            for (a, l) in alpha.iter().zip(&lam) {
                if *a <= 1e-14 && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lam.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            let mut k = 0;
            while k < set.len() {
                if lam[k] <= 1e-14 {
                    set.remove(k);
                    lam.remove(k);
                } else {
                    k += 1;
                }
            }
            let s: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= s);
            y = combine(&set, &lam);
            if set.len() == 1 {
                break;
            }
        }
    }
    let yy = dot(&y, &y);
    Err(ZonalError::Numerical(format!("nearest-point iteration did not converge; residual distance {}", yy.sqrt())))
}

/// Affine weights (summing to one) of the minimum-norm point of `aff(pts[set])`.
fn affine_min_norm(pts: &[Vec<f64>], set: &[usize]) -> Result<Vec<f64>> {
    let k = set.len();
    let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..k {
            m[(a, b)] = dot(&pts[set[a]], &pts[set[b]]);
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = m
        .clone()
        .lu()
        .solve(&rhs)
        .or_else(|| m.svd(true, true).solve(&rhs, 1e-14).ok())
        .ok_or_else(|| ZonalError::Numerical("degenerate affine hull in nearest-point solver".into()))?;
    Ok((0..k).map(|i| sol[i]).collect())
}

/// Maximum of a 1-D function on `[lo, hi]`: grid search then golden-section refinement.
pub fn maximize_on_grid<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, m: usize) -> f64 {
    let h = (hi - lo) / m as f64;
    let (mut ib, mut fb) = (0usize, f64::NEG_INFINITY);
    for i in 0..=m {
        let v = f(lo + h * i as f64);
        if v > fb {
            ib = i;
            fb = v;
        }
    }
    let mut a = (lo + h * ib as f64 - h).max(lo);
    let mut b = (lo + h * ib as f64 + h).min(hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    fb.max(f(0.5 * (a + b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_examples() {
        assert_eq!(ConvexBody::ball(3, 1.0).unwrap().support(&[0.0, 0.0, 2.0]), 2.0);
        assert_eq!(ConvexBody::cone(3, 1.0).unwrap().support(&[0.0, 0.0, 1.0]), 1.0);
        assert_eq!(ConvexBody::cube(3).unwrap().support(&[1.0, 1.0, 1.0]), 3.0);
    }

    #[test]
    fn nearest_point_examples() {
        let (p, d) = ConvexBody::ball(3, 1.0).unwrap().nearest_point(&[2.0, 0.0, 0.0]).unwrap();
        assert_eq!((p, d), (vec![1.0, 0.0, 0.0], 1.0));
        let (p, d) = ConvexBody::cube(3).unwrap().nearest_point(&[2.0, 2.0, 2.0]).unwrap();
        for c in p {
            assert!((c - 1.0).abs() < 1e-12);
        }
        assert!((d - 3f64.sqrt()).abs() < 1e-12);
        let (p, d) = ConvexBody::disk(3, 1.0).unwrap().nearest_point(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!((p, d), (vec![0.0, 0.0, 0.0], 1.0));
    }

    #[test]
    fn minkowski_examples() {
        let b = minkowski_ball(&ConvexBody::ball(3, 1.0).unwrap(), 1.0).unwrap();
        assert_eq!(b.shape(), &Shape::Ball { radius: 2.0 });
        let c = ConvexBody::cone(3, 1.0).unwrap();
        let s = minkowski_ball(&c, 0.5).unwrap();
        assert!((s.support(&[0.0, 0.0, 1.0]) - 1.5).abs() < 1e-15);
        assert_eq!(minkowski_ball(&c, 0.0).unwrap(), c);
        assert!(minkowski_ball(&c, -1.0).is_err());
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(ConvexBody::ball(3, 1.0).unwrap().diameter(), 2.0);
        assert!((ConvexBody::cube(3).unwrap().diameter() - 3f64.sqrt()).abs() < 1e-15);
        assert!((ConvexBody::disk(3, 1.0).unwrap().diameter() - 2.0).abs() < 1e-12);
        let cyl = ConvexBody::cylinder(3, 1.0, 1.0).unwrap();
        assert!((cyl.diameter() - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unit_ball_volume_examples() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert_eq!(unit_ball_volume(2), std::f64::consts::PI);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn profile_rejects_non_concave() {
        let err = ConvexBody::revolution(3, vec![[0.0, 1.0], [1.0, 0.5], [2.0, 1.0]]).unwrap_err();
        assert!(err.to_string().contains("breakpoint 1"), "{err}");
    }

    #[test]
    fn axial_translation_only() {
        assert!(ConvexBody::cone(3, 1.0).unwrap().with_translation(vec![1.0, 0.0, 0.0]).is_err());
        assert!(ConvexBody::cone(3, 1.0).unwrap().with_translation(vec![0.0, 0.0, 2.0]).is_ok());
        assert!(ConvexBody::cube(3).unwrap().with_translation(vec![1.0, 2.0, 3.0]).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"n":3,"type":"cone","h":1.0,"scale":1.0,"translate":[0,0,0]}"#;
        let b: ConvexBody = serde_json::from_str(s).unwrap();
        assert_eq!(b, ConvexBody::cone(3, 1.0).unwrap());
        let back: ConvexBody = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
        assert_eq!(back, b);
        let bad = r#"{"n":3,"type":"revolution","profile":[[0,1],[1,0.2],[2,1]]}"#;
        let err = serde_json::from_str::<ConvexBody>(bad).unwrap_err().to_string();
        assert!(err.contains("breakpoint 1"), "{err}");
    }

    #[test]
    fn volumes() {
        let c = ConvexBody::cone(3, 3.0).unwrap();
        assert!((c.volume().unwrap() - std::f64::consts::PI).abs() < 1e-12);
        let cyl = ConvexBody::cylinder(3, 2.0, 1.0).unwrap().with_scale(0.5).unwrap();
        assert!((cyl.volume().unwrap() - std::f64::consts::PI * 0.5).abs() < 1e-12);
    }
}
