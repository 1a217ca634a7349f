//! Zonal pushforwards of area measures.
//!
//! A [`ZonalMeasure`] is the image of `S_j(K)` under `v ↦ <v, e_n>`: atoms plus pieces with
//! density `c (1 - t^2)^e`. Closed forms exist for balls, disks, cones and cylinders; any body
//! can be handled by [`mc_steiner_estimate`], which fits the local Steiner polynomial to Monte
//! Carlo volumes of local parallel sets.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dspace::{theta_integral, ZonalDensity};
use crate::error::{Result, ZonalError};
use crate::geometry::{ConvexBody, Shape};
use crate::point::Pt;
use crate::special::{binom, canonical_exponent, omega};
use crate::tolerances::{MC_BLOCK, MC_MAX_COND, MC_POLE_LEVELS, MC_RHO0_FRACTION, MC_UNIFORM_BANDS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub at: Pt,
    pub mass: f64,
}

/// Density `coef (1 - t^2)^exponent` on `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: Pt,
    pub hi: Pt,
    pub coef: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZonalMeasure {
    pub n: usize,
    pub j: usize,
    pub atoms: Vec<Atom>,
    pub pieces: Vec<Piece>,
}

fn check_j(n: usize, j: usize, max: usize) -> Result<()> {
    if n < 2 {
        return Err(ZonalError::Validation(format!("dimension must be at least 2, got {n}")));
    }
    if j > max {
        return Err(ZonalError::Domain(format!("degree j = {j} out of range 0..={max} for n = {n}")));
    }
    Ok(())
}

fn bottom() -> Pt {
    Pt::from_op(0.0)
}

fn top() -> Pt {
    Pt::from_om(0.0)
}

/// Sphere pushforward `R^j (n-1) ω_{n-1} (1 - t^2)^((n-3)/2)`, i.e. `S_j` of a ball.
fn sphere(n: usize, j: usize, scale: f64) -> ZonalMeasure {
    ZonalMeasure {
        n,
        j,
        atoms: vec![],
        pieces: vec![Piece {
            lo: bottom(),
            hi: top(),
            coef: scale.powi(j as i32) * (n as f64 - 1.0) * omega(n - 1),
            exponent: (n as f64 - 3.0) / 2.0,
        }],
    }
}

impl ZonalMeasure {
    pub fn scaled(mut self, c: f64) -> Self {
        self.atoms.iter_mut().for_each(|a| a.mass *= c);
        self.pieces.iter_mut().for_each(|p| p.coef *= c);
        self
    }

    /// `∫ f dμ` for a density; unbounded densities are checked for integrability.
    pub fn integrate(&self, f: &ZonalDensity) -> Result<f64> {
        let mut total = 0.0;
        for atom in &self.atoms {
            let value = if atom.at.om <= 0.0 || atom.at.op <= 0.0 {
                if !f.is_bounded() {
                    return Err(ZonalError::Integrability(format!(
                        "atom at t = {} needs a bounded density",
                        atom.at.s
                    )));
                }
                f.with_weight(0.0)?.g(atom.at)
            } else {
                f.f_at(atom.at)
            };
            total += atom.mass * value;
        }
        let beta = f.repr().max_power();
        let a = f.a();
        for p in &self.pieces {
            for (end, reaches) in [(-1.0, p.lo.op <= 0.0), (1.0, p.hi.om <= 0.0)] {
                if reaches && !(p.exponent - beta > -1.0) {
                    return Err(ZonalError::Integrability(format!(
                        "∫ f (1-t^2)^{} dt diverges at t = {end}",
                        p.exponent
                    )));
                }
            }
            let e = p.exponent + 1.0 - a;
            let est = theta_integral(|q| f.g(q) * q.w().powf(e), p.lo.atanh(), p.hi.atanh(), &f.theta_breaks())
                .map_err(|err| ZonalError::Integrability(format!("integral against area measure failed: {err}")))?;
            total += p.coef * est.value;
        }
        Ok(total)
    }

    /// `∫ f dμ` for a bounded function of `t`.
    pub fn integrate_fn<F: Fn(Pt) -> f64>(&self, f: F) -> Result<f64> {
        let mut total: f64 = self.atoms.iter().map(|a| a.mass * f(a.at)).sum();
        for p in &self.pieces {
            let e = p.exponent + 1.0;
            let est = theta_integral(|q| f(q) * q.w().powf(e), p.lo.atanh(), p.hi.atanh(), &[])?;
            total += p.coef * est.value;
        }
        Ok(total)
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.integrate_fn(|_| 1.0)
    }

    /// Mass of `{lo <= t < hi}` (`{lo <= t <= 1}` when `hi >= 1`).
    pub fn band_mass(&self, lo: f64, hi: f64) -> Result<f64> {
        let inside = |s: f64| s >= lo && (s < hi || (hi >= 1.0 && s <= 1.0));
        let mut total: f64 = self.atoms.iter().filter(|a| inside(a.at.s)).map(|a| a.mass).sum();
        for p in &self.pieces {
            let l = lo.max(p.lo.s);
            let h = hi.min(p.hi.s);
            if h <= l {
                continue;
            }
            let tl = if l <= p.lo.s { p.lo.atanh() } else { l.atanh() };
            let th = if h >= p.hi.s { p.hi.atanh() } else { h.atanh() };
            let e = p.exponent + 1.0;
            total += p.coef * theta_integral(|q| q.w().powf(e), tl, th, &[])?.value;
        }
        Ok(total)
    }

    /// Restriction to `{|t| <= r}`.
    pub fn truncated(&self, r: f64) -> ZonalMeasure {
        let (lo, hi) = (Pt::from_s(-r), Pt::from_s(r));
        ZonalMeasure {
            n: self.n,
            j: self.j,
            atoms: self.atoms.iter().filter(|a| a.at.s.abs() <= r).copied().collect(),
            pieces: self
                .pieces
                .iter()
                .filter(|p| p.hi.s > -r && p.lo.s < r)
                .map(|p| Piece {
                    lo: if p.lo.s < -r { lo } else { p.lo },
                    hi: if p.hi.s > r { hi } else { p.hi },
                    ..*p
                })
                .collect(),
        }
    }

    /// Mass of the open cap `{t > r}`.
    pub fn cap_mass(&self, r: f64) -> Result<f64> {
        let mut total: f64 = self.atoms.iter().filter(|a| a.at.s > r).map(|a| a.mass).sum();
        for p in &self.pieces {
            if p.hi.s <= r {
                continue;
            }
            let tl = if r <= p.lo.s { p.lo.atanh() } else { r.atanh() };
            let e = p.exponent + 1.0;
            total += p.coef * theta_integral(|q| q.w().powf(e), tl, p.hi.atanh(), &[])?.value;
        }
        Ok(total)
    }
}

/// `S_j(C_h)` pushed to `[-1, 1]`.
pub fn cone_measure(n: usize, j: usize, h: f64) -> Result<ZonalMeasure> {
    check_j(n, j, n - 1)?;
    if !h.is_finite() {
        return Err(ZonalError::Domain("cone apex height must be finite".into()));
    }
    if h == 0.0 {
        return disk_measure(n, j, 1.0);
    }
    if j == 0 {
        return Ok(sphere(n, 0, 1.0));
    }
    let s = Pt::from_apex(h);
    let w1 = omega(n - 1);
    if j == n - 1 {
        let base = if h > 0.0 { bottom() } else { top() };
        return Ok(ZonalMeasure {
            n,
            j,
            atoms: vec![Atom { at: base, mass: w1 }, Atom { at: s, mass: w1 * (1.0 + h * h).sqrt() }],
            pieces: vec![],
        });
    }
    let a = canonical_exponent(n, j);
    let (lo, hi) = if h > 0.0 { (bottom(), s) } else { (s, top()) };
    Ok(ZonalMeasure {
        n,
        j,
        atoms: vec![Atom { at: s, mass: w1 * s.w().powf(a) / s.s.abs() }],
        pieces: vec![Piece { lo, hi, coef: w1 * 2.0 * a, exponent: a - 1.0 }],
    })
}

/// `S_j(r D^{n-1})` pushed to `[-1, 1]`.
pub fn disk_measure(n: usize, j: usize, r: f64) -> Result<ZonalMeasure> {
    check_j(n, j, n - 1)?;
    if !(r > 0.0) {
        return Err(ZonalError::Domain(format!("disk radius must be positive, got {r}")));
    }
    let w1 = omega(n - 1);
    let scale = r.powi(j as i32);
    if j == n - 1 {
        return Ok(ZonalMeasure {
            n,
            j,
            atoms: vec![Atom { at: bottom(), mass: w1 * scale }, Atom { at: top(), mass: w1 * scale }],
            pieces: vec![],
        });
    }
    if j == 0 {
        return Ok(sphere(n, 0, 1.0));
    }
    let a = canonical_exponent(n, j);
    Ok(ZonalMeasure {
        n,
        j,
        atoms: vec![],
        pieces: vec![Piece { lo: bottom(), hi: top(), coef: scale * w1 * 2.0 * a, exponent: a - 1.0 }],
    })
}

/// `S_j(R B^n)` pushed to `[-1, 1]`.
pub fn ball_measure(n: usize, j: usize, radius: f64) -> Result<ZonalMeasure> {
    check_j(n, j, n - 1)?;
    if !(radius > 0.0) {
        return Err(ZonalError::Domain(format!("ball radius must be positive, got {radius}")));
    }
    Ok(sphere(n, j, radius))
}

/// `S_j` of the cylinder `r D^{n-1} × [0, L]` pushed to `[-1, 1]`.
pub fn cylinder_measure(n: usize, j: usize, r: f64, len: f64) -> Result<ZonalMeasure> {
    let mut m = disk_measure(n, j, r)?;
    if j == 0 {
        return Ok(m);
    }
    if len > 0.0 {
        m.atoms.push(Atom { at: Pt::from_s(0.0), mass: j as f64 * len * r.powi(j as i32 - 1) * omega(n - 1) });
    }
    Ok(m)
}

/// `S_j` of the body of revolution with concave profile `(t, r)`, read off its boundary
/// structure: each lateral segment with radii `r0, r1` and normal `s` carries an atom of mass
/// `ω_{n-1} (1 - s^2)^a |r0^j - r1^j| / |s|` (the cylinder limit `j r^(j-1) L ω_{n-1}` when
/// `s = 0`), each rim of radius `r` spreads `r^j` times the disk density over the arc between
/// its neighbouring normals, and flat ends of radius `r` are atoms `ω_{n-1} r^(n-1)` at `±1`
/// when `j = n - 1`.
pub fn revolution_measure(n: usize, j: usize, profile: &[[f64; 2]]) -> Result<ZonalMeasure> {
    check_j(n, j, n - 1)?;
    ConvexBody::revolution(n, profile.to_vec())?;
    if j == 0 {
        return Ok(sphere(n, 0, 1.0));
    }
    let w1 = omega(n - 1);
    let a = canonical_exponent(n, j);
    let jj = j as i32;
    let mut atoms = Vec::new();
    let mut pieces = Vec::new();
    let mut normals = vec![bottom()];
    for seg in profile.windows(2) {
        let ([t0, r0], [t1, r1]) = (seg[0], seg[1]);
        let len = t1 - t0;
        let slant = len.hypot(r0 - r1);
        let s = Pt::from_s((r0 - r1) / slant);
        let mass = if r0 == r1 {
            j as f64 * r0.powi(jj - 1) * len * w1
        } else {
            w1 * s.w().powf(a) * (r0.powi(jj) - r1.powi(jj)).abs() / s.s.abs()
        };
        if mass > 0.0 {
            atoms.push(Atom { at: s, mass });
        }
        normals.push(s);
    }
    normals.push(top());
    for (i, p) in profile.iter().enumerate() {
        let r = p[1];
        if r == 0.0 {
            continue;
        }
        let (lo, hi) = (normals[i], normals[i + 1]);
        if j == n - 1 {
            let end = i == 0 || i == profile.len() - 1;
            if end {
                atoms.push(Atom { at: if i == 0 { lo } else { hi }, mass: w1 * r.powi(jj) });
            }
        } else if hi.s > lo.s {
            pieces.push(Piece { lo, hi, coef: r.powi(jj) * w1 * 2.0 * a, exponent: a - 1.0 });
        }
    }
    Ok(ZonalMeasure { n, j, atoms, pieces })
}

/// `S_j` of the unit cube `[0, 1]^n` pushed to `[-1, 1]`. A `j`-face carries its normal
/// orthant of `S^{n-j-1}` with weight `1 / binom(n-1, j)`; faces containing `e_n` directions
/// map to `t = 0`, the others spread the coordinate law of the sphere over `(0, ±1)`.
pub fn cube_measure(n: usize, j: usize) -> Result<ZonalMeasure> {
    check_j(n, j, n - 1)?;
    if j == 0 {
        return Ok(sphere(n, 0, 1.0));
    }
    let m = n - j;
    let zero = Atom { at: Pt::from_s(0.0), mass: binom(n - 1, j - 1) * m as f64 * omega(m) / binom(n - 1, j) };
    if m == 1 {
        return Ok(ZonalMeasure {
            n,
            j,
            atoms: vec![Atom { at: bottom(), mass: 1.0 }, zero, Atom { at: top(), mass: 1.0 }],
            pieces: vec![],
        });
    }
    let a = canonical_exponent(n, j);
    Ok(ZonalMeasure {
        n,
        j,
        atoms: vec![zero],
        pieces: vec![Piece { lo: bottom(), hi: top(), coef: (m - 1) as f64 * omega(m - 1), exponent: a - 1.0 }],
    })
}

/// Closed-form measure of a body, when its family has one.
pub fn closed_form_measure(k: &ConvexBody, j: usize) -> Result<Option<ZonalMeasure>> {
    let n = k.n();
    let lam = k.scale().powi(j as i32);
    let m = match k.shape() {
        Shape::Ball { radius } => ball_measure(n, j, *radius)?,
        Shape::Disk { radius } => disk_measure(n, j, *radius)?,
        Shape::Cone { h } => cone_measure(n, j, *h)?,
        Shape::Cylinder { radius, height } => cylinder_measure(n, j, *radius, *height)?,
        Shape::Revolution { profile } => revolution_measure(n, j, profile)?,
        _ => return Ok(None),
    };
    Ok(Some(m.scaled(lam)))
}

// ---------------------------------------------------------------------------
// Monte Carlo local Steiner estimator

/// Monte Carlo controls; `seed` is mandatory and fixes the result for any thread count.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Steiner radii (ascending); default `ρ_0 2^k`, `k = 0..=n`, `ρ_0 = 0.05 diam`.
    pub rho: Option<Vec<f64>>,
    /// Band edges from `-1` to `1`; default [`default_bands`].
    pub bands: Option<Vec<f64>>,
    /// Unit vector replacing `e_n`.
    pub axis: Option<Vec<f64>>,
    /// Jittered stratification: the first `m^n <= samples` points take one cell each of an
    /// `m^n` grid on the box, the rest are uniform. Unbiased; the binomial standard errors
    /// then overstate the true spread.
    pub stratified: bool,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        McConfig { samples, seed, rho: None, bands: None, axis: None, stratified: true }
    }
}

/// 64 uniform bands refined geometrically towards `±1` (edges `±(1 - 2^-k)`).
pub fn default_bands() -> Vec<f64> {
    let mut e: Vec<f64> = (0..=MC_UNIFORM_BANDS).map(|i| -1.0 + 2.0 * i as f64 / MC_UNIFORM_BANDS as f64).collect();
    let start = (MC_UNIFORM_BANDS as f64 / 2.0).log2().ceil() as u32 + 1;
    for k in start..start + MC_POLE_LEVELS {
        let x = 1.0 - 2f64.powi(-(k as i32));
        e.push(x);
        e.push(-x);
    }
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e.dedup();
    e
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandMass {
    pub mass: f64,
    pub stderr: f64,
}

/// Banded estimate of `S_0(K), ..., S_{n-1}(K)` pushed to the axis coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaMeasureEstimate {
    pub n: usize,
    pub bands: Vec<f64>,
    /// `S[j][band]`
    #[serde(rename = "S")]
    pub s: Vec<Vec<BandMass>>,
    /// Totals per degree, fitted from all counts.
    pub totals: Vec<BandMass>,
    pub rho: Vec<f64>,
    #[serde(rename = "N")]
    pub samples: usize,
    pub seed: u64,
    /// Condition number of the column-equilibrated Steiner design matrix.
    pub condition: f64,
}

/// Raw per-shell tallies of one sampling run.
#[derive(Debug, Clone)]
struct Tally {
    /// `[band][shell]` counts.
    counts: Vec<Vec<u64>>,
    /// `[observable][shell]` sums of weights and squared weights.
    sums: Vec<Vec<f64>>,
    squares: Vec<Vec<f64>>,
    inside: u64,
}

impl Tally {
    fn new(bands: usize, shells: usize, obs: usize) -> Self {
        Tally {
            counts: vec![vec![0; shells]; bands],
            sums: vec![vec![0.0; shells]; obs],
            squares: vec![vec![0.0; shells]; obs],
            inside: 0,
        }
    }

    fn merge(&mut self, o: &Tally) {
        for (a, b) in self.counts.iter_mut().zip(&o.counts) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.sums.iter_mut().zip(&o.sums) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.squares.iter_mut().zip(&o.squares) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.inside += o.inside;
    }
}

type Observable<'a> = &'a (dyn Fn(f64) -> f64 + Sync);

struct Sampler<'a> {
    body: &'a ConvexBody,
    axis: Vec<f64>,
    rho: Vec<f64>,
    bands: Vec<f64>,
    lo: Vec<f64>,
    width: Vec<f64>,
    box_volume: f64,
    /// Cells per axis of the stratification grid (0 when disabled).
    cells: usize,
}

impl<'a> Sampler<'a> {
    fn new(body: &'a ConvexBody, cfg: &McConfig) -> Result<Self> {
        let n = body.n();
        if cfg.samples < 10_000 {
            return Err(ZonalError::Config(format!("at least 10^4 samples are required, got {}", cfg.samples)));
        }
        let rho = match &cfg.rho {
            Some(r) => r.clone(),
            None => {
                let r0 = MC_RHO0_FRACTION * body.diameter().max(1e-12);
                (0..=n).map(|k| r0 * 2f64.powi(k as i32)).collect()
            }
        };
        let mut distinct = rho.clone();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();
        if rho.iter().any(|&r| !(r > 0.0 && r.is_finite())) || distinct.len() < n || distinct != rho {
            return Err(ZonalError::Config(format!(
                "radius grid needs at least {n} distinct positive ascending values"
            )));
        }
        let bands = cfg.bands.clone().unwrap_or_else(default_bands);
        if bands.len() < 2
            || bands[0] != -1.0
            || *bands.last().unwrap() != 1.0
            || bands.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(ZonalError::Config("band edges must increase from -1 to 1".into()));
        }
        let axis = match &cfg.axis {
            Some(v) => {
                let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if v.len() != n || !(nv > 0.0) {
                    return Err(ZonalError::Validation("axis must be a non-zero vector of length n".into()));
                }
                v.iter().map(|x| x / nv).collect()
            }
            None => {
                let mut e = vec![0.0; n];
                e[n - 1] = 1.0;
                e
            }
        };
        let rmax = *rho.last().unwrap();
        let (lo, hi) = body.bounding_box();
        let lo: Vec<f64> = lo.iter().map(|x| x - rmax).collect();
        let width: Vec<f64> = hi.iter().zip(&lo).map(|(h, l)| h + rmax - l).collect();
        let box_volume = width.iter().product();
        let cells = if cfg.stratified { (cfg.samples as f64).powf(1.0 / n as f64).floor() as usize } else { 0 };
        let cells = (cells..=cells + 1).rev().find(|c| c.pow(n as u32) <= cfg.samples).unwrap_or(0);
        Ok(Sampler { body, axis, rho, bands, lo, width, box_volume, cells })
    }

    fn band_of(&self, t: f64) -> usize {
        let k = self.bands.partition_point(|&e| e <= t);
        k.saturating_sub(1).min(self.bands.len() - 2)
    }

    fn run(&self, samples: usize, seed: u64, obs: &[Observable<'_>]) -> Result<Tally> {
        let nb = self.bands.len() - 1;
        let ns = self.rho.len();
        let blocks = samples.div_ceil(MC_BLOCK);
        let parts: Vec<Result<Tally>> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let count = MC_BLOCK.min(samples - b * MC_BLOCK);
                let mut tally = Tally::new(nb, ns, obs.len());
                let mut x = vec![0.0; self.lo.len()];
                let rmax = *self.rho.last().unwrap();
                let strata = self.cells.pow(x.len() as u32);
                for q in 0..count {
                    let idx = b * MC_BLOCK + q;
                    if idx < strata {
                        let mut c = idx;
                        for (i, xi) in x.iter_mut().enumerate() {
                            let cell = (c % self.cells) as f64;
                            c /= self.cells;
                            *xi = self.lo[i] + self.width[i] * (cell + rng.gen::<f64>()) / self.cells as f64;
                        }
                    } else {
                        for (i, xi) in x.iter_mut().enumerate() {
                            *xi = self.lo[i] + self.width[i] * rng.gen::<f64>();
                        }
                    }
                    let (p, d) = self.body.nearest_point(&x)?;
                    if d <= 0.0 {
                        tally.inside += 1;
                        continue;
                    }
                    if d > rmax {
                        continue;
                    }
                    let t = x.iter().zip(&p).zip(&self.axis).map(|((xi, pi), e)| (xi - pi) * e).sum::<f64>() / d;
                    let t = t.clamp(-1.0, 1.0);
                    let shell = self.rho.partition_point(|&r| r < d);
                    tally.counts[self.band_of(t)][shell] += 1;
                    for (k, o) in obs.iter().enumerate() {
                        let w = o(t);
                        tally.sums[k][shell] += w;
                        tally.squares[k][shell] += w * w;
                    }
                }
                Ok(tally)
            })
            .collect();
        let mut total = Tally::new(nb, ns, obs.len());
        for p in parts {
            total.merge(&p?);
        }
        Ok(total)
    }
}

/// Least-squares Steiner fit: `vol(ρ) = (1/n) Σ_j binom(n, j) ρ^(n-j) S_j`.
///
/// The fit is generalised least squares weighted by the estimated covariance of the
/// cumulative volumes, falling back to ordinary least squares when that covariance is
/// singular (for example in empty bands).
struct SteinerFit {
    a: DMatrix<f64>,
    /// Pseudo-inverse rows: `S = B y`.
    b: DMatrix<f64>,
    condition: f64,
}

impl SteinerFit {
    fn new(n: usize, rho: &[f64]) -> Result<Self> {
        let m = rho.len();
        let mut a = DMatrix::<f64>::zeros(m, n);
        for (k, r) in rho.iter().enumerate() {
            for j in 0..n {
                a[(k, j)] = binom(n, j) * r.powi((n - j) as i32) / n as f64;
            }
        }
        let mut eq = a.clone();
        for j in 0..n {
            let c = eq.column(j).norm();
            eq.column_mut(j).scale_mut(1.0 / c);
        }
        let sv = eq.singular_values();
        let condition = sv.max() / sv.min();
        if !(condition <= MC_MAX_COND) {
            return Err(ZonalError::Config(format!(
                "radius grid is ill-conditioned (condition {condition:.3e}); use a geometric grid"
            )));
        }
        let b = a.clone().pseudo_inverse(0.0).map_err(|e| ZonalError::Numerical(format!("Steiner fit failed: {e}")))?;
        Ok(SteinerFit { a, b, condition })
    }

    /// Estimates and standard errors from shell sums (`Σ w`) and squares (`Σ w^2`).
    fn apply(&self, sums: &[f64], squares: &[f64], box_volume: f64, samples: usize) -> Vec<BandMass> {
        let m = sums.len();
        let nn = samples as f64;
        let mut c1 = vec![0.0; m];
        let mut c2 = vec![0.0; m];
        let (mut s1, mut s2) = (0.0, 0.0);
        for k in 0..m {
            s1 += sums[k];
            s2 += squares[k];
            c1[k] = s1 / nn;
            c2[k] = s2 / nn;
        }
        let y = DVector::from_iterator(m, c1.iter().map(|c| box_volume * c));
        // Effect of a single hit on each estimate: the error bars never go below it, which
        // keeps bands with few or no hits honest where the binomial error degenerates.
        let hit = box_volume / nn;
        let floor: Vec<f64> = (0..self.b.nrows())
            .map(|j| hit * (0..m).map(|k| (k..m).map(|l| self.b[(j, l)]).sum::<f64>().abs()).fold(0.0, f64::max))
            .collect();
        if s2 == 0.0 {
            return floor.iter().map(|&f| BandMass { mass: 0.0, stderr: f }).collect();
        }
        let mut cov = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            for l in 0..m {
                let e2 = c2[k.min(l)];
                cov[(k, l)] = box_volume * box_volume * (e2 - c1[k] * c1[l]) / nn;
            }
        }
        if let Some(ch) = cov.clone().cholesky() {
            let wa = ch.solve(&self.a);
            if let Some(mi) = (self.a.transpose() * &wa).try_inverse() {
                let est = &mi * (wa.transpose() * &y);
                if est.iter().all(|v| v.is_finite()) {
                    return (0..est.len())
                        .map(|j| BandMass { mass: est[j], stderr: mi[(j, j)].max(0.0).sqrt().max(floor[j]) })
                        .collect();
                }
            }
        }
        let est = &self.b * y;
        let var = &self.b * cov * self.b.transpose();
        (0..est.len()).map(|j| BandMass { mass: est[j], stderr: var[(j, j)].max(0.0).sqrt().max(floor[j]) }).collect()
    }
}

/// Banded Monte Carlo estimate of the area measures of `K`.
pub fn mc_steiner_estimate(k: &ConvexBody, cfg: &McConfig) -> Result<AreaMeasureEstimate> {
    let n = k.n();
    let sampler = Sampler::new(k, cfg)?;
    let fit = SteinerFit::new(n, &sampler.rho)?;
    let tally = sampler.run(cfg.samples, cfg.seed, &[])?;
    let nb = sampler.bands.len() - 1;
    let mut s = vec![Vec::with_capacity(nb); n];
    let mut all = vec![0.0; sampler.rho.len()];
    for band in &tally.counts {
        let c: Vec<f64> = band.iter().map(|&x| x as f64).collect();
        all.iter_mut().zip(&c).for_each(|(a, b)| *a += b);
        for (j, m) in fit.apply(&c, &c, sampler.box_volume, cfg.samples).into_iter().enumerate() {
            s[j].push(m);
        }
    }
    let totals = fit.apply(&all, &all, sampler.box_volume, cfg.samples);
    Ok(AreaMeasureEstimate {
        n,
        bands: sampler.bands.clone(),
        s,
        totals,
        rho: sampler.rho.clone(),
        samples: cfg.samples,
        seed: cfg.seed,
        condition: fit.condition,
    })
}

/// Monte Carlo estimates of `∫ w_k(<v, axis>) dS_j(K, v)` for each observable `w_k`,
/// together with the volume of `K` from the same samples.
pub fn mc_observables(
    k: &ConvexBody,
    j: usize,
    cfg: &McConfig,
    obs: &[Observable<'_>],
) -> Result<(Vec<BandMass>, BandMass)> {
    let n = k.n();
    check_j(n, j, n - 1)?;
    let sampler = Sampler::new(k, cfg)?;
    let fit = SteinerFit::new(n, &sampler.rho)?;
    let tally = sampler.run(cfg.samples, cfg.seed, obs)?;
    let vals = tally
        .sums
        .iter()
        .zip(&tally.squares)
        .map(|(s, q)| fit.apply(s, q, sampler.box_volume, cfg.samples)[j])
        .collect();
    let p = tally.inside as f64 / cfg.samples as f64;
    let vol = BandMass {
        mass: sampler.box_volume * p,
        stderr: sampler.box_volume * (p * (1.0 - p) / cfg.samples as f64).sqrt(),
    };
    Ok((vals, vol))
}

/// `S_j(K)` of the open cap `{v : v_n > r}` with a standard error (zero for closed forms).
pub fn cap_mass(k: &ConvexBody, j: usize, r: f64, cfg: &McConfig) -> Result<BandMass> {
    if !(-1.0..=1.0).contains(&r) {
        return Err(ZonalError::Domain(format!("cap parameter must lie in [-1, 1], got {r}")));
    }
    if let Some(m) = closed_form_measure(k, j)? {
        return Ok(BandMass { mass: m.cap_mass(r)?, stderr: 0.0 });
    }
    let ind = move |t: f64| if t > r { 1.0 } else { 0.0 };
    let (v, _) = mc_observables(k, j, cfg, &[&ind])?;
    Ok(v[0])
}

/// `S_j(K)[C_r(e_n)] / (diam(K)^j (1 - r^2)^((n-j-1)/2))`.
pub fn firey_ratio(k: &ConvexBody, j: usize, r: f64, cfg: &McConfig) -> Result<f64> {
    let m = cap_mass(k, j, r, cfg)?;
    let a = canonical_exponent(k.n(), j);
    Ok(m.mass / (k.diameter().powi(j as i32) * (1.0 - r * r).powf(a)))
}

/// Supremum of the closed-form cap ratios over cones `h ∈ {±1/4, ±1, ±4}`, the unit ball,
/// disk and cylinder, at `r_k = 1 - 2^-k`, `k = 0..=levels`. Empirical, not certified.
pub fn empirical_firey_constant(n: usize, j: usize, levels: u32) -> Result<f64> {
    let mut bodies = vec![ConvexBody::ball(n, 1.0)?, ConvexBody::disk(n, 1.0)?, ConvexBody::cylinder(n, 1.0, 1.0)?];
    for h in [0.25, 1.0, 4.0] {
        bodies.push(ConvexBody::cone(n, h)?);
        bodies.push(ConvexBody::cone(n, -h)?);
    }
    let cfg = McConfig::new(10_000, 0);
    let mut best: f64 = 0.0;
    for b in &bodies {
        for k in 0..=levels {
            let r = 1.0 - 2f64.powi(-(k as i32));
            best = best.max(firey_ratio(b, j, r, &cfg)?);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cone_atom_mass() {
        let m = cone_measure(3, 1, 1.0).unwrap();
        assert_eq!(m.atoms.len(), 1);
        assert!((m.atoms[0].at.s - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((m.atoms[0].mass - PI).abs() < 1e-14);
    }

    #[test]
    fn cone_total() {
        let m = cone_measure(3, 1, 1.0).unwrap();
        let want = PI * (1.0 + 3.0 * PI / 4.0);
        assert!((m.total_mass().unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn disk_and_ball_totals() {
        assert!((disk_measure(3, 1, 1.0).unwrap().total_mass().unwrap() - PI * PI).abs() < 1e-10);
        assert!((ball_measure(3, 1, 1.0).unwrap().total_mass().unwrap() - 4.0 * PI).abs() < 1e-10);
        let m2 = disk_measure(4, 2, 2.0).unwrap().total_mass().unwrap();
        let m1 = disk_measure(4, 2, 1.0).unwrap().total_mass().unwrap();
        assert!((m2 - 4.0 * m1).abs() < 1e-10 * m2);
    }

    #[test]
    fn linear_against_symmetric() {
        let f = ZonalDensity::linear(0.5, 1.0).unwrap();
        assert!(disk_measure(3, 1, 1.0).unwrap().integrate(&f).unwrap().abs() < 1e-14);
        let f = ZonalDensity::linear(1.0, 1.0).unwrap();
        assert!(ball_measure(3, 1, 1.0).unwrap().integrate(&f).unwrap().abs() < 1e-14);
    }

    #[test]
    fn ball_caps() {
        let b = ConvexBody::ball(3, 1.0).unwrap();
        let cfg = McConfig::new(10_000, 1);
        assert!((cap_mass(&b, 1, 0.0, &cfg).unwrap().mass - 2.0 * PI).abs() < 1e-10);
        for r in [0.0f64, 0.5, 0.99] {
            let want = PI * ((1.0 - r) / (1.0 + r)).sqrt();
            assert!((firey_ratio(&b, 1, r, &cfg).unwrap() - want).abs() < 1e-9);
        }
        let c = ConvexBody::cone(3, 1.0).unwrap();
        assert_eq!(cap_mass(&c, 1, 0.75, &cfg).unwrap().mass, 0.0);
    }

    #[test]
    fn revolution_measure_reduces_to_cone_and_cylinder() {
        for (n, j) in [(3, 1), (4, 2), (4, 3), (5, 1)] {
            for h in [0.5, 2.0] {
                let cone = cone_measure(n, j, h).unwrap();
                let rev = revolution_measure(n, j, &[[0.0, 1.0], [h, 0.0]]).unwrap();
                for r in [-0.9, 0.0, 0.3, 0.99] {
                    let (x, y) = (cone.cap_mass(r).unwrap(), rev.cap_mass(r).unwrap());
                    assert!((x - y).abs() < 1e-12 * x.max(1.0), "n={n} j={j} h={h} r={r}");
                }
            }
            let cyl = cylinder_measure(n, j, 1.5, 0.7).unwrap();
            let rev = revolution_measure(n, j, &[[0.0, 1.5], [0.7, 1.5]]).unwrap();
            assert!((cyl.total_mass().unwrap() - rev.total_mass().unwrap()).abs() < 1e-12 * cyl.total_mass().unwrap());
        }
    }

    #[test]
    fn bands_cover_interval() {
        let b = default_bands();
        assert_eq!(b[0], -1.0);
        assert_eq!(*b.last().unwrap(), 1.0);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!(b.contains(&(1.0 - 2f64.powi(-17))));
    }
}
