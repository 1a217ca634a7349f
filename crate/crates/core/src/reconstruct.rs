//! Recovering a density from the values of a valuation on cones.
//!
//! The cone profile `φ_μ(s) = μ(C_{√(1-s²)/s})` is sampled on Chebyshev nodes in `arcsin s`,
//! the one-sided limits of `|s| φ_μ(s)` at `0` come from cylinders, and the density is
//! `J_a(φ_μ) / ω_{n-1}`, centred.

use rayon::prelude::*;
use serde::Serialize;

use crate::dspace::ZonalDensity;
use crate::error::{Result, ZonalError};
use crate::geometry::ConvexBody;
use crate::point::Pt;
use crate::special::{canonical_exponent, omega};
use crate::tolerances::{CONE_FRUSTUM_NODES, CONE_S_MIN};
use crate::transforms::{chebyshev_angles, transform_j, ConeProfile};
use crate::valuations::{Backend, ValuationHandle};

/// Samples of `φ_μ` with the one-sided zero limits of `|s| φ_μ(s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeProfileSample {
    pub n: usize,
    pub j: usize,
    /// Grid in `(-1, 1) \ {0}`, ascending.
    pub s: Vec<f64>,
    pub phi: Vec<f64>,
    /// `|s| φ_μ(s)`; from truncated cones at the smallest `|s|` nodes.
    pub weighted: Vec<f64>,
    /// `(φ_μ(-1), φ_μ(1))`, both the value on the unit disk.
    pub ends: (f64, f64),
    /// `(lim_{s→0-}, lim_{s→0+})` of `|s| φ_μ(s)` from cylinders.
    pub limits: (f64, f64),
}

impl ConeProfileSample {
    pub fn endpoint_gap(&self) -> f64 {
        (self.ends.0 - self.ends.1).abs()
    }

    pub fn limit_gap(&self) -> f64 {
        (self.limits.0 - self.limits.1).abs()
    }

    pub fn to_profile(&self) -> Result<ConeProfile> {
        let u: Vec<f64> = self.s.iter().zip(&self.weighted).map(|(s, v)| v / s.abs()).collect();
        ConeProfile::sampled(&self.s, &u, self.ends, Some(self.limits))
    }
}

/// Grid nodes `s = sin((π/2) cos((k + 1/2) π / m))` with `|s| >= 10^-3`, ascending.
pub fn profile_grid(m: usize) -> Vec<f64> {
    let mut s: Vec<f64> = chebyshev_angles(m)
        .into_iter()
        .map(|phi| Pt::from_node_angle(phi).s)
        .filter(|s| s.abs() >= CONE_S_MIN)
        .collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s
}

/// `C_h` for `s = sign(h) (1 + h^2)^(-1/2)`.
pub fn cone_for(n: usize, s: f64) -> Result<ConvexBody> {
    ConvexBody::cone(n, Pt::from_s(s).apex_height())
}

/// `D_{h,ε}`: the part of `C_h` within height `|ε h|` of the base (the disk when `ε = 0`).
pub fn truncated_cone(n: usize, h: f64, eps: f64) -> Result<ConvexBody> {
    if !(0.0..=1.0).contains(&eps) || !h.is_finite() {
        return Err(ZonalError::Domain(format!(
            "truncated cone needs 0 <= eps <= 1 and finite h, got eps={eps}, h={h}"
        )));
    }
    if eps == 0.0 || h == 0.0 {
        return ConvexBody::disk(n, 1.0);
    }
    if eps == 1.0 {
        return ConvexBody::cone(n, h);
    }
    let top = eps * h;
    let profile = if h > 0.0 { vec![[0.0, 1.0], [top, 1.0 - eps]] } else { vec![[top, 1.0 - eps], [0.0, 1.0]] };
    ConvexBody::revolution(n, profile)
}

/// `|μ(D_{h,ε}) - [1 - (1-ε)^j] μ(C_h) - (1-ε)^j μ(D)|`.
pub fn frustum_identity_residual(mu: &ValuationHandle, h: f64, eps: f64) -> Result<f64> {
    let n = mu.n;
    let keep = (1.0 - eps).powi(mu.j as i32);
    let d = mu.eval(&truncated_cone(n, h, eps)?)?;
    let c = mu.eval(&ConvexBody::cone(n, h)?)?;
    let disk = mu.eval(&ConvexBody::disk(n, 1.0)?)?;
    Ok((d - (1.0 - keep) * c - keep * disk).abs())
}

/// `(μ(D × [0, 1]) - μ(D)) / j`, the limit of `|s| φ_μ(s)` as `s → 0`.
pub fn cylinder_limit(mu: &ValuationHandle) -> Result<f64> {
    let n = mu.n;
    let cyl = mu.eval(&ConvexBody::cylinder(n, 1.0, 1.0)?)?;
    let disk = mu.eval(&ConvexBody::disk(n, 1.0)?)?;
    Ok((cyl - disk) / mu.j as f64)
}

/// One-sided version: the cylinder `D × [-1, 0]` for `sign < 0`.
fn cylinder_limit_side(mu: &ValuationHandle, sign: f64) -> Result<f64> {
    let n = mu.n;
    let cyl = ConvexBody::cylinder(n, 1.0, 1.0)?;
    let cyl = if sign < 0.0 {
        let mut t = vec![0.0; n];
        t[n - 1] = -1.0;
        cyl.with_translation(t)?
    } else {
        cyl
    };
    let disk = mu.eval(&ConvexBody::disk(n, 1.0)?)?;
    Ok((mu.eval(&cyl)? - disk) / mu.j as f64)
}

/// `|s| μ(C_h)` for `h = √(1-s²)/s` through `D_{h,|s|}`.
fn weighted_via_frustum(mu: &ValuationHandle, s: f64, disk: f64) -> Result<f64> {
    let e = s.abs();
    let h = Pt::from_s(s).apex_height();
    let keep = (1.0 - e).powi(mu.j as i32);
    let d = mu.eval(&truncated_cone(mu.n, h, e)?)?;
    Ok((d - keep * disk) / ((1.0 - keep) / e))
}

/// Evaluates `μ` on the cone family of an `m`-node grid.
pub fn sample_cone_profile(mu: &ValuationHandle, m: usize) -> Result<ConeProfileSample> {
    let n = mu.n;
    if m < 8 {
        return Err(ZonalError::Config(format!("profile grid needs at least 8 nodes, got {m}")));
    }
    let s = profile_grid(m);
    let disk = mu.eval(&ConvexBody::disk(n, 1.0)?)?;
    let mut by_size: Vec<usize> = (0..s.len()).collect();
    by_size.sort_by(|&a, &b| s[a].abs().partial_cmp(&s[b].abs()).unwrap());
    let mut frustum = vec![false; s.len()];
    for sign in [-1.0, 1.0] {
        by_size.iter().filter(|&&i| s[i] * sign > 0.0).take(CONE_FRUSTUM_NODES).for_each(|&i| frustum[i] = true);
    }
    let eval = |i: usize| -> Result<(f64, f64)> {
        if frustum[i] {
            let v = weighted_via_frustum(mu, s[i], disk)?;
            Ok((v / s[i].abs(), v))
        } else {
            let u = mu.eval(&cone_for(n, s[i])?)?;
            Ok((u, u * s[i].abs()))
        }
    };
    let rows: Vec<(f64, f64)> = if matches!(mu.backend, Backend::Callable(_)) {
        (0..s.len()).map(eval).collect::<Result<_>>()?
    } else {
        (0..s.len()).into_par_iter().map(eval).collect::<Result<_>>()?
    };
    let limits = (cylinder_limit_side(mu, -1.0)?, cylinder_limit_side(mu, 1.0)?);
    Ok(ConeProfileSample {
        n,
        j: mu.j,
        phi: rows.iter().map(|r| r.0).collect(),
        weighted: rows.iter().map(|r| r.1).collect(),
        s,
        ends: (disk, disk),
        limits,
    })
}

/// Bodies a valuation table must cover for an `m`-node reconstruction, in evaluation order.
pub fn required_bodies(n: usize, j: usize, m: usize) -> Result<Vec<ConvexBody>> {
    let seen = std::sync::Arc::new(std::sync::Mutex::new(Vec::<ConvexBody>::new()));
    let log = seen.clone();
    let mu = ValuationHandle::callable(n, j, move |k| {
        let mut v = log.lock().unwrap();
        if !v.iter().any(|b| b == k) {
            v.push(k.clone());
        }
        Ok(0.0)
    })?;
    sample_cone_profile(&mu, m)?;
    let out = seen.lock().unwrap().clone();
    Ok(out)
}

/// Reconstruction result.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Centred density in `D^a`, `a = (n - j - 1) / 2`.
    pub density: ZonalDensity,
    pub profile: ConeProfileSample,
}

/// Consistency tolerance on the profile (relative to its size).
const PROFILE_TOL: f64 = 1e-6;

/// Density `f` with `μ = Φ_j(f)` on cones, from an `m`-node profile.
pub fn reconstruct_density(mu: &ValuationHandle, m: usize) -> Result<Reconstruction> {
    let (n, j) = (mu.n, mu.j);
    if j == n - 1 {
        return Err(ZonalError::Domain("reconstruction through J_a needs j <= n-2".into()));
    }
    let profile = sample_cone_profile(mu, m)?;
    let scale = profile.weighted.iter().chain([&profile.ends.0, &profile.limits.0]).fold(1.0f64, |a, b| a.max(b.abs()));
    if profile.endpoint_gap() > PROFILE_TOL * scale {
        return Err(ZonalError::Validation(format!(
            "profile values at s = -1 and s = 1 differ by {:.3e}; the valuation is not consistent on the disk",
            profile.endpoint_gap()
        )));
    }
    if profile.limit_gap() > PROFILE_TOL * scale {
        return Err(ZonalError::Validation(format!(
            "the limits of |s| phi(s) at 0 differ by {:.3e}; the valuation is not translation invariant",
            profile.limit_gap()
        )));
    }
    let u = profile.to_profile()?;
    let a = canonical_exponent(n, j);
    let raw = transform_j(&u, a, &chebyshev_angles(m))?.scaled(1.0 / omega(n - 1));
    Ok(Reconstruction { density: raw.center_project(n)?, profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_is_symmetric() {
        let s = profile_grid(64);
        assert_eq!(s.len(), 64);
        for (x, y) in s.iter().zip(s.iter().rev()) {
            assert!((x + y).abs() < 1e-15);
        }
        assert!(s.iter().all(|x| x.abs() >= CONE_S_MIN && x.abs() < 1.0));
    }

    #[test]
    fn cone_profile_of_constant() {
        let mu = ValuationHandle::builtin(3, 1, ZonalDensity::constant(0.5, 1.0).unwrap()).unwrap();
        let p = sample_cone_profile(&mu, 16).unwrap();
        assert!((p.ends.0 - PI * PI).abs() < 1e-10);
        assert!((p.limits.0 - PI).abs() < 1e-12 && (p.limits.1 - PI).abs() < 1e-12);
        assert!((cylinder_limit(&mu).unwrap() - PI).abs() < 1e-12);
        let c = cone_for(3, 0.5f64.sqrt()).unwrap();
        assert!((mu.eval(&c).unwrap() - PI * (1.0 + 0.75 * PI)).abs() < 1e-10);
    }

    #[test]
    fn zero_valuation() {
        let mu = ValuationHandle::callable(3, 1, |_| Ok(0.0)).unwrap();
        let p = sample_cone_profile(&mu, 16).unwrap();
        assert!(p.phi.iter().chain(&p.weighted).all(|&v| v == 0.0));
        assert_eq!(cylinder_limit(&mu).unwrap(), 0.0);
    }

    #[test]
    fn frustum_identity_limits() {
        let f = ZonalDensity::power(1.0, 0.5).unwrap();
        let mu = ValuationHandle::builtin(4, 1, f).unwrap();
        for h in [0.5, -2.0] {
            assert!(frustum_identity_residual(&mu, h, 1.0).unwrap() < 1e-12);
            assert!(frustum_identity_residual(&mu, h, 0.0).unwrap() < 1e-12);
            assert!(frustum_identity_residual(&mu, h, 0.25).unwrap() < 1e-9);
        }
    }
}
