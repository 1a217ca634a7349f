//! Reconstruction of densities from cone profiles, for built-in, tabulated and callable valuations.

use zonalval::dspace::ZonalDensity;
use zonalval::geometry::ConvexBody;
use zonalval::reconstruct::{
    cylinder_limit, frustum_identity_residual, reconstruct_density, required_bodies, sample_cone_profile,
};
use zonalval::special::omega;
use zonalval::transforms::{norm_c, ConeProfile};
use zonalval::valuations::{phi_cone, phi_disk, phi_revolution, ValuationHandle};

fn weighted_gap(f: &ZonalDensity, g: &ZonalDensity) -> f64 {
    f.sub(g).sup_weighted()
}

#[test]
fn even_density_round_trip() {
    let f = ZonalDensity::power(0.5, 0.25).unwrap();
    let mu = ValuationHandle::builtin(3, 1, f.clone()).unwrap();
    let rec = reconstruct_density(&mu, 64).unwrap();
    let gap = weighted_gap(&rec.density, &f.center_project(3).unwrap());
    assert!(gap <= 1e-3, "{gap}");
}

#[test]
fn linear_density_reconstructs_to_zero() {
    let mu = ValuationHandle::builtin(4, 1, ZonalDensity::linear(1.0, 2.0).unwrap()).unwrap();
    let rec = reconstruct_density(&mu, 64).unwrap();
    assert!(rec.density.sup_weighted() < 1e-9);
}

#[test]
fn odd_density_reconstructs_to_centred_part() {
    let f = ZonalDensity::poly(0.5, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
    let mu = ValuationHandle::builtin(3, 1, f.clone()).unwrap();
    let rec = reconstruct_density(&mu, 64).unwrap();
    let gap = weighted_gap(&rec.density, &f.center_project(3).unwrap());
    assert!(gap <= 1e-6, "{gap}");
}

#[test]
fn zero_limit_is_the_cylinder_rate() {
    for (n, j) in [(3, 1), (4, 1), (5, 2)] {
        let a = (n - j - 1) as f64 / 2.0;
        let f = ZonalDensity::power(a, a / 2.0).unwrap().add(&ZonalDensity::constant(a, 0.5).unwrap());
        let mu = ValuationHandle::builtin(n, j, f.clone()).unwrap();
        let want = omega(n - 1) * f.eval_f(0.0).unwrap();
        assert!((cylinder_limit(&mu).unwrap() - want).abs() < 1e-10 * want);
        let p = sample_cone_profile(&mu, 32).unwrap();
        assert!((p.limits.0 - want).abs() < 1e-10 * want && (p.limits.1 - want).abs() < 1e-10 * want);
        assert!(p.endpoint_gap() < 1e-9);
    }
    // a density vanishing at 0
    let g = ZonalDensity::poly(0.5, vec![0.0, 0.0, 1.0]).unwrap();
    assert!(cylinder_limit(&ValuationHandle::builtin(3, 1, g).unwrap()).unwrap().abs() < 1e-12);
}

#[test]
fn frustum_identity_across_degrees() {
    for n in [3, 4, 5] {
        for j in 1..=n - 2 {
            let a = (n - j - 1) as f64 / 2.0;
            let f = ZonalDensity::power(a, a / 2.0).unwrap().add(&ZonalDensity::poly(a, vec![0.0, 0.3, 1.0]).unwrap());
            let mu = ValuationHandle::builtin(n, j, f).unwrap();
            for h in [0.5, 1.0, 2.0, -1.0] {
                for eps in [0.25, 0.5] {
                    let r = frustum_identity_residual(&mu, h, eps).unwrap();
                    assert!(r <= 1e-9, "n={n} j={j} h={h} eps={eps}: {r}");
                }
            }
        }
    }
}

#[test]
fn profile_respects_continuity_bound() {
    for (n, j) in [(3, 1), (4, 1), (4, 2)] {
        let a = (n - j - 1) as f64 / 2.0;
        for f in [ZonalDensity::constant(a, 1.0).unwrap(), ZonalDensity::power(a, a / 2.0).unwrap()] {
            let mu = ValuationHandle::builtin(n, j, f.clone()).unwrap();
            let p = sample_cone_profile(&mu, 64).unwrap();
            let u: ConeProfile = p.to_profile().unwrap();
            let lhs = norm_c(&u).unwrap();
            let rhs = (1.0 + 4.0 * a) * omega(n - 1) * f.norm_da().unwrap().value;
            assert!(lhs <= 1.05 * rhs, "n={n} j={j}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn reconstruction_agrees_off_the_cone_family() {
    let (n, j) = (3, 1);
    let f = ZonalDensity::power(0.5, 0.25).unwrap().add(&ZonalDensity::poly(0.5, vec![0.2, 0.7, 1.0]).unwrap());
    let mu = ValuationHandle::builtin(n, j, f.clone()).unwrap();
    let rec = reconstruct_density(&mu, 256).unwrap();
    let three = [[-0.8, 0.3], [0.0, 1.0], [0.5, 0.7], [1.2, 0.0]];
    let want = phi_revolution(n, j, &f, &three).unwrap();
    let got = phi_revolution(n, j, &rec.density, &three).unwrap();
    assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    let h = 0.8;
    let double = phi_cone(n, j, &f, h).unwrap() + phi_cone(n, j, &f, -h).unwrap() - phi_disk(n, j, &f, 1.0).unwrap();
    let direct = phi_revolution(n, j, &rec.density, &[[-h, 0.0], [0.0, 1.0], [h, 0.0]]).unwrap();
    assert!((direct - double).abs() < 1e-6, "{direct} vs {double}");
}

#[test]
fn table_and_callable_backends_agree_with_builtin() {
    let (n, j, m) = (3, 1, 32);
    let f = ZonalDensity::power(0.5, 0.2).unwrap();
    let mu = ValuationHandle::builtin(n, j, f.clone()).unwrap();
    let bodies = required_bodies(n, j, m).unwrap();
    let rows: Vec<(ConvexBody, f64)> = bodies.iter().map(|b| (b.clone(), mu.eval(b).unwrap())).collect();
    let table = ValuationHandle::table(n, j, rows).unwrap();
    let from_table = reconstruct_density(&table, m).unwrap();
    let direct = reconstruct_density(&mu, m).unwrap();
    assert_eq!(from_table.profile, direct.profile);

    let fc = f.clone();
    let call = ValuationHandle::callable(n, j, move |k: &ConvexBody| {
        Ok(zonalval::valuations::phi_exact(n, j, &fc, k)?.unwrap())
    })
    .unwrap();
    let from_call = reconstruct_density(&call, m).unwrap();
    assert_eq!(from_call.profile, direct.profile);

    let short = ValuationHandle::table(n, j, vec![(ConvexBody::disk(n, 1.0).unwrap(), 1.0)]).unwrap();
    assert!(reconstruct_density(&short, m).is_err());
}

#[test]
fn inconsistent_profiles_are_rejected() {
    // the top height is not translation invariant, so the two zero limits disagree
    let bad = ValuationHandle::callable(3, 1, |k: &ConvexBody| Ok(k.support(&[0.0, 0.0, 1.0]))).unwrap();
    assert!(reconstruct_density(&bad, 16).is_err());
    assert!(reconstruct_density(
        &ValuationHandle::builtin(3, 2, ZonalDensity::constant(0.0, 1.0).unwrap()).unwrap(),
        16
    )
    .is_err());
}
