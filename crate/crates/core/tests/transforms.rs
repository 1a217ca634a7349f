//! Continuity, parity and linearity of the cone-profile transforms.

use proptest::prelude::*;
use zonalval::dspace::ZonalDensity;
use zonalval::io::{profile_from_table, profile_to_table, Table};
use zonalval::transforms::{i_endpoint, i_value, j_value, norm_c, transform_i, ConeProfile};

fn family(a: f64) -> Vec<ZonalDensity> {
    let mut v = vec![
        ZonalDensity::constant(a, 1.0).unwrap(),
        ZonalDensity::poly(a, vec![0.0, 0.0, 1.0]).unwrap(),
        ZonalDensity::poly(a, vec![0.5, -1.0, 0.0, 2.0]).unwrap(),
        ZonalDensity::power(a, a / 2.0).unwrap(),
        ZonalDensity::power(a, a / 4.0).unwrap().add(&ZonalDensity::linear(a, 1.0).unwrap()),
    ];
    v.push(ZonalDensity::power(a, 3.0 * a / 4.0).unwrap().scaled(-0.5));
    v
}

const GRID: [f64; 10] = [-0.999, -0.9, -0.5, -0.1, -0.001, 0.001, 0.2, 0.6, 0.95, 0.9999];

#[test]
fn closed_form_values() {
    let one = ZonalDensity::constant(1.0, 1.0).unwrap();
    assert!((i_value(&one, 0.5).unwrap() - 4.5).abs() < 1e-10);
    // the endpoint value continues the interior formula: 2a ∫ (1-t^2)^(a-1) dt = 4 for a = 1
    assert!((i_endpoint(&one).unwrap() - 4.0).abs() < 1e-12);
    assert!((i_value(&one, 1.0 - 1e-9).unwrap() - 4.0).abs() < 1e-8);
}

#[test]
fn continuity_bound() {
    for a in [0.5, 1.0, 1.5] {
        for f in family(a) {
            let lhs = norm_c(&transform_i(&f).unwrap()).unwrap();
            let rhs = (1.0 + 4.0 * a) * f.norm_da().unwrap().value;
            assert!(lhs <= 1.05 * rhs, "a={a}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn endpoints_agree_and_parity_is_kept() {
    for a in [0.5, 1.0] {
        for f in family(a) {
            let u = transform_i(&f).unwrap();
            assert!((u.endpoint(1.0).unwrap() - u.endpoint(-1.0).unwrap()).abs() < 1e-10);
            let (e, o) = (f.even_part(), f.odd_part());
            for s in GRID {
                let scale = 1.0 + i_value(&e, s).unwrap().abs() * s.abs();
                assert!(((i_value(&e, s).unwrap() - i_value(&e, -s).unwrap()) * s).abs() < 1e-10 * scale);
                assert!(((i_value(&o, s).unwrap() + i_value(&o, -s).unwrap()) * s).abs() < 1e-10 * scale);
            }
        }
    }
}

#[test]
fn linear_densities_map_to_zero() {
    for a in [0.5, 1.0, 2.5] {
        let f = ZonalDensity::linear(a, 3.0).unwrap();
        for s in GRID {
            assert!(i_value(&f, s).unwrap().abs() < 1e-12, "a={a}, s={s}");
        }
        assert!(i_endpoint(&f).unwrap().abs() < 1e-12);
    }
}

#[test]
fn j_of_zero_and_limit() {
    let zero = ConeProfile::constant(0.0);
    assert_eq!(j_value(&zero, 0.5, 0.3).unwrap(), 0.0);
    let u = transform_i(&ZonalDensity::constant(0.5, 2.0).unwrap()).unwrap();
    let lim = u.limits();
    assert!((j_value(&u, 0.5, 0.0).unwrap() - lim.1).abs() < 1e-9);
}

#[test]
fn profile_csv_round_trip() {
    let u = transform_i(&ZonalDensity::power(0.5, 0.2).unwrap()).unwrap();
    let s: Vec<f64> = (1..40).map(|k| -0.99 + 1.98 * k as f64 / 40.0).filter(|x: &f64| x.abs() > 1e-3).collect();
    let t = profile_to_table(&u, &s).unwrap();
    let back = Table::from_csv(t.to_csv().unwrap().as_bytes()).unwrap();
    assert_eq!(back, t);
    let v = profile_from_table(&back).unwrap();
    for &x in &s {
        assert_eq!(v.u(x).unwrap(), u.u(x).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn i_is_linear(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, s in -0.999f64..0.999) {
        prop_assume!(s.abs() > 1e-3);
        let a = 1.0;
        let f = ZonalDensity::power(a, 0.3).unwrap();
        let g = ZonalDensity::poly(a, vec![1.0, 0.0, -2.0]).unwrap();
        let lhs = i_value(&f.scaled(c1).add(&g.scaled(c2)), s).unwrap();
        let rhs = c1 * i_value(&f, s).unwrap() + c2 * i_value(&g, s).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }
}
