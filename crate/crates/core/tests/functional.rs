//! The transform `R^{n-j}`, its inverse and the recovery of `ζ` from values on `u_t`.

use std::f64::consts::PI;

use zonalval::functional::{
    cone_bridge_residual, r_inverse, r_transform, r_transform_eval, reconstruct_zeta, u_t_eval, v_star_on_cones,
    v_star_on_ut, ZetaDensity,
};

fn uniform(m: usize, top: f64) -> Vec<f64> {
    (0..m).map(|i| top * i as f64 / (m - 1) as f64).collect()
}

fn family() -> Vec<(ZetaDensity, Box<dyn Fn(f64) -> f64>)> {
    let cos = |s: f64| (PI * s / 2.0).cos();
    let cubic = |s: f64| (1.0 - s).powi(3) * (1.0 + 2.0 * s);
    vec![
        (ZetaDensity::hat(1.0).unwrap(), Box::new(|s: f64| (1.0 - s).max(0.0))),
        (ZetaDensity::hat(2.0).unwrap(), Box::new(|s: f64| (2.0 - s).max(0.0))),
        (ZetaDensity::analytic(cos, 1.0, vec![]).unwrap(), Box::new(move |s| if s < 1.0 { cos(s) } else { 0.0 })),
        (ZetaDensity::analytic(cubic, 1.0, vec![]).unwrap(), Box::new(move |s| if s < 1.0 { cubic(s) } else { 0.0 })),
    ]
}

#[test]
fn inverse_undoes_transform() {
    for (n, j) in [(3, 1), (3, 2), (4, 1)] {
        for (z, exact) in family() {
            let t = uniform(256, z.support());
            let phi = r_transform(&z, n, j, &t).unwrap();
            let inv = r_inverse(&t, &phi, n, j).unwrap();
            let (nodes, vals) = inv.zeta.nodes().unwrap();
            let worst = nodes.iter().zip(vals).map(|(&s, v)| (v - exact(s)).abs()).fold(0.0, f64::max);
            assert!(worst <= 1e-6, "n={n} j={j} support={}: {worst}", z.support());
        }
    }
}

#[test]
fn transform_undoes_inverse() {
    let cases: [(usize, usize, fn(f64) -> f64); 3] =
        [(3, 1, |t| (1.0 - t.powi(3)) / 3.0), (3, 2, |t| (1.0 - t * t).powi(2)), (4, 1, |t| (1.0 - t.powi(4)).powi(2))];
    for (n, j, phi) in cases {
        let t = uniform(256, 1.0);
        let samples: Vec<f64> = t.iter().map(|&x| phi(x)).collect();
        let inv = r_inverse(&t, &samples, n, j).unwrap();
        assert!(inv.residual <= 1e-6, "n={n} j={j}: {}", inv.residual);
        for x in [0.0, 0.13, 0.5, 0.77, 0.999] {
            assert!((r_transform_eval(&inv.zeta, n, j, x).unwrap() - phi(x)).abs() <= 1e-6);
        }
    }
}

#[test]
fn value_at_zero_is_the_full_moment() {
    let z = ZetaDensity::analytic(|s| (PI * s / 2.0).cos(), 1.0, vec![]).unwrap();
    // ∫_0^1 cos(πs/2) ds = 2/π and 2 ∫_0^1 s cos(πs/2) ds = 2 (2/π - 4/π²)
    assert!((r_transform_eval(&z, 3, 2, 0.0).unwrap() - 2.0 / PI).abs() <= 1e-10);
    assert!((r_transform_eval(&z, 3, 1, 0.0).unwrap() - 2.0 * (2.0 / PI - 4.0 / (PI * PI))).abs() <= 1e-10);
    let hat = ZetaDensity::hat(1.0).unwrap();
    assert!((r_transform_eval(&hat, 4, 1, 0.0).unwrap() - 0.25).abs() <= 1e-10);
    assert_eq!(r_transform_eval(&hat, 3, 1, 1.5).unwrap(), 0.0);
}

#[test]
fn inadmissible_densities_are_rejected() {
    let z = ZetaDensity::analytic(|s| s.powi(-3), 1.0, vec![]).unwrap();
    assert!(r_transform(&z, 3, 1, &[0.5]).is_err());
    assert!(r_transform(&ZetaDensity::hat(1.0).unwrap(), 3, 3, &[0.5]).is_err());
    assert!(r_inverse(&[0.0, 0.5, 1.0], &[1.0, 0.5, 0.0], 3, 1).is_err());
}

#[test]
fn cone_values_match_u_t_values() {
    let z = ZetaDensity::analytic(|s| (1.0 - s / 1.5).powi(2), 1.5, vec![]).unwrap();
    let (n, j) = (3, 1);
    let t = uniform(128, 1.5);
    let on_cones = v_star_on_cones(&z, n, j, &t).unwrap();
    let on_ut: Vec<f64> = t.iter().map(|&x| v_star_on_ut(&z, n, j, x).unwrap()).collect();
    let a = reconstruct_zeta(&t, &on_cones, n, j).unwrap();
    let b = reconstruct_zeta(&t, &on_ut, n, j).unwrap();
    let (_, za) = a.zeta.nodes().unwrap();
    let (_, zb) = b.zeta.nodes().unwrap();
    let worst = za.iter().zip(zb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
    for h in [-2.0, -1.0, -0.5] {
        assert!(cone_bridge_residual(n, h, 1000, 7).unwrap() <= 1e-12);
    }
    assert!(cone_bridge_residual(n, 0.5, 10, 7).is_err());
}

#[test]
fn zeta_recovered_from_u_t_samples() {
    let hat = ZetaDensity::hat(1.0).unwrap();
    let t = uniform(256, 1.0);
    let samples: Vec<f64> = t.iter().map(|&x| v_star_on_ut(&hat, 3, 1, x).unwrap()).collect();
    let rec = reconstruct_zeta(&t, &samples, 3, 1).unwrap();
    let (nodes, vals) = rec.zeta.nodes().unwrap();
    let worst = nodes.iter().zip(vals).map(|(&s, v)| (v - (1.0 - s)).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-4, "{worst}");
    assert!(rec.warnings.is_empty());
    assert!((samples[0] - 4.0 * PI / 3.0).abs() < 1e-10);
}

#[test]
fn residual_shrinks_under_refinement() {
    let z = ZetaDensity::analytic(|s| (PI * s / 2.0).cos(), 1.0, vec![]).unwrap();
    let err = |m: usize| {
        let t = uniform(m, 1.0);
        let samples: Vec<f64> = t.iter().map(|&x| v_star_on_ut(&z, 3, 1, x).unwrap()).collect();
        let rec = reconstruct_zeta(&t, &samples, 3, 1).unwrap();
        let (nodes, vals) = rec.zeta.nodes().unwrap();
        nodes.iter().zip(vals).map(|(&s, v)| (v - z.eval(s)).abs()).fold(0.0, f64::max)
    };
    let (e1, e2, e3) = (err(16), err(32), err(64));
    // at least first order: every doubling at least halves the error
    assert!(e2 <= 0.5 * e1 && e3 <= 0.5 * e2, "{e1} {e2} {e3}");
}

#[test]
fn unsupported_samples_warn() {
    let t = uniform(32, 1.0);
    let samples: Vec<f64> = t.iter().map(|&x| 1.0 + x * x * x).collect();
    let rec = reconstruct_zeta(&t, &samples, 3, 1).unwrap();
    assert!(!rec.warnings.is_empty());
    assert_eq!(u_t_eval(0.0, &[0.0, 3.0, 4.0]), 5.0);
}
