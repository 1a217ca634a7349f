//! Support-function and projection invariants over the canonical body families.

use proptest::prelude::*;
use zonalval::geometry::{hausdorff_on_grid, minkowski_ball, ConvexBody};
use zonalval::valuations::sphere_grid;

fn bodies() -> Vec<ConvexBody> {
    vec![
        ConvexBody::ball(3, 1.3).unwrap(),
        ConvexBody::cone(3, 0.7).unwrap(),
        ConvexBody::cone(3, -2.0).unwrap(),
        ConvexBody::disk(3, 0.8).unwrap(),
        ConvexBody::cylinder(3, 1.0, 2.0).unwrap(),
        ConvexBody::revolution(3, vec![[-1.0, 0.0], [0.0, 1.0], [0.5, 0.9], [1.0, 0.3]]).unwrap(),
        ConvexBody::cube(3).unwrap(),
        ConvexBody::polytope(vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 0.5]])
            .unwrap(),
        minkowski_ball(&ConvexBody::cone(3, 1.0).unwrap(), 0.25).unwrap(),
    ]
}

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn support_is_subadditive_and_homogeneous(y1 in vec3(), y2 in vec3(), lam in 0.0f64..5.0) {
        for k in bodies() {
            let sum: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a + b).collect();
            let scale = 1.0 + k.support(&y1).abs() + k.support(&y2).abs();
            prop_assert!(k.support(&sum) <= k.support(&y1) + k.support(&y2) + 1e-12 * scale);
            let ly: Vec<f64> = y1.iter().map(|v| lam * v).collect();
            prop_assert!((k.support(&ly) - lam * k.support(&y1)).abs() <= 1e-12 * (1.0 + lam) * scale);
        }
    }

    #[test]
    fn polytope_translation_covariance(y in vec3(), x in vec3()) {
        let k = ConvexBody::cube(3).unwrap();
        let kx = k.clone().with_translation(x.clone()).unwrap();
        let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        prop_assert!((kx.support(&y) - k.support(&y) - dot).abs() <= 1e-12 * (1.0 + dot.abs() + k.support(&y).abs()));
    }

    #[test]
    fn axial_translation_covariance(y in vec3(), z in -2.0f64..2.0) {
        for k in [ConvexBody::cone(3, 1.5).unwrap(), ConvexBody::cylinder(3, 0.5, 1.0).unwrap()] {
            let kz = k.clone().with_translation(vec![0.0, 0.0, z]).unwrap();
            prop_assert!((kz.support(&y) - k.support(&y) - z * y[2]).abs() <= 1e-12 * (1.0 + k.support(&y).abs() + (z * y[2]).abs()));
        }
    }

    #[test]
    fn projection_is_idempotent_and_consistent(x in vec3()) {
        for k in bodies() {
            let (p, d) = k.nearest_point(&x).unwrap();
            let dist = p.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            prop_assert!((dist - d).abs() <= 1e-9 * (1.0 + d));
            let (q, e) = k.nearest_point(&p).unwrap();
            prop_assert!(e <= 1e-12 * (1.0 + d), "{:?}: second distance {}", k.shape(), e);
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
            // the projection lies on the supporting hyperplane with normal x - p
            if d > 1e-9 {
                let u: Vec<f64> = x.iter().zip(&p).map(|(a, b)| (a - b) / d).collect();
                let hp: f64 = u.iter().zip(&p).map(|(a, b)| a * b).sum();
                prop_assert!((k.support(&u) - hp).abs() <= 1e-8 * (1.0 + hp.abs()));
            }
        }
    }
}

#[test]
fn hausdorff_of_translate_is_shift_length() {
    let k = ConvexBody::cube(3).unwrap();
    let x = vec![0.3, -0.4, 1.2];
    let len = x.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
    let d = hausdorff_on_grid(&k, &k.clone().with_translation(x.clone()).unwrap(), &sphere_grid(3, 4096));
    assert!(d <= len + 1e-12);
    assert!(d >= len * (1.0 - 1e-3), "{d} vs {len}");
}

#[test]
fn ball_sum_support_adds_norm() {
    for k in bodies() {
        let s = minkowski_ball(&k, 0.75).unwrap();
        for y in sphere_grid(3, 200) {
            let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
            assert!((s.support(&y2) - k.support(&y2) - 1.5).abs() < 1e-12);
        }
    }
}

#[test]
fn diameter_and_sup_norm_of_families() {
    assert_eq!(ConvexBody::ball(4, 1.0).unwrap().diameter(), 2.0);
    let cone = ConvexBody::cone(3, 1.0).unwrap();
    assert!((cone.diameter() - 2.0).abs() < 1e-9);
    assert!((cone.sup_norm_h() - 1.0).abs() < 1e-9);
    let cube = ConvexBody::cube(3).unwrap();
    assert!((cube.sup_norm_h() - 3f64.sqrt()).abs() < 1e-12);
}
