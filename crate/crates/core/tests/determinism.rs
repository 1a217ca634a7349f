//! Seeded Monte Carlo results do not depend on the number of worker threads.

use rayon::ThreadPoolBuilder;
use zonalval::dspace::ZonalDensity;
use zonalval::geometry::ConvexBody;
use zonalval::measures::{mc_steiner_estimate, McConfig};
use zonalval::valuations::phi_general;

fn with_threads<T: Send>(k: usize, f: impl FnOnce() -> T + Send) -> T {
    ThreadPoolBuilder::new().num_threads(k).build().unwrap().install(f)
}

#[test]
fn steiner_estimates_are_thread_independent() {
    let k = ConvexBody::polytope(vec![
        vec![0.0, 0.0, 0.0],
        vec![1.0, 0.2, 0.0],
        vec![0.1, 1.3, 0.0],
        vec![0.3, 0.2, 0.9],
        vec![-0.4, 0.5, 0.6],
    ])
    .unwrap();
    let cfg = McConfig::new(120_000, 42);
    let one = with_threads(1, || mc_steiner_estimate(&k, &cfg).unwrap());
    let four = with_threads(4, || mc_steiner_estimate(&k, &cfg).unwrap());
    let seven = with_threads(7, || mc_steiner_estimate(&k, &cfg).unwrap());
    assert_eq!(one, four);
    assert_eq!(one, seven);
}

#[test]
fn principal_values_are_thread_independent() {
    let f = ZonalDensity::power(0.5, 0.25).unwrap();
    let k = ConvexBody::cube(3).unwrap();
    let cfg = McConfig::new(60_000, 9);
    let one = with_threads(1, || phi_general(3, 1, &f, &k, 0.0, &cfg).unwrap());
    let four = with_threads(4, || phi_general(3, 1, &f, &k, 0.0, &cfg).unwrap());
    assert_eq!(one.value.to_bits(), four.value.to_bits());
    assert_eq!(one.err.to_bits(), four.err.to_bits());
}
