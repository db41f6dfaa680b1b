//! Built-in test corpus of bodies, densities and quasi-bodies.

use crate::gen::random_hpoly;
use isoslice::logconcave::{Density, ExpGauge, Gaussian, Indicator, Power, TriangleProduct};
use isoslice::quasi::QuasiBody;
use isoslice::rng::derive_seed;
use isoslice::{Body, Result};
use std::sync::Arc;

/// Dimensions of the default corpus.
pub const CORPUS_DIMS: [usize; 3] = [2, 3, 4];

/// Half-widths `(3, 1/2, ..., 1/2)`.
pub fn elongated_box(n: usize) -> Body {
    let mut h = vec![0.5; n];
    h[0] = 3.0;
    Body::boxed(h)
        .expect("positive half-widths")
        .with_name(format!("elongated-box:{n}"))
}

/// Volume-1 box with half-widths `(4, 1/√32, 1/√32)`, strongly elongated
/// along the first axis.
pub fn near_origin_box() -> Body {
    let w = (1.0f64 / 32.0).sqrt();
    Body::boxed(vec![4.0, w, w])
        .expect("positive half-widths")
        .with_name("elongated-box:3:vol1")
}

/// Ball, cube, cross, `ℓ_1.5`, `ℓ_3`, a random h-polytope with `2n²`
/// facets and an elongated box.
pub fn bodies(n: usize, seed: u64) -> Vec<Body> {
    let hpoly = random_hpoly(n, 2 * n * n, derive_seed(seed, &format!("corpus-hpoly-{n}")))
        .expect("corpus polytope")
        .with_name(format!("random-hpoly:{n}:{}", 2 * n * n));
    vec![
        Body::unit_ball(n).with_name(format!("ball:{n}")),
        Body::cube(n).with_name(format!("cube:{n}")),
        Body::unit_cross(n).with_name(format!("cross:{n}")),
        Body::lp(n, 1.5).expect("p >= 1").with_name(format!("lp:{n}:1.5")),
        Body::lp(n, 3.0).expect("p >= 1").with_name(format!("lp:{n}:3")),
        hpoly,
        elongated_box(n),
    ]
}

pub fn all_bodies(dims: &[usize], seed: u64) -> Vec<Body> {
    dims.iter().flat_map(|&n| bodies(n, seed)).collect()
}

/// Five densities of different concavity classes.
pub fn densities(n: usize) -> Vec<Arc<dyn Density>> {
    vec![
        Arc::new(Indicator::new(Body::cube(n).with_name(format!("cube:{n}")))),
        Arc::new(Power::new(Body::unit_cross(n).with_name(format!("cross:{n}")), 2.0 * n as f64).expect("s > 0")),
        Arc::new(ExpGauge::new(
            Body::lp(n, 3.0).expect("p >= 1").with_name(format!("lp:{n}:3")),
        )),
        Arc::new(Gaussian::standard(n)),
        Arc::new(TriangleProduct::new(n)),
    ]
}

/// `cube ∪ 2.5·cross` and `cube ∪ long box`.
pub fn quasi_bodies(n: usize) -> Result<Vec<QuasiBody>> {
    let mut long = vec![0.25; n];
    long[0] = 3.0;
    Ok(vec![
        QuasiBody::new(
            vec![Body::cube(n), Body::cross(n, 2.5)?.with_name(format!("2.5·cross:{n}"))],
            None,
        )?,
        QuasiBody::new(
            vec![Body::cube(n), Body::boxed(long)?.with_name(format!("long-box:{n}"))],
            None,
        )?,
    ])
}

/// Dimensions of the quasi corpus.
pub const QUASI_DIMS: [usize; 2] = [2, 3];
