use isoslice::directions::direction_set;
use isoslice::distance::distance_breakdown;
use isoslice::logconcave::{body_from_density, gauge_f, Density, Power};
use isoslice::quasi::{tail_integral, tail_integral_series};
use isoslice::sampling::uniform_sample;
use isoslice::sections::Subspace;
use isoslice::special::{beta_fn, beta_integral, binom_bounds};
use isoslice::Body;
use proptest::prelude::*;
use std::sync::Arc;

fn body(kind: u8, n: usize, p: f64) -> Body {
    match kind % 4 {
        0 => Body::cube(n),
        1 => Body::unit_cross(n),
        2 => Body::unit_ball(n),
        _ => Body::lp(n, p).unwrap(),
    }
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, n).prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
}

fn unit(v: &[f64]) -> Vec<f64> {
    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / r).collect()
}

proptest! {
    #[test]
    fn binomial_bounds_hold(n in 1u64..=60, k in 1u64..=60) {
        prop_assume!(k <= n);
        prop_assert!(binom_bounds(n, k).unwrap().holds());
    }

    #[test]
    fn beta_integral_matches_beta_function(a in 0i64..12, b in 0i64..12) {
        let exact = beta_integral(a, b).unwrap();
        prop_assert_eq!(exact, beta_integral(b, a).unwrap());
        let reference = beta_fn(a as f64 + 1.0, b as f64 + 1.0);
        prop_assert!((exact / reference - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauge_is_an_even_norm(kind in 0u8..4, n in 2usize..6, p in 1.0..5.0f64, s in 0.01..50.0f64, seed in any::<u64>()) {
        let k = body(kind, n, p);
        let x: Vec<f64> = direction_set(n, 64)[(seed % 64) as usize].iter().map(|v| v * 0.7).collect();
        let g = k.gauge_at(&x);
        let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert!((k.gauge_at(&scaled) - s * g).abs() <= 1e-12 * s * g);
        prop_assert!((k.gauge_at(&neg) - g).abs() <= 1e-12 * g);
    }

    #[test]
    fn radial_inverts_gauge_and_meets_support(kind in 0u8..4, p in 1.0..5.0f64, x in vector(3), y in vector(3)) {
        let k = body(kind, 3, p);
        let u = unit(&x);
        let rho = k.radial_at(&u);
        prop_assert!((rho * k.gauge_at(&u) - 1.0).abs() < 1e-10);
        let th = unit(&y);
        let inner: f64 = u.iter().zip(&th).map(|(a, b)| rho * a * b).sum();
        prop_assert!(k.support_at(&th) >= inner - 1e-10);
    }

    #[test]
    fn distance_is_symmetric_and_scale_free(kind in 0u8..4, other in 0u8..4, p in 1.2..4.0f64, s in 0.1..10.0f64) {
        let dirs = direction_set(2, 256);
        let k = body(kind, 2, p);
        let t = body(other, 2, p);
        let kt = distance_breakdown(&k, &t, &dirs).unwrap().d_g.value;
        let tk = distance_breakdown(&t, &k, &dirs).unwrap().d_g.value;
        prop_assert!(kt >= 1.0 - 1e-12);
        prop_assert!((kt - tk).abs() < 1e-9 * kt);
        let scaled = distance_breakdown(&k, &t.scaled(s).unwrap(), &dirs).unwrap().d_g.value;
        prop_assert!((scaled - kt).abs() < 1e-9 * kt);
        prop_assert!((distance_breakdown(&k, &k.scaled(s).unwrap(), &dirs).unwrap().d_g.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tail_integral_matches_series(a in 0.5..3.0f64, w in 0.2..5.0f64, alpha in 1.0..8.0f64, n in 1u32..7) {
        let quad = tail_integral(a, a + w, alpha, n);
        let series = tail_integral_series(a, a + w, alpha, n);
        prop_assert!((quad / series - 1.0).abs() < 1e-9);
    }

    #[test]
    fn subspace_round_trips(n in 2usize..7, d in 1usize..6, seed in any::<u64>(), y in vector(6)) {
        prop_assume!(d < n);
        let e = Subspace::random(n, d, seed).unwrap();
        prop_assert!(e.orthonormality_defect() < 1e-12);
        prop_assert_eq!(e.dim() + e.codim(), n);
        let back = e.project(&e.embed(&y[..d]));
        for (a, b) in back.iter().zip(&y[..d]) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn power_body_gauge_is_homogeneous_and_even(kind in 0u8..4, s in 1.0..12.0f64, x in vector(2), t in 0.1..5.0f64) {
        let f = Power::new(body(kind, 2, 2.5), s).unwrap();
        let g = gauge_f(&f, &x).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v * t).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert!((gauge_f(&f, &scaled).unwrap() / (t * g) - 1.0).abs() < 1e-9);
        prop_assert!((gauge_f(&f, &neg).unwrap() / g - 1.0).abs() < 1e-9);
    }

    #[test]
    fn power_body_gauge_is_subadditive(kind in 0u8..4, s in 1.0..12.0f64, x in vector(3), y in vector(3)) {
        let f: Arc<dyn Density> = Arc::new(Power::new(body(kind, 3, 1.5), s).unwrap());
        let kf = body_from_density(f).unwrap();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let rhs = kf.gauge_at(&x) + kf.gauge_at(&y);
        prop_assert!(kf.gauge_at(&sum) <= rhs * (1.0 + 1e-8));
    }

    #[test]
    fn samples_are_reproducible_members(kind in 0u8..4, n in 2usize..5, seed in any::<u64>()) {
        let k = body(kind, n, 3.0);
        let a = uniform_sample(&k, 200, seed).unwrap();
        prop_assert_eq!(&a, &uniform_sample(&k, 200, seed).unwrap());
        prop_assert!(a.iter().all(|x| k.contains(x)));
    }
}
