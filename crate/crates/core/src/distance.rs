//! Geometric distance between bodies over a direction set.

use crate::body::Body;
use crate::directions::{default_direction_count, direction_set, maximize_on_sphere, spacing};
use crate::error::{check_dim, Result};
use crate::estimate::Estimate;
use crate::rng::par_map;
use serde::Serialize;

/// The two containment factors between `K` and `T`.
///
/// `inner = max ‖θ‖_T / ‖θ‖_K` is the least `a` with `(1/a) K ⊆ T`, and
/// `outer = max ‖θ‖_K / ‖θ‖_T` is the least `b` with `T ⊆ b K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceBreakdown {
    pub inner: Estimate,
    pub outer: Estimate,
    /// `inner · outer`, invariant under scaling either body.
    pub d_g: Estimate,
    /// `max(1, inner) · max(1, outer)`: the sandwich `K ⊆ a T`, `T ⊆ b K`
    /// without rescaling.
    pub containment: Estimate,
}

/// `max f` over `dirs`, refined by a compass search from the best
/// direction. The error is the gap to the maximum over every other
/// direction.
fn sup_ratio(dirs: &[Vec<f64>], f: impl Fn(&[f64]) -> f64 + Sync) -> Estimate {
    let vals = par_map(dirs, |u| f(u));
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
    for (i, v) in vals.iter().enumerate() {
        if *v > best {
            best = *v;
            arg = i;
        }
    }
    let coarse = vals.iter().step_by(2).copied().fold(f64::NEG_INFINITY, f64::max);
    let dim = dirs[0].len();
    let (_, refined) = maximize_on_sphere(&dirs[arg], spacing(dim, dirs.len()), 1e-9, &f);
    let value = best.max(refined);
    Estimate::new(value, value - coarse, dirs.len() as u64, 0)
}

pub fn distance_breakdown(k: &Body, t: &Body, dirs: &[Vec<f64>]) -> Result<DistanceBreakdown> {
    check_dim(k.dim(), t.dim())?;
    if dirs.is_empty() {
        return Err(crate::error::invalid("empty direction set"));
    }
    let inner = sup_ratio(dirs, |u| t.gauge_at(u) / k.gauge_at(u));
    let outer = sup_ratio(dirs, |u| k.gauge_at(u) / t.gauge_at(u));
    let d_g = inner.product(&outer);
    let a = if inner.value >= 1.0 {
        inner
    } else {
        Estimate::exact(1.0)
    };
    let b = if outer.value >= 1.0 {
        outer
    } else {
        Estimate::exact(1.0)
    };
    Ok(DistanceBreakdown {
        inner,
        outer,
        d_g,
        containment: a.product(&b),
    })
}

/// `d_G(K, T)` on the default direction set.
pub fn geometric_distance(k: &Body, t: &Body) -> Result<Estimate> {
    let dirs = direction_set(k.dim(), default_direction_count(k.dim()));
    Ok(distance_breakdown(k, t, &dirs)?.d_g)
}

/// `max(1, a) · max(1, b)` on the default direction set.
pub fn containment_distance(k: &Body, t: &Body) -> Result<Estimate> {
    let dirs = direction_set(k.dim(), default_direction_count(k.dim()));
    Ok(distance_breakdown(k, t, &dirs)?.containment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinearMap;

    #[test]
    fn distance_examples() {
        let k = Body::lp(2, 3.0).unwrap();
        assert!((geometric_distance(&k, &k).unwrap().value - 1.0).abs() < 1e-12);
        let two = k.scaled(2.0).unwrap();
        assert!((geometric_distance(&k, &two).unwrap().value - 1.0).abs() < 1e-12);
        assert!((containment_distance(&k, &two).unwrap().value - 2.0).abs() < 1e-12);
        let d = geometric_distance(&Body::cube(2), &Body::unit_ball(2)).unwrap();
        assert!((d.value - 2f64.sqrt()).abs() < 1e-9, "{d:?}");
    }

    #[test]
    fn symmetric_and_linearly_invariant() {
        let a = Body::cube(3);
        let b = Body::unit_cross(3);
        let ab = geometric_distance(&a, &b).unwrap().value;
        let ba = geometric_distance(&b, &a).unwrap().value;
        assert!((ab - ba).abs() < 1e-9);
        assert!((ab - 3.0).abs() < 1e-6, "{ab}");
        let t = LinearMap::from_rows(&[vec![2.0, 0.3, 0.0], vec![0.0, 1.0, 0.5], vec![0.1, 0.0, 0.7]]).unwrap();
        let d = geometric_distance(&a.apply_linear(&t).unwrap(), &b.apply_linear(&t).unwrap()).unwrap();
        assert!((d.value - ab).abs() < 1e-6, "{} vs {ab}", d.value);
    }
}
