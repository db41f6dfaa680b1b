//! The interpolation gauge `f(x) = inf{t : x ∈ (1-t) C + t K}` for `C ⊆ K`.

use crate::body::Body;
use crate::directions::{default_direction_count, direction_set, maximize_on_sphere, spacing};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, normalized};
use crate::rng::par_map;

/// Relative slack of the sampled containment check `h_C <= h_K`.
pub const CONTAINMENT_TOL: f64 = 1e-8;
/// Slack on `‖x‖_K <= 1` before a point counts as outside.
pub const OUTSIDE_TOL: f64 = 1e-9;

/// `f(x) = sup_θ clamp((<x,θ> - h_C(θ)) / (h_K(θ) - h_C(θ)), 0, 1)` over a
/// fixed direction set: the facet normals of both bodies when known, plus a
/// quasi-uniform set.
#[derive(Debug, Clone)]
pub struct InterpolationGauge {
    k: Body,
    c: Body,
    dirs: Vec<Vec<f64>>,
    h_k: Vec<f64>,
    h_c: Vec<f64>,
}

/// `r -> max_j (s_j r + b_j)` along a ray: the upper envelope of the
/// directional constraints with positive slope.
#[derive(Debug, Clone, PartialEq)]
pub struct RayEnvelope {
    /// `(slope, intercept)` of the envelope pieces, by increasing slope.
    pub lines: Vec<(f64, f64)>,
    /// `breaks[i]` separates `lines[i]` and `lines[i + 1]`.
    pub breaks: Vec<f64>,
}

impl RayEnvelope {
    /// Envelope value at `r >= 0` (`-∞` without lines).
    pub fn eval(&self, r: f64) -> f64 {
        if self.lines.is_empty() {
            return f64::NEG_INFINITY;
        }
        let i = self.breaks.partition_point(|b| *b < r);
        let (s, b) = self.lines[i];
        s * r + b
    }

    /// The envelope clamped to `[0, 1]`.
    pub fn gauge(&self, r: f64) -> f64 {
        self.eval(r).clamp(0.0, 1.0)
    }
}

/// Upper envelope of `lines` on `r >= 0`.
fn upper_envelope(mut lines: Vec<(f64, f64)>) -> RayEnvelope {
    lines.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    // equal slopes: keep the largest intercept
    let mut dedup: Vec<(f64, f64)> = Vec::with_capacity(lines.len());
    for l in lines {
        if let Some(last) = dedup.last_mut() {
            if last.0 == l.0 {
                *last = l;
                continue;
            }
        }
        dedup.push(l);
    }
    let cross = |a: (f64, f64), b: (f64, f64)| (a.1 - b.1) / (b.0 - a.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for l in dedup {
        while let Some(&top) = hull.last() {
            // `top` never wins on r >= 0 once `l` overtakes it at r <= 0
            if cross(top, l) <= 0.0 {
                hull.pop();
                continue;
            }
            if hull.len() >= 2 {
                let prev = hull[hull.len() - 2];
                if cross(prev, l) <= cross(prev, top) {
                    hull.pop();
                    continue;
                }
            }
            break;
        }
        hull.push(l);
    }
    let breaks = hull.windows(2).map(|w| cross(w[0], w[1])).collect();
    RayEnvelope { lines: hull, breaks }
}

impl InterpolationGauge {
    pub fn new(k: Body, c: Body) -> Result<Self> {
        let n = k.dim();
        check_dim(n, c.dim())?;
        let mut dirs = Vec::new();
        for b in [&k, &c] {
            if let Some(ns) = b.facet_normals() {
                dirs.extend(ns.iter().filter_map(|a| normalized(a)));
            }
        }
        dirs.extend(direction_set(n, default_direction_count(n)));
        Self::with_directions(k, c, dirs)
    }

    pub fn with_directions(k: Body, c: Body, dirs: Vec<Vec<f64>>) -> Result<Self> {
        let h_k = par_map(&dirs, |u| k.support_at(u));
        let h_c = par_map(&dirs, |u| c.support_at(u));
        let excess = h_c
            .iter()
            .zip(&h_k)
            .map(|(c, k)| (c - k) / k)
            .fold(f64::NEG_INFINITY, f64::max);
        if excess > CONTAINMENT_TOL {
            return Err(Error::NotContained { excess });
        }
        let h_c = h_c.iter().zip(&h_k).map(|(c, k)| c.min(*k)).collect();
        Ok(Self { k, c, dirs, h_k, h_c })
    }

    pub fn outer(&self) -> &Body {
        &self.k
    }

    pub fn inner(&self) -> &Body {
        &self.c
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.dirs
    }

    fn constraint(&self, x: &[f64], j: usize) -> f64 {
        let gap = self.h_k[j] - self.h_c[j];
        let num = dot(x, &self.dirs[j]) - self.h_c[j];
        if gap <= 1e-15 * self.h_k[j] {
            // h_K = h_C: the direction never constrains points of K
            return 0.0;
        }
        (num / gap).clamp(0.0, 1.0)
    }

    /// `f(x)` over the direction set.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.k.dim(), x.len())?;
        let g = self.k.gauge_at(x);
        if g > 1.0 + OUTSIDE_TOL {
            return Err(Error::OutsideBody { gauge: g });
        }
        Ok(self.eval_unchecked(x))
    }

    /// `f(x)` without the membership check; `0` on `C`.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        if self.c.gauge_at(x) <= 1.0 {
            return 0.0;
        }
        (0..self.dirs.len()).map(|j| self.constraint(x, j)).fold(0.0, f64::max)
    }

    /// `f(x)` with a compass search around the best direction using exact
    /// support evaluations.
    pub fn eval_refined(&self, x: &[f64]) -> Result<f64> {
        let base = self.eval(x)?;
        if base == 0.0 || base == 1.0 {
            return Ok(base);
        }
        let (mut arg, mut best) = (0, f64::NEG_INFINITY);
        for j in 0..self.dirs.len() {
            let v = self.constraint(x, j);
            if v > best {
                best = v;
                arg = j;
            }
        }
        let f = |u: &[f64]| {
            let hk = self.k.support_at(u);
            let hc = self.c.support_at(u).min(hk);
            if hk - hc <= 1e-15 * hk {
                0.0
            } else {
                ((dot(x, u) - hc) / (hk - hc)).clamp(0.0, 1.0)
            }
        };
        let n = self.k.dim();
        let (_, refined) = maximize_on_sphere(&self.dirs[arg], spacing(n, self.dirs.len()), 1e-9, f);
        Ok(base.max(refined))
    }

    /// The envelope of the directional constraints along the ray `rθ`.
    pub fn ray_envelope(&self, theta: &[f64]) -> RayEnvelope {
        let mut lines = Vec::new();
        for (j, u) in self.dirs.iter().enumerate() {
            let gap = self.h_k[j] - self.h_c[j];
            if gap <= 1e-15 * self.h_k[j] {
                continue;
            }
            let s = dot(theta, u) / gap;
            if s > 0.0 {
                lines.push((s, -self.h_c[j] / gap));
            }
        }
        upper_envelope(lines)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_examples() {
        let k = Body::cube(2);
        let g = InterpolationGauge::new(k.clone(), k.clone()).unwrap();
        assert_eq!(g.eval(&[0.7, -0.99]).unwrap(), 0.0);
        let g = InterpolationGauge::new(Body::ball(2, 2.0).unwrap(), Body::unit_ball(2)).unwrap();
        let v = g.eval_refined(&[0.9, 1.2]).unwrap();
        assert!((v - 0.5).abs() < 1e-9, "{v}");
        let g = InterpolationGauge::new(k.clone(), k.scaled(0.5).unwrap()).unwrap();
        assert!((g.eval(&[0.9, 0.0]).unwrap() - 0.8).abs() < 1e-12);
        assert!(matches!(g.eval(&[1.5, 0.0]), Err(Error::OutsideBody { .. })));
        assert!(matches!(
            InterpolationGauge::new(k.scaled(0.5).unwrap(), k),
            Err(Error::NotContained { .. })
        ));
    }

    #[test]
    fn envelope_matches_the_direct_maximum() {
        let k = Body::lp(3, 3.0).unwrap();
        let c = Body::intersection(vec![k.clone(), Body::ball(3, 0.9).unwrap()]).unwrap();
        let g = InterpolationGauge::with_directions(k.clone(), c, direction_set(3, 300)).unwrap();
        let theta = normalized(&[0.3, -0.5, 0.8]).unwrap();
        let env = g.ray_envelope(&theta);
        let rho = k.radial_at(&theta);
        for i in 0..=50 {
            let r = rho * i as f64 / 50.0;
            let x: Vec<f64> = theta.iter().map(|v| v * r).collect();
            let direct = g.eval_unchecked(&x);
            let via = if g.inner().gauge_at(&x) <= 1.0 {
                0.0
            } else {
                env.gauge(r)
            };
            assert!((direct - via).abs() < 1e-12, "r={r}: {direct} vs {via}");
        }
    }
}
