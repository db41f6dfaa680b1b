//! Direction sets on the unit sphere: weighted quadratures, quasi-uniform
//! clouds, random directions and a derivative-free maximizer on the sphere.

use crate::error::{invalid, Result};
use crate::linalg::{dot, normalized};
use crate::quadrature::gauss_legendre;
use crate::rng::{par_map, Rng};
use crate::special::sphere_area;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::PI;

/// Points on `S^{n-1}` with probability weights.
///
/// Averages against the weights approximate the rotation-invariant
/// probability measure `σ`. The surface measure `dθ` is `σ` times
/// `normalization`, which equals `|S^{n-1}|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    dim: usize,
    resolution: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    normalization: f64,
}

impl SphereQuadrature {
    pub fn new(dim: usize, points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(invalid("quadrature needs one weight per point"));
        }
        if points.iter().any(|p| p.len() != dim || (dot(p, p) - 1.0).abs() > 1e-12) {
            return Err(invalid(
                "quadrature points must be unit vectors of the stated dimension",
            ));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(invalid("quadrature weights must be non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("quadrature weights sum to {total}, not 1")));
        }
        let resolution = points.len();
        Ok(Self {
            dim,
            resolution,
            points,
            weights,
            normalization: sphere_area(dim),
        })
    }

    /// The default rule: 720 angles on the circle, a 48 x 96
    /// Gauss–Legendre/trapezoid product on `S^2`, and `2^14` Halton points
    /// (with antipodes) from dimension 4 on.
    pub fn default_for(dim: usize) -> Self {
        Self::with_resolution(dim, default_resolution(dim))
    }

    /// `resolution` is the number of angles on the circle, the number of
    /// azimuths on `S^2` (with half as many polar nodes), and the point count
    /// in higher dimensions.
    pub fn with_resolution(dim: usize, resolution: usize) -> Self {
        assert!(dim >= 1 && resolution >= 2);
        let (points, weights) = match dim {
            1 => (vec![vec![1.0], vec![-1.0]], vec![0.5, 0.5]),
            2 => {
                let pts: Vec<Vec<f64>> = (0..resolution)
                    .map(|k| {
                        let t = 2.0 * PI * k as f64 / resolution as f64;
                        vec![t.cos(), t.sin()]
                    })
                    .collect();
                let w = vec![1.0 / resolution as f64; resolution];
                (pts, w)
            }
            3 => product_grid(resolution.div_ceil(2).max(2), resolution),
            _ => {
                let pts = halton_directions(dim, resolution);
                let w = vec![1.0 / pts.len() as f64; pts.len()];
                (pts, w)
            }
        };
        let weights = renormalize(weights);
        Self {
            dim,
            resolution,
            points,
            weights,
            normalization: sphere_area(dim),
        }
    }

    /// The same family at half the resolution; differences against it serve
    /// as the grid-resolution error.
    pub fn coarse(&self) -> Self {
        Self::with_resolution(self.dim, (self.resolution / 2).max(2))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total mass of the surface measure, `|S^{n-1}|`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `∫ f dσ`.
    pub fn mean(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
        let vals = par_map(&self.points, |p| f(p));
        vals.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// `∫ f dθ` against the surface measure.
    pub fn surface_integral(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
        self.normalization * self.mean(f)
    }
}

fn renormalize(w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn default_resolution(dim: usize) -> usize {
    match dim {
        1 => 2,
        2 => 720,
        3 => 96,
        _ => 1 << 14,
    }
}

/// Gauss–Legendre in `z = cos(polar angle)` times equispaced azimuths.
fn product_grid(n_polar: usize, n_azimuth: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (z, wz) = gauss_legendre(n_polar);
    let mut pts = Vec::with_capacity(n_polar * n_azimuth);
    let mut w = Vec::with_capacity(n_polar * n_azimuth);
    for (zi, wi) in z.iter().zip(&wz) {
        let s = (1.0 - zi * zi).max(0.0).sqrt();
        for k in 0..n_azimuth {
            let phi = 2.0 * PI * (k as f64 + 0.5) / n_azimuth as f64;
            pts.push(vec![s * phi.cos(), s * phi.sin(), *zi]);
            w.push(wi / (2.0 * n_azimuth as f64));
        }
    }
    (pts, w)
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `count` directions (rounded up to even): Halton points pushed through the
/// normal quantile and normalized, each followed by its antipode.
pub fn halton_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len());
    let normal = Normal::standard();
    let half = count.div_ceil(2);
    let mut out = Vec::with_capacity(2 * half);
    let mut i = 1u64;
    while out.len() < 2 * half {
        let g: Vec<f64> = (0..dim)
            .map(|d| normal.inverse_cdf(radical_inverse(i, PRIMES[d])))
            .collect();
        i += 1;
        if let Some(u) = normalized(&g) {
            out.push(u.iter().map(|x| -x).collect());
            out.push(u);
        }
    }
    out
}

fn fibonacci_directions(count: usize) -> Vec<Vec<f64>> {
    let half = count.div_ceil(2);
    let golden = PI * (3.0 - 5.0f64.sqrt());
    let mut out = Vec::with_capacity(2 * half);
    for k in 0..half {
        // upper hemisphere only; antipodes fill the rest
        let z = 1.0 - (k as f64 + 0.5) / half as f64;
        let s = (1.0 - z * z).sqrt();
        let phi = golden * k as f64;
        let u = vec![s * phi.cos(), s * phi.sin(), z];
        out.push(u.iter().map(|x| -x).collect());
        out.push(u);
    }
    out
}

/// A centrally symmetric quasi-uniform direction set of about `count` points.
pub fn direction_set(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(4))
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count.max(4) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => fibonacci_directions(count),
        _ => halton_directions(dim, count),
    }
}

/// Default size of the direction sets used for suprema over the sphere.
pub fn default_direction_count(dim: usize) -> usize {
    match dim {
        1 => 2,
        2 => 720,
        3 => 2048,
        4 => 4096,
        _ => 8192,
    }
}

/// Typical angular gap between neighbours in a set of `count` directions.
pub fn spacing(dim: usize, count: usize) -> f64 {
    if dim <= 1 {
        return 1.0;
    }
    (sphere_area(dim) / count.max(1) as f64).powf(1.0 / (dim - 1) as f64)
}

pub fn random_unit(rng: &mut Rng, dim: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(u) = normalized(&g) {
            return u;
        }
    }
}

/// Maximizes `f` over the unit sphere starting from `start` by a compass
/// search over coordinate and pairwise-diagonal moves, halving the step on
/// failure until it drops below `tol`.
pub fn maximize_on_sphere(start: &[f64], step: f64, tol: f64, f: impl Fn(&[f64]) -> f64) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut u = normalized(start).unwrap_or_else(|| {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        e
    });
    let mut best = f(&u);
    if n == 1 {
        return (u, best);
    }
    let mut moves: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut m = vec![0.0; n];
            m[i] = s;
            moves.push(m);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut m = vec![0.0; n];
                m[i] = si * std::f64::consts::FRAC_1_SQRT_2;
                m[j] = sj * std::f64::consts::FRAC_1_SQRT_2;
                moves.push(m);
            }
        }
    }
    let mut h = step;
    let mut evals = 0usize;
    while h > tol && evals < 20_000 {
        let mut improved = false;
        for m in &moves {
            let cand: Vec<f64> = u.iter().zip(m).map(|(a, b)| a + h * b).collect();
            let Some(cand) = normalized(&cand) else { continue };
            evals += 1;
            let v = f(&cand);
            if v > best {
                best = v;
                u = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (u, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_and_second_moment_is_one_over_n() {
        for dim in 1..=6 {
            let q = SphereQuadrature::default_for(dim);
            let s: f64 = q.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "dim {dim}");
            let m2 = q.mean(|p| p[0] * p[0]);
            let tol = if dim <= 3 { 1e-12 } else { 2e-3 };
            assert!((m2 - 1.0 / dim as f64).abs() < tol, "dim {dim}: {m2}");
        }
    }

    #[test]
    fn normalization_is_sphere_area() {
        let q = SphereQuadrature::default_for(3);
        assert!((q.surface_integral(|_| 1.0) - 4.0 * PI).abs() < 1e-12);
        // ∫ z^4 dθ on S^2 = 4π/5
        assert!((q.surface_integral(|p| p[2].powi(4)) - 4.0 * PI / 5.0).abs() < 1e-12);
    }

    #[test]
    fn direction_sets_are_symmetric_unit_vectors() {
        for dim in 2..=5 {
            let d = direction_set(dim, 500);
            for p in &d {
                assert!((dot(p, p) - 1.0).abs() < 1e-12);
            }
            let sum: Vec<f64> = (0..dim).map(|i| d.iter().map(|p| p[i]).sum()).collect();
            assert!(sum.iter().all(|s| s.abs() < 1e-9));
        }
    }

    #[test]
    fn sphere_maximizer_finds_diagonal_ridge() {
        // max of |θ|_1 on S^2 is √3 at the diagonal
        let (u, v) = maximize_on_sphere(&[0.9, 0.3, 0.2], 0.1, 1e-10, |p| p.iter().map(|x| x.abs()).sum());
        assert!((v - 3f64.sqrt()).abs() < 1e-8, "{v} at {u:?}");
    }
}
