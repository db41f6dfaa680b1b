//! Uniform sampling in bodies, volumes, covariances, isotropic constants and
//! the sphere functionals `M`, `M*`, `M′`.

use crate::body::{Body, Shape};
use crate::directions::{random_unit, SphereQuadrature};
use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::linalg::{mat_vec, norm, spd_power, symmetrize, LinearMap};
use crate::logconcave::{l_pair, Density};
use crate::mc::{add_outer, block_map, block_sums, sym_len, unpack_sym, Blocks};
use crate::rng::{chunked, derive_seed, rng_for, Rng};
use crate::special::sphere_area;
use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::Serialize;

/// Default Monte Carlo budget.
pub const DEFAULT_SAMPLES: usize = 100_000;

/// Switches and mixing parameters of the generic sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    /// Hit-and-run burn-in is `burn_in_factor · n²` steps.
    pub burn_in_factor: usize,
    /// Hit-and-run keeps one point every `thinning_factor · n²` steps.
    pub thinning_factor: usize,
    /// Rejection is used while the bounding-box acceptance stays above this.
    pub min_acceptance: f64,
    pub allow_rejection: bool,
    pub allow_hit_and_run: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            burn_in_factor: 10,
            thinning_factor: 1,
            min_acceptance: 1e-3,
            allow_rejection: true,
            allow_hit_and_run: true,
        }
    }
}

/// Which algorithm produced a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Exact,
    Rejection,
    HitAndRun,
}

/// Whether the body has a direct (non-rejection) sampler.
fn exact_sampler_exists(body: &Body) -> bool {
    match body.shape() {
        Shape::Ball { .. } | Shape::Box { .. } | Shape::Cross { .. } | Shape::Lp { .. } | Shape::Ellipsoid(_) => true,
        Shape::Transformed { base, .. } => exact_sampler_exists(base),
        _ => false,
    }
}

/// Draws one point of a body with a direct sampler. `pre` carries
/// `A^{-1/2}` for ellipsoids.
fn exact_point(body: &Body, rng: &mut Rng, pre: Option<&DMatrix<f64>>) -> Vec<f64> {
    let n = body.dim();
    match body.shape() {
        Shape::Ball { radius } => ball_point(rng, n, *radius),
        Shape::Box { half_widths } => half_widths
            .iter()
            .map(|a| a * (2.0 * rng.random::<f64>() - 1.0))
            .collect(),
        Shape::Cross { radius } => {
            let e: Vec<f64> = (0..=n).map(|_| Exp1.sample(rng)).collect();
            let total: f64 = e.iter().sum();
            e[..n]
                .iter()
                .map(|v| {
                    let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    s * radius * v / total
                })
                .collect()
        }
        Shape::Lp { p } => {
            let g = Gamma::new(1.0 / p, 1.0).expect("positive shape");
            let y: Vec<f64> = (0..n)
                .map(|_| {
                    let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    s * g.sample(rng).powf(1.0 / p)
                })
                .collect();
            let z: f64 = Exp1.sample(rng);
            let denom = (y.iter().map(|v| v.abs().powf(*p)).sum::<f64>() + z).powf(1.0 / p);
            y.iter().map(|v| v / denom).collect()
        }
        Shape::Ellipsoid(_) => {
            let u = ball_point(rng, n, 1.0);
            mat_vec(pre.expect("ellipsoid root"), &u)
        }
        Shape::Transformed { base, map } => map.apply(&exact_point(base, rng, pre)),
        _ => unreachable!("no direct sampler"),
    }
}

fn ball_point(rng: &mut Rng, n: usize, radius: f64) -> Vec<f64> {
    let u = random_unit(rng, n);
    let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
    u.iter().map(|v| v * r).collect()
}

fn ellipsoid_root(body: &Body) -> Result<Option<DMatrix<f64>>> {
    match body.shape() {
        Shape::Ellipsoid(e) => Ok(Some(spd_power(e.form(), -0.5)?)),
        Shape::Transformed { base, .. } => ellipsoid_root(base),
        _ => Ok(None),
    }
}

/// Half-widths of the sampling box: tight for exact supports, inflated by 1%
/// when the support comes from the gauge oracle.
fn sampling_box(body: &Body) -> Vec<f64> {
    let inflate = if body.is_exact() { 1.0 } else { 1.01 };
    body.bounding_half_widths().iter().map(|h| h * inflate).collect()
}

fn box_point(rng: &mut Rng, half: &[f64]) -> Vec<f64> {
    half.iter().map(|h| h * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// Fraction of the sampling box inside the body, from a pilot run.
pub fn box_acceptance(body: &Body, pilot: usize, seed: u64) -> f64 {
    let half = sampling_box(body);
    let hits: Vec<usize> = chunked(pilot, derive_seed(seed, "pilot"), |rng, len, _| {
        (0..len)
            .filter(|_| body.gauge_at(&box_point(rng, &half)) <= 1.0)
            .count()
    });
    hits.iter().sum::<usize>() as f64 / pilot.max(1) as f64
}

/// `count` uniform points of the body.
pub fn uniform_sample(body: &Body, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    uniform_sample_with(body, count, seed, &SamplerConfig::default()).map(|(p, _)| p)
}

pub fn uniform_sample_with(
    body: &Body,
    count: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<(Vec<Vec<f64>>, SamplerKind)> {
    if count == 0 {
        return Err(crate::error::invalid("sample count must be at least 1"));
    }
    let flatten = |v: Vec<Vec<Vec<f64>>>| v.into_iter().flatten().collect::<Vec<_>>();
    if exact_sampler_exists(body) {
        let root = ellipsoid_root(body)?;
        let pts = chunked(count, derive_seed(seed, "exact"), |rng, len, _| {
            (0..len).map(|_| exact_point(body, rng, root.as_ref())).collect()
        });
        return Ok((flatten(pts), SamplerKind::Exact));
    }
    let acceptance = box_acceptance(body, 4096, seed);
    if cfg.allow_rejection && acceptance >= cfg.min_acceptance {
        let half = sampling_box(body);
        let pts = chunked(count, derive_seed(seed, "rejection"), |rng, len, _| {
            let mut out = Vec::with_capacity(len);
            while out.len() < len {
                let x = box_point(rng, &half);
                if body.gauge_at(&x) <= 1.0 {
                    out.push(x);
                }
            }
            out
        });
        return Ok((flatten(pts), SamplerKind::Rejection));
    }
    if !cfg.allow_hit_and_run {
        return Err(Error::AcceptanceCollapse { acceptance });
    }
    let n = body.dim();
    let burn = cfg.burn_in_factor * n * n;
    let thin = (cfg.thinning_factor * n * n).max(1);
    let reach = 2.0 * body.outer_radius();
    let pts = chunked(count, derive_seed(seed, "hit-and-run"), |rng, len, _| {
        let mut x = vec![0.0; n];
        let mut out = Vec::with_capacity(len);
        let mut step = 0usize;
        while out.len() < len {
            x = hit_and_run_step(body, rng, &x, reach);
            step += 1;
            if step > burn && (step - burn).is_multiple_of(thin) {
                out.push(x.clone());
            }
        }
        out
    });
    Ok((flatten(pts), SamplerKind::HitAndRun))
}

/// One hit-and-run move: random direction, chord by bisection, uniform point
/// on the chord.
fn hit_and_run_step(body: &Body, rng: &mut Rng, x: &[f64], reach: f64) -> Vec<f64> {
    let u = random_unit(rng, x.len());
    let inside = |t: f64| {
        let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + t * b).collect();
        body.gauge_at(&y) <= 1.0
    };
    let end = |sign: f64| {
        let (mut lo, mut hi) = (0.0, reach);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if inside(sign * mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let (tp, tm) = (end(1.0), end(-1.0));
    let t = -tm + (tp + tm) * rng.random::<f64>();
    x.iter().zip(&u).map(|(a, b)| a + t * b).collect()
}

/// Polar-coordinate block sums for a star body: features `ρ^n` and
/// `θθ^T ρ^{n+2}` over random directions.
fn body_polar_blocks(body: &Body, samples: usize, seed: u64) -> Blocks {
    let n = body.dim();
    block_sums(samples, derive_seed(seed, "polar"), 1 + sym_len(n), |rng, acc| {
        let theta = random_unit(rng, n);
        let rho = body.radial_at(&theta);
        acc[0] += rho.powi(n as i32);
        add_outer(&mut acc[1..], &theta, rho.powi(n as i32 + 2));
    })
}

/// `(Vol, ∫_K xx^T)` from the means of [`body_polar_blocks`].
fn polar_stats(m: &[f64], n: usize) -> (f64, DMatrix<f64>) {
    let area = sphere_area(n);
    let vol = area / n as f64 * m[0];
    let second = unpack_sym(&m[1..], n, area / (n as f64 + 2.0));
    (vol, second)
}

/// Volume with the default budget.
pub fn volume(body: &Body, seed: u64) -> Estimate {
    volume_with(body, DEFAULT_SAMPLES, seed)
}

/// Closed form when available; polar coordinates for density-induced bodies;
/// bounding-box hit ratio otherwise.
pub fn volume_with(body: &Body, samples: usize, seed: u64) -> Estimate {
    if let Some(v) = body.exact_volume() {
        return Estimate::exact(v);
    }
    if let Shape::Density(_) = body.shape() {
        let b = body_polar_blocks(body, samples, seed);
        let (v, se) = b.jackknife(|m| polar_stats(m, body.dim()).0);
        return Estimate::new(v, se, samples as u64, b.seed());
    }
    let half = sampling_box(body);
    let box_vol: f64 = half.iter().map(|h| 2.0 * h).product();
    let s = derive_seed(seed, "box-volume");
    let b = block_sums(samples, s, 1, |rng, acc| {
        if body.gauge_at(&box_point(rng, &half)) <= 1.0 {
            acc[0] += 1.0;
        }
    });
    let (p, se) = b.jackknife(|m| m[0]);
    Estimate::new(p * box_vol, se * box_vol, samples as u64, s)
}

/// Covariance matrix with entrywise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub matrix: DMatrix<f64>,
    pub std_errors: DMatrix<f64>,
    pub n_samples: u64,
    pub seed: u64,
    pub source: String,
}

impl CovarianceMatrix {
    fn exact(matrix: DMatrix<f64>, source: String) -> Self {
        let n = matrix.nrows();
        Self {
            matrix: symmetrize(&matrix),
            std_errors: DMatrix::zeros(n, n),
            n_samples: 0,
            seed: 0,
            source,
        }
    }

    /// Covariance from block sums whose features start with the normalizer
    /// at `offset - 1` (or no normalizer when `offset == 0`) followed by the
    /// packed second moments; `ratio_scale` multiplies the ratio.
    fn from_blocks(b: &Blocks, n: usize, normalizer: Option<usize>, scale: f64, source: String) -> Self {
        let start = normalizer.map_or(0, |i| i + 1);
        let mut matrix = DMatrix::zeros(n, n);
        let mut errs = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let (v, se) = b.jackknife(|m| {
                    let d = normalizer.map_or(1.0, |z| m[z]);
                    scale * m[start + k] / d
                });
                matrix[(i, j)] = v;
                matrix[(j, i)] = v;
                errs[(i, j)] = se;
                errs[(j, i)] = se;
                k += 1;
            }
        }
        Self {
            matrix,
            std_errors: errs,
            n_samples: b.total_count() as u64,
            seed: b.seed(),
            source,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `|det Cov|` with a first-order error from the entrywise errors.
    pub fn det(&self) -> Estimate {
        let d = self.matrix.determinant();
        let inv = self.matrix.clone().try_inverse();
        let se = match inv {
            Some(inv) => {
                let mut var = 0.0;
                for i in 0..self.dim() {
                    for j in 0..self.dim() {
                        var += (d * inv[(j, i)] * self.std_errors[(i, j)]).powi(2);
                    }
                }
                var.sqrt()
            }
            None => f64::INFINITY,
        };
        Estimate::new(d, se, self.n_samples, self.seed)
    }

    /// Largest `|Cov_ij| / λ` over off-diagonal entries, with `λ` the mean
    /// diagonal entry.
    pub fn off_diagonal_ratio(&self) -> f64 {
        let n = self.dim();
        let lambda = self.matrix.trace() / n as f64;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.matrix[(i, j)].abs() / lambda);
                }
            }
        }
        worst
    }
}

/// A body or a density.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Body(&'a Body),
    Density(&'a dyn Density),
}

/// Covariance (second moments about the origin, which is the barycenter of
/// every symmetric source).
pub fn covariance(source: Source<'_>, n_samples: usize, seed: u64) -> Result<CovarianceMatrix> {
    match source {
        Source::Body(body) => {
            let n = body.dim();
            if let Some(c) = body.exact_covariance() {
                return Ok(CovarianceMatrix::exact(c, body.name()));
            }
            if let Shape::Density(_) = body.shape() {
                let b = body_polar_blocks(body, n_samples, seed);
                return Ok(CovarianceMatrix::from_blocks(
                    &b,
                    n,
                    Some(0),
                    n as f64 / (n as f64 + 2.0),
                    body.name(),
                ));
            }
            let pts = uniform_sample(body, n_samples, derive_seed(seed, "covariance"))?;
            let b = block_map(&pts, seed, sym_len(n), |x, acc| add_outer(acc, x, 1.0));
            Ok(CovarianceMatrix::from_blocks(&b, n, None, 1.0, body.name()))
        }
        Source::Density(f) => {
            let n = f.dim();
            if let Some(supp) = f.support_body() {
                let pts = uniform_sample(&supp, n_samples, derive_seed(seed, "density-support"))?;
                let b = block_map(&pts, seed, 1 + sym_len(n), |x, acc| {
                    let w = f.eval(x);
                    acc[0] += w;
                    add_outer(&mut acc[1..], x, w);
                });
                if !(b.means()[0] > 0.0) {
                    return Err(Error::ZeroMass);
                }
                return Ok(CovarianceMatrix::from_blocks(&b, n, Some(0), 1.0, f.label()));
            }
            let b = block_sums(
                n_samples,
                derive_seed(seed, "density-polar"),
                1 + sym_len(n),
                |rng, acc| {
                    let theta = random_unit(rng, n);
                    let p = f.profile(&theta);
                    acc[0] += p.moment(n as u32 - 1).unwrap_or(f64::NAN);
                    add_outer(&mut acc[1..], &theta, p.moment(n as u32 + 1).unwrap_or(f64::NAN));
                },
            );
            if !(b.means()[0] > 0.0) {
                return Err(Error::ZeroMass);
            }
            Ok(CovarianceMatrix::from_blocks(&b, n, Some(0), 1.0, f.label()))
        }
    }
}

/// `L_K = det(Cov)^{1/(2n)} / Vol^{1/n}`: exact for closed forms, polar
/// coordinates (jackknife over directions) otherwise.
pub fn isotropic_constant_body(body: &Body, samples: usize, seed: u64) -> Result<Estimate> {
    let n = body.dim();
    let nf = n as f64;
    if let (Some(v), Some(c)) = (body.exact_volume(), body.exact_covariance()) {
        return Ok(Estimate::exact(c.determinant().powf(0.5 / nf) / v.powf(1.0 / nf)));
    }
    let b = body_polar_blocks(body, samples, seed);
    let (l, se) = b.jackknife(|m| {
        let (vol, second) = polar_stats(m, n);
        (second / vol).determinant().powf(0.5 / nf) / vol.powf(1.0 / nf)
    });
    if !l.is_finite() {
        return Err(Error::Divergent("isotropic constant is not finite".into()));
    }
    Ok(Estimate::new(l, se, samples as u64, b.seed()))
}

/// `L_f = (f(0) / ∫f)^{1/n} det(Cov_f)^{1/(2n)}` by polar coordinates.
pub fn isotropic_constant_density(f: &dyn Density, samples: usize, seed: u64) -> Result<Estimate> {
    Ok(l_pair(f, samples, seed)?.l_f)
}

/// The map `c · Cov^{-1/2}` that sends the body to isotropic position with
/// volume 1, and the image.
pub fn isotropic_transform(body: &Body, samples: usize, seed: u64) -> Result<(LinearMap, Body)> {
    let n = body.dim() as f64;
    // Closed-form moments, when the body has them, keep the position exact.
    let (cov, vol) = match (body.exact_covariance(), body.exact_volume()) {
        (Some(c), Some(v)) => (c, v),
        _ => (
            covariance(Source::Body(body), samples, derive_seed(seed, "iso-cov"))?.matrix,
            volume_with(body, samples, derive_seed(seed, "iso-vol")).value,
        ),
    };
    let root = spd_power(&cov, -0.5)?;
    let det = cov.determinant();
    let c = (det.sqrt() / vol).powf(1.0 / n);
    let map = LinearMap::new(root * c)?;
    let image = body.apply_linear(&map)?;
    Ok((map, image))
}

/// `M`, `M*` and the lower weighted median `M′` of the norm on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormFunctionals {
    pub m: Estimate,
    pub m_star: Estimate,
    pub m_prime: Estimate,
}

fn lower_weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for i in idx.iter() {
        acc += weights[*i];
        if acc >= 0.5 * total {
            return values[*i];
        }
    }
    values[*idx.last().expect("non-empty")]
}

fn raw_functionals(body: &Body, quad: &SphereQuadrature) -> (f64, f64, f64) {
    let pts = quad.points();
    let g = crate::rng::par_map(pts, |p| body.gauge_at(p));
    let h = crate::rng::par_map(pts, |p| body.support_at(p));
    let w = quad.weights();
    let m = g.iter().zip(w).map(|(a, b)| a * b).sum();
    let ms = h.iter().zip(w).map(|(a, b)| a * b).sum();
    (m, ms, lower_weighted_median(&g, w))
}

/// The functionals on `quad`, with the difference to the half-resolution
/// rule as the reported grid error.
pub fn norm_functionals(body: &Body, quad: &SphereQuadrature) -> Result<NormFunctionals> {
    crate::error::check_dim(body.dim(), quad.dim())?;
    let (m, ms, mp) = raw_functionals(body, quad);
    let (cm, cms, cmp) = raw_functionals(body, &quad.coarse());
    let k = quad.len() as u64;
    Ok(NormFunctionals {
        m: Estimate::new(m, (m - cm).abs(), k, 0),
        m_star: Estimate::new(ms, (ms - cms).abs(), k, 0),
        m_prime: Estimate::new(mp, (mp - cmp).abs(), k, 0),
    })
}

/// Mean of `|x|²` under the uniform measure, from polar coordinates.
pub fn mean_square_norm(body: &Body, samples: usize, seed: u64) -> Estimate {
    let n = body.dim();
    if let Some(c) = body.exact_covariance() {
        return Estimate::exact(c.trace());
    }
    let b = body_polar_blocks(body, samples, seed);
    let (v, se) = b.jackknife(|m| {
        let (vol, second) = polar_stats(m, n);
        second.trace() / vol
    });
    Estimate::new(v, se, samples as u64, b.seed())
}

/// Sample mean of `|x|` over points, for diagnostics.
pub fn mean_norm(points: &[Vec<f64>]) -> f64 {
    points.iter().map(|p| norm(p)).sum::<f64>() / points.len().max(1) as f64
}

/// A seeded generator for callers that need an ad-hoc stream.
pub fn stream(seed: u64, label: &str) -> Rng {
    rng_for(derive_seed(seed, label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Ellipsoid;
    use crate::logconcave::{Gaussian, Indicator};
    use std::f64::consts::PI;

    #[test]
    fn exact_samplers_stay_inside() {
        let bodies = [
            Body::unit_ball(3),
            Body::cube(3),
            Body::unit_cross(4),
            Body::lp(3, 1.5).unwrap(),
            Body::ellipsoid(Ellipsoid::with_semi_axes(&[2.0, 1.0, 0.5]).unwrap()),
        ];
        for b in &bodies {
            let pts = uniform_sample(b, 5000, 1).unwrap();
            assert!(pts.iter().all(|p| b.gauge_at(p) <= 1.0 + 1e-12), "{}", b.name());
        }
    }

    #[test]
    fn ball_second_moment() {
        let pts = uniform_sample(&Body::unit_ball(3), 100_000, 7).unwrap();
        let sq: Vec<f64> = pts.iter().map(|p| p.iter().map(|v| v * v).sum()).collect();
        let e = Estimate::from_samples(&sq, 7);
        assert!(e.within(0.6, 3.0, 0.0), "{e:?}");
    }

    #[test]
    fn cross_and_lp_covariances_match_closed_forms() {
        for b in [Body::unit_cross(3), Body::lp(3, 3.0).unwrap()] {
            let pts = uniform_sample(&b, 100_000, 3).unwrap();
            let x0: Vec<f64> = pts.iter().map(|p| p[0] * p[0]).collect();
            let e = Estimate::from_samples(&x0, 3);
            let c = b.exact_covariance().unwrap()[(0, 0)];
            assert!(e.within(c, 4.0, 0.0), "{}: {e:?} vs {c}", b.name());
        }
    }

    #[test]
    fn rejection_volume_of_box_and_disc() {
        let k = Body::intersection(vec![Body::cube(2), Body::ball(2, 1.2).unwrap()]).unwrap();
        let v = volume_with(&k, 200_000, 5);
        // area of the square [-1,1]^2 inside the disc of radius 1.2
        let r: f64 = 1.2;
        let c = (r * r - 1.0).sqrt();
        let seg = r * r * (1.0 / r).acos() - c;
        let exact = PI * r * r - 4.0 * seg;
        assert!(v.within(exact, 4.0, 0.0), "{v:?} vs {exact}");
    }

    #[test]
    fn hit_and_run_matches_rejection_moments() {
        let cfg = SamplerConfig {
            allow_rejection: false,
            ..Default::default()
        };
        let h = crate::polytope::HPolytope::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            vec![1.0, 1.0, 1.5],
        )
        .unwrap();
        let k = Body::hpoly(h);
        let (pts, kind) = uniform_sample_with(&k, 20_000, 9, &cfg).unwrap();
        assert_eq!(kind, SamplerKind::HitAndRun);
        assert!(pts.iter().all(|p| k.gauge_at(p) <= 1.0 + 1e-9));
        let ref_pts = uniform_sample(&k, 50_000, 10).unwrap();
        let a = mean_norm(&pts);
        let b = mean_norm(&ref_pts);
        assert!((a - b).abs() < 0.02, "{a} vs {b}");
    }

    #[test]
    fn acceptance_collapse_is_reported() {
        let cfg = SamplerConfig {
            allow_hit_and_run: false,
            min_acceptance: 2.0,
            ..Default::default()
        };
        let h = crate::polytope::HPolytope::new(vec![vec![1.0, 1.0], vec![1.0, -1.0]], vec![1.0, 1.0]).unwrap();
        let r = uniform_sample_with(&Body::hpoly(h), 10, 1, &cfg);
        assert!(matches!(r, Err(Error::AcceptanceCollapse { .. })));
    }

    #[test]
    fn isotropic_constant_examples() {
        for n in 2..=4 {
            let l = isotropic_constant_body(&Body::cube(n), 1000, 1).unwrap();
            assert!((l.value - 1.0 / 12f64.sqrt()).abs() < 1e-12);
        }
        let disc = isotropic_constant_body(&Body::unit_ball(2), 1000, 1).unwrap();
        assert!((disc.value - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-12);
        // a non-closed-form route: the cube as an h-polytope intersection
        let k = Body::intersection(vec![Body::cube(3), Body::ball(3, 10.0).unwrap()]).unwrap();
        let l = isotropic_constant_body(&k, 100_000, 2).unwrap();
        assert!(l.within(1.0 / 12f64.sqrt(), 4.0, 0.0), "{l:?}");
    }

    #[test]
    fn density_isotropic_constants() {
        let f = Indicator::new(Body::cube(2));
        let l = isotropic_constant_density(&f, 20_000, 4).unwrap();
        assert!(l.within(1.0 / 12f64.sqrt(), 4.0, 0.0), "{l:?}");
        let g = Gaussian::standard(1);
        let l = isotropic_constant_density(&g, 1000, 4).unwrap();
        assert!((l.value - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-9, "{l:?}");
        let cov = covariance(Source::Density(&f), 50_000, 1).unwrap();
        assert!((cov.matrix[(0, 0)] - 1.0 / 3.0).abs() < 4.0 * cov.std_errors[(0, 0)]);
    }

    #[test]
    fn isotropic_transform_of_a_box() {
        let k = Body::boxed(vec![1.0, 4.0]).unwrap();
        let (map, img) = isotropic_transform(&k, 1000, 1).unwrap();
        assert!((img.exact_volume().unwrap() - 1.0).abs() < 1e-12);
        let c = img.exact_covariance().unwrap();
        assert!((c[(0, 0)] / c[(1, 1)] - 1.0).abs() < 1e-12);
        let (again, _) = isotropic_transform(&img, 1000, 1).unwrap();
        assert!((again.matrix() - DMatrix::identity(2, 2)).abs().max() < 1e-9);
        assert!(map.det() > 0.0);
    }

    #[test]
    fn norm_functional_examples() {
        let q = SphereQuadrature::default_for(2);
        let f = norm_functionals(&Body::unit_ball(2), &q).unwrap();
        assert!((f.m.value - 1.0).abs() < 1e-12 && (f.m_prime.value - 1.0).abs() < 1e-12);
        let f = norm_functionals(&Body::cube(2), &q).unwrap();
        assert!((f.m_prime.value - (PI / 8.0).cos()).abs() < 5e-3, "{:?}", f.m_prime);
        let f2 = norm_functionals(&Body::cube(2).scaled(2.0).unwrap(), &q).unwrap();
        assert!((f2.m.value - f.m.value / 2.0).abs() < 1e-12);
        assert!((f2.m_star.value - 2.0 * f.m_star.value).abs() < 1e-12);
        assert!(f.m.value * f.m_star.value >= 1.0);
    }

    #[test]
    fn seeds_reproduce_bits() {
        let k = Body::intersection(vec![Body::cube(3), Body::unit_ball(3)]).unwrap();
        let a = volume_with(&k, 10_000, 3);
        let b = volume_with(&k, 10_000, 3);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
