//! Quasi-convex bodies given as finite unions of symmetric convex pieces,
//! the radial density `F_K` on their hull, and the quasi-convex pipeline.

use crate::body::{Body, BodyFile};
use crate::constants::Constants;
use crate::directions::{default_direction_count, direction_set, random_unit};
use crate::distance::distance_breakdown;
use crate::error::{check_dim, invalid, Error, Result};
use crate::estimate::Estimate;
use crate::linalg::{norm, Ellipsoid, LinearMap};
use crate::logconcave::{body_from_density, l_pair, Concavity, Density, RadialProfile, Tail};
use crate::mc::{block_sums, Blocks};
use crate::pipeline::{Budget, PerturbationResult};
use crate::quadrature::adaptive;
use crate::report::Report;
use crate::rng::{chunked, derive_seed, par_map};
use crate::sampling::{covariance, volume_with, Source};
use crate::special::{beta_fn, binomial_real, sphere_area};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::E;
use std::sync::Arc;

/// Relative slack of the measured containment `conv(K) ⊆ C·K`.
pub const QUASI_TOL: f64 = 1e-6;

/// A union of symmetric convex pieces with its convex hull and the
/// quasi-convexity constant `C` (`conv(K) ⊆ C K`).
#[derive(Debug, Clone)]
pub struct QuasiBody {
    pieces: Vec<Body>,
    c_quasi: f64,
    measured_c: f64,
    hull: Body,
}

/// On-disk quasi-body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiFile {
    pub pieces: Vec<BodyFile>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl QuasiBody {
    /// `declared_c = None` adopts the measured constant.
    pub fn new(pieces: Vec<Body>, declared_c: Option<f64>) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| invalid("quasi-body needs at least one piece"))?;
        let n = first.dim();
        for p in &pieces {
            check_dim(n, p.dim())?;
        }
        let hull = Body::hull(pieces.clone())?;
        let mut q = Self {
            pieces,
            c_quasi: 1.0,
            measured_c: 1.0,
            hull,
        };
        let dirs = direction_set(n, default_direction_count(n));
        let ratios = par_map(&dirs, |u| q.hull.radial_at(u) / q.radial(u));
        q.measured_c = ratios.iter().copied().fold(1.0, f64::max);
        q.c_quasi = match declared_c {
            Some(c) => {
                if !(c >= 1.0) {
                    return Err(invalid("the quasi-convexity constant must be at least 1"));
                }
                if q.measured_c > c * (1.0 + QUASI_TOL) {
                    return Err(Error::Hypothesis(format!(
                        "conv(K) ⊄ {c}·K: measured constant {}",
                        q.measured_c
                    )));
                }
                c
            }
            None => q.measured_c,
        };
        Ok(q)
    }

    pub fn from_file(f: &QuasiFile) -> Result<Self> {
        let pieces = f.pieces.iter().map(Body::from_file).collect::<Result<Vec<_>>>()?;
        Self::new(pieces, f.c)
    }

    pub fn to_file(&self) -> Result<QuasiFile> {
        Ok(QuasiFile {
            pieces: self.pieces.iter().map(|p| p.to_file()).collect::<Result<Vec<_>>>()?,
            c: Some(self.c_quasi),
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: QuasiFile = serde_json::from_str(s).map_err(|e| invalid(e.to_string()))?;
        Self::from_file(&f)
    }

    pub fn dim(&self) -> usize {
        self.hull.dim()
    }

    pub fn pieces(&self) -> &[Body] {
        &self.pieces
    }

    pub fn hull(&self) -> &Body {
        &self.hull
    }

    pub fn c_quasi(&self) -> f64 {
        self.c_quasi
    }

    pub fn measured_c(&self) -> f64 {
        self.measured_c
    }

    pub fn name(&self) -> String {
        let names: Vec<String> = self.pieces.iter().map(|p| p.name()).collect();
        names.join("∪")
    }

    /// `max_i ρ_i(θ)`.
    pub fn radial(&self, theta: &[f64]) -> f64 {
        self.pieces.iter().map(|p| p.radial_at(theta)).fold(0.0, f64::max)
    }

    /// `min_i ‖x‖_i`.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        self.pieces.iter().map(|p| p.gauge_at(x)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.gauge(x) <= 1.0
    }

    /// Volume by inclusion–exclusion over piece intersections (up to three
    /// pieces), by polar coordinates beyond.
    pub fn volume(&self, samples: usize, seed: u64) -> Estimate {
        let m = self.pieces.len();
        if m <= 3 {
            let mut total = Estimate::exact(0.0);
            for mask in 1usize..(1 << m) {
                let subset: Vec<Body> = (0..m)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| self.pieces[i].clone())
                    .collect();
                let sign = if subset.len() % 2 == 1 { 1.0 } else { -1.0 };
                let body = Body::intersection(subset).expect("same dimension");
                let v = volume_with(&body, samples, derive_seed(seed, &format!("ie-{mask}")));
                total = Estimate::new(
                    total.value + sign * v.value,
                    total.std_error.hypot(v.std_error),
                    v.n_samples.max(total.n_samples),
                    seed,
                );
            }
            return total;
        }
        let n = self.dim();
        let b = block_sums(samples, derive_seed(seed, "union-polar"), 1, |rng, acc| {
            let u = random_unit(rng, n);
            acc[0] += self.radial(&u).powi(n as i32);
        });
        let (v, se) = b.jackknife(|m| sphere_area(n) / n as f64 * m[0]);
        Estimate::new(v, se, samples as u64, b.seed())
    }

    pub fn apply_linear(&self, map: &LinearMap) -> Result<Self> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| p.apply_linear(map))
            .collect::<Result<Vec<_>>>()?;
        let hull = Body::hull(pieces.clone())?;
        Ok(Self {
            pieces,
            c_quasi: self.c_quasi,
            measured_c: self.measured_c,
            hull,
        })
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        self.apply_linear(&LinearMap::scaling(self.dim(), s)?)
    }
}

/// Result of the one-dimensional tail inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// Least `c1` for which `lhs <= (c1/α)^n ∫_a^b t^n dt`.
    pub minimal_c1: f64,
}

fn check_tail_hypotheses(a: f64, b: f64, alpha: f64) -> Result<()> {
    if !(a > 0.0 && b > a) {
        return Err(Error::Hypothesis("need 0 < a < b".into()));
    }
    if !(alpha > 1.0) {
        return Err(Error::Hypothesis("need α > 1".into()));
    }
    if !(b > 2.0 * a * (1.0 + alpha / E)) {
        return Err(Error::Hypothesis(format!(
            "need b > 2a(1 + α/e), got a={a}, b={b}, α={alpha}"
        )));
    }
    Ok(())
}

/// `∫_a^b (1 - (t-a)/(b-a))^{αn} t^n dt` by adaptive quadrature.
pub fn tail_integral(a: f64, b: f64, alpha: f64, n: u32) -> f64 {
    let p = alpha * n as f64;
    let peak = (a + (b - a) * n as f64 / (p + n as f64)).clamp(a, b);
    adaptive(
        |t| (1.0 - (t - a) / (b - a)).max(0.0).powf(p) * t.powi(n as i32),
        a,
        b,
        &[peak],
        1e-13,
        1e-300,
    )
    .value
}

/// The same integral as the finite sum
/// `(b-a) a^n Σ_i C(n,i) B(i+1, αn+1) ((b-a)/a)^i`.
pub fn tail_integral_series(a: f64, b: f64, alpha: f64, n: u32) -> f64 {
    let p = alpha * n as f64;
    let q = (b - a) / a;
    let s: f64 = (0..=n)
        .map(|i| binomial_real(n as f64, i as u64) * beta_fn(i as f64 + 1.0, p + 1.0) * q.powi(i as i32))
        .sum();
    (b - a) * a.powi(n as i32) * s
}

pub fn one_dim_tail_bound(a: f64, b: f64, alpha: f64, n: u32, c1: f64) -> Result<TailBound> {
    check_tail_hypotheses(a, b, alpha)?;
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let lhs = tail_integral(a, b, alpha, n);
    let j = (b.powi(n as i32 + 1) - a.powi(n as i32 + 1)) / (n as f64 + 1.0);
    let rhs = (c1 / alpha).powi(n as i32) * j;
    Ok(TailBound {
        lhs,
        rhs,
        pass: lhs < rhs,
        minimal_c1: alpha * (lhs / j).powf(1.0 / n as f64),
    })
}

/// Minimal `c1` over the grid `a ∈ {0.5,1,2}`, `b/a ∈ {3,5,10,30}`,
/// `α ∈ {2,4,8,16}`, `n ∈ {1..6}`, skipping points that violate the
/// hypothesis `b > 2a(1 + α/e)`. The constant for dimension `n` is the
/// largest minimal `c1` over its points; stability compares those across `n`.
pub fn tail_grid(c1: f64) -> Result<Report> {
    let mut per_n = Vec::new();
    let mut all = Vec::new();
    let mut fails = 0;
    for n in 1..=6u32 {
        let mut worst: f64 = 0.0;
        for a in [0.5, 1.0, 2.0] {
            for ratio in [3.0, 5.0, 10.0, 30.0] {
                for alpha in [2.0, 4.0, 8.0, 16.0] {
                    let b = a * ratio;
                    if check_tail_hypotheses(a, b, alpha).is_err() {
                        continue;
                    }
                    let t = one_dim_tail_bound(a, b, alpha, n, c1)?;
                    if !t.pass {
                        fails += 1;
                    }
                    worst = worst.max(t.minimal_c1);
                    all.push(t.minimal_c1);
                }
            }
        }
        per_n.push(worst);
    }
    let spread = |v: &[f64]| {
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        (hi, lo, hi / lo)
    };
    let (hi, lo, ratio) = spread(&per_n);
    let (_, _, point_ratio) = spread(&all);
    let mut r = Report::new("lem-4.1", "grid");
    r.constant("tail_c1", c1);
    r.exact("points", all.len() as f64).exact("failures", fails as f64);
    for (i, v) in per_n.iter().enumerate() {
        r.exact(&format!("minimal_c1_n{}", i + 1), *v);
    }
    r.exact("minimal_c1_max", hi)
        .exact("minimal_c1_min", lo)
        .exact("spread", ratio);
    r.exact("pointwise_spread", point_ratio);
    r.require(fails == 0, format!("{fails} grid points fail with c1 = {c1}"));
    r.require(
        ratio < 3.0,
        format!("per-dimension minimal c1 spread {ratio} is not below 3"),
    );
    Ok(r)
}

/// `F_K` on `conv(K)`: `1` up to `min(√n, M_θ)`, then
/// `(1 - (r-√n)/(M_θ-√n))^{αn}` up to `M_θ`, zero beyond.
#[derive(Debug, Clone)]
pub struct QuasiDensity {
    hull: Body,
    alpha: f64,
}

impl QuasiDensity {
    fn root_n(&self) -> f64 {
        (self.hull.dim() as f64).sqrt()
    }

    fn value(&self, r: f64, m: f64) -> f64 {
        let s = self.root_n();
        let p = self.alpha * self.hull.dim() as f64;
        if r > m {
            0.0
        } else if r <= s {
            1.0
        } else {
            (1.0 - (r - s) / (m - s)).max(0.0).powf(p)
        }
    }
}

pub fn build_f_quasi(k: &QuasiBody, alpha: f64) -> Result<QuasiDensity> {
    if !(alpha > 1.0) {
        return Err(Error::Hypothesis("need α > 1".into()));
    }
    Ok(QuasiDensity {
        hull: k.hull().clone(),
        alpha,
    })
}

impl Density for QuasiDensity {
    fn dim(&self) -> usize {
        self.hull.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return 1.0;
        }
        let theta: Vec<f64> = x.iter().map(|v| v / r).collect();
        self.value(r, self.hull.radial_at(&theta))
    }

    fn concavity(&self) -> Concavity {
        Concavity::LineSConcave(self.alpha * self.hull.dim() as f64)
    }

    fn profile(&self, theta: &[f64]) -> RadialProfile<'_> {
        let m = self.hull.radial_at(theta);
        let s = self.root_n();
        RadialProfile::new(move |r| self.value(r, m), Tail::Compact(m), true).with_breakpoints(vec![s.min(m)])
    }

    fn support_body(&self) -> Option<Body> {
        Some(self.hull.clone())
    }

    fn label(&self) -> String {
        format!("F_K[{}; α={:.4}]", self.hull.name(), self.alpha)
    }
}

/// `∫_{|x| > c2 √n} F_K` against `(c1/α)^{n-1} Vol(conv K)` with
/// `c2 = 2(1 + α/e)`, after normalizing `Vol(K) = 1`.
pub fn quasi_tail_mass_check(k: &QuasiBody, alpha: f64, constants: &Constants, budget: &Budget) -> Result<Report> {
    let n = k.dim();
    let k1 = normalize(k, budget)?;
    let f = build_f_quasi(&k1, alpha)?;
    let c2 = 2.0 * (1.0 + alpha / E);
    let radius = c2 * (n as f64).sqrt();
    let hull_vol = volume_with(k1.hull(), budget.samples, derive_seed(budget.seed, "hull-volume"));
    let mut r = Report::new("lem-4.2", k.name());
    r.input("alpha", alpha).input("seed", budget.seed);
    r.constant("quasi_tail_c1", constants.quasi_tail_c1)
        .constant("sigma", constants.sigma);
    r.exact("c2", c2).exact("radius", radius);
    let rhs = hull_vol.scale((constants.quasi_tail_c1 / alpha).powi(n as i32 - 1));
    r.measure("vol_hull", hull_vol).measure("rhs", rhs);
    let lhs = if k1.hull().outer_radius() <= radius {
        r.note("conv(K) ⊆ c2 √n D: the tail integral vanishes");
        Estimate::exact(0.0)
    } else {
        let area = sphere_area(n);
        let b = block_sums(budget.directions, derive_seed(budget.seed, "tail"), 1, |rng, acc| {
            let u = random_unit(rng, n);
            let m = k1.hull().radial_at(&u);
            if m > radius {
                let v = adaptive(|t| f.value(t, m) * t.powi(n as i32 - 1), radius, m, &[], 1e-10, 1e-300);
                acc[0] += v.value;
            }
        });
        let (v, se) = b.jackknife(|m| area * m[0]);
        Estimate::new(v, se, budget.directions as u64, b.seed())
    };
    r.measure("tail_integral", lhs);
    let minimal = if n > 1 && lhs.value > 0.0 {
        alpha * (lhs.value / hull_vol.value).powf(1.0 / (n as f64 - 1.0))
    } else {
        0.0
    };
    r.exact("minimal_c1", minimal);
    r.require(
        lhs.value + constants.sigma * lhs.std_error.hypot(rhs.std_error) < rhs.value,
        "tail mass bound not established with the required margin",
    );
    Ok(r)
}

/// `K / Vol(K)^{1/n}`.
fn normalize(k: &QuasiBody, budget: &Budget) -> Result<QuasiBody> {
    let v = k.volume(budget.samples, derive_seed(budget.seed, "quasi-volume"));
    k.scaled(v.value.powf(-1.0 / k.dim() as f64))
}

/// Ellipsoid of volume `Vol(K)` nearly maximizing `Vol(K ∩ 𝓔)`, with the
/// overlap `(Vol(K ∩ 𝓔)/Vol(K))^{1/n}`.
#[derive(Debug, Clone)]
pub struct MEllipsoid {
    pub ellipsoid: Ellipsoid,
    pub overlap: Estimate,
    /// Semi-axes and their directions (columns).
    pub axes: Vec<f64>,
    pub frame: DMatrix<f64>,
}

fn overlap_fraction(k: &QuasiBody, frame: &DMatrix<f64>, axes: &[f64], base: &[Vec<f64>]) -> Blocks {
    crate::mc::block_map(base, 0, 1, |u, acc| {
        let scaled: Vec<f64> = u.iter().zip(axes).map(|(a, b)| a * b).collect();
        let x = crate::linalg::mat_vec(frame, &scaled);
        if k.contains(&x) {
            acc[0] += 1.0;
        }
    })
}

fn ball_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    chunked(count, seed, |rng, len, _| {
        (0..len)
            .map(|_| {
                let u = random_unit(rng, n);
                let r = rand::Rng::random::<f64>(rng).powf(1.0 / n as f64);
                u.iter().map(|v| v * r).collect::<Vec<f64>>()
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Inertia ellipsoid of the hull rescaled to `Vol(K)`, then a pairwise
/// search over volume-preserving axis rescalings with common random numbers.
pub fn m_ellipsoid_surrogate(k: &QuasiBody, budget: &Budget) -> Result<MEllipsoid> {
    let n = k.dim();
    let cov = covariance(
        Source::Body(k.hull()),
        budget.samples,
        derive_seed(budget.seed, "m-cov"),
    )?;
    let vol = k.volume(budget.samples, derive_seed(budget.seed, "m-volume"));
    let eig = SymmetricEigen::new(cov.matrix.clone());
    let sd: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(1e-300).sqrt()).collect();
    let unit_vol = crate::special::unit_ball_volume(n) * sd.iter().product::<f64>();
    let t = (vol.value / unit_vol).powf(1.0 / n as f64);
    let frame = eig.eigenvectors.clone();
    let mut axes: Vec<f64> = sd.iter().map(|s| s * t).collect();
    let search = ball_points(n, (budget.samples / 4).max(4096), derive_seed(budget.seed, "m-search"));
    let mut best = overlap_fraction(k, &frame, &axes, &search).means()[0];
    let mut step: f64 = 0.25;
    let mut rounds = 0;
    while step > 0.01 && rounds < 60 {
        rounds += 1;
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut trial = axes.clone();
                trial[i] *= 1.0 + step;
                trial[j] /= 1.0 + step;
                let p = overlap_fraction(k, &frame, &trial, &search).means()[0];
                if p > best + 1e-12 {
                    best = p;
                    axes = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    let fresh = ball_points(n, budget.samples, derive_seed(budget.seed, "m-final"));
    let b = overlap_fraction(k, &frame, &axes, &fresh);
    let (p, se) = b.jackknife(|m| m[0]);
    let overlap = Estimate::new(p, se, budget.samples as u64, derive_seed(budget.seed, "m-final")).powf(1.0 / n as f64);
    let inv_sq = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, axes.iter().map(|a| 1.0 / (a * a))));
    let form = &frame * inv_sq * frame.transpose();
    Ok(MEllipsoid {
        ellipsoid: Ellipsoid::new(crate::linalg::symmetrize(&form))?,
        overlap,
        axes,
        frame,
    })
}

/// Volume-1 image of `K` whose surrogate M-ellipsoid is a Euclidean ball.
pub fn position_quasi(k: &QuasiBody, budget: &Budget) -> Result<(QuasiBody, MEllipsoid)> {
    let n = k.dim();
    let k1 = normalize(k, budget)?;
    let m = m_ellipsoid_surrogate(&k1, budget)?;
    // x -> diag(1/a) Q^T x, rescaled to determinant one
    let g = m.axes.iter().map(|a| a.ln()).sum::<f64>() / n as f64;
    let scale: Vec<f64> = m.axes.iter().map(|a| g.exp() / a).collect();
    let w = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(scale)) * m.frame.transpose();
    let positioned = k1.apply_linear(&LinearMap::new(w)?)?;
    Ok((positioned, m))
}

/// `L_{F_K}` in the surrogate position, and the containment
/// `conv(K) ⊆ Vol(conv K)^{1/n} n² D`.
pub fn quasi_l_bound_check(k: &QuasiBody, alpha: f64, constants: &Constants, budget: &Budget) -> Result<Report> {
    let n = k.dim();
    let (kt, m) = position_quasi(k, budget)?;
    let f = build_f_quasi(&kt, alpha)?;
    let pair = l_pair(&f, budget.directions, derive_seed(budget.seed, "quasi-l"))?;
    let hull_vol = volume_with(kt.hull(), budget.samples, derive_seed(budget.seed, "hull-volume"));
    let bound = hull_vol.value.powf(1.0 / n as f64) * (n * n) as f64;
    let r_out = kt.hull().outer_radius();
    let mut r = Report::new("lem-4.3", k.name());
    r.input("alpha", alpha).input("seed", budget.seed);
    r.constant("quasi_l_bound", constants.quasi_l_bound);
    r.exact("A", kt.c_quasi()).measure("B", m.overlap);
    r.measure("L_F", pair.l_f)
        .exact("hull_outer_radius", r_out)
        .exact("containment_radius", bound);
    r.require(r_out <= bound, "conv(K) ⊄ Vol^{1/n} n² D after positioning");
    r.require(
        pair.l_f.value - constants.sigma * pair.l_f.std_error <= constants.quasi_l_bound,
        format!("L_F = {} exceeds {}", pair.l_f.value, constants.quasi_l_bound),
    );
    Ok(r)
}

/// Normalizes, positions by the surrogate M-ellipsoid, builds `F_K` with
/// `α = quasi_c3 · C / overlap` and returns `T = K_{F_K}`.
pub fn quasi_perturb(k: &QuasiBody, constants: &Constants, budget: &Budget) -> Result<PerturbationResult> {
    let n = k.dim();
    let (kt, m) = position_quasi(k, budget)?;
    let alpha = (constants.quasi_c3 * k.c_quasi() / m.overlap.value).max(1.0 + 1e-9);
    let f: Arc<dyn Density> = Arc::new(build_f_quasi(&kt, alpha)?);
    let t = body_from_density(f.clone())?.with_name(format!("T[{}]", k.name()));
    let pair = l_pair(f.as_ref(), budget.directions, derive_seed(budget.seed, "l-pair"))?;
    let d = distance_breakdown(kt.hull(), &t, &direction_set(n, default_direction_count(n)))?;
    let area = sphere_area(n);
    let s = (n as f64).sqrt();
    let b = block_sums(
        budget.directions,
        derive_seed(budget.seed, "quasi-mass"),
        2,
        |rng, acc| {
            let u = random_unit(rng, n);
            acc[0] += f.profile(&u).moment(n as u32 - 1).unwrap_or(f64::NAN);
            acc[1] += kt.hull().radial_at(&u).min(s).powi(n as i32);
        },
    );
    let count = budget.directions as u64;
    // ∫F against Vol(conv K ∩ √n D), which it dominates
    let (mr, mr_se) = b.jackknife(|m| area * m[0] / (area / n as f64 * m[1]));
    Ok(PerturbationResult {
        subject: k.name(),
        dim: n,
        positioned: kt.hull().clone(),
        t,
        alpha,
        functionals: None,
        l_t: pair.l_kf,
        l_f: pair.l_f,
        d_g: d.d_g,
        containment: d.containment,
        mass_ratio: Some(Estimate::new(mr, mr_se, count, b.seed())),
        second_moment: None,
        constants: constants.clone(),
    })
}

/// Finite `d_G(conv K, T)` and `L_T` in `[l_min, l_max]`, with
/// `d_G · C` as the quasi-convexity constant of `T` relative to `K`.
pub fn quasi_theorem_report(k: &QuasiBody, res: &PerturbationResult, budget: &Budget) -> Report {
    let c = &res.constants;
    let mut r = res.base_report("thm-1.4", budget);
    r.constant("quasi_c3", c.quasi_c3)
        .constant("l_min", c.l_min)
        .constant("l_max", c.l_max);
    r.exact("C", k.c_quasi())
        .measure("d_G_times_C", res.d_g.scale(k.c_quasi()));
    r.require(res.d_g.value.is_finite(), "d_G is not finite");
    let s = c.sigma;
    r.require(
        res.l_t.value + s * res.l_t.std_error >= c.l_min && res.l_t.value - s * res.l_t.std_error <= c.l_max,
        format!("L_T = {} outside [{}, {}]", res.l_t.value, c.l_min, c.l_max),
    );
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_cross(n: usize) -> QuasiBody {
        QuasiBody::new(vec![Body::cube(n), Body::cross(n, 2.5).unwrap()], None).unwrap()
    }

    #[test]
    fn radial_examples() {
        let q = QuasiBody::new(vec![Body::cube(2), Body::cross(2, 1.5).unwrap()], None).unwrap();
        assert_eq!(q.radial(&[1.0, 0.0]), 1.5);
        let single = QuasiBody::new(vec![Body::cube(2)], None).unwrap();
        assert_eq!(single.radial(&[0.6, 0.8]), Body::cube(2).radial_at(&[0.6, 0.8]));
        assert!((single.measured_c() - 1.0).abs() < 1e-12);
        for u in direction_set(2, 100) {
            assert!(q.radial(&u) <= q.hull().radial_at(&u) * (1.0 + 1e-9));
        }
        assert!(q.measured_c() > 1.0);
        assert!(QuasiBody::new(vec![Body::cube(2), Body::cross(2, 1.5).unwrap()], Some(1.0)).is_err());
    }

    #[test]
    fn union_volume_by_inclusion_exclusion() {
        let q = QuasiBody::new(vec![Body::cube(2), Body::cross(2, 1.5).unwrap()], None).unwrap();
        // square of side 2 and diamond of radius 1.5: overlap is the square
        // minus four corner triangles of leg 1/2
        let inter = 4.0 - 4.0 * 0.125;
        let expect = 4.0 + 4.5 - inter;
        assert!((q.volume(1000, 1).value - expect).abs() < 1e-9);
    }

    #[test]
    fn tail_integral_matches_series() {
        let a = 1.0;
        let b = 100.0;
        let quad = tail_integral(a, b, 4.0, 1);
        let series = tail_integral_series(a, b, 4.0, 1);
        assert!((quad / series - 1.0).abs() < 1e-10, "{quad} vs {series}");
        for n in 1..=6 {
            let q = tail_integral(1.0, 10.0, 2.0, n);
            let s = tail_integral_series(1.0, 10.0, 2.0, n);
            assert!((q / s - 1.0).abs() < 1e-10);
        }
        let t = one_dim_tail_bound(1.0, 10.0, 2.0, 3, 1.0).unwrap();
        assert!(t.minimal_c1 > 0.0);
        assert!(one_dim_tail_bound(1.0, 2.0, 2.0, 3, 1.0).is_err());
        let steeper = one_dim_tail_bound(1.0, 10.0, 4.0, 3, 1.0).unwrap();
        assert!(steeper.lhs < t.lhs);
    }

    #[test]
    fn quasi_density_structure() {
        let hull = Body::ball(3, 4.0).unwrap();
        let q = QuasiBody::new(vec![hull], None).unwrap();
        let f = build_f_quasi(&q, 2.0).unwrap();
        let s = 3f64.sqrt();
        assert_eq!(f.eval(&[s, 0.0, 0.0]), 1.0);
        let below = f.eval(&[s + 1e-12, 0.0, 0.0]);
        assert!((below - 1.0).abs() < 1e-9);
        assert_eq!(f.eval(&[0.0, 4.0, 0.0]), 0.0);
        let r: f64 = 3.0;
        let expect = (1.0 - (r - s) / (4.0 - s)).powf(6.0);
        assert!((f.eval(&[0.0, 0.0, r]) - expect).abs() < 1e-14);
    }

    #[test]
    fn m_ellipsoid_examples() {
        let budget = Budget {
            samples: 20_000,
            directions: 1000,
            seed: 3,
        };
        let ball = QuasiBody::new(vec![Body::unit_ball(3)], None).unwrap();
        let m = m_ellipsoid_surrogate(&ball, &budget).unwrap();
        assert!(m.overlap.value > 0.97, "{:?}", m.overlap);
        let bx = QuasiBody::new(vec![Body::cube(2)], None).unwrap();
        let m = m_ellipsoid_surrogate(&bx, &budget).unwrap();
        assert!(m.overlap.value >= 0.8 && m.overlap.value <= 1.0, "{:?}", m.overlap);
    }

    #[test]
    fn quasi_pipeline_end_to_end() {
        let budget = Budget {
            samples: 20_000,
            directions: 2000,
            seed: 5,
        };
        let k = cube_cross(3);
        assert!(k.measured_c() > 1.0);
        let c = Constants::default();
        let res = quasi_perturb(&k, &c, &budget).unwrap();
        assert!(res.alpha > 1.0);
        assert!(res.d_g.value.is_finite() && res.d_g.value >= 1.0);
        assert!(res.mass_ratio.unwrap().value >= 1.0 - 1e-2);
        let tail = quasi_tail_mass_check(&k, res.alpha, &c, &budget).unwrap();
        assert!(tail.value("tail_integral").is_some());
        let g = tail_grid(c.tail_c1).unwrap();
        assert!(g.value("points").unwrap() > 0.0);
    }
}
