//! Subspaces, central sections, projection marginals and the near-origin
//! perturbation.

use crate::body::Body;
use crate::constants::Constants;
use crate::directions::{default_direction_count, direction_set, SphereQuadrature};
use crate::distance::distance_breakdown;
use crate::error::{check_dim, invalid, Error, Result};
use crate::estimate::Estimate;
use crate::interpolation::InterpolationGauge;
use crate::linalg::{dot, norm, normalized};
use crate::logconcave::{body_from_density, l_pair, Concavity, Density, RadialProfile, Tail};
use crate::mc::{add_outer, block_map, block_sums, sym_len, unpack_sym};
use crate::pipeline::{
    fit_direction_count, hpoly_fit, mixed_volume_first, Budget, PerturbationDensity, PerturbationResult,
};
use crate::polytope::HPolytope;
use crate::report::Report;
use crate::rng::{derive_seed, rng_for};
use crate::sampling::{isotropic_constant_body, isotropic_transform, uniform_sample, volume_with};
use crate::special::unit_ball_volume;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::sync::Arc;

/// Orthonormality tolerance of subspace bases.
pub const ORTHO_TOL: f64 = 1e-12;

/// A linear subspace `E ⊆ ℝⁿ` with orthonormal bases of `E` and `E^⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<f64>>,
    complement: Vec<Vec<f64>>,
}

fn gram_schmidt_push(basis: &mut Vec<Vec<f64>>, v: &[f64]) -> bool {
    let mut w = v.to_vec();
    // two passes keep the basis orthonormal to rounding
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dot(&w, b);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    if norm(&w) < 1e-10 * norm(v).max(1.0) {
        return false;
    }
    basis.push(normalized(&w).expect("non-zero"));
    true
}

impl Subspace {
    /// Span of `vectors`; fails when they are linearly dependent.
    pub fn new(ambient: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(invalid("a subspace needs at least one spanning vector"));
        }
        let mut basis = Vec::new();
        for v in vectors {
            check_dim(ambient, v.len())?;
            if !gram_schmidt_push(&mut basis, v) {
                return Err(invalid("degenerate subspace: spanning vectors are dependent"));
            }
        }
        let mut full = basis.clone();
        for i in 0..ambient {
            if full.len() == ambient {
                break;
            }
            let mut e = vec![0.0; ambient];
            e[i] = 1.0;
            gram_schmidt_push(&mut full, &e);
        }
        let complement = full.split_off(basis.len());
        Ok(Self {
            ambient,
            basis,
            complement,
        })
    }

    /// Span of the listed coordinate axes.
    pub fn coordinate(ambient: usize, axes: &[usize]) -> Result<Self> {
        let vs: Vec<Vec<f64>> = axes
            .iter()
            .map(|&i| {
                let mut e = vec![0.0; ambient];
                if i < ambient {
                    e[i] = 1.0;
                }
                e
            })
            .collect();
        if axes.iter().any(|&i| i >= ambient) {
            return Err(invalid("coordinate axis out of range"));
        }
        Self::new(ambient, &vs)
    }

    /// Uniformly random `k`-dimensional subspace (QR of a Gaussian matrix).
    pub fn random(ambient: usize, k: usize, seed: u64) -> Result<Self> {
        if k == 0 || k > ambient {
            return Err(invalid(format!(
                "cannot draw a {k}-dimensional subspace of ℝ^{ambient}"
            )));
        }
        let mut rng = rng_for(derive_seed(seed, "subspace"));
        loop {
            let vs: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..ambient).map(|_| StandardNormal.sample(&mut rng)).collect())
                .collect();
            if let Ok(s) = Self::new(ambient, &vs) {
                return Ok(s);
            }
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.complement.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn complement_basis(&self) -> &[Vec<f64>] {
        &self.complement
    }

    pub fn complement_subspace(&self) -> Result<Self> {
        if self.complement.is_empty() {
            return Err(invalid("E = ℝⁿ has a trivial complement"));
        }
        Ok(Self {
            ambient: self.ambient,
            basis: self.complement.clone(),
            complement: self.basis.clone(),
        })
    }

    /// `Σ y_i b_i`.
    pub fn embed(&self, y: &[f64]) -> Vec<f64> {
        combine(&self.basis, y, self.ambient)
    }

    /// `Σ z_j c_j` over the complement basis.
    pub fn embed_complement(&self, z: &[f64]) -> Vec<f64> {
        combine(&self.complement, z, self.ambient)
    }

    /// Coordinates of the orthogonal projection onto `E`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| dot(b, x)).collect()
    }

    /// Largest deviation of the joint basis from orthonormality.
    pub fn orthonormality_defect(&self) -> f64 {
        let all: Vec<&Vec<f64>> = self.basis.iter().chain(&self.complement).collect();
        let mut worst: f64 = 0.0;
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }

    pub fn label(&self) -> String {
        format!("E[{}⊂ℝ^{}]", self.dim(), self.ambient)
    }
}

fn combine(vs: &[Vec<f64>], c: &[f64], ambient: usize) -> Vec<f64> {
    let mut x = vec![0.0; ambient];
    for (v, a) in vs.iter().zip(c) {
        x.iter_mut().zip(v).for_each(|(s, t)| *s += a * t);
    }
    x
}

/// `Vol_k(K ∩ E) = (1/k) ∫_{S^{k-1}} ρ_K^k` on the deterministic rule of `E`;
/// the error is the difference against the half-resolution rule.
pub fn section_volume(k: &Body, e: &Subspace) -> Result<Estimate> {
    check_dim(k.dim(), e.ambient())?;
    let d = e.dim();
    if d == 1 {
        return Ok(Estimate::exact(2.0 * k.radial_at(&e.basis()[0])));
    }
    let f = |q: &SphereQuadrature| q.surface_integral(|u| k.radial_at(&e.embed(u)).powi(d as i32)) / d as f64;
    let fine = SphereQuadrature::default_for(d);
    let v = f(&fine);
    let coarse = f(&fine.coarse());
    Ok(Estimate::new(v, (v - coarse).abs(), fine.len() as u64, 0))
}

/// Exact isotropy data when available: `(|Vol - 1|, relative spread of the
/// covariance eigenvalues)`.
pub fn isotropy_defect(k: &Body) -> Option<(f64, f64)> {
    let v = k.exact_volume()?;
    let c = k.exact_covariance()?;
    let eig = c.symmetric_eigenvalues();
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    Some(((v - 1.0).abs(), (hi - lo) / hi))
}

/// Fiber angles on the circle for codimension two.
pub const FIBER_ANGLES: usize = 256;
/// Iteration cap for fiber radii.
pub const FIBER_ITERATIONS: usize = 200;

/// Root of the convex `h` on `[0, hi]` with `h(0) = h0 <= 0 < h(hi)`, by
/// Illinois false position; bracket width below `1e-13·hi`.
fn crossing(h: impl Fn(f64) -> f64, h0: f64, hi: f64) -> f64 {
    let (mut a, mut fa) = (0.0, h0);
    let (mut b, mut fb) = (hi, h(hi));
    if fb <= 0.0 {
        return hi;
    }
    if fa >= 0.0 {
        return 0.0;
    }
    let mut side = 0;
    for _ in 0..FIBER_ITERATIONS {
        if b - a < 1e-13 * hi {
            break;
        }
        let mut c = b - fb * (b - a) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = h(c);
        if fc.abs() < 1e-15 {
            return c;
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    a
}
/// Gauss–Legendre nodes per profile piece of a marginal.
pub const MARGINAL_NODES: usize = 32;

/// `f(y) = Vol_m(K ∩ (y + E^⊥))` on `E`, `m = codim E`.
#[derive(Debug, Clone)]
pub struct MarginalDensity {
    body: Body,
    e: Subspace,
    projection: Body,
    fiber_rule: Option<SphereQuadrature>,
    radius: f64,
}

/// `P_E K` as an h-polytope in the coordinates of `E`: normals on the
/// direction set of `E`, offsets `h_K` of the embedded normals.
pub fn projection_body(k: &Body, e: &Subspace) -> Result<Body> {
    let d = e.dim();
    let dirs = direction_set(d, fit_direction_count(d));
    let offsets: Vec<f64> = dirs.iter().map(|u| k.support_at(&e.embed(u))).collect();
    Ok(Body::hpoly(HPolytope::new(dirs, offsets)?).with_name(format!("P_E({})", k.name())))
}

impl MarginalDensity {
    pub fn new(k: &Body, e: &Subspace) -> Result<Self> {
        check_dim(k.dim(), e.ambient())?;
        if e.codim() == 0 {
            return Err(invalid("the marginal on E = ℝⁿ has no fibers"));
        }
        let m = e.codim();
        let fiber_rule = match m {
            1 => None,
            2 => Some(SphereQuadrature::with_resolution(2, FIBER_ANGLES)),
            3 => Some(SphereQuadrature::with_resolution(3, 48)),
            _ => Some(SphereQuadrature::with_resolution(m, 4096)),
        };
        Ok(Self {
            body: k.clone(),
            e: e.clone(),
            projection: projection_body(k, e)?,
            fiber_rule,
            radius: k.outer_radius(),
        })
    }

    pub fn projection(&self) -> &Body {
        &self.projection
    }

    pub fn subspace(&self) -> &Subspace {
        &self.e
    }

    fn fiber_gauge(&self, base: &[f64], z: &[f64]) -> f64 {
        let mut x = self.e.embed_complement(z);
        x.iter_mut().zip(base).for_each(|(a, b)| *a += b);
        self.body.gauge_at(&x)
    }

    /// Exact chord length through `base` along the complement line.
    fn chord(&self, base: &[f64]) -> f64 {
        let g = |t: f64| self.fiber_gauge(base, &[t]);
        let r = self.radius * 1.01;
        let (mut a, mut b) = (-r, r);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut gc, mut gd) = (g(c), g(d));
        for _ in 0..120 {
            if gc < gd {
                b = d;
                d = c;
                gd = gc;
                c = b - phi * (b - a);
                gc = g(c);
            } else {
                a = c;
                c = d;
                gc = gd;
                d = a + phi * (b - a);
                gd = g(d);
            }
            if b - a < 1e-13 * r {
                break;
            }
        }
        let t0 = 0.5 * (a + b);
        if g(t0) > 1.0 {
            return 0.0;
        }
        let edge = |dir: f64| {
            let (mut lo, mut hi) = (0.0, 2.0 * r);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if g(t0 + dir * mid) <= 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        edge(1.0) + edge(-1.0)
    }

    /// Compass search for the point of the fiber with least gauge.
    fn fiber_center(&self, base: &[f64]) -> (Vec<f64>, f64) {
        let m = self.e.codim();
        let mut z = vec![0.0; m];
        let mut best = self.fiber_gauge(base, &z);
        let mut h = self.radius * 0.5;
        // Any interior point serves as a polar center; refine only while
        // the fiber is still missed.
        while h > 1e-10 * self.radius && (best > 1.0 || h > 1e-6 * self.radius) {
            let mut improved = false;
            for i in 0..m {
                for s in [1.0, -1.0] {
                    let mut c = z.clone();
                    c[i] += s * h;
                    let v = self.fiber_gauge(base, &c);
                    if v < best {
                        best = v;
                        z = c;
                        improved = true;
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        (z, best)
    }

    /// Fiber volume in polar coordinates around its least-gauge point.
    fn fiber_volume(&self, base: &[f64]) -> f64 {
        let m = self.e.codim();
        let rule = self.fiber_rule.as_ref().expect("codimension at least two");
        let (center, g) = self.fiber_center(base);
        if g > 1.0 {
            return 0.0;
        }
        let r = 2.0 * self.radius * 1.01;
        let radial = |u: &[f64]| {
            crossing(
                |t| {
                    let z: Vec<f64> = center.iter().zip(u).map(|(c, d)| c + t * d).collect();
                    self.fiber_gauge(base, &z) - 1.0
                },
                g - 1.0,
                r,
            )
        };
        let total: f64 = rule
            .points()
            .iter()
            .zip(rule.weights())
            .map(|(u, w)| w * radial(u).powi(m as i32))
            .sum();
        rule.normalization() * total / m as f64
    }

    fn value(&self, y: &[f64]) -> f64 {
        if self.projection.gauge_at(y) > 1.0 + 1e-12 {
            return 0.0;
        }
        let base = self.e.embed(y);
        if self.e.codim() == 1 {
            self.chord(&base)
        } else {
            self.fiber_volume(&base)
        }
    }
}

impl Density for MarginalDensity {
    fn dim(&self) -> usize {
        self.e.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.value(x)
    }

    fn concavity(&self) -> Concavity {
        Concavity::SConcave(self.e.codim() as f64)
    }

    fn profile(&self, theta: &[f64]) -> RadialProfile<'_> {
        let rho = self.projection.radial_at(theta);
        let theta = theta.to_vec();
        RadialProfile::new(
            move |r| {
                if r > rho {
                    return 0.0;
                }
                let y: Vec<f64> = theta.iter().map(|t| t * r).collect();
                self.value(&y)
            },
            Tail::Compact(rho),
            true,
        )
        .with_fixed_rule(MARGINAL_NODES)
    }

    fn support_body(&self) -> Option<Body> {
        Some(self.projection.clone())
    }

    fn label(&self) -> String {
        format!("marginal({}; {})", self.body.name(), self.e.label())
    }
}

pub fn projection_marginal(k: &Body, e: &Subspace) -> Result<MarginalDensity> {
    MarginalDensity::new(k, e)
}

/// `∫_E y yᵀ f(y) dy` by uniform sampling of the bounding box of `P_E K`,
/// against `Bᵀ (∫_K x xᵀ dx) B` from the exact moments of `K`.
pub fn marginal_covariance_check(k: &Body, e: &Subspace, samples: usize, seed: u64) -> Result<Report> {
    let f = MarginalDensity::new(k, e)?;
    let d = e.dim();
    let half = f.projection().bounding_half_widths();
    let box_vol: f64 = half.iter().map(|h| 2.0 * h).product();
    let b = block_sums(samples, derive_seed(seed, "marginal-cov"), sym_len(d), |rng, acc| {
        let y: Vec<f64> = half.iter().map(|h| h * (2.0 * rng.random::<f64>() - 1.0)).collect();
        let v = f.eval(&y);
        if v > 0.0 {
            add_outer(acc, &y, v);
        }
    });
    let (vol, cov) = match (k.exact_volume(), k.exact_covariance()) {
        (Some(v), Some(c)) => (v, c),
        _ => return Err(invalid("the covariance identity needs a body with exact moments")),
    };
    let mut r = Report::new("prop-5.2", format!("{} (marginal covariance)", k.name()));
    r.input("samples", samples).input("seed", seed).input("subspace_dim", d);
    let target = cov * vol;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            let (v, se) = b.jackknife(|m| unpack_sym(m, d, box_vol)[(i, j)]);
            let bi = &e.basis()[i];
            let bj = &e.basis()[j];
            let exact: f64 = (0..k.dim())
                .map(|a| (0..k.dim()).map(|c| bi[a] * target[(a, c)] * bj[c]).sum::<f64>())
                .sum();
            let est = Estimate::new(v, se, samples as u64, b.seed());
            r.measure(&format!("moment_{i}{j}"), est)
                .exact(&format!("exact_{i}{j}"), exact);
            let z = if se > 0.0 {
                (v - exact).abs() / se
            } else if (v - exact).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
    }
    r.exact("max_z", worst);
    r.require(worst <= 3.0, format!("marginal second moments differ by {worst:.2} σ"));
    Ok(r)
}

/// `f(0)` against `Vol(K ∩ E^⊥)`.
pub fn fiber_consistency(k: &Body, e: &Subspace) -> Result<(f64, Estimate)> {
    let f = MarginalDensity::new(k, e)?;
    let at_zero = f.f0();
    let section = section_volume(k, &e.complement_subspace()?)?;
    Ok((at_zero, section))
}

/// `T = K_f` for the marginal `f` of `K` on `E`, compared with `P_E K`.
pub fn projection_perturb(
    k: &Body,
    e: &Subspace,
    constants: &Constants,
    budget: &Budget,
) -> Result<PerturbationResult> {
    let d = e.dim();
    if e.codim() == 0 {
        return Err(Error::Hypothesis("E = ℝⁿ leaves s = 0 in the marginal exponent".into()));
    }
    if d < 2 {
        return Err(Error::Hypothesis("projection perturbation needs dim E ≥ 2".into()));
    }
    let f = Arc::new(MarginalDensity::new(k, e)?);
    let proj = f.projection().clone();
    let density: Arc<dyn Density> = f.clone();
    let t = body_from_density(density.clone())?.with_name(format!("T[{}]", f.label()));
    let pair = l_pair(density.as_ref(), budget.directions, derive_seed(budget.seed, "l-pair"))?;
    let dist = distance_breakdown(&proj, &t, &direction_set(d, default_direction_count(d)))?;
    Ok(PerturbationResult {
        subject: format!("{} on {}", k.name(), e.label()),
        dim: d,
        positioned: proj,
        t,
        alpha: e.codim() as f64 / d as f64,
        functionals: None,
        l_t: pair.l_kf,
        l_f: pair.l_f,
        d_g: dist.d_g,
        containment: dist.containment,
        mass_ratio: None,
        second_moment: None,
        constants: constants.clone(),
    })
}

/// `d_G(P_E K, T) <= distance_factor · max(1, dim E / codim E)` and a finite
/// `L_T`.
pub fn projection_report(res: &PerturbationResult, e: &Subspace, budget: &Budget) -> Report {
    let c = &res.constants;
    let bound = c.distance_factor * (e.dim() as f64 / e.codim() as f64).max(1.0);
    let mut r = Report::new("prop-5.2", res.subject.clone());
    r.input("directions", budget.directions).input("seed", budget.seed);
    r.constant("distance_factor", c.distance_factor);
    r.exact("s", e.codim() as f64)
        .exact("lambda", e.dim() as f64 / e.ambient() as f64);
    r.measure("d_G", res.d_g)
        .measure("L_T", res.l_t)
        .measure("L_f", res.l_f);
    r.exact("distance_bound", bound);
    r.require(res.d_g.value.is_finite(), "d_G is not finite");
    r.require(
        res.d_g.value <= bound,
        format!("d_G = {} exceeds {bound}", res.d_g.value),
    );
    r.require(res.l_t.value.is_finite() && res.l_t.value > 0.0, "L_T is not finite");
    r
}

/// `Vol(K ∩ E)^{1/n} <= section_factor · L_K` for the isotropic image of
/// `K`, over `per_lambda` random subspaces at `λ ∈ {1/3, 1/2}`.
pub fn section_check(k: &Body, per_lambda: usize, constants: &Constants, budget: &Budget) -> Result<Report> {
    let n = k.dim();
    let (_, iso) = isotropic_transform(k, budget.samples, derive_seed(budget.seed, "position"))?;
    let a = isotropic_constant_body(&iso, budget.samples, derive_seed(budget.seed, "L"))?;
    let mut r = Report::new("lem-5.1", k.name());
    r.input("seed", budget.seed).input("subspaces_per_lambda", per_lambda);
    r.constant("section_factor", constants.section_factor);
    r.measure("A", a);
    if let Some((dv, spread)) = isotropy_defect(&iso) {
        r.exact("volume_defect", dv).exact("covariance_spread", spread);
        r.require(dv < 1e-6 && spread < 1e-6, "positioned body is not isotropic");
    }
    let mut worst: f64 = 0.0;
    for (li, lambda) in [1.0 / 3.0, 0.5].into_iter().enumerate() {
        let d = ((lambda * n as f64).round() as usize).clamp(1, n - 1);
        for j in 0..per_lambda {
            let e = Subspace::random(n, d, derive_seed(budget.seed, &format!("section-{li}-{j}")))?;
            let v = section_volume(&iso, &e)?;
            worst = worst.max(v.value.powf(1.0 / n as f64));
        }
    }
    r.exact("max_section_root", worst)
        .exact("bound", constants.section_factor * a.value);
    r.require(
        worst <= constants.section_factor * a.value,
        format!("Vol(K∩E)^(1/n) = {worst} exceeds {} · A", constants.section_factor),
    );
    Ok(r)
}

/// Branch taken by the near-origin perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `K ⊆ 2γ√n D`: `K` itself is returned.
    Trivial,
    Full,
}

/// Outcome of the near-origin perturbation.
#[derive(Debug, Clone, Serialize)]
pub struct NearOrigin {
    pub branch: Branch,
    pub result: PerturbationResult,
    pub gamma: f64,
    pub beta: f64,
    pub delta: f64,
    pub mass: Estimate,
    /// `V(K,1;C,n-1)/Vol(C)` and its bound `1 + βδ/γ`, full branch only.
    pub surface_ratio: Option<f64>,
    pub surface_bound: f64,
}

impl NearOrigin {
    pub fn report(&self, budget: &Budget) -> Report {
        let c = &self.result.constants;
        let mut r = Report::new("prop-5.3", self.result.subject.clone());
        r.input("gamma", self.gamma)
            .input("beta", self.beta)
            .input("delta", self.delta);
        r.input("branch", self.branch).input("seed", budget.seed);
        r.constant("c_prime", c.c_prime)
            .constant("near_origin_l_factor", c.near_origin_l_factor);
        r.measure("mass_near_origin", self.mass);
        r.measure("L_T", self.result.l_t).measure("d_G", self.result.d_g);
        r.exact("alpha", self.result.alpha)
            .exact("surface_bound", self.surface_bound);
        let l_bound = c.near_origin_l_factor * self.gamma;
        r.exact("L_bound", l_bound);
        if let Some(s) = self.surface_ratio {
            r.exact("surface_ratio", s)
                .exact("surface_margin", self.surface_bound - s);
            r.require(
                s < self.surface_bound,
                format!("V(K,1;C,n-1)/Vol(C) = {s} reaches {}", self.surface_bound),
            );
        }
        r.require(self.result.d_g.value.is_finite(), "d_G is not finite");
        r.require(
            self.result.l_t.value - c.sigma * self.result.l_t.std_error <= l_bound,
            format!("L_T = {} exceeds {l_bound}", self.result.l_t.value),
        );
        r
    }
}

/// Perturbation of a volume-1 body with mass near the origin:
/// `Vol(K ∩ γ√n D) > e^{-δ√n}` and `K ⊆ βn D`.
pub fn near_origin_perturb(
    k: &Body,
    gamma: f64,
    beta: f64,
    delta: f64,
    constants: &Constants,
    budget: &Budget,
) -> Result<NearOrigin> {
    let n = k.dim();
    let rn = (n as f64).sqrt();
    if !(gamma > 0.0 && beta > 0.0 && delta > 0.0) {
        return Err(invalid("γ, β and δ must be positive"));
    }
    let vol = volume_with(k, budget.samples, derive_seed(budget.seed, "volume"));
    if (vol.value - 1.0).abs() > 1e-3 + constants.sigma * vol.std_error {
        return Err(Error::Hypothesis(format!("volume: Vol(K) = {} is not 1", vol.value)));
    }
    let r_out = k.outer_radius();
    if r_out > beta * n as f64 * (1.0 + 1e-12) {
        return Err(Error::Hypothesis(format!(
            "containment: K ⊄ βn D (outer radius {r_out} > {})",
            beta * n as f64
        )));
    }
    let pts = uniform_sample(k, budget.samples, derive_seed(budget.seed, "mass-points"))?;
    let inner = gamma * rn;
    let blocks = block_map(&pts, 0, 1, |x, acc| {
        if norm(x) <= inner {
            acc[0] += 1.0;
        }
    });
    let (p, se) = blocks.jackknife(|m| m[0]);
    let mass = Estimate::new(p, se, budget.samples as u64, derive_seed(budget.seed, "mass-points")).product(&vol);
    let threshold = (-delta * rn).exp();
    if !(mass.value > threshold) {
        return Err(Error::Hypothesis(format!(
            "mass: Vol(K ∩ γ√n D) = {} does not exceed e^(-δ√n) = {threshold}",
            mass.value
        )));
    }
    let surface_bound = 1.0 + beta * delta / gamma;
    let dirs = direction_set(n, default_direction_count(n));
    if r_out <= 2.0 * inner {
        let l = isotropic_constant_body(k, budget.samples, derive_seed(budget.seed, "L"))?;
        let result = PerturbationResult {
            subject: k.name(),
            dim: n,
            positioned: k.clone(),
            t: k.clone(),
            alpha: 0.0,
            functionals: None,
            l_t: l,
            l_f: l,
            d_g: Estimate::exact(1.0),
            containment: Estimate::exact(1.0),
            mass_ratio: None,
            second_moment: None,
            constants: constants.clone(),
        };
        return Ok(NearOrigin {
            branch: Branch::Trivial,
            result,
            gamma,
            beta,
            delta,
            mass,
            surface_ratio: None,
            surface_bound,
        });
    }
    let core = Body::intersection(vec![k.clone(), Body::ball(n, 2.0 * inner)?])?;
    let fit = hpoly_fit(&core, &direction_set(n, fit_direction_count(n)))?;
    let surface_ratio = mixed_volume_first(k, &fit)? / fit.volume();
    let alpha = constants.c_prime * surface_bound;
    let gauge = InterpolationGauge::new(k.clone(), core)?;
    let f: Arc<dyn Density> = Arc::new(PerturbationDensity::new(gauge, alpha * n as f64)?);
    let t = body_from_density(f.clone())?.with_name(format!("T[{}]", k.name()));
    let pair = l_pair(f.as_ref(), budget.directions, derive_seed(budget.seed, "l-pair"))?;
    let d = distance_breakdown(k, &t, &dirs)?;
    Ok(NearOrigin {
        branch: Branch::Full,
        result: PerturbationResult {
            subject: k.name(),
            dim: n,
            positioned: k.clone(),
            t,
            alpha,
            functionals: None,
            l_t: pair.l_kf,
            l_f: pair.l_f,
            d_g: d.d_g,
            containment: d.containment,
            mass_ratio: None,
            second_moment: None,
            constants: constants.clone(),
        },
        gamma,
        beta,
        delta,
        mass,
        surface_ratio: Some(surface_ratio),
        surface_bound,
    })
}

/// Concavity of `t -> log Vol(K ∩ tD)` on `points` radii up to the outer
/// radius, with common uniform samples of a volume-1 `K`.
pub fn log_volume_concavity(k: &Body, points: usize, budget: &Budget) -> Result<Report> {
    if points < 3 {
        return Err(invalid("need at least three radii"));
    }
    let r_out = k.outer_radius();
    let r_in = k.inner_radius();
    let grid: Vec<f64> = (0..points)
        .map(|i| r_in * 0.5 + (r_out - r_in * 0.5) * i as f64 / (points - 1) as f64)
        .collect();
    let pts = uniform_sample(k, budget.samples, derive_seed(budget.seed, "log-volume"))?;
    let g = grid.clone();
    let blocks = block_map(&pts, 0, points, move |x, acc| {
        let r = norm(x);
        for (a, t) in acc.iter_mut().zip(&g) {
            if r <= *t {
                *a += 1.0;
            }
        }
    });
    let mut r = Report::new("prop-5.3", format!("{} (log-volume concavity)", k.name()));
    r.input("radii", points).input("seed", budget.seed);
    let mut worst: f64 = f64::NEG_INFINITY;
    for i in 1..points - 1 {
        let (v, se) = blocks.jackknife(|m| {
            if m[i - 1] <= 0.0 {
                return 0.0;
            }
            m[i - 1].ln() - 2.0 * m[i].ln() + m[i + 1].ln()
        });
        let z = if se > 0.0 {
            v / se
        } else if v > 1e-12 {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(z);
    }
    r.exact("max_second_difference_z", worst);
    r.require(
        worst <= 3.0,
        format!("log Vol(K ∩ tD) convex beyond 3σ (z = {worst:.2})"),
    );
    Ok(r)
}

/// Closed-form `Vol(K ∩ E)` for the centered ball of radius `r`.
pub fn ball_section_volume(r: f64, k: usize) -> f64 {
    unit_ball_volume(k) * r.powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn subspace_bases_are_orthonormal() {
        let e = Subspace::random(5, 2, 7).unwrap();
        assert!(e.orthonormality_defect() < ORTHO_TOL);
        assert_eq!(e.dim() + e.codim(), 5);
        assert!(Subspace::new(3, &[vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]]).is_err());
        let c = e.complement_subspace().unwrap();
        assert_eq!(c.dim(), 3);
        let x = e.embed(&[0.3, -0.4]);
        let y = e.project(&x);
        assert!((y[0] - 0.3).abs() < 1e-14 && (y[1] + 0.4).abs() < 1e-14);
    }

    #[test]
    fn section_examples() {
        let cube = Body::boxed(vec![0.5; 3]).unwrap();
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        let v = section_volume(&cube, &e).unwrap();
        assert!((v.value - 1.0).abs() < 1e-3, "{v:?}");
        let r = (3.0 / (4.0 * PI)).powf(1.0 / 3.0);
        let ball = Body::ball(3, r).unwrap();
        for seed in [1, 2] {
            let e = Subspace::random(3, 2, seed).unwrap();
            let v = section_volume(&ball, &e).unwrap();
            assert!((v.value - PI * r * r).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_examples() {
        let r = 1.3;
        let ball = Body::ball(3, r).unwrap();
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        let f = projection_marginal(&ball, &e).unwrap();
        let y = [0.4, 0.5];
        let expect = 2.0 * (r * r - 0.41f64).sqrt();
        assert!((f.eval(&y) - expect).abs() < 1e-9);
        let cube = Body::cube(4);
        let e = Subspace::coordinate(4, &[0, 1]).unwrap();
        let f = projection_marginal(&cube, &e).unwrap();
        let a = f.eval(&[0.1, -0.7]);
        let b = f.eval(&[0.9, 0.3]);
        assert!((a - 4.0).abs() < 2e-3, "{a}");
        assert!((a - b).abs() < 1e-9);
        assert_eq!(f.eval(&[1.2, 0.0]), 0.0);
        let (at_zero, section) = fiber_consistency(&cube, &e).unwrap();
        assert!((at_zero - section.value).abs() <= 3.0 * section.std_error + 2e-3);
    }

    #[test]
    fn projection_rejects_full_space() {
        let e = Subspace::coordinate(2, &[0, 1]).unwrap();
        let c = Constants::default();
        assert!(projection_perturb(&Body::cube(2), &e, &c, &Budget::new(1)).is_err());
    }

    #[test]
    fn near_origin_trivial_branch() {
        let r = (1.0 / unit_ball_volume(3)).powf(1.0 / 3.0);
        let ball = Body::ball(3, r).unwrap();
        let budget = Budget {
            samples: 20_000,
            directions: 1000,
            seed: 1,
        };
        let out = near_origin_perturb(&ball, 0.5, 1.0, 1.0, &Constants::default(), &budget).unwrap();
        assert_eq!(out.branch, Branch::Trivial);
        let err = near_origin_perturb(&ball, 0.5, 0.1, 1.0, &Constants::default(), &budget).unwrap_err();
        assert!(err.to_string().contains("containment"));
    }
}
