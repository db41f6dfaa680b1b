//! The main perturbation: from a body `K`, the density
//! `F = (1 - f_K)^{αn}` with `f_K` the interpolation gauge between the core
//! `K ∩ (1/M′) D` and `K`, and the body `T = K_F`.

use crate::body::Body;
use crate::constants::Constants;
use crate::directions::default_direction_count;
use crate::directions::{direction_set, random_unit, SphereQuadrature};
use crate::distance::distance_breakdown;
use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::interpolation::InterpolationGauge;
use crate::logconcave::{body_from_density, l_pair, Concavity, Density, RadialProfile, Tail};
use crate::mc::{block_map, block_sums};
use crate::polytope::HPolytope;
use crate::report::Report;
use crate::rng::{derive_seed, par_map};
use crate::sampling::{isotropic_transform, norm_functionals, uniform_sample, volume_with, NormFunctionals};
use crate::special::sphere_area;
use serde::Serialize;
use std::sync::Arc;

/// Monte Carlo budgets of a pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Budget {
    /// Uniform samples for volumes, covariances and mass checks.
    pub samples: usize,
    /// Random directions for polar-coordinate estimates.
    pub directions: usize,
    pub seed: u64,
}

impl Budget {
    pub fn new(seed: u64) -> Self {
        Self {
            samples: 100_000,
            directions: 16_384,
            seed,
        }
    }
}

/// `K ∩ (1/M′) D`; `K` itself when it already lies in the ball.
pub fn core_body(k: &Body, m_prime: f64) -> Result<Body> {
    if !(m_prime > 0.0) || !m_prime.is_finite() {
        return Err(crate::error::invalid("M′ must be positive"));
    }
    let r = 1.0 / m_prime;
    if k.outer_radius() <= r * (1.0 + 1e-12) {
        return Ok(k.clone());
    }
    let ball = Body::ball(k.dim(), r)?;
    Ok(Body::intersection(vec![k.clone(), ball])?.with_name(format!("core({})", k.name())))
}

/// `(1 - f(x))^p` on `K` and `0` outside, with `f` the interpolation gauge
/// between a core `C ⊆ K` and `K`.
#[derive(Debug, Clone)]
pub struct PerturbationDensity {
    gauge: Arc<InterpolationGauge>,
    exponent: f64,
}

impl PerturbationDensity {
    pub fn new(gauge: InterpolationGauge, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(crate::error::invalid("exponent must be positive"));
        }
        Ok(Self {
            gauge: Arc::new(gauge),
            exponent,
        })
    }

    pub fn gauge(&self) -> &InterpolationGauge {
        &self.gauge
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }
}

impl Density for PerturbationDensity {
    fn dim(&self) -> usize {
        self.gauge.outer().dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        if self.gauge.outer().gauge_at(x) > 1.0 {
            return 0.0;
        }
        (1.0 - self.gauge.eval_unchecked(x)).powf(self.exponent)
    }

    fn concavity(&self) -> Concavity {
        Concavity::LineSConcave(self.exponent)
    }

    fn profile(&self, theta: &[f64]) -> RadialProfile<'_> {
        let rho_k = self.gauge.outer().radial_at(theta);
        let rho_c = self.gauge.inner().radial_at(theta).min(rho_k);
        let env = self.gauge.ray_envelope(theta);
        let mut bps: Vec<f64> = env
            .breaks
            .iter()
            .copied()
            .filter(|b| *b > rho_c && *b < rho_k)
            .collect();
        bps.push(rho_c);
        let p = self.exponent;
        RadialProfile::new(
            move |r| {
                if r > rho_k {
                    0.0
                } else if r <= rho_c {
                    1.0
                } else {
                    (1.0 - env.gauge(r)).powf(p)
                }
            },
            Tail::Compact(rho_k),
            true,
        )
        .with_breakpoints(bps)
    }

    fn support_body(&self) -> Option<Body> {
        Some(self.gauge.outer().clone())
    }

    fn label(&self) -> String {
        format!("F[{}; p={:.4}]", self.gauge.outer().name(), self.exponent)
    }
}

/// `F = (1 - f_K)^{αn}` with core `K ∩ (1/M′) D`, `M′` on the default
/// quadrature.
pub fn build_f(k: &Body, alpha: f64) -> Result<PerturbationDensity> {
    let nf = norm_functionals(k, &SphereQuadrature::default_for(k.dim()))?;
    build_f_with_core(k, &core_body(k, nf.m_prime.value)?, alpha)
}

pub fn build_f_with_core(k: &Body, core: &Body, alpha: f64) -> Result<PerturbationDensity> {
    if !(alpha > 0.0) {
        return Err(crate::error::invalid("alpha must be positive"));
    }
    let g = InterpolationGauge::new(k.clone(), core.clone())?;
    PerturbationDensity::new(g, alpha * k.dim() as f64)
}

/// `∫_K F` against `2 Vol(core)` by importance sampling: uniform points of
/// `K` weighted by `F`, paired with the core indicator.
pub fn mass_concentration_check(k: &Body, constants: &Constants, budget: &Budget) -> Result<Report> {
    let quad = SphereQuadrature::default_for(k.dim());
    let nf = norm_functionals(k, &quad)?;
    let alpha = constants.c_alpha * nf.m.value * nf.m_star.value;
    let core = core_body(k, nf.m_prime.value)?;
    let f = build_f_with_core(k, &core, alpha)?;
    let pts = uniform_sample(k, budget.samples, derive_seed(budget.seed, "mass-points"))?;
    let blocks = block_map(&pts, budget.seed, 2, |x, acc| {
        acc[0] += f.eval(x);
        if core.gauge_at(x) <= 1.0 {
            acc[1] += 1.0;
        }
    });
    let vol = volume_with(k, budget.samples, derive_seed(budget.seed, "mass-volume"));
    let count = budget.samples as u64;
    let s = blocks.seed();
    let (mf, mf_se) = blocks.jackknife(|m| m[0]);
    let (mc, mc_se) = blocks.jackknife(|m| m[1]);
    let (gap, gap_se) = blocks.jackknife(|m| 2.0 * m[1] - m[0]);
    let int_f = Estimate::new(mf, mf_se, count, s).product(&vol);
    let vol_core = Estimate::new(mc, mc_se, count, s).product(&vol);
    let margin = gap / gap_se;
    let mut r = Report::new("prop-3.1", k.name());
    r.input("samples", budget.samples).input("seed", budget.seed);
    r.constant("c_alpha", constants.c_alpha)
        .constant("sigma", constants.sigma);
    r.measure("M", nf.m)
        .measure("M_star", nf.m_star)
        .measure("M_prime", nf.m_prime);
    r.exact("alpha", alpha);
    r.measure("integral_F", int_f).measure("vol_core", vol_core);
    r.measure(
        "twice_vol_core_minus_integral_F",
        Estimate::new(gap, gap_se, count, s).product(&vol),
    );
    r.exact("margin_sigmas", if gap_se > 0.0 { margin } else { f64::INFINITY });
    let ok = if gap_se > 0.0 {
        margin > constants.sigma
    } else {
        gap > 0.0
    };
    r.require(
        ok,
        format!("∫F < 2 Vol(core) not established with {} σ margin", constants.sigma),
    );
    Ok(r)
}

/// `V(K, 1; C, n-1) = (1/n) Σ_i area(F_i) h_K(ν_i)` over the facets of `C`.
pub fn mixed_volume_first(k: &Body, c: &HPolytope) -> Result<f64> {
    crate::error::check_dim(k.dim(), c.dim())?;
    let areas = c.facet_areas();
    let n = k.dim() as f64;
    let hs = par_map(c.normals(), |u| k.support_at(u));
    Ok(areas.iter().zip(&hs).map(|(a, h)| a * h).sum::<f64>() / n)
}

/// Outer h-polytope fit of a body: normals from `dirs`, offsets `h(u)`.
pub fn hpoly_fit(body: &Body, dirs: &[Vec<f64>]) -> Result<HPolytope> {
    let mut normals: Vec<Vec<f64>> = dirs.to_vec();
    if let Some(ns) = body.facet_normals() {
        normals.extend(ns);
    }
    let offsets = par_map(&normals, |u| body.support_at(u));
    HPolytope::new(normals, offsets)
}

/// Facet count of the h-polytope fits used by surface checks.
pub fn fit_direction_count(dim: usize) -> usize {
    match dim {
        1 | 2 => 360,
        3 => 400,
        _ => 600,
    }
}

/// `V_1/V_0 = V(K,1;C,n-1)/Vol(C) <= 2 M′ M* <= 4 M M*` with `C` an
/// h-polytope fit of the core.
pub fn mixed_volume_check(k: &Body) -> Result<Report> {
    let n = k.dim();
    let nf = norm_functionals(k, &SphereQuadrature::default_for(n))?;
    let core = core_body(k, nf.m_prime.value)?;
    let fit = hpoly_fit(&core, &direction_set(n, fit_direction_count(n)))?;
    let v1 = mixed_volume_first(k, &fit)?;
    let v0 = fit.volume();
    let ratio = v1 / v0;
    let two = 2.0 * nf.m_prime.value * nf.m_star.value;
    let four = 4.0 * nf.m.value * nf.m_star.value;
    let mut r = Report::new("prop-3.1", format!("{} (mixed volume)", k.name()));
    r.input("fit_facets", fit.normals().len());
    r.measure("M", nf.m)
        .measure("M_star", nf.m_star)
        .measure("M_prime", nf.m_prime);
    r.exact("V1", v1).exact("V0", v0).exact("V1_over_V0", ratio);
    r.exact("two_Mprime_Mstar", two).exact("four_M_Mstar", four);
    r.require(ratio <= four, format!("V1/V0 = {ratio} exceeds 4 M M* = {four}"));
    if ratio > two {
        r.note("V1/V0 exceeds 2 M′ M* on this fit");
    }
    Ok(r)
}

/// Outcome of a perturbation run.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationResult {
    pub subject: String,
    pub dim: usize,
    /// The body the density was built on (after positioning).
    #[serde(skip)]
    pub positioned: Body,
    #[serde(skip)]
    pub t: Body,
    pub alpha: f64,
    pub functionals: Option<NormFunctionals>,
    pub l_t: Estimate,
    pub l_f: Estimate,
    pub d_g: Estimate,
    pub containment: Estimate,
    pub mass_ratio: Option<Estimate>,
    /// `E_μ |x|² · M′²` under `μ = F dx / ∫F`, when the run has a core.
    pub second_moment: Option<Estimate>,
    pub constants: Constants,
}

impl PerturbationResult {
    /// `d_G / α`.
    pub fn d_g_over_alpha(&self) -> Estimate {
        self.d_g.scale(1.0 / self.alpha)
    }

    /// Inputs and measurements shared by every report on this result.
    pub fn base_report(&self, check: &str, budget: &Budget) -> Report {
        let mut r = Report::new(check, self.subject.clone());
        r.input("dim", self.dim).input("seed", budget.seed);
        r.input("samples", budget.samples)
            .input("directions", budget.directions);
        r.exact("alpha", self.alpha);
        if let Some(f) = &self.functionals {
            r.measure("M", f.m)
                .measure("M_star", f.m_star)
                .measure("M_prime", f.m_prime);
            r.measure("M_M_star", f.m.product(&f.m_star));
        }
        r.measure("L_T", self.l_t).measure("L_F", self.l_f);
        r.measure("d_G", self.d_g)
            .measure("d_G_over_alpha", self.d_g_over_alpha());
        r.measure("containment", self.containment);
        if let Some(m) = self.mass_ratio {
            r.measure("mass_ratio", m);
        }
        if let Some(m) = self.second_moment {
            r.measure("second_moment_Mprime2", m);
        }
        r
    }

    /// The main statement: finite distance `<= distance_factor · α` and
    /// `L_T` in `[l_min, l_max]`.
    pub fn theorem_report(&self, budget: &Budget) -> Report {
        let c = &self.constants;
        let mut r = self.base_report("thm-1.2", budget);
        r.constant("c_alpha", c.c_alpha)
            .constant("distance_factor", c.distance_factor);
        r.constant("l_min", c.l_min).constant("l_max", c.l_max);
        r.require(self.d_g.value.is_finite(), "d_G is not finite");
        r.require(
            self.d_g.value <= c.distance_factor * self.alpha,
            format!("d_G = {} exceeds {} α", self.d_g.value, c.distance_factor),
        );
        let k = c.sigma;
        r.require(
            self.l_t.value + k * self.l_t.std_error >= c.l_min && self.l_t.value - k * self.l_t.std_error <= c.l_max,
            format!("L_T = {} outside [{}, {}]", self.l_t.value, c.l_min, c.l_max),
        );
        r
    }

    /// The median and second-moment steps: `μ_F(core) > 1/2` and
    /// `E_μ|x|² M′² <= second_moment_bound`.
    pub fn corollary_report(&self, budget: &Budget) -> Report {
        let c = &self.constants;
        let mut r = self.base_report("cor-3.2", budget);
        r.constant("second_moment_bound", c.second_moment_bound)
            .constant("sigma", c.sigma);
        if let Some(m) = self.mass_ratio {
            let core_mass = Estimate::exact(1.0).ratio(&m);
            r.measure("mu_core", core_mass);
            r.require(
                core_mass.value - c.sigma * core_mass.std_error > 0.5,
                "μ_F(core) <= 1/2",
            );
        }
        if let Some(s) = self.second_moment {
            r.require(
                s.value - c.sigma * s.std_error <= c.second_moment_bound,
                format!("E|x|² M′² = {} exceeds {}", s.value, c.second_moment_bound),
            );
        }
        r
    }
}

/// `∫F`, `E_μ|x|²` and `Vol(core)` by polar coordinates:
/// `(∫F / Vol(core), E_μ|x|²)`.
fn polar_mass(f: &dyn Density, core: &Body, budget: &Budget) -> Result<(Estimate, Estimate)> {
    let n = f.dim();
    let area = sphere_area(n);
    let b = block_sums(
        budget.directions,
        derive_seed(budget.seed, "polar-mass"),
        3,
        |rng, acc| {
            let theta = random_unit(rng, n);
            let p = f.profile(&theta);
            acc[0] += p.moment(n as u32 - 1).unwrap_or(f64::NAN);
            acc[1] += p.moment(n as u32 + 1).unwrap_or(f64::NAN);
            acc[2] += core.radial_at(&theta).powi(n as i32);
        },
    );
    if !(b.means()[0] > 0.0) {
        return Err(Error::ZeroMass);
    }
    let count = budget.directions as u64;
    let (ratio, ratio_se) = b.jackknife(|m| area * m[0] / (area / n as f64 * m[2]));
    let (sm, sm_se) = b.jackknife(|m| m[1] / m[0]);
    Ok((
        Estimate::new(ratio, ratio_se, count, b.seed()),
        Estimate::new(sm, sm_se, count, b.seed()),
    ))
}

/// Positions `K` isotropically (standing in for the l-position), builds
/// `F` with `α = c_alpha M M*` and returns `T = K_F` with its statistics.
pub fn perturb_body(k: &Body, constants: &Constants, budget: &Budget) -> Result<PerturbationResult> {
    let n = k.dim();
    let (_, positioned) = isotropic_transform(k, budget.samples, derive_seed(budget.seed, "position"))?;
    let quad = SphereQuadrature::default_for(n);
    let nf = norm_functionals(&positioned, &quad)?;
    let alpha = constants.c_alpha * nf.m.value * nf.m_star.value;
    if !(alpha > 1.0) {
        return Err(Error::Hypothesis(format!("α = {alpha} must exceed 1 so that αn > n")));
    }
    let core = core_body(&positioned, nf.m_prime.value)?;
    let f: Arc<dyn Density> = Arc::new(build_f_with_core(&positioned, &core, alpha)?);
    let t = body_from_density(f.clone())?.with_name(format!("T[{}]", k.name()));
    let pair = l_pair(f.as_ref(), budget.directions, derive_seed(budget.seed, "l-pair"))?;
    let d = distance_breakdown(&positioned, &t, &direction_set(n, default_direction_count(n)))?;
    let (mass_ratio, e2) = polar_mass(f.as_ref(), &core, budget)?;
    let mp2 = nf.m_prime.value * nf.m_prime.value;
    Ok(PerturbationResult {
        subject: k.name(),
        dim: n,
        positioned,
        t,
        alpha,
        functionals: Some(nf),
        l_t: pair.l_kf,
        l_f: pair.l_f,
        d_g: d.d_g,
        containment: d.containment,
        mass_ratio: Some(mass_ratio),
        second_moment: Some(e2.scale(mp2)),
        constants: constants.clone(),
    })
}

/// Shift of `L_T` when `M′` and `α` move by one standard error each, with
/// the same directions; the part of the `L_T` error that the sphere grid
/// of the norm functionals contributes.
pub fn functional_sensitivity(res: &PerturbationResult, budget: &Budget) -> Result<f64> {
    let Some(nf) = res.functionals else {
        return Ok(0.0);
    };
    let rel_alpha = (nf.m.std_error / nf.m.value).hypot(nf.m_star.std_error / nf.m_star.value);
    let shifted = |m_prime: f64, alpha: f64| -> Result<f64> {
        let core = core_body(&res.positioned, m_prime)?;
        let f = build_f_with_core(&res.positioned, &core, alpha)?;
        Ok(l_pair(&f, budget.directions, derive_seed(budget.seed, "l-pair"))?
            .l_kf
            .value)
    };
    let by_m_prime = shifted(nf.m_prime.value + nf.m_prime.std_error, res.alpha)? - res.l_t.value;
    let by_alpha = shifted(nf.m_prime.value, res.alpha * (1.0 + rel_alpha))? - res.l_t.value;
    Ok(by_m_prime.hypot(by_alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn core_examples() {
        let d = Body::unit_ball(2);
        assert_eq!(core_body(&d, 1.0).unwrap().kind(), "ball");
        let k = Body::cube(2);
        let mp = norm_functionals(&k, &SphereQuadrature::default_for(2))
            .unwrap()
            .m_prime
            .value;
        let c = core_body(&k, mp).unwrap();
        let r = 1.0 / mp;
        let area = volume_with(&c, 100_000, 1);
        assert!(area.value >= PI * r * r / 2.0);
        for x in [[0.3, 0.9], [1.0, 0.2], [0.05, -0.99]] {
            assert!(c.gauge_at(&x) >= k.gauge_at(&x) - 1e-15);
        }
    }

    #[test]
    fn f_structure() {
        let f = build_f(&Body::unit_ball(3), 2.0).unwrap();
        assert_eq!(f.eval(&[0.5, 0.5, 0.5]), 1.0);
        let k = Body::cube(2);
        let f = build_f(&k, 1.0).unwrap();
        assert_eq!(f.f0(), 1.0);
        assert_eq!(f.eval(&[1.0, 1.0]), 0.0);
        assert!(f.profile(&[0.6, 0.8]).is_non_increasing(200, 1e-12));
    }

    #[test]
    fn mixed_volume_examples() {
        let k = Body::cube(3);
        let h = k.as_hpoly().unwrap();
        assert!((mixed_volume_first(&k, &h).unwrap() - 8.0).abs() < 1e-9);
        let k2 = k.scaled(2.0).unwrap();
        assert!((mixed_volume_first(&k2, &h).unwrap() - 16.0).abs() < 1e-9);
        // V(box, 1; cross, 1) in the plane: (1/2) Σ edges · h_box(ν) = 4
        let c = Body::unit_cross(2).as_hpoly().unwrap();
        assert!((mixed_volume_first(&Body::cube(2), &c).unwrap() - 4.0).abs() < 1e-12);
    }
}
