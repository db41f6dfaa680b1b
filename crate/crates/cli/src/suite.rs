//! The verification suite: one check per id, run over the corpus.

use crate::corpus;
use crate::error::{malformed, CliResult};
use crate::gen::random_linear_map;
use isoslice::constants::LedgerEntry;
use isoslice::directions::{default_direction_count, direction_set};
use isoslice::logconcave::{
    body_from_density, busemann_check, distance_support_check, l_equivalence_check, ln_comparison_report,
    one_dim_moment_bounds, pointwise_moment_check, Indicator, Power, RadialProfile, Tail,
};
use isoslice::pipeline::{
    functional_sensitivity, mass_concentration_check, mixed_volume_check, perturb_body, Budget, PerturbationResult,
};
use isoslice::quadrature::adaptive;
use isoslice::quasi::{
    position_quasi, quasi_l_bound_check, quasi_perturb, quasi_tail_mass_check, quasi_theorem_report, tail_grid,
    QuasiBody,
};
use isoslice::rng::derive_seed;
use isoslice::sections::{
    log_volume_concavity, marginal_covariance_check, near_origin_perturb, projection_perturb, projection_report,
    section_check, Subspace,
};
use isoslice::special::{beta_integral, binom_bounds};
use isoslice::{Body, Constants, Estimate, Report};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

/// Every check id, in suite order.
pub const ALL_IDS: [&str; 17] = [
    "eq3", "eq4", "lem-2.2", "lem-2.3", "lem-2.4", "thm-2.1", "cor-2.5", "prop-3.1", "cor-3.2", "thm-1.2", "lem-4.1",
    "lem-4.2", "lem-4.3", "thm-1.4", "lem-5.1", "prop-5.2", "prop-5.3",
];

/// Shared state of one suite run.
pub struct Context {
    pub budget: Budget,
    pub constants: Constants,
    pub dims: Vec<usize>,
    perturbations: OnceLock<Vec<(Body, Result<PerturbationResult, String>)>>,
}

impl Context {
    pub fn new(budget: Budget, constants: Constants, dims: Vec<usize>) -> Self {
        Self {
            budget,
            constants,
            dims,
            perturbations: OnceLock::new(),
        }
    }

    fn bodies(&self) -> Vec<Body> {
        corpus::all_bodies(&self.dims, self.budget.seed)
    }

    fn low_dims(&self, max: usize) -> Vec<usize> {
        self.dims.iter().copied().filter(|&n| n <= max).collect()
    }

    fn seed(&self, label: &str) -> u64 {
        derive_seed(self.budget.seed, label)
    }

    fn budget_for(&self, label: &str) -> Budget {
        Budget {
            seed: self.seed(label),
            ..self.budget
        }
    }

    fn perturbations(&self) -> &[(Body, Result<PerturbationResult, String>)] {
        self.perturbations.get_or_init(|| {
            self.bodies()
                .into_iter()
                .map(|k| {
                    let b = self.budget_for(&format!("perturb-{}", k.name()));
                    let r = perturb_body(&k, &self.constants, &b).map_err(|e| e.to_string());
                    (k, r)
                })
                .collect()
        })
    }
}

/// Machine-readable outcome of `verify`.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationSuite {
    pub ids: Vec<String>,
    pub seed: u64,
    pub samples: usize,
    pub directions: usize,
    pub dims: Vec<usize>,
    pub pass: bool,
    pub reports: Vec<Report>,
    pub ledger: Vec<LedgerEntry>,
}

pub fn parse_ids(list: &str) -> CliResult<Vec<String>> {
    if list.trim() == "all" {
        return Ok(ALL_IDS.iter().map(|s| s.to_string()).collect());
    }
    let mut ids = Vec::new();
    for id in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if !ALL_IDS.contains(&id) {
            return Err(malformed(format!("unknown check id '{id}'")));
        }
        ids.push(id.to_string());
    }
    if ids.is_empty() {
        return Err(malformed("no check ids given"));
    }
    Ok(ids)
}

pub fn run_verify(ids: &[String], ctx: &Context) -> CliResult<VerificationSuite> {
    let mut reports = Vec::new();
    for id in ids {
        reports.extend(run_check(id, ctx)?);
    }
    Ok(VerificationSuite {
        ids: ids.to_vec(),
        seed: ctx.budget.seed,
        samples: ctx.budget.samples,
        directions: ctx.budget.directions,
        dims: ctx.dims.clone(),
        pass: reports.iter().all(|r| r.pass),
        reports,
        ledger: ctx.constants.ledger(),
    })
}

/// A report standing for a step that raised an error.
fn failed(check: &str, subject: String, why: String) -> Report {
    let mut r = Report::new(check, subject);
    r.require(false, why);
    r
}

fn or_failed(check: &str, subject: String, res: isoslice::Result<Report>) -> Report {
    res.unwrap_or_else(|e| failed(check, subject, e.to_string()))
}

pub fn run_check(id: &str, ctx: &Context) -> CliResult<Vec<Report>> {
    Ok(match id {
        "eq3" => vec![binomial_bounds_report()],
        "eq4" => vec![beta_integral_report()],
        "lem-2.2" => distance_to_support(ctx),
        "lem-2.3" => l_equivalence(ctx),
        "lem-2.4" => moment_bounds(ctx),
        "thm-2.1" => busemann(ctx),
        "cor-2.5" => ctx
            .low_dims(3)
            .into_iter()
            .map(|n| {
                or_failed(
                    "cor-2.5",
                    format!("family(n={n})"),
                    ln_comparison_report(
                        &corpus::densities(n),
                        ctx.budget.directions,
                        ctx.seed(&format!("ln-{n}")),
                    ),
                )
            })
            .collect(),
        "prop-3.1" => mass_concentration(ctx),
        "cor-3.2" => perturbation_reports(ctx, |r, b| r.corollary_report(b), "cor-3.2"),
        "thm-1.2" => perturbation_pipeline(ctx),
        "lem-4.1" => vec![or_failed("lem-4.1", "grid".into(), tail_grid(ctx.constants.tail_c1))],
        "lem-4.2" => quasi_reports(ctx, "lem-4.2"),
        "lem-4.3" => quasi_reports(ctx, "lem-4.3"),
        "thm-1.4" => quasi_pipeline(ctx),
        "lem-5.1" => ctx
            .bodies()
            .iter()
            .map(|k| {
                or_failed(
                    "lem-5.1",
                    k.name(),
                    section_check(k, 3, &ctx.constants, &ctx.budget_for(&format!("section-{}", k.name()))),
                )
            })
            .collect(),
        "prop-5.2" => projections(ctx),
        "prop-5.3" => near_origin(ctx),
        other => return Err(malformed(format!("unknown check id '{other}'"))),
    })
}

/// `(n/k)^k <= C(n,k) < (en/k)^k` for `1 <= k <= n <= 60`.
pub fn binomial_bounds_report() -> Report {
    let mut cases = 0;
    let mut failures = 0;
    let mut tightest: f64 = f64::INFINITY;
    for n in 1..=60u64 {
        for k in 1..=n {
            let b = binom_bounds(n, k).expect("1 <= k <= n");
            cases += 1;
            if !b.holds() {
                failures += 1;
            }
            tightest = tightest.min(b.upper / b.value);
        }
    }
    let mut r = Report::new("eq3", "1 <= k <= n <= 60");
    r.exact("cases", cases as f64).exact("failures", failures as f64);
    r.exact("min_upper_over_value", tightest);
    r.require(failures == 0, format!("{failures} binomial bound failures"));
    r
}

/// `beta_integral(a, b)` against adaptive quadrature for `a + b <= 20`.
pub fn beta_integral_report() -> Report {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for a in 0..=20i64 {
        for b in 0..=(20 - a) {
            let exact = beta_integral(a, b).expect("non-negative");
            let q = adaptive(
                |s| s.powi(a as i32) * (1.0 - s).powi(b as i32),
                0.0,
                1.0,
                &[],
                1e-15,
                0.0,
            )
            .value;
            worst = worst.max((q / exact - 1.0).abs());
            cases += 1;
        }
    }
    let mut r = Report::new("eq4", "a + b <= 20");
    r.exact("cases", cases as f64).exact("max_relative_error", worst);
    r.require(worst <= 1e-12, format!("beta integral off by {worst:e}"));
    r
}

/// Family of a corpus body: its name without the dimension field.
pub fn family(name: &str) -> String {
    let parts: Vec<&str> = name.split(':').collect();
    match parts.first() {
        Some(&"random-hpoly") => "random-hpoly".into(),
        _ if parts.len() >= 2 => {
            let mut rest = vec![parts[0]];
            rest.extend(&parts[2..]);
            rest.join(":")
        }
        _ => name.into(),
    }
}

/// `K_{1_K}` is `(n+2)^{-1/(n+2)} K`: the gauge ratio is constant.
pub fn indicator_consistency(k: &Body) -> isoslice::Result<Report> {
    let n = k.dim();
    let kf = body_from_density(Arc::new(Indicator::new(k.clone())))?;
    let dirs = direction_set(n, default_direction_count(n).min(2048));
    let ratios: Vec<f64> = dirs.iter().map(|u| kf.gauge_at(u) / k.gauge_at(u)).collect();
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let expect = (n as f64 + 2.0).powf(1.0 / (n as f64 + 2.0));
    let mut r = Report::new("lem-2.2", format!("{} (indicator)", k.name()));
    r.input("directions", dirs.len());
    r.exact("ratio_max", hi)
        .exact("ratio_min", lo)
        .exact("expected", expect);
    r.require(hi / lo < 1.0 + 1e-9, format!("gauge ratio spread {}", hi / lo - 1.0));
    r.require(
        (hi / expect - 1.0).abs() < 1e-9,
        format!("gauge ratio {hi} differs from {expect}"),
    );
    Ok(r)
}

/// Spread of `containment(K_f, K) · n/s` over `s ∈ {2n, 4n, 10n}` and the
/// corpus dimensions, per body family.
fn distance_to_support(ctx: &Context) -> Vec<Report> {
    let mut out = Vec::new();
    let mut by_family: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for k in ctx.bodies() {
        out.push(or_failed(
            "lem-2.2",
            format!("{} (indicator)", k.name()),
            indicator_consistency(&k),
        ));
        let n = k.dim() as f64;
        for mult in [2.0, 4.0, 10.0] {
            let s = mult * n;
            let res = Power::new(k.clone(), s).and_then(|f| distance_support_check(Arc::new(f), &k, s));
            match res {
                Ok(r) => {
                    if let Some(v) = r.value("containment_n_over_s") {
                        by_family.entry(family(&k.name())).or_default().push(v);
                    }
                    out.push(r);
                }
                Err(e) => out.push(failed("lem-2.2", format!("{} s={s}", k.name()), e.to_string())),
            }
        }
    }
    for (fam, vals) in by_family {
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let mut r = Report::new("lem-2.2", format!("{fam} (stability)"));
        r.input("values", vals.len());
        r.exact("max", hi).exact("min", lo).exact("spread", hi / lo);
        r.require(hi / lo < 2.0, format!("containment·n/s varies by {:.3}x", hi / lo));
        out.push(r);
    }
    out
}

fn l_equivalence(ctx: &Context) -> Vec<Report> {
    let mut out = Vec::new();
    for n in ctx.low_dims(3) {
        for (i, f) in corpus::densities(n).into_iter().enumerate() {
            let label = f.label();
            out.push(or_failed(
                "lem-2.3",
                label,
                l_equivalence_check(
                    f,
                    ctx.budget.directions,
                    ctx.seed(&format!("lem23-{n}-{i}")),
                    &ctx.constants,
                ),
            ));
        }
    }
    out
}

/// Equality cases and strict interior of the one-dimensional moment bounds,
/// plus the pointwise bound along every direction of the corpus densities.
fn moment_bounds(ctx: &Context) -> Vec<Report> {
    let mut r = Report::new("lem-2.4", "one-dimensional profiles");
    let mut worst_eq: f64 = 0.0;
    let mut inside_failures = 0;
    for n in 1..=8usize {
        let ind = RadialProfile::new(|t| if t <= 1.0 { 1.0 } else { 0.0 }, Tail::Compact(1.0), true);
        let exp = RadialProfile::new(|t: f64| (-t).exp(), Tail::Exponential { rate: 1.0 }, true);
        match (one_dim_moment_bounds(&ind, n), one_dim_moment_bounds(&exp, n)) {
            (Ok(a), Ok(b)) => {
                worst_eq = worst_eq
                    .max((a.ratio / a.lower - 1.0).abs())
                    .max((b.ratio / b.upper - 1.0).abs());
            }
            _ => worst_eq = f64::INFINITY,
        }
        let generic: Vec<RadialProfile<'static>> = vec![
            RadialProfile::new(|t: f64| (-t * t).exp(), Tail::Gaussian { q: 2.0 }, true),
            RadialProfile::new(|t: f64| (1.0 - t).max(0.0).powi(3), Tail::Compact(1.0), true),
            RadialProfile::new(|t: f64| (1.0 - t * t).max(0.0), Tail::Compact(1.0), true),
        ];
        for g in &generic {
            match one_dim_moment_bounds(g, n) {
                Ok(b) if b.lower * (1.0 + 1e-9) < b.ratio && b.ratio < b.upper * (1.0 - 1e-9) => {}
                _ => inside_failures += 1,
            }
        }
    }
    r.exact("max_equality_relative_error", worst_eq)
        .exact("interior_failures", inside_failures as f64);
    r.require(worst_eq <= 1e-9, format!("equality cases off by {worst_eq:e}"));
    r.require(
        inside_failures == 0,
        format!("{inside_failures} generic profiles not strictly inside"),
    );
    let mut out = vec![r];
    for n in ctx.low_dims(3) {
        let dirs = direction_set(n, 256);
        for f in corpus::densities(n) {
            let mut p = Report::new("lem-2.4", f.label());
            match pointwise_moment_check(f.as_ref(), &dirs) {
                Ok((fails, margin)) => {
                    p.exact("failures", fails as f64).exact("min_relative_margin", margin);
                    p.require(fails == 0, format!("{fails} directions violate the moment bounds"));
                }
                Err(e) => {
                    p.require(false, e.to_string());
                }
            }
            out.push(p);
        }
    }
    out
}

/// Triangle inequality for `‖·‖_f` on `10^4` random pairs.
pub const BUSEMANN_PAIRS: usize = 10_000;

fn busemann(ctx: &Context) -> Vec<Report> {
    let mut out = Vec::new();
    for n in ctx.low_dims(3) {
        for (i, f) in corpus::densities(n).into_iter().enumerate() {
            let label = f.label();
            out.push(or_failed(
                "thm-2.1",
                label,
                busemann_check(f, BUSEMANN_PAIRS, ctx.seed(&format!("busemann-{n}-{i}"))),
            ));
        }
    }
    out
}

fn mass_concentration(ctx: &Context) -> Vec<Report> {
    let mut out = Vec::new();
    for k in ctx.bodies() {
        let b = ctx.budget_for(&format!("mass-{}", k.name()));
        out.push(or_failed(
            "prop-3.1",
            k.name(),
            mass_concentration_check(&k, &ctx.constants, &b),
        ));
        if k.dim() <= 3 {
            out.push(or_failed(
                "prop-3.1",
                format!("{} (mixed volume)", k.name()),
                mixed_volume_check(&k),
            ));
        }
    }
    out
}

fn perturbation_reports(ctx: &Context, make: impl Fn(&PerturbationResult, &Budget) -> Report, id: &str) -> Vec<Report> {
    ctx.perturbations()
        .iter()
        .map(|(k, res)| match res {
            Ok(r) => make(r, &ctx.budget_for(&format!("perturb-{}", k.name()))),
            Err(e) => failed(id, k.name(), e.clone()),
        })
        .collect()
}

/// Main statement on the corpus, plus the ball and linear-invariance cases.
fn perturbation_pipeline(ctx: &Context) -> Vec<Report> {
    let mut out = perturbation_reports(ctx, |r, b| r.theorem_report(b), "thm-1.2");
    let c = &ctx.constants;
    for (k, res) in ctx.perturbations() {
        let Ok(res) = res else { continue };
        if k.name().starts_with("ball:") {
            let exact_l = ball_isotropic_constant(k.dim());
            let mut r = Report::new("thm-1.2", format!("{} (ball)", k.name()));
            r.measure("d_G", res.d_g)
                .measure("L_T", res.l_t)
                .exact("L_ball", exact_l);
            r.require(
                res.d_g.value <= 1.05,
                format!("ball d_G = {} exceeds 1.05", res.d_g.value),
            );
            r.require(
                res.l_t.within(exact_l, c.sigma, 0.0),
                format!("L_T = {} differs from L_ball = {exact_l}", res.l_t.value),
            );
            out.push(r);
        }
    }
    for n in ctx.dims.clone() {
        out.push(linear_invariance(&Body::cube(n).with_name(format!("cube:{n}")), ctx));
    }
    out
}

/// Condition number of the random pre-applied map.
pub const INVARIANCE_CONDITION: f64 = 10.0;

/// `perturb_body` on `K` against `perturb_body` on `A K`, `A` random with
/// condition number [`INVARIANCE_CONDITION`].
pub fn linear_invariance(k: &Body, ctx: &Context) -> Report {
    let subject = format!("{} (linear invariance)", k.name());
    let b = ctx.budget_for(&format!("invariance-{}", k.name()));
    let res = (|| -> CliResult<Report> {
        let map = random_linear_map(k.dim(), INVARIANCE_CONDITION, ctx.seed(&format!("map-{}", k.name())))?;
        let plain = perturb_body(k, &ctx.constants, &b)?;
        let mapped = perturb_body(&k.apply_linear(&map)?, &ctx.constants, &b)?;
        // Sphere-grid terms of both runs widen the L_T comparison.
        let grid = functional_sensitivity(&plain, &b)?.hypot(functional_sensitivity(&mapped, &b)?);
        let l_t_se = plain.l_t.std_error.hypot(mapped.l_t.std_error).hypot(grid);
        let zl = (plain.l_t.value - mapped.l_t.value).abs() / l_t_se;
        let zd = combined_z(&plain.d_g, &mapped.d_g);
        let mut r = Report::new("thm-1.2", subject.clone());
        r.exact("condition", map.condition_number());
        r.measure("L_T", plain.l_t).measure("L_T_mapped", mapped.l_t);
        r.measure("d_G", plain.d_g).measure("d_G_mapped", mapped.d_g);
        r.exact("grid_L_T", grid).exact("z_L_T", zl).exact("z_d_G", zd);
        r.exact("alpha", plain.alpha).exact("alpha_mapped", mapped.alpha);
        if let (Some(a), Some(b)) = (&plain.functionals, &mapped.functionals) {
            r.measure("M_prime", a.m_prime).measure("M_prime_mapped", b.m_prime);
        }
        let s = ctx.constants.sigma;
        r.require(zl <= s, format!("L_T moves by {zl:.2} σ under the map"));
        r.require(zd <= s, format!("d_G moves by {zd:.2} σ under the map"));
        Ok(r)
    })();
    res.unwrap_or_else(|e| failed("thm-1.2", subject, e.to_string()))
}

/// Isotropic constant of the Euclidean ball.
pub fn ball_isotropic_constant(n: usize) -> f64 {
    let nf = n as f64;
    let omega = isoslice::special::unit_ball_volume(n);
    // Vol^{-1/n} · (1/(n+2))^{1/2}, for the unit ball
    (1.0 / (nf + 2.0)).sqrt() / omega.powf(1.0 / nf)
}

/// Position, `α = quasi_c3 · C / overlap`, and the requested quasi check.
fn quasi_reports(ctx: &Context, id: &str) -> Vec<Report> {
    let mut out = Vec::new();
    for n in corpus::QUASI_DIMS.iter().copied().filter(|n| ctx.dims.contains(n)) {
        let bodies = match corpus::quasi_bodies(n) {
            Ok(b) => b,
            Err(e) => {
                out.push(failed(id, format!("quasi corpus n={n}"), e.to_string()));
                continue;
            }
        };
        for k in bodies {
            let b = ctx.budget_for(&format!("{id}-{}", k.name()));
            let res = position_quasi(&k, &b).and_then(|(kt, m)| {
                let alpha = (ctx.constants.quasi_c3 * k.c_quasi() / m.overlap.value).max(1.0 + 1e-9);
                let mut r = if id == "lem-4.2" {
                    quasi_tail_mass_check(&kt, alpha, &ctx.constants, &b)?
                } else {
                    quasi_l_bound_check(&k, alpha, &ctx.constants, &b)?
                };
                r.subject = k.name();
                r.exact("C", k.c_quasi()).measure("overlap", m.overlap);
                Ok(r)
            });
            out.push(or_failed(id, k.name(), res));
        }
    }
    out
}

fn quasi_pipeline(ctx: &Context) -> Vec<Report> {
    let mut out = Vec::new();
    for n in corpus::QUASI_DIMS.iter().copied().filter(|n| ctx.dims.contains(n)) {
        let Ok(bodies) = corpus::quasi_bodies(n) else { continue };
        for k in bodies {
            let b = ctx.budget_for(&format!("thm14-{}", k.name()));
            let res = quasi_perturb(&k, &ctx.constants, &b).map(|r| quasi_theorem_report(&k, &r, &b));
            out.push(or_failed("thm-1.4", k.name(), res));
        }
        out.push(convex_cross_check(&Body::cube(n).with_name(format!("cube:{n}")), ctx));
    }
    out
}

/// `quasi_perturb` on a single convex piece against `perturb_body`.
pub fn convex_cross_check(k: &Body, ctx: &Context) -> Report {
    let subject = format!("{} (convex cross-check)", k.name());
    let b = ctx.budget_for(&format!("cross-check-{}", k.name()));
    let res = (|| -> isoslice::Result<Report> {
        let q = QuasiBody::new(vec![k.clone()], None)?;
        let quasi = quasi_perturb(&q, &ctx.constants, &b)?;
        let convex = perturb_body(k, &ctx.constants, &b)?;
        let ratio = quasi.l_t.ratio(&convex.l_t);
        let mut r = Report::new("thm-1.4", subject.clone());
        r.measure("L_T_quasi", quasi.l_t)
            .measure("L_T_convex", convex.l_t)
            .measure("ratio", ratio);
        r.require(
            ratio.value <= 2.0 && ratio.value >= 0.5,
            format!("L_T ratio {} outside [1/2, 2]", ratio.value),
        );
        Ok(r)
    })();
    or_failed("thm-1.4", subject, res)
}

fn projections(ctx: &Context) -> Vec<Report> {
    let mut out = Vec::new();
    let samples = ctx.budget.samples.min(40_000);
    for n in ctx.dims.iter().copied().filter(|&n| (3..=4).contains(&n)) {
        for (i, k) in [
            Body::cube(n).with_name(format!("cube:{n}")),
            Body::unit_ball(n).with_name(format!("ball:{n}")),
        ]
        .into_iter()
        .enumerate()
        {
            let seed = ctx.seed(&format!("marginal-{n}-{i}"));
            let res = Subspace::random(n, 2, seed).and_then(|e| marginal_covariance_check(&k, &e, samples, seed));
            out.push(or_failed(
                "prop-5.2",
                format!("{} (marginal covariance)", k.name()),
                res,
            ));
        }
        let cases: Vec<(Body, isoslice::Result<Subspace>)> = vec![
            (
                Body::cube(n).with_name(format!("cube:{n}")),
                Subspace::coordinate(n, &[0, 1]),
            ),
            (
                Body::unit_ball(n).with_name(format!("ball:{n}")),
                Subspace::random(n, 2, ctx.seed(&format!("proj-{n}"))),
            ),
        ];
        for (k, e) in cases {
            let b = Budget {
                directions: ctx.budget.directions.min(2048),
                ..ctx.budget_for(&format!("project-{}", k.name()))
            };
            let res = e.and_then(|e| projection_perturb(&k, &e, &ctx.constants, &b).map(|r| (e, r)));
            out.push(match res {
                Ok((e, r)) => projection_report(&r, &e, &b),
                Err(err) => failed("prop-5.2", k.name(), err.to_string()),
            });
        }
    }
    out
}

/// Near-origin parameters of the elongated volume-1 box.
pub const NEAR_ORIGIN_GAMMA: f64 = 0.6;
pub const NEAR_ORIGIN_BETA: f64 = 1.5;
pub const NEAR_ORIGIN_DELTA: f64 = 1.0;

fn near_origin(ctx: &Context) -> Vec<Report> {
    let mut out = Vec::new();
    let k = corpus::near_origin_box();
    let b = ctx.budget_for("near-origin");
    let res = near_origin_perturb(
        &k,
        NEAR_ORIGIN_GAMMA,
        NEAR_ORIGIN_BETA,
        NEAR_ORIGIN_DELTA,
        &ctx.constants,
        &b,
    );
    out.push(match res {
        Ok(no) => no.report(&b),
        Err(e) => failed("prop-5.3", k.name(), e.to_string()),
    });
    out.push(or_failed(
        "prop-5.3",
        format!("{} (log-volume concavity)", k.name()),
        log_volume_concavity(&k, 9, &b),
    ));
    let r = (1.0 / isoslice::special::unit_ball_volume(3)).powf(1.0 / 3.0);
    if let Ok(ball) = Body::ball(3, r) {
        let ball = ball.with_name("ball:3:vol1");
        let res = near_origin_perturb(&ball, 0.5, 1.0, 1.0, &ctx.constants, &b);
        out.push(match res {
            Ok(no) => no.report(&b),
            Err(e) => failed("prop-5.3", ball.name(), e.to_string()),
        });
    }
    out
}

/// Largest `|z|` of `a - b` in combined standard errors.
pub fn combined_z(a: &Estimate, b: &Estimate) -> f64 {
    let se = a.std_error.hypot(b.std_error);
    if se > 0.0 {
        (a.value - b.value).abs() / se
    } else if a.value == b.value {
        0.0
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_parse() {
        assert_eq!(parse_ids("all").unwrap().len(), 17);
        assert_eq!(parse_ids("eq4, thm-1.2").unwrap(), vec!["eq4", "thm-1.2"]);
        assert!(parse_ids("eq5").is_err());
    }

    #[test]
    fn families() {
        assert_eq!(family("lp:3:1.5"), "lp:1.5");
        assert_eq!(family("random-hpoly:2:8"), "random-hpoly");
        assert_eq!(family("ball:4"), "ball");
    }

    #[test]
    fn exact_checks_pass() {
        assert!(binomial_bounds_report().pass);
        assert!(beta_integral_report().pass);
    }
}
