//! Even s-concave and log-concave densities, their radial profiles, the
//! induced bodies `K_f`, and the checks around them.

use crate::body::{Body, BodyFile};
use crate::directions::{default_direction_count, direction_set, random_unit};
use crate::distance::distance_breakdown;
use crate::error::{check_dim, invalid, Error, Result};
use crate::estimate::Estimate;
use crate::linalg::{dot, norm, Ellipsoid};
use crate::mc::{add_outer, block_sums, sym_len, unpack_sym};
use crate::quadrature::{adaptive, fixed, gauss_legendre};
use crate::report::Report;
use crate::rng::{derive_seed, rng_for};
use crate::special::{factorial, sphere_area};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Declared concavity class. Classes are asserted by constructors and only
/// spot-checked, never inferred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "class", content = "s")]
pub enum Concavity {
    /// Indicator of a convex set: s-concave for every `s > 0`.
    Indicator,
    /// `f^{1/s}` concave on the support.
    SConcave(f64),
    LogConcave,
    /// `f^{1/s}` concave on the support along every line through the origin.
    LineSConcave(f64),
    LineLogConcave,
}

impl Concavity {
    /// Every class here is at least log-concave along lines through 0.
    pub fn is_line_log_concave(&self) -> bool {
        true
    }

    /// The `s` of the class, `∞` for indicators, `None` for log-concave.
    pub fn s(&self) -> Option<f64> {
        match self {
            Concavity::Indicator => Some(f64::INFINITY),
            Concavity::SConcave(s) | Concavity::LineSConcave(s) => Some(*s),
            _ => None,
        }
    }

    /// Whether the class constrains arbitrary segments, not only lines
    /// through the origin.
    pub fn is_global(&self) -> bool {
        matches!(
            self,
            Concavity::Indicator | Concavity::SConcave(_) | Concavity::LogConcave
        )
    }
}

/// How a radial profile vanishes, which fixes the quadrature cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Zero beyond the radius.
    Compact(f64),
    /// Bounded by `C e^{-rate·r}`.
    Exponential { rate: f64 },
    /// Bounded by `C e^{-q r²/2}`.
    Gaussian { q: f64 },
    /// No decay information: moments cannot be truncated.
    Unknown,
}

/// `r -> g(r)` on `[0, ∞)`, with its tail and kink locations.
pub struct RadialProfile<'a> {
    eval: Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>,
    tail: Tail,
    breakpoints: Vec<f64>,
    log_concave: bool,
    fixed_nodes: Option<usize>,
}

impl fmt::Debug for RadialProfile<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("tail", &self.tail)
            .field("breakpoints", &self.breakpoints.len())
            .field("log_concave", &self.log_concave)
            .finish()
    }
}

/// Relative accuracy of radial moments.
pub const MOMENT_REL_TOL: f64 = 1e-12;

impl<'a> RadialProfile<'a> {
    pub fn new(eval: impl Fn(f64) -> f64 + Send + Sync + 'a, tail: Tail, log_concave: bool) -> Self {
        Self {
            eval: Box::new(eval),
            tail,
            breakpoints: Vec::new(),
            log_concave,
            fixed_nodes: None,
        }
    }

    /// Replaces adaptive quadrature by a fixed `nodes`-point Gauss–Legendre
    /// rule on each piece between breakpoints. Meant for profiles that are
    /// themselves numerical (and so too rough for a 1e-12 target).
    pub fn with_fixed_rule(mut self, nodes: usize) -> Self {
        self.fixed_nodes = Some(nodes);
        self
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn is_log_concave(&self) -> bool {
        self.log_concave
    }

    /// Truncation radius for `∫ g(r) r^k dr`; the neglected tail is below
    /// `e^{-45}` relative to the integral.
    pub fn cutoff(&self, k: u32) -> Option<f64> {
        let k = k as f64;
        match self.tail {
            Tail::Compact(r) => Some(r),
            Tail::Exponential { rate } if rate > 0.0 => Some((45.0 + 2.0 * k) / rate),
            Tail::Gaussian { q } if q > 0.0 => Some((2.0 * (45.0 + 2.0 * k) / q).sqrt()),
            _ => None,
        }
    }

    /// `∫_0^∞ g(r) r^k dr` by adaptive Gauss–Legendre on `[0, cutoff]`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        let r_max = self
            .cutoff(k)
            .ok_or_else(|| Error::Divergent("profile has neither compact support nor declared decay".into()))?;
        if !(r_max > 0.0) {
            return Ok(0.0);
        }
        let mut bps = self.breakpoints.clone();
        match self.tail {
            Tail::Exponential { rate } => bps.push(k as f64 / rate),
            Tail::Gaussian { q } => bps.push((k as f64 / q).sqrt()),
            _ => {}
        }
        if let Some(q) = self.fixed_nodes {
            let mut cuts: Vec<f64> = bps.iter().copied().filter(|b| *b > 0.0 && *b < r_max).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut edges = vec![0.0];
            edges.extend(cuts);
            edges.push(r_max);
            let total = edges
                .windows(2)
                .map(|w| fixed(|r| (self.eval)(r) * r.powi(k as i32), w[0], w[1], q))
                .sum();
            return Ok(total);
        }
        let res = adaptive(
            |r| (self.eval)(r) * r.powi(k as i32),
            0.0,
            r_max,
            &bps,
            MOMENT_REL_TOL,
            1e-300,
        );
        Ok(res.value)
    }

    /// Several moments at once; a compact fixed-rule profile is evaluated
    /// once per node.
    pub fn moments(&self, ks: &[u32]) -> Result<Vec<f64>> {
        let (Some(q), Tail::Compact(r_max)) = (self.fixed_nodes, self.tail) else {
            return ks.iter().map(|&k| self.moment(k)).collect();
        };
        if !(r_max > 0.0) {
            return Ok(vec![0.0; ks.len()]);
        }
        let mut edges: Vec<f64> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|b| *b > 0.0 && *b < r_max)
            .collect();
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        edges.insert(0, 0.0);
        edges.push(r_max);
        let (nodes, weights) = gauss_legendre(q);
        let mut out = vec![0.0; ks.len()];
        for w in edges.windows(2) {
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[0] + w[1]);
            for (x, wt) in nodes.iter().zip(&weights) {
                let r = mid + half * x;
                let g = (self.eval)(r) * wt * half;
                for (o, &k) in out.iter_mut().zip(ks) {
                    *o += g * r.powi(k as i32);
                }
            }
        }
        Ok(out)
    }

    /// Checks that `g` does not increase on a uniform grid over `[0, cutoff]`.
    pub fn is_non_increasing(&self, points: usize, tol: f64) -> bool {
        let r_max = self.cutoff(0).unwrap_or(10.0);
        let mut prev = self.eval(0.0);
        for i in 1..=points {
            let v = self.eval(r_max * i as f64 / points as f64);
            if v > prev + tol * prev.abs().max(1e-300) {
                return false;
            }
            prev = v;
        }
        true
    }
}

/// An even, non-negative, integrable function on `R^n`.
pub trait Density: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    fn concavity(&self) -> Concavity;
    /// The restriction `r -> f(rθ)` for a unit `θ`.
    fn profile(&self, theta: &[f64]) -> RadialProfile<'_>;
    /// A convex body containing the support, when the support is bounded.
    fn support_body(&self) -> Option<Body> {
        None
    }
    fn label(&self) -> String;

    fn f0(&self) -> f64 {
        self.eval(&vec![0.0; self.dim()])
    }

    /// `sup{r : f(rθ) > 0}` or `∞` for decaying profiles.
    fn support_radius(&self, theta: &[f64]) -> f64 {
        match self.profile(theta).tail() {
            Tail::Compact(r) => r,
            _ => f64::INFINITY,
        }
    }
}

/// `1_K`.
#[derive(Debug, Clone)]
pub struct Indicator {
    body: Body,
}

impl Indicator {
    pub fn new(body: Body) -> Self {
        Self { body }
    }
}

impl Density for Indicator {
    fn dim(&self) -> usize {
        self.body.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        if self.body.gauge_at(x) <= 1.0 {
            1.0
        } else {
            0.0
        }
    }
    fn concavity(&self) -> Concavity {
        Concavity::Indicator
    }
    fn profile(&self, theta: &[f64]) -> RadialProfile<'_> {
        let rho = self.body.radial_at(theta);
        RadialProfile::new(move |r| if r <= rho { 1.0 } else { 0.0 }, Tail::Compact(rho), true)
    }
    fn support_body(&self) -> Option<Body> {
        Some(self.body.clone())
    }
    fn label(&self) -> String {
        format!("indicator({})", self.body.name())
    }
}

/// `(1 - ‖x‖_K)_+^s`, which is s-concave.
#[derive(Debug, Clone)]
pub struct Power {
    body: Body,
    s: f64,
}

impl Power {
    pub fn new(body: Body, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(invalid("power exponent must be positive and finite"));
        }
        Ok(Self { body, s })
    }

    pub fn exponent(&self) -> f64 {
        self.s
    }
}

impl Density for Power {
    fn dim(&self) -> usize {
        self.body.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (1.0 - self.body.gauge_at(x)).max(0.0).powf(self.s)
    }
    fn concavity(&self) -> Concavity {
        Concavity::SConcave(self.s)
    }
    fn profile(&self, theta: &[f64]) -> RadialProfile<'_> {
        let rho = self.body.radial_at(theta);
        let s = self.s;
        RadialProfile::new(move |r| (1.0 - r / rho).max(0.0).powf(s), Tail::Compact(rho), true)
    }
    fn support_body(&self) -> Option<Body> {
        Some(self.body.clone())
    }
    fn label(&self) -> String {
        format!("power({}, s={})", self.body.name(), self.s)
    }
}

/// `e^{-‖x‖_K}`.
#[derive(Debug, Clone)]
pub struct ExpGauge {
    body: Body,
}

impl ExpGauge {
    pub fn new(body: Body) -> Self {
        Self { body }
    }
}

impl Density for ExpGauge {
    fn dim(&self) -> usize {
        self.body.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (-self.body.gauge_at(x)).exp()
    }
    fn concavity(&self) -> Concavity {
        Concavity::LogConcave
    }
    fn profile(&self, theta: &[f64]) -> RadialProfile<'_> {
        let g = self.body.gauge_at(theta);
        RadialProfile::new(move |r| (-g * r).exp(), Tail::Exponential { rate: g }, true)
    }
    fn label(&self) -> String {
        format!("exp-gauge({})", self.body.name())
    }
}

/// `e^{-x^T A x / 2}`.
#[derive(Debug, Clone)]
pub struct Gaussian {
    form: Ellipsoid,
}

impl Gaussian {
    pub fn new(form: Ellipsoid) -> Self {
        Self { form }
    }

    pub fn standard(dim: usize) -> Self {
        Self::new(Ellipsoid::with_semi_axes(&vec![1.0; dim]).expect("identity form"))
    }
}

impl Density for Gaussian {
    fn dim(&self) -> usize {
        self.form.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (-0.5 * self.form.gauge(x).powi(2)).exp()
    }
    fn concavity(&self) -> Concavity {
        Concavity::LogConcave
    }
    fn profile(&self, theta: &[f64]) -> RadialProfile<'_> {
        let q = self.form.gauge(theta).powi(2);
        RadialProfile::new(move |r| (-0.5 * q * r * r).exp(), Tail::Gaussian { q }, true)
    }
    fn label(&self) -> String {
        format!("gaussian:{}", self.form.dim())
    }
}

/// `Π (1 - |x_i|)_+`: the self-convolution of the cube indicator, up to
/// normalization.
#[derive(Debug, Clone)]
pub struct TriangleProduct {
    dim: usize,
}

impl TriangleProduct {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Density for TriangleProduct {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| (1.0 - v.abs()).max(0.0)).product()
    }
    fn concavity(&self) -> Concavity {
        Concavity::LogConcave
    }
    fn profile(&self, theta: &[f64]) -> RadialProfile<'_> {
        let t: Vec<f64> = theta.iter().map(|v| v.abs()).collect();
        let r_max = 1.0 / t.iter().copied().fold(0.0, f64::max);
        RadialProfile::new(
            move |r| t.iter().map(|a| (1.0 - a * r).max(0.0)).product(),
            Tail::Compact(r_max),
            true,
        )
    }
    fn support_body(&self) -> Option<Body> {
        Some(Body::cube(self.dim))
    }
    fn label(&self) -> String {
        format!("triangle-product:{}", self.dim)
    }
}

/// `x -> f(λx)`.
#[derive(Debug, Clone)]
pub struct Dilated {
    inner: Arc<dyn Density>,
    lambda: f64,
}

impl Dilated {
    pub fn new(inner: Arc<dyn Density>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(invalid("dilation factor must be positive"));
        }
        Ok(Self { inner, lambda })
    }
}

impl Density for Dilated {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().map(|v| v * self.lambda).collect();
        self.inner.eval(&y)
    }
    fn concavity(&self) -> Concavity {
        self.inner.concavity()
    }
    fn profile(&self, theta: &[f64]) -> RadialProfile<'_> {
        let p = self.inner.profile(theta);
        let l = self.lambda;
        let tail = match p.tail() {
            Tail::Compact(r) => Tail::Compact(r / l),
            Tail::Exponential { rate } => Tail::Exponential { rate: rate * l },
            Tail::Gaussian { q } => Tail::Gaussian { q: q * l * l },
            Tail::Unknown => Tail::Unknown,
        };
        let bps = p.breakpoints.iter().map(|b| b / l).collect();
        let lc = p.log_concave;
        let fixed = p.fixed_nodes;
        let mut out = RadialProfile::new(move |r| p.eval(l * r), tail, lc).with_breakpoints(bps);
        out.fixed_nodes = fixed;
        out
    }
    fn support_body(&self) -> Option<Body> {
        self.inner.support_body().and_then(|b| b.scaled(1.0 / self.lambda).ok())
    }
    fn label(&self) -> String {
        format!("{}(λ={})", self.inner.label(), self.lambda)
    }
}

/// Density constructors accepted in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensitySpec {
    Indicator { body: BodyFile },
    Power { body: BodyFile, s: f64 },
    ExpGauge { body: BodyFile },
    Gaussian { form: Vec<Vec<f64>> },
    TriangleProduct { dim: usize },
}

impl DensitySpec {
    pub fn build(&self) -> Result<Arc<dyn Density>> {
        Ok(match self {
            DensitySpec::Indicator { body } => Arc::new(Indicator::new(Body::from_file(body)?)),
            DensitySpec::Power { body, s } => Arc::new(Power::new(Body::from_file(body)?, *s)?),
            DensitySpec::ExpGauge { body } => Arc::new(ExpGauge::new(Body::from_file(body)?)),
            DensitySpec::Gaussian { form } => Arc::new(Gaussian::new(Ellipsoid::from_rows(form)?)),
            DensitySpec::TriangleProduct { dim } => {
                if *dim == 0 {
                    return Err(invalid("triangle-product needs dim >= 1"));
                }
                Arc::new(TriangleProduct::new(*dim))
            }
        })
    }
}

// ---- operations ----

fn check_unit(dim: usize, theta: &[f64]) -> Result<()> {
    check_dim(dim, theta.len())?;
    if (norm(theta) - 1.0).abs() > 1e-9 {
        return Err(invalid("direction must be a unit vector"));
    }
    Ok(())
}

/// `∫_0^∞ f(rθ) r^k dr`.
pub fn radial_moment(f: &dyn Density, theta: &[f64], k: u32) -> Result<f64> {
    check_unit(f.dim(), theta)?;
    f.profile(theta).moment(k)
}

/// `‖x‖_f = (∫_0^∞ f(rx) r^{n+1} dr)^{-1/(n+2)}`; `∞` when the integral
/// vanishes.
pub fn gauge_f(f: &dyn Density, x: &[f64]) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    let r = norm(x);
    if r == 0.0 {
        return Err(invalid("gauge_f needs x != 0"));
    }
    let theta: Vec<f64> = x.iter().map(|v| v / r).collect();
    let n = f.dim();
    let m = f.profile(&theta).moment((n + 1) as u32)?;
    if m <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(r * m.powf(-1.0 / (n + 2) as f64))
}

/// The body `K_f`.
pub fn body_from_density(f: Arc<dyn Density>) -> Result<Body> {
    let f0 = f.f0();
    if !(f0 > 0.0) || !f0.is_finite() {
        return Err(Error::Hypothesis(format!("K_f needs 0 < f(0) < ∞, got {f0}")));
    }
    let label = f.label();
    Ok(Body::from_density(f).with_name(format!("K[{label}]")))
}

/// `(lower, ratio, upper)` of the one-dimensional moment inequality for a
/// non-increasing profile with `g(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentBounds {
    pub lower: f64,
    pub ratio: f64,
    pub upper: f64,
    pub log_concave: bool,
}

impl MomentBounds {
    /// `lower <= ratio` always; `ratio <= upper` only for log-concave
    /// profiles. `rel` is a relative slack.
    pub fn holds(&self, rel: f64) -> bool {
        let lo = self.ratio >= self.lower * (1.0 - rel);
        let hi = !self.log_concave || self.ratio <= self.upper * (1.0 + rel);
        lo && hi
    }
}

pub fn moment_bound_constants(n: usize) -> (f64, f64) {
    let nf = n as f64;
    let e = (nf + 2.0) / nf;
    let lower = nf.powf(e) / (nf + 2.0);
    let upper = factorial(n as u64 + 1) / factorial(n as u64 - 1).powf(e);
    (lower, upper)
}

pub fn one_dim_moment_bounds(g: &RadialProfile<'_>, n: usize) -> Result<MomentBounds> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let g0 = g.eval(0.0);
    if (g0 - 1.0).abs() > 1e-12 {
        return Err(Error::Hypothesis(format!("profile must satisfy g(0) = 1, got {g0}")));
    }
    let lo = g.moment(n as u32 - 1)?;
    let hi = g.moment(n as u32 + 1)?;
    if !(lo > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Divergent("profile moments are not finite and positive".into()));
    }
    let (lower, upper) = moment_bound_constants(n);
    Ok(MomentBounds {
        lower,
        ratio: hi / lo.powf((n as f64 + 2.0) / n as f64),
        upper,
        log_concave: g.is_log_concave(),
    })
}

/// Checks the moment inequality for `r -> f(rθ)/f(0)` on every direction.
pub fn pointwise_moment_check(f: &dyn Density, dirs: &[Vec<f64>]) -> Result<(usize, f64)> {
    let n = f.dim();
    let f0 = f.f0();
    let mut worst: f64 = f64::INFINITY;
    let mut failures = 0;
    for theta in dirs {
        let p = f.profile(theta);
        let lc = p.is_log_concave();
        let mut g = RadialProfile::new(|r| p.eval(r) / f0, p.tail(), lc).with_breakpoints(p.breakpoints.clone());
        g.fixed_nodes = p.fixed_nodes;
        let b = one_dim_moment_bounds(&g, n)?;
        if !b.holds(1e-9) {
            failures += 1;
        }
        let margin = (b.ratio / b.lower - 1.0).min(if lc { b.upper / b.ratio - 1.0 } else { f64::INFINITY });
        worst = worst.min(margin);
    }
    Ok((failures, worst))
}

/// Result of checking a declared concavity class on random triples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcavityCheck {
    pub triples: usize,
    pub violations: usize,
    pub worst: f64,
}

fn sample_point(f: &dyn Density, rng: &mut crate::rng::Rng) -> Vec<f64> {
    let n = f.dim();
    let theta = random_unit(rng, n);
    let p = f.profile(&theta);
    let r_max = match p.tail() {
        Tail::Compact(r) => r,
        _ => p.cutoff(0).unwrap_or(5.0) * 0.3,
    };
    let r = r_max * rng.random::<f64>();
    theta.iter().map(|v| v * r).collect()
}

/// Spot-checks the declared concavity on random triples `(x, y, λ)`;
/// line classes draw `x, y` on a common line through the origin.
pub fn spot_check_concavity(f: &dyn Density, triples: usize, seed: u64) -> ConcavityCheck {
    let mut rng = rng_for(derive_seed(seed, "concavity"));
    let class = f.concavity();
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..triples {
        let x = sample_point(f, &mut rng);
        let y = if class.is_global() {
            sample_point(f, &mut rng)
        } else {
            let t: f64 = 2.0 * rng.random::<f64>() - 1.0;
            let s = if norm(&x) > 0.0 { t * 1.2 } else { 0.0 };
            x.iter().map(|v| v * s).collect()
        };
        let l: f64 = rng.random();
        let m: Vec<f64> = x.iter().zip(&y).map(|(a, b)| l * a + (1.0 - l) * b).collect();
        let (fx, fy, fm) = (f.eval(&x), f.eval(&y), f.eval(&m));
        if fx <= 0.0 || fy <= 0.0 {
            continue;
        }
        let (lhs, rhs) = match class.s() {
            Some(s) if s.is_infinite() => (fm, fx.min(fy)),
            Some(s) => (fm.powf(1.0 / s), l * fx.powf(1.0 / s) + (1.0 - l) * fy.powf(1.0 / s)),
            None => (
                if fm > 0.0 { fm.ln() } else { f64::NEG_INFINITY },
                l * fx.ln() + (1.0 - l) * fy.ln(),
            ),
        };
        let gap = (rhs - lhs) / rhs.abs().max(1.0);
        if gap > 1e-8 {
            violations += 1;
        }
        worst = worst.max(gap);
    }
    ConcavityCheck {
        triples,
        violations,
        worst,
    }
}

/// Checks evenness `f(x) = f(-x)` on random points.
pub fn spot_check_evenness(f: &dyn Density, points: usize, seed: u64) -> usize {
    let mut rng = rng_for(derive_seed(seed, "evenness"));
    (0..points)
        .filter(|_| {
            let x = sample_point(f, &mut rng);
            let mx: Vec<f64> = x.iter().map(|v| -v).collect();
            let (a, b) = (f.eval(&x), f.eval(&mx));
            (a - b).abs() > 1e-10 * a.abs().max(b.abs()).max(1e-300)
        })
        .count()
}

/// Triangle inequality for `‖·‖_f` on random pairs.
pub fn busemann_check(f: Arc<dyn Density>, pairs: usize, seed: u64) -> Result<Report> {
    let label = f.label();
    let n = f.dim();
    let kf = body_from_density(f)?;
    let mut rng = rng_for(derive_seed(seed, "busemann"));
    let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..pairs)
        .map(|_| {
            let mut v = || -> Vec<f64> {
                let u = random_unit(&mut rng, n);
                let r = (2.0 * rng.random::<f64>() - 1.0).exp();
                u.iter().map(|x| x * r).collect()
            };
            (v(), v())
        })
        .collect();
    let gaps = crate::rng::par_map(&draws, |(x, y)| {
        let s: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let lhs = kf.gauge_at(&s);
        let rhs = kf.gauge_at(x) + kf.gauge_at(y);
        (lhs - rhs) / rhs
    });
    let violations = gaps.iter().filter(|g| **g > 1e-8).count();
    let worst = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut r = Report::new("thm-2.1", label);
    r.input("pairs", pairs).input("seed", seed);
    r.exact("violations", violations as f64)
        .exact("max_relative_excess", worst);
    r.require(
        violations == 0,
        format!("{violations} triangle-inequality violations beyond 1e-8"),
    );
    Ok(r)
}

/// `(L_f, L_{K_f})` computed from one set of random directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LPair {
    pub l_f: Estimate,
    pub l_kf: Estimate,
    pub ratio: Estimate,
}

/// Polar-coordinate estimates of `L_f` and `L_{K_f}`. Both share the second
/// moment `∫_{K_f} xx^T = (1/(n+2)) ∫ xx^T f`, so the ratio only depends on
/// `∫ f` against `Vol(K_f)`.
pub fn l_pair(f: &dyn Density, samples: usize, seed: u64) -> Result<LPair> {
    let n = f.dim();
    let nf = n as f64;
    let f0 = f.f0();
    if !(f0 > 0.0) {
        return Err(Error::Hypothesis("L_f needs f(0) > 0".into()));
    }
    let width = 2 + sym_len(n);
    let blocks = block_sums(samples, derive_seed(seed, "l-pair"), width, |rng, acc| {
        let theta = random_unit(rng, n);
        let p = f.profile(&theta);
        let (lo, hi) = match p.moments(&[n as u32 - 1, n as u32 + 1]) {
            Ok(m) => (m[0], m[1]),
            Err(_) => (f64::NAN, f64::NAN),
        };
        acc[0] += lo;
        acc[1] += hi.max(0.0).powf(nf / (nf + 2.0));
        add_outer(&mut acc[2..], &theta, hi);
    });
    let area = sphere_area(n);
    let stats = |m: &[f64]| -> (f64, f64) {
        let mass = area * m[0];
        let vol_kf = area / nf * m[1];
        let second = unpack_sym(&m[2..], n, area);
        let det_f = (second.clone() / mass).determinant();
        let det_kf = (second / ((nf + 2.0) * vol_kf)).determinant();
        let l_f = (f0 / mass).powf(1.0 / nf) * det_f.powf(0.5 / nf);
        let l_kf = det_kf.powf(0.5 / nf) / vol_kf.powf(1.0 / nf);
        (l_f, l_kf)
    };
    let mass = blocks.means()[0] * area;
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    let s = blocks.seed();
    let count = blocks.total_count() as u64;
    let (lf, lf_se) = blocks.jackknife(|m| stats(m).0);
    let (lk, lk_se) = blocks.jackknife(|m| stats(m).1);
    let (ra, ra_se) = blocks.jackknife(|m| {
        let (a, b) = stats(m);
        b / a
    });
    Ok(LPair {
        l_f: Estimate::new(lf, lf_se, count, s),
        l_kf: Estimate::new(lk, lk_se, count, s),
        ratio: Estimate::new(ra, ra_se, count, s),
    })
}

/// `L_{K_f} / L_f`, plus the polar-coordinate identity
/// `∫_{K_f} <x,y>² dx = (1/(n+2)) ∫ <x,y>² f(x) dx` on five random `y`
/// (left side by uniform sampling in `K_f`).
pub fn l_equivalence_check(
    f: Arc<dyn Density>,
    samples: usize,
    seed: u64,
    constants: &crate::constants::Constants,
) -> Result<Report> {
    let n = f.dim();
    let pair = l_pair(f.as_ref(), samples, seed)?;
    let mut r = Report::new("lem-2.3", f.label());
    r.input("samples", samples).input("seed", seed);
    r.constant("l_ratio_max", constants.l_ratio_max)
        .constant("sigma", constants.sigma);
    r.measure("L_f", pair.l_f)
        .measure("L_Kf", pair.l_kf)
        .measure("ratio", pair.ratio);
    let k = constants.sigma;
    let lo = 1.0 / constants.l_ratio_max;
    let hi = constants.l_ratio_max;
    r.require(
        pair.ratio.value + k * pair.ratio.std_error >= lo && pair.ratio.value - k * pair.ratio.std_error <= hi,
        format!("L_Kf/L_f = {} outside [{lo}, {hi}]", pair.ratio.value),
    );

    // identity check
    let mut rng = rng_for(derive_seed(seed, "identity-y"));
    let ys: Vec<Vec<f64>> = (0..5).map(|_| random_unit(&mut rng, n)).collect();
    let kf = body_from_density(f.clone())?;
    let half: Vec<f64> = kf.bounding_half_widths().iter().map(|h| h * 1.01).collect();
    let box_vol: f64 = half.iter().map(|h| 2.0 * h).product();
    let lhs_blocks = block_sums(samples, derive_seed(seed, "identity-lhs"), 5, |rng, acc| {
        let x: Vec<f64> = half.iter().map(|h| h * (2.0 * rng.random::<f64>() - 1.0)).collect();
        if kf.gauge_at(&x) <= 1.0 {
            for (a, y) in acc.iter_mut().zip(&ys) {
                *a += dot(&x, y).powi(2);
            }
        }
    });
    let area = sphere_area(n);
    let rhs_blocks = block_sums(samples, derive_seed(seed, "identity-rhs"), 5, |rng, acc| {
        let theta = random_unit(rng, n);
        let hi = f.profile(&theta).moment(n as u32 + 1).unwrap_or(f64::NAN);
        for (a, y) in acc.iter_mut().zip(&ys) {
            *a += dot(&theta, y).powi(2) * hi;
        }
    });
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        let (l, lse) = lhs_blocks.jackknife(|m| m[i] * box_vol);
        let (rv, rse) = rhs_blocks.jackknife(|m| m[i] * area / (n as f64 + 2.0));
        let z = (l - rv).abs() / lse.hypot(rse);
        worst = worst.max(z);
        r.measure(
            &format!("identity_lhs_{i}"),
            Estimate::new(l, lse, samples as u64, lhs_blocks.seed()),
        );
        r.measure(
            &format!("identity_rhs_{i}"),
            Estimate::new(rv, rse, samples as u64, rhs_blocks.seed()),
        );
    }
    r.exact("identity_max_z", worst);
    // five comparisons: Bonferroni-adjusted margin
    r.require(
        worst <= k + 1.0,
        format!("polar identity off by {worst:.2} combined standard errors"),
    );
    Ok(r)
}

/// Finite-family proxies for the suprema of `L_f` and `L_{K_f}`.
pub fn ln_comparison_report(family: &[Arc<dyn Density>], samples: usize, seed: u64) -> Result<Report> {
    let first = family.first().ok_or_else(|| invalid("empty density family"))?;
    let n = first.dim();
    let mut pairs = Vec::with_capacity(family.len());
    for (i, f) in family.iter().enumerate() {
        check_dim(n, f.dim())?;
        pairs.push(l_pair(f.as_ref(), samples, derive_seed(seed, &format!("member-{i}")))?);
    }
    let best = |sel: fn(&LPair) -> Estimate| {
        pairs.iter().map(sel).fold(Estimate::exact(f64::NEG_INFINITY), |a, b| {
            if b.value > a.value {
                b
            } else {
                a
            }
        })
    };
    let max_lf = best(|p| p.l_f);
    let max_lkf = best(|p| p.l_kf);
    let max_ratio = best(|p| p.ratio);
    let ratio = max_lkf.ratio(&max_lf);
    let mut r = Report::new("cor-2.5", format!("family(n={n}, size={})", family.len()));
    r.input("members", family.iter().map(|f| f.label()).collect::<Vec<_>>());
    r.measure("max_L_f", max_lf).measure("max_L_Kf", max_lkf);
    r.measure("ratio", ratio).measure("max_single_ratio", max_ratio);
    r.note("suprema over all densities are not computable; these are finite-family proxies");
    r.require(
        ratio.value <= max_ratio.value * (1.0 + 1e-12),
        "family ratio exceeds the largest single ratio",
    );
    Ok(r)
}

/// Distance between `K_f` and the support of `f` for an s-concave `f` with
/// `f(0) = 1`, with the containment constants `c1, c2` of
/// `(n/(c2 s)) Supp(f) ⊆ K_f ⊆ (1/c1) Supp(f)`.
pub fn distance_support_check(f: Arc<dyn Density>, support: &Body, s: f64) -> Result<Report> {
    let n = f.dim();
    check_dim(n, support.dim())?;
    let nf = n as f64;
    if !(s > nf) {
        return Err(Error::Hypothesis(format!("need s > n, got s = {s}, n = {n}")));
    }
    let f0 = f.f0();
    if (f0 - 1.0).abs() > 1e-12 {
        return Err(Error::Hypothesis(format!("need f(0) = 1, got {f0}")));
    }
    let label = f.label();
    let kf = body_from_density(f)?;
    let dirs = direction_set(n, default_direction_count(n));
    let d = distance_breakdown(support, &kf, &dirs)?;
    let c1 = 1.0 / d.outer.value;
    let c2 = d.inner.value * nf / s;
    let mut r = Report::new("lem-2.2", label);
    r.input("s", s).input("n", n).input("support", support.name());
    r.measure("d_G", d.d_g).measure("containment", d.containment);
    r.measure("d_G_n_over_s", d.d_g.scale(nf / s));
    r.measure("containment_n_over_s", d.containment.scale(nf / s));
    r.exact("c1", c1).exact("c2", c2);
    r.require(
        d.d_g.value.is_finite() && d.d_g.value >= 1.0 - 1e-9,
        "distance must be finite and >= 1",
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_examples() {
        for n in 2..=4usize {
            let d = Indicator::new(Body::unit_ball(n));
            let mut th = vec![0.0; n];
            th[0] = 1.0;
            let m = radial_moment(&d, &th, n as u32 + 1).unwrap();
            assert!((m - 1.0 / (n as f64 + 2.0)).abs() < 1e-14);
            let e = ExpGauge::new(Body::unit_ball(n));
            let m = radial_moment(&e, &th, n as u32 + 1).unwrap();
            assert!((m / factorial(n as u64 + 1) - 1.0).abs() < 1e-11, "{m}");
        }
        let b = Indicator::new(Body::cube(2));
        let d = std::f64::consts::FRAC_1_SQRT_2;
        assert!((radial_moment(&b, &[d, d], 3).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn divergent_profiles_are_rejected() {
        let p = RadialProfile::new(|_| 1.0, Tail::Unknown, true);
        assert!(matches!(p.moment(2), Err(Error::Divergent(_))));
    }

    #[test]
    fn gauge_f_examples() {
        let k = Body::lp(3, 3.0).unwrap();
        let f = Indicator::new(k.clone());
        let x = [0.3, -0.2, 0.5];
        let expect = 5f64.powf(1.0 / 5.0) * k.gauge_at(&x);
        assert!((gauge_f(&f, &x).unwrap() / expect - 1.0).abs() < 1e-12);
        let g = Gaussian::standard(2);
        let x = [0.6, 0.8];
        assert!((gauge_f(&g, &x).unwrap() - 2f64.powf(-0.25)).abs() < 1e-11);
        let x2 = [1.2, 1.6];
        assert!((gauge_f(&g, &x2).unwrap() - 2.0 * gauge_f(&g, &x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn moment_bound_equality_cases() {
        for n in 1..=8usize {
            let ind = RadialProfile::new(|t| if t <= 1.0 { 1.0 } else { 0.0 }, Tail::Compact(1.0), true);
            let b = one_dim_moment_bounds(&ind, n).unwrap();
            assert!((b.ratio / b.lower - 1.0).abs() < 1e-12, "n={n}");
            let ex = RadialProfile::new(|t: f64| (-t).exp(), Tail::Exponential { rate: 1.0 }, true);
            let b = one_dim_moment_bounds(&ex, n).unwrap();
            assert!((b.ratio / b.upper - 1.0).abs() < 1e-9, "n={n}: {b:?}");
        }
        let g = RadialProfile::new(|t: f64| (-t * t).exp(), Tail::Gaussian { q: 2.0 }, true);
        let b = one_dim_moment_bounds(&g, 2).unwrap();
        assert!(b.lower < b.ratio && b.ratio < b.upper);
        let bad = RadialProfile::new(|t: f64| 2.0 * (-t).exp(), Tail::Exponential { rate: 1.0 }, true);
        assert!(one_dim_moment_bounds(&bad, 2).is_err());
    }

    #[test]
    fn declared_classes_survive_spot_checks() {
        let fs: Vec<Box<dyn Density>> = vec![
            Box::new(Indicator::new(Body::cube(2))),
            Box::new(Power::new(Body::unit_cross(3), 6.0).unwrap()),
            Box::new(ExpGauge::new(Body::lp(2, 3.0).unwrap())),
            Box::new(Gaussian::standard(3)),
            Box::new(TriangleProduct::new(2)),
        ];
        for f in &fs {
            let c = spot_check_concavity(f.as_ref(), 1000, 1);
            assert_eq!(c.violations, 0, "{}: {c:?}", f.label());
            assert_eq!(spot_check_evenness(f.as_ref(), 200, 2), 0);
        }
    }

    #[test]
    fn density_spec_parsing() {
        let s = r#"{"type":"power","body":{"dim":2,"kind":"box"},"s":8}"#;
        let d: DensitySpec = serde_json::from_str(s).unwrap();
        let f = d.build().unwrap();
        assert_eq!(f.f0(), 1.0);
        assert!(serde_json::from_str::<DensitySpec>(r#"{"type":"triangle-product","dim":2,"x":1}"#).is_err());
    }
}
