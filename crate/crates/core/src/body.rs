//! Centrally symmetric convex bodies as gauge/support oracles.

use crate::directions::{default_direction_count, direction_set, maximize_on_sphere, spacing};
use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{dot, norm, normalized, Ellipsoid, LinearMap};
use crate::logconcave::Density;
use crate::polytope::{HPolytope, VPolytope};
use crate::rng::par_map;
use crate::special::gamma_fn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// Entries kept in the per-direction radius cache of a density-induced body.
const RADIUS_CACHE_LIMIT: usize = 1 << 18;

/// Shape of a body. Every variant is centrally symmetric with the origin in
/// its interior.
#[derive(Clone)]
pub enum Shape {
    Ball {
        radius: f64,
    },
    Box {
        half_widths: Vec<f64>,
    },
    /// `{x : |x|_1 <= radius}`.
    Cross {
        radius: f64,
    },
    /// Unit ball of `l_p`, `1 <= p < ∞`.
    Lp {
        p: f64,
    },
    HPoly(HPolytope),
    VPoly(VPolytope),
    Ellipsoid(Ellipsoid),
    /// `map(base)`; compositions are flattened so `base` is never itself
    /// transformed.
    Transformed {
        base: Body,
        map: LinearMap,
    },
    Intersection(Vec<Body>),
    /// Convex hull of the pieces.
    Hull(Vec<Body>),
    /// `{x : ‖x‖_f <= 1}` with `‖x‖_f = (∫ f(rx) r^{n+1} dr)^{-1/(n+2)}`.
    Density(DensityBody),
}

#[derive(Clone)]
pub struct DensityBody {
    density: Arc<dyn Density>,
    cache: Arc<Mutex<HashMap<Vec<u64>, f64>>>,
}

impl DensityBody {
    pub fn density(&self) -> &Arc<dyn Density> {
        &self.density
    }

    /// `ρ(θ) = (∫ f(rθ) r^{n+1} dr)^{1/(n+2)}` for a unit `θ`.
    fn radius(&self, theta: &[f64]) -> f64 {
        let key: Vec<u64> = theta.iter().map(|v| v.to_bits()).collect();
        if let Some(r) = self.cache.lock().unwrap().get(&key) {
            return *r;
        }
        let n = self.density.dim();
        let m = self
            .density
            .profile(theta)
            .moment((n + 1) as u32)
            .unwrap_or(f64::INFINITY);
        let r = m.max(0.0).powf(1.0 / (n + 2) as f64);
        let mut cache = self.cache.lock().unwrap();
        if cache.len() < RADIUS_CACHE_LIMIT {
            cache.insert(key, r);
        }
        r
    }
}

struct Inner {
    dim: usize,
    name: Option<String>,
    shape: Shape,
    cloud: OnceLock<Vec<Vec<f64>>>,
    radii: OnceLock<(f64, f64)>,
}

/// An immutable, cheaply clonable, thread-safe body.
#[derive(Clone)]
pub struct Body(Arc<Inner>);

impl fmt::Debug for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Body")
            .field("kind", &self.kind())
            .field("dim", &self.dim())
            .field("name", &self.0.name)
            .finish()
    }
}

fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

impl Body {
    fn from_shape(dim: usize, shape: Shape) -> Self {
        Body(Arc::new(Inner {
            dim,
            name: None,
            shape,
            cloud: OnceLock::new(),
            radii: OnceLock::new(),
        }))
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid("ball needs dim >= 1 and a positive radius"));
        }
        Ok(Self::from_shape(dim, Shape::Ball { radius }))
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(dim, 1.0).expect("valid ball")
    }

    pub fn boxed(half_widths: Vec<f64>) -> Result<Self> {
        if half_widths.is_empty() || half_widths.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(invalid("box half-widths must be positive"));
        }
        Ok(Self::from_shape(half_widths.len(), Shape::Box { half_widths }))
    }

    /// `[-1, 1]^dim`.
    pub fn cube(dim: usize) -> Self {
        Self::boxed(vec![1.0; dim]).expect("valid cube")
    }

    pub fn cross(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid("cross-polytope needs dim >= 1 and a positive radius"));
        }
        Ok(Self::from_shape(dim, Shape::Cross { radius }))
    }

    pub fn unit_cross(dim: usize) -> Self {
        Self::cross(dim, 1.0).expect("valid cross-polytope")
    }

    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 || !(p >= 1.0) || !p.is_finite() {
            return Err(invalid("lp-ball needs dim >= 1 and finite p >= 1"));
        }
        Ok(Self::from_shape(dim, Shape::Lp { p }))
    }

    pub fn hpoly(p: HPolytope) -> Self {
        Self::from_shape(p.dim(), Shape::HPoly(p))
    }

    pub fn vpoly(p: VPolytope) -> Self {
        Self::from_shape(p.dim(), Shape::VPoly(p))
    }

    pub fn ellipsoid(e: Ellipsoid) -> Self {
        Self::from_shape(e.dim(), Shape::Ellipsoid(e))
    }

    /// The body `K_f` induced by a density.
    pub fn from_density(density: Arc<dyn Density>) -> Self {
        let dim = density.dim();
        Self::from_shape(
            dim,
            Shape::Density(DensityBody {
                density,
                cache: Arc::new(Mutex::new(HashMap::new())),
            }),
        )
    }

    pub fn intersection(pieces: Vec<Body>) -> Result<Self> {
        let dim = Self::common_dim(&pieces)?;
        if pieces.len() == 1 {
            return Ok(pieces.into_iter().next().unwrap());
        }
        Ok(Self::from_shape(dim, Shape::Intersection(pieces)))
    }

    /// Convex hull of the pieces. Polytope pieces with known vertices give an
    /// exact v-polytope; otherwise the hull is kept as a support oracle.
    pub fn hull(pieces: Vec<Body>) -> Result<Self> {
        let dim = Self::common_dim(&pieces)?;
        if pieces.len() == 1 {
            return Ok(pieces.into_iter().next().unwrap());
        }
        let verts: Option<Vec<Vec<Vec<f64>>>> = pieces.iter().map(|p| p.vertices()).collect();
        if let Some(vs) = verts {
            return Ok(Self::vpoly(VPolytope::new(vs.into_iter().flatten().collect())?));
        }
        Ok(Self::from_shape(dim, Shape::Hull(pieces)))
    }

    fn common_dim(pieces: &[Body]) -> Result<usize> {
        let first = pieces.first().ok_or_else(|| invalid("need at least one piece"))?;
        for p in pieces {
            check_dim(first.dim(), p.dim())?;
        }
        Ok(first.dim())
    }

    pub fn with_name(&self, name: impl Into<String>) -> Self {
        Body(Arc::new(Inner {
            dim: self.0.dim,
            name: Some(name.into()),
            shape: self.0.shape.clone(),
            cloud: self.0.cloud.clone(),
            radii: self.0.radii.clone(),
        }))
    }

    pub fn name(&self) -> String {
        self.0
            .name
            .clone()
            .unwrap_or_else(|| format!("{}:{}", self.kind(), self.dim()))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.0.shape
    }

    pub fn kind(&self) -> &'static str {
        match &self.0.shape {
            Shape::Ball { .. } => "ball",
            Shape::Box { .. } => "box",
            Shape::Cross { .. } => "cross",
            Shape::Lp { .. } => "lp",
            Shape::HPoly(_) => "hpoly",
            Shape::VPoly(_) => "vpoly",
            Shape::Ellipsoid(_) => "ellipsoid",
            Shape::Transformed { .. } => "transformed",
            Shape::Intersection(_) => "intersection",
            Shape::Hull(_) => "hull",
            Shape::Density(_) => "density",
        }
    }

    /// Whether gauge and support both have closed forms or exact programs
    /// (as opposed to the boundary-cloud search used for oracle bodies).
    pub fn is_exact(&self) -> bool {
        match &self.0.shape {
            Shape::Transformed { base, .. } => base.is_exact(),
            Shape::Intersection(_) | Shape::Hull(_) | Shape::Density(_) => false,
            _ => true,
        }
    }

    pub fn density(&self) -> Option<&Arc<dyn Density>> {
        match &self.0.shape {
            Shape::Density(d) => Some(&d.density),
            _ => None,
        }
    }

    // ---- oracles ----

    /// `‖x‖_K`.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("gauge argument must be finite"));
        }
        Ok(self.gauge_at(x))
    }

    /// `‖x‖_K` without argument checks.
    pub fn gauge_at(&self, x: &[f64]) -> f64 {
        match &self.0.shape {
            Shape::Ball { radius } => norm(x) / radius,
            Shape::Box { half_widths } => x.iter().zip(half_widths).map(|(v, a)| v.abs() / a).fold(0.0, f64::max),
            Shape::Cross { radius } => x.iter().map(|v| v.abs()).sum::<f64>() / radius,
            Shape::Lp { p } => lp_norm(x, *p),
            Shape::HPoly(h) => h.gauge(x),
            Shape::VPoly(v) => v.gauge(x),
            Shape::Ellipsoid(e) => e.gauge(x),
            Shape::Transformed { base, map } => base.gauge_at(&map.apply_inverse(x)),
            Shape::Intersection(ps) => ps.iter().map(|p| p.gauge_at(x)).fold(0.0, f64::max),
            Shape::Hull(_) => self.gauge_from_support(x),
            Shape::Density(d) => {
                let r = norm(x);
                if r == 0.0 {
                    return 0.0;
                }
                let theta: Vec<f64> = x.iter().map(|v| v / r).collect();
                let rho = d.radius(&theta);
                if rho > 0.0 {
                    r / rho
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// `h_K(θ)`.
    pub fn support(&self, theta: &[f64]) -> Result<f64> {
        check_dim(self.dim(), theta.len())?;
        if !(norm(theta) > 0.0) || theta.iter().any(|v| !v.is_finite()) {
            return Err(invalid("support direction must be finite and non-zero"));
        }
        let h = self.support_at(theta);
        if h.is_finite() {
            Ok(h)
        } else {
            Err(Error::Unbounded)
        }
    }

    /// `h_K(θ)` without argument checks.
    pub fn support_at(&self, theta: &[f64]) -> f64 {
        match &self.0.shape {
            Shape::Ball { radius } => radius * norm(theta),
            Shape::Box { half_widths } => theta.iter().zip(half_widths).map(|(t, a)| t.abs() * a).sum(),
            Shape::Cross { radius } => radius * theta.iter().fold(0.0f64, |m, t| m.max(t.abs())),
            Shape::Lp { p } => {
                if *p == 1.0 {
                    theta.iter().fold(0.0f64, |m, t| m.max(t.abs()))
                } else {
                    lp_norm(theta, p / (p - 1.0))
                }
            }
            Shape::HPoly(h) => h.support(theta),
            Shape::VPoly(v) => v.support(theta),
            Shape::Ellipsoid(e) => e.support(theta),
            Shape::Transformed { base, map } => base.support_at(&map.apply_transpose(theta)),
            Shape::Hull(ps) => ps.iter().map(|p| p.support_at(theta)).fold(0.0, f64::max),
            Shape::Intersection(_) | Shape::Density(_) => self.support_from_gauge(theta),
        }
    }

    /// Radial function `1/‖θ‖_K` for a unit `θ`.
    pub fn radial(&self, theta: &[f64]) -> Result<f64> {
        check_dim(self.dim(), theta.len())?;
        if (norm(theta) - 1.0).abs() > 1e-9 {
            return Err(invalid("radial direction must be a unit vector"));
        }
        Ok(self.radial_at(theta))
    }

    pub fn radial_at(&self, theta: &[f64]) -> f64 {
        1.0 / self.gauge_at(theta)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.gauge_at(x) <= 1.0
    }

    /// Boundary points `ρ(u) u` over a quasi-uniform direction set, plus the
    /// vertices when they are known.
    pub fn boundary_cloud(&self) -> &[Vec<f64>] {
        self.0.cloud.get_or_init(|| {
            let dirs = direction_set(self.dim(), cloud_size(self.dim()));
            let mut pts = par_map(&dirs, |u| {
                let r = self.radial_at(u);
                u.iter().map(|v| v * r).collect::<Vec<f64>>()
            });
            if let Some(vs) = self.vertices() {
                pts.extend(vs);
            }
            pts
        })
    }

    /// Support by maximizing `<θ, ρ(u) u>`: best cloud point, then a compass
    /// search on the sphere (step tolerance 1e-9).
    fn support_from_gauge(&self, theta: &[f64]) -> f64 {
        let cloud = self.boundary_cloud();
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
        for (i, p) in cloud.iter().enumerate() {
            let v = dot(theta, p);
            if v > best {
                best = v;
                arg = i;
            }
        }
        let step = spacing(self.dim(), cloud.len());
        let (_, refined) = maximize_on_sphere(&cloud[arg], step, 1e-9, |u| dot(theta, u) * self.radial_at(u));
        best.max(refined)
    }

    /// Gauge from the support function: `sup_θ <x, θ> / h(θ)`.
    fn gauge_from_support(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return 0.0;
        }
        let dirs = self.polar_directions();
        let ratio = |u: &[f64]| dot(x, u) / self.support_at(u);
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
        for (i, u) in dirs.iter().enumerate() {
            let v = ratio(u);
            if v > best {
                best = v;
                arg = i;
            }
        }
        let step = spacing(self.dim(), dirs.len());
        let (_, refined) = maximize_on_sphere(&dirs[arg], step, 1e-9, ratio);
        best.max(refined).max(0.0)
    }

    fn polar_directions(&self) -> &[Vec<f64>] {
        // Reuses the cloud slot: hull bodies never need a boundary cloud of
        // their own since their support is exact.
        self.0.cloud.get_or_init(|| {
            let mut d = direction_set(self.dim(), cloud_size(self.dim()));
            if let Some(ns) = self.facet_normals() {
                d.extend(ns);
            }
            d
        })
    }

    /// `(r_in, r_out)`: exact for the simple shapes, from the boundary cloud
    /// otherwise.
    pub fn radii(&self) -> (f64, f64) {
        *self.0.radii.get_or_init(|| {
            let n = self.dim() as f64;
            match &self.0.shape {
                Shape::Ball { radius } => (*radius, *radius),
                Shape::Box { half_widths } => (
                    half_widths.iter().copied().fold(f64::INFINITY, f64::min),
                    norm(half_widths),
                ),
                Shape::Cross { radius } => (radius / n.sqrt(), *radius),
                Shape::Lp { p } => {
                    let e = 0.5 - 1.0 / p;
                    if *p >= 2.0 {
                        (1.0, n.powf(e))
                    } else {
                        (n.powf(e), 1.0)
                    }
                }
                Shape::HPoly(h) => {
                    let r_in = h.offsets().iter().copied().fold(f64::INFINITY, f64::min);
                    (r_in, self.cloud_radii().1)
                }
                Shape::VPoly(v) => (
                    self.cloud_radii().0,
                    v.vertices().iter().map(|x| norm(x)).fold(0.0, f64::max),
                ),
                Shape::Ellipsoid(e) => {
                    let eig = nalgebra::SymmetricEigen::new(e.form().clone()).eigenvalues;
                    (1.0 / eig.max().sqrt(), 1.0 / eig.min().sqrt())
                }
                _ => self.cloud_radii(),
            }
        })
    }

    fn cloud_radii(&self) -> (f64, f64) {
        if let Shape::Hull(_) = self.0.shape {
            let dirs = direction_set(self.dim(), cloud_size(self.dim()));
            let rs: Vec<f64> = dirs.iter().map(|u| self.radial_at(u)).collect();
            let r_in = rs.iter().copied().fold(f64::INFINITY, f64::min);
            let r_out = dirs.iter().map(|u| self.support_at(u)).fold(0.0, f64::max);
            return (r_in, r_out);
        }
        let cloud = self.boundary_cloud();
        let r_in = cloud.iter().map(|p| norm(p)).fold(f64::INFINITY, f64::min);
        let (mut r_out, mut arg) = (0.0, 0);
        for (i, p) in cloud.iter().enumerate() {
            let r = norm(p);
            if r > r_out {
                r_out = r;
                arg = i;
            }
        }
        let step = spacing(self.dim(), cloud.len());
        let (_, refined) = maximize_on_sphere(&cloud[arg], step, 1e-9, |u| self.radial_at(u));
        (r_in, r_out.max(refined))
    }

    pub fn inner_radius(&self) -> f64 {
        self.radii().0
    }

    pub fn outer_radius(&self) -> f64 {
        self.radii().1
    }

    /// Half-widths `h_K(e_i)` of the tightest axis-aligned bounding box.
    pub fn bounding_half_widths(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.support_at(&unit(self.dim(), i))).collect()
    }

    // ---- combinatorial data ----

    /// Outer facet normals (not necessarily unit) when the body is a
    /// polytope with known facets.
    pub fn facet_normals(&self) -> Option<Vec<Vec<f64>>> {
        match &self.0.shape {
            Shape::Box { .. } | Shape::Cross { .. } | Shape::HPoly(_) => self.as_hpoly().map(|h| h.normals().to_vec()),
            Shape::Lp { p } if *p == 1.0 => Body::unit_cross(self.dim()).facet_normals(),
            Shape::Transformed { base, map } => base.facet_normals().map(|ns| {
                let t = map.inverse_transpose();
                ns.iter().map(|a| normalized(&t.apply(a)).unwrap()).collect()
            }),
            _ => None,
        }
    }

    /// Vertices when the body is a polytope with known vertices.
    pub fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        let n = self.dim();
        match &self.0.shape {
            Shape::Box { half_widths } => Some(
                (0..1usize << n)
                    .map(|s| {
                        (0..n)
                            .map(|i| {
                                if s >> i & 1 == 1 {
                                    -half_widths[i]
                                } else {
                                    half_widths[i]
                                }
                            })
                            .collect()
                    })
                    .collect(),
            ),
            Shape::Cross { radius } => Some(
                (0..n)
                    .flat_map(|i| {
                        let mut a = vec![0.0; n];
                        a[i] = *radius;
                        let b = a.iter().map(|v| -v).collect();
                        [a, b]
                    })
                    .collect(),
            ),
            Shape::Lp { p } if *p == 1.0 => Body::unit_cross(n).vertices(),
            Shape::VPoly(v) => Some(v.vertices().to_vec()),
            Shape::Transformed { base, map } => base.vertices().map(|vs| vs.iter().map(|v| map.apply(v)).collect()),
            _ => None,
        }
    }

    /// Facet description when available.
    pub fn as_hpoly(&self) -> Option<HPolytope> {
        let n = self.dim();
        match &self.0.shape {
            Shape::Box { half_widths } => {
                HPolytope::new((0..n).map(|i| unit(n, i)).collect(), half_widths.clone()).ok()
            }
            Shape::Cross { radius } => HPolytope::new(
                (0..1usize << n)
                    .map(|s| (0..n).map(|i| if s >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
                    .collect(),
                vec![*radius; 1 << n],
            )
            .ok(),
            Shape::Lp { p } if *p == 1.0 => Body::unit_cross(n).as_hpoly(),
            Shape::HPoly(h) => Some(h.clone()),
            Shape::Transformed { base, map } => base.as_hpoly().and_then(|h| {
                let t = map.inverse_transpose();
                let normals = h.normals().iter().map(|a| t.apply(a)).collect();
                HPolytope::new(normals, h.offsets().to_vec()).ok()
            }),
            Shape::Intersection(ps) => {
                let hs: Option<Vec<HPolytope>> = ps.iter().map(|p| p.as_hpoly()).collect();
                let hs = hs?;
                let mut acc = hs[0].clone();
                for h in &hs[1..] {
                    acc = acc.intersect(h).ok()?;
                }
                Some(acc)
            }
            _ => None,
        }
    }

    // ---- transformations ----

    /// The image `T(K)`: gauge `x -> ‖T^{-1}x‖_K`, volume times `|det T|`.
    pub fn apply_linear(&self, map: &LinearMap) -> Result<Body> {
        check_dim(self.dim(), map.dim())?;
        let (base, map) = match &self.0.shape {
            Shape::Transformed { base, map: inner } => (base.clone(), map.compose(inner)?),
            _ => (self.clone(), map.clone()),
        };
        let mut out = Self::from_shape(self.dim(), Shape::Transformed { base, map });
        if let Some(name) = &self.0.name {
            out = out.with_name(name.clone());
        }
        Ok(out)
    }

    /// `s K`.
    pub fn scaled(&self, s: f64) -> Result<Body> {
        match &self.0.shape {
            Shape::Ball { radius } => Ok(self.renamed(Body::ball(self.dim(), radius * s)?)),
            Shape::Box { half_widths } => Ok(self.renamed(Body::boxed(half_widths.iter().map(|a| a * s).collect())?)),
            Shape::Cross { radius } => Ok(self.renamed(Body::cross(self.dim(), radius * s)?)),
            _ => self.apply_linear(&LinearMap::scaling(self.dim(), s)?),
        }
    }

    fn renamed(&self, b: Body) -> Body {
        match &self.0.name {
            Some(n) => b.with_name(n.clone()),
            None => b,
        }
    }

    /// The polar body `K° = {y : <x, y> <= 1 for all x in K}`.
    pub fn polar(&self) -> Result<Body> {
        let n = self.dim();
        Ok(match &self.0.shape {
            Shape::Ball { radius } => Body::ball(n, 1.0 / radius)?,
            Shape::Box { half_widths } => {
                if half_widths.iter().all(|a| *a == half_widths[0]) {
                    Body::cross(n, 1.0 / half_widths[0])?
                } else {
                    let d: Vec<f64> = half_widths.iter().map(|a| 1.0 / a).collect();
                    Body::unit_cross(n).apply_linear(&LinearMap::diagonal(&d)?)?
                }
            }
            Shape::Cross { radius } => Body::boxed(vec![1.0 / radius; n])?,
            Shape::Lp { p } => {
                if *p == 1.0 {
                    Body::cube(n)
                } else {
                    Body::lp(n, p / (p - 1.0))?
                }
            }
            Shape::HPoly(h) => Body::vpoly(h.polar()),
            Shape::VPoly(v) => Body::hpoly(v.polar()?),
            Shape::Ellipsoid(e) => Body::ellipsoid(Ellipsoid::new(e.form_inverse().clone())?),
            Shape::Transformed { base, map } => base.polar()?.apply_linear(&map.inverse_transpose())?,
            Shape::Intersection(ps) => Body::hull(ps.iter().map(|p| p.polar()).collect::<Result<Vec<_>>>()?)?,
            Shape::Hull(ps) => Body::intersection(ps.iter().map(|p| p.polar()).collect::<Result<Vec<_>>>()?)?,
            Shape::Density(_) => return Err(Error::NoClosedFormPolar("density-induced")),
        })
    }

    // ---- closed forms ----

    /// Volume when a closed form (or exact facet recursion) exists.
    pub fn exact_volume(&self) -> Option<f64> {
        let n = self.dim();
        let nf = n as f64;
        match &self.0.shape {
            Shape::Ball { radius } => Some(crate::special::unit_ball_volume(n) * radius.powi(n as i32)),
            Shape::Box { half_widths } => Some(half_widths.iter().map(|a| 2.0 * a).product()),
            Shape::Cross { radius } => Some((2.0 * radius).powi(n as i32) / crate::special::factorial(n as u64)),
            Shape::Lp { p } => Some((2.0 * gamma_fn(1.0 + 1.0 / p)).powf(nf) / gamma_fn(1.0 + nf / p)),
            Shape::HPoly(h) => Some(h.volume()),
            Shape::Ellipsoid(e) => Some(e.volume()),
            Shape::Transformed { base, map } => base.exact_volume().map(|v| v * map.det().abs()),
            Shape::Intersection(_) => self.as_hpoly().map(|h| h.volume()),
            _ => None,
        }
    }

    /// Covariance of the uniform measure when a closed form exists.
    pub fn exact_covariance(&self) -> Option<DMatrix<f64>> {
        let n = self.dim();
        let nf = n as f64;
        match &self.0.shape {
            Shape::Ball { radius } => Some(DMatrix::identity(n, n) * (radius * radius / (nf + 2.0))),
            Shape::Box { half_widths } => Some(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                half_widths.iter().map(|a| a * a / 3.0),
            ))),
            Shape::Cross { radius } => {
                Some(DMatrix::identity(n, n) * (2.0 * radius * radius / ((nf + 1.0) * (nf + 2.0))))
            }
            Shape::Lp { p } => {
                let c =
                    gamma_fn(3.0 / p) * gamma_fn(nf / p + 1.0) / (gamma_fn(1.0 / p) * gamma_fn((nf + 2.0) / p + 1.0));
                Some(DMatrix::identity(n, n) * c)
            }
            Shape::Ellipsoid(e) => Some(e.form_inverse() / (nf + 2.0)),
            Shape::Transformed { base, map } => base
                .exact_covariance()
                .map(|c| map.matrix() * c * map.matrix().transpose()),
            _ => None,
        }
    }

    // ---- serialization ----

    pub fn to_file(&self) -> Result<BodyFile> {
        let mut f = BodyFile::empty(self.dim(), self.kind());
        f.name = self.0.name.clone();
        match &self.0.shape {
            Shape::Ball { radius } => f.radius = Some(*radius),
            Shape::Box { half_widths } => f.half_widths = Some(half_widths.clone()),
            Shape::Cross { radius } => f.radius = Some(*radius),
            Shape::Lp { p } => f.p = Some(*p),
            Shape::HPoly(h) => {
                f.normals = Some(h.normals().to_vec());
                f.offsets = Some(h.offsets().to_vec());
            }
            Shape::VPoly(v) => f.vertices = Some(v.vertices().to_vec()),
            Shape::Ellipsoid(e) => f.form = Some(e.rows()),
            Shape::Transformed { base, map } => {
                f.matrix = Some(map.rows());
                f.base = Some(Box::new(base.to_file()?));
            }
            Shape::Intersection(_) | Shape::Hull(_) | Shape::Density(_) => {
                return Err(invalid(format!("{} bodies have no file form", self.kind())))
            }
        }
        Ok(f)
    }

    pub fn from_file(f: &BodyFile) -> Result<Body> {
        let need = |o: Option<&dyn std::any::Any>, field: &str| -> Result<()> {
            if o.is_none() {
                Err(invalid(format!("{} body requires field `{field}`", f.kind)))
            } else {
                Ok(())
            }
        };
        let body = match f.kind.as_str() {
            "ball" => Body::ball(f.dim, f.radius.unwrap_or(1.0))?,
            "box" | "cube" => Body::boxed(f.half_widths.clone().unwrap_or_else(|| vec![1.0; f.dim]))?,
            "cross" => Body::cross(f.dim, f.radius.unwrap_or(1.0))?,
            "lp" => {
                need(f.p.as_ref().map(|v| v as _), "p")?;
                Body::lp(f.dim, f.p.unwrap())?
            }
            "hpoly" => {
                need(f.normals.as_ref().map(|v| v as _), "normals")?;
                need(f.offsets.as_ref().map(|v| v as _), "offsets")?;
                Body::hpoly(HPolytope::new(f.normals.clone().unwrap(), f.offsets.clone().unwrap())?)
            }
            "vpoly" => {
                need(f.vertices.as_ref().map(|v| v as _), "vertices")?;
                Body::vpoly(VPolytope::new(f.vertices.clone().unwrap())?)
            }
            "ellipsoid" => {
                need(f.form.as_ref().map(|v| v as _), "form")?;
                Body::ellipsoid(Ellipsoid::from_rows(f.form.as_ref().unwrap())?)
            }
            "transformed" => {
                need(f.matrix.as_ref().map(|v| v as _), "matrix")?;
                need(f.base.as_ref().map(|v| v as _), "base")?;
                let base = Body::from_file(f.base.as_ref().unwrap())?;
                base.apply_linear(&LinearMap::from_rows(f.matrix.as_ref().unwrap())?)?
            }
            other => return Err(invalid(format!("unknown body kind `{other}`"))),
        };
        check_dim(f.dim, body.dim())?;
        Ok(match &f.name {
            Some(n) => body.with_name(n.clone()),
            None => body,
        })
    }

    pub fn from_json(s: &str) -> Result<Body> {
        let f: BodyFile = serde_json::from_str(s).map_err(|e| invalid(format!("body JSON: {e}")))?;
        Body::from_file(&f)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_file()?).map_err(|e| invalid(e.to_string()))
    }
}

/// On-disk body description. Only the fields relevant to `kind` may be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyFile {
    pub dim: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_widths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normals: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<BodyFile>>,
}

impl BodyFile {
    fn empty(dim: usize, kind: &str) -> Self {
        Self {
            dim,
            kind: kind.to_string(),
            name: None,
            radius: None,
            half_widths: None,
            p: None,
            normals: None,
            offsets: None,
            vertices: None,
            form: None,
            matrix: None,
            base: None,
        }
    }
}

fn cloud_size(dim: usize) -> usize {
    default_direction_count(dim)
}

/// `(Σ |x_i|^p)^{1/p}`, scaled to avoid overflow.
fn lp_norm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_examples() {
        assert_eq!(Body::unit_ball(2).gauge(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(Body::cube(2).gauge(&[0.5, -2.0]).unwrap(), 2.0);
        assert_eq!(Body::unit_cross(2).gauge(&[1.0, 1.0]).unwrap(), 2.0);
        assert!(matches!(
            Body::cube(2).gauge(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn support_examples() {
        assert_eq!(Body::cube(2).support(&[1.0, 1.0]).unwrap(), 2.0);
        assert!((Body::unit_ball(3).support(&[0.0, 0.6, 0.8]).unwrap() - 1.0).abs() < 1e-15);
        let e = Body::ellipsoid(Ellipsoid::with_semi_axes(&[2.0, 1.0]).unwrap());
        assert!((e.support(&[1.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!(Body::cube(2).support(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn radial_examples() {
        let c = Body::cube(2);
        assert_eq!(c.radial(&[1.0, 0.0]).unwrap(), 1.0);
        let d = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c.radial(&[d, d]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(c.radial(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn linear_images() {
        let c = Body::cube(2);
        let c2 = c.apply_linear(&LinearMap::scaling(2, 2.0).unwrap()).unwrap();
        assert!((c2.gauge_at(&[0.5, 0.3]) - 0.25).abs() < 1e-15);
        let e = Body::unit_ball(2)
            .apply_linear(&LinearMap::diagonal(&[2.0, 1.0]).unwrap())
            .unwrap();
        assert!((e.gauge_at(&[2.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((e.support_at(&[1.0, 0.0]) - 2.0).abs() < 1e-15);
        assert!((e.exact_volume().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        let singular = LinearMap::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(singular.is_err());
    }

    #[test]
    fn polar_examples() {
        let p = Body::cube(3).polar().unwrap();
        assert_eq!(p.kind(), "cross");
        assert!((p.gauge_at(&[0.2, -0.3, 0.4]) - 0.9).abs() < 1e-15);
        assert_eq!(Body::unit_ball(3).polar().unwrap().gauge_at(&[0.0, 3.0, 4.0]), 5.0);
        let e = Ellipsoid::with_semi_axes(&[2.0, 0.5]).unwrap();
        let pe = Body::ellipsoid(e.clone()).polar().unwrap();
        if let Shape::Ellipsoid(q) = pe.shape() {
            assert!((q.form() - e.form_inverse()).abs().max() < 1e-12);
        } else {
            panic!("polar of an ellipsoid should be an ellipsoid");
        }
    }

    #[test]
    fn oracle_support_of_intersection() {
        let k = Body::intersection(vec![Body::cube(2), Body::ball(2, 1.2).unwrap()]).unwrap();
        // h(e_1) = 1, h(diag) = 1.2 (circle arc between the square's sides)
        assert!((k.support_at(&[1.0, 0.0]) - 1.0).abs() < 1e-9);
        let d = std::f64::consts::FRAC_1_SQRT_2;
        assert!((k.support_at(&[d, d]) - 1.2).abs() < 1e-9);
    }

    #[test]
    fn hull_of_polytopes_is_exact() {
        let h = Body::hull(vec![Body::cube(2), Body::cross(2, 3.0).unwrap()]).unwrap();
        assert_eq!(h.kind(), "vpoly");
        assert!((h.radial_at(&[1.0, 0.0]) - 3.0).abs() < 1e-12);
        let d = std::f64::consts::FRAC_1_SQRT_2;
        // conv of (1,1) and (3,0),(0,3): the edge x+y... between (3,0) and (1,1)
        let r = h.radial_at(&[d, d]);
        assert!((r - 2f64.sqrt() * 1.5).abs() < 1e-12, "{r}");
    }

    #[test]
    fn json_roundtrip() {
        let b = Body::lp(3, 1.5).unwrap().with_name("lp15");
        let s = b.to_json().unwrap();
        let back = Body::from_json(&s).unwrap();
        assert_eq!(back.name(), "lp15");
        assert!((back.gauge_at(&[1.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!(Body::from_json(r#"{"dim":2,"kind":"ball","colour":1}"#).is_err());
        assert!(Body::from_json(r#"{"dim":2,"kind":"lp"}"#).is_err());
        let t = Body::cube(2)
            .apply_linear(&LinearMap::diagonal(&[3.0, 1.0]).unwrap())
            .unwrap();
        let back = Body::from_json(&t.to_json().unwrap()).unwrap();
        assert!((back.gauge_at(&[3.0, 0.5]) - 1.0).abs() < 1e-15);
    }
}
