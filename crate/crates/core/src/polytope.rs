//! Facet (H) and vertex (V) descriptions of centrally symmetric polytopes.

use crate::error::{check_dim, invalid, Result};
use crate::linalg::{dot, norm};
use crate::lp;

/// `{x : <a_i, x> <= b_i}` with `b_i > 0`, closed under `a -> -a`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    dim: usize,
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

/// `conv(±v_i)`; the vertex list is closed under `v -> -v`.
#[derive(Debug, Clone, PartialEq)]
pub struct VPolytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
}

fn same_ray(a: &[f64], b: &[f64]) -> bool {
    let (na, nb) = (norm(a), norm(b));
    a.iter().zip(b).all(|(x, y)| (x / na - y / nb).abs() < 1e-12)
}

impl HPolytope {
    /// Adds the missing mirror facets, merges parallel duplicates, and
    /// rejects non-positive offsets or unbounded sets.
    pub fn new(normals: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        if normals.is_empty() || normals.len() != offsets.len() {
            return Err(invalid("h-polytope needs one offset per normal"));
        }
        let dim = normals[0].len();
        if dim == 0 {
            return Err(invalid("h-polytope dimension must be positive"));
        }
        for (a, b) in normals.iter().zip(&offsets) {
            check_dim(dim, a.len())?;
            if !(*b > 0.0) || !b.is_finite() {
                return Err(invalid("h-polytope offsets must be positive (origin interior)"));
            }
            if !(norm(a) > 0.0) || a.iter().any(|v| !v.is_finite()) {
                return Err(invalid("h-polytope normals must be finite and non-zero"));
            }
        }
        let mut ns: Vec<Vec<f64>> = Vec::new();
        let mut os: Vec<f64> = Vec::new();
        let mut push = |a: Vec<f64>, b: f64| {
            let na = norm(&a);
            let (a, b): (Vec<f64>, f64) = (a.iter().map(|x| x / na).collect(), b / na);
            if let Some(k) = ns.iter().position(|c| same_ray(c, &a)) {
                os[k] = os[k].min(b);
            } else {
                ns.push(a);
                os.push(b);
            }
        };
        for (a, b) in normals.iter().zip(&offsets) {
            push(a.clone(), *b);
            push(a.iter().map(|x| -x).collect(), *b);
        }
        let p = Self {
            dim,
            normals: ns,
            offsets: os,
        };
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            if lp::maximize(&e, &p.normals, &p.offsets).is_err() {
                return Err(invalid("h-polytope is unbounded"));
            }
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Unit facet normals.
    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    /// Offsets for the unit normals.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn gauge(&self, x: &[f64]) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| dot(a, x) / b)
            .fold(0.0, f64::max)
    }

    pub fn support(&self, theta: &[f64]) -> f64 {
        match lp::maximize(theta, &self.normals, &self.offsets) {
            Ok(s) => s.value.max(0.0),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn support_point(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(lp::maximize(theta, &self.normals, &self.offsets)?.x)
    }

    pub fn polar(&self) -> VPolytope {
        let vertices = self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| a.iter().map(|x| x / b).collect())
            .collect();
        VPolytope {
            dim: self.dim,
            vertices,
        }
    }

    pub fn intersect(&self, other: &HPolytope) -> Result<HPolytope> {
        check_dim(self.dim, other.dim)?;
        let mut n = self.normals.clone();
        n.extend(other.normals.iter().cloned());
        let mut o = self.offsets.clone();
        o.extend(other.offsets.iter().copied());
        HPolytope::new(n, o)
    }

    fn bound(&self) -> f64 {
        let mut r2 = 0.0;
        for i in 0..self.dim {
            let mut e = vec![0.0; self.dim];
            e[i] = 1.0;
            r2 += self.support(&e).powi(2);
        }
        r2.sqrt()
    }

    /// Exact volume by the Lasserre facet recursion.
    pub fn volume(&self) -> f64 {
        lasserre(&self.normals, &self.offsets, self.dim, 2.0 * self.bound()).0
    }

    /// `(n-1)`-dimensional measure of each facet, aligned with `normals()`.
    pub fn facet_areas(&self) -> Vec<f64> {
        lasserre(&self.normals, &self.offsets, self.dim, 2.0 * self.bound()).1
    }
}

impl VPolytope {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(invalid("v-polytope needs vertices"));
        }
        let dim = vertices[0].len();
        if dim == 0 {
            return Err(invalid("v-polytope dimension must be positive"));
        }
        let mut vs: Vec<Vec<f64>> = Vec::new();
        for v in &vertices {
            check_dim(dim, v.len())?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(invalid("v-polytope vertices must be finite"));
            }
            for w in [v.clone(), v.iter().map(|x| -x).collect::<Vec<f64>>()] {
                let dup = vs.iter().any(|u| u.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-14));
                if !dup && norm(&w) > 0.0 {
                    vs.push(w);
                }
            }
        }
        let m = nalgebra::DMatrix::from_fn(vs.len(), dim, |i, j| vs[i][j]);
        if m.rank(1e-10 * m.abs().max()) < dim {
            return Err(invalid(
                "v-polytope vertices do not span the space (origin not interior)",
            ));
        }
        Ok(Self { dim, vertices: vs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn support(&self, theta: &[f64]) -> f64 {
        self.vertices.iter().map(|v| dot(v, theta)).fold(0.0, f64::max)
    }

    /// Gauge as the support function of the polar: `max <x, y>` over
    /// `<v_i, y> <= 1`.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        let ones = vec![1.0; self.vertices.len()];
        match lp::maximize(x, &self.vertices, &ones) {
            Ok(s) => s.value.max(0.0),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn polar(&self) -> Result<HPolytope> {
        HPolytope::new(self.vertices.clone(), vec![1.0; self.vertices.len()])
    }
}

/// Orthonormal basis of `u^⊥` for a unit vector `u`, from a Householder
/// reflection.
pub fn complement_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let s = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = u.to_vec();
    v[0] += s;
    let vv = dot(&v, &v);
    // H = I - 2 v v^T / (v^T v); H e_0 = -s u, remaining columns span u^⊥
    (1..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let id = if i == j { 1.0 } else { 0.0 };
                    id - 2.0 * v[i] * v[j] / vv
                })
                .collect()
        })
        .collect()
}

/// Volume and facet measures of `{A x <= b}` (no sign condition on `b`),
/// contained in the cube `[-bound, bound]^dim`.
pub(crate) fn lasserre(a: &[Vec<f64>], b: &[f64], dim: usize, bound: f64) -> (f64, Vec<f64>) {
    let m = a.len();
    let mut areas = vec![0.0; m];
    let mut keep: Vec<usize> = Vec::with_capacity(m);
    let mut na: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut nb = vec![0.0; m];
    let tol = 1e-12 * bound.max(1.0);
    for i in 0..m {
        let len = norm(&a[i]);
        if len < 1e-12 {
            if b[i] < -tol {
                return (0.0, areas);
            }
            continue;
        }
        na[i] = a[i].iter().map(|x| x / len).collect();
        nb[i] = b[i] / len;
        if let Some(&k) = keep
            .iter()
            .find(|&&k| na[k].iter().zip(&na[i]).all(|(x, y)| (x - y).abs() < 1e-10))
        {
            if nb[i] < nb[k] {
                let pos = keep.iter().position(|&j| j == k).unwrap();
                keep[pos] = i;
            }
            continue;
        }
        keep.push(i);
    }
    if keep.is_empty() {
        return (0.0, areas);
    }
    match dim {
        1 => {
            let mut hi = bound;
            let mut lo = -bound;
            let (mut ihi, mut ilo) = (None, None);
            for &i in &keep {
                if na[i][0] > 0.0 {
                    if nb[i] < hi {
                        hi = nb[i];
                        ihi = Some(i);
                    }
                } else if -nb[i] > lo {
                    lo = -nb[i];
                    ilo = Some(i);
                }
            }
            if hi <= lo {
                return (0.0, areas);
            }
            if let Some(i) = ihi {
                areas[i] = 1.0;
            }
            if let Some(i) = ilo {
                areas[i] = 1.0;
            }
            (hi - lo, areas)
        }
        2 => {
            let (area, lens) = clip_polygon(&keep, &na, &nb, bound);
            for (i, l) in lens {
                areas[i] += l;
            }
            (area, areas)
        }
        _ => {
            let mut vol = 0.0;
            for &i in &keep {
                let basis = complement_basis(&na[i]);
                let p0: Vec<f64> = na[i].iter().map(|x| x * nb[i]).collect();
                let mut sa = Vec::with_capacity(keep.len() - 1);
                let mut sb = Vec::with_capacity(keep.len() - 1);
                for &j in &keep {
                    if j == i {
                        continue;
                    }
                    sa.push(basis.iter().map(|q| dot(q, &na[j])).collect::<Vec<f64>>());
                    sb.push(nb[j] - dot(&na[j], &p0));
                }
                let (f, _) = lasserre(&sa, &sb, dim - 1, bound);
                areas[i] = f;
                vol += nb[i] * f;
            }
            (vol / dim as f64, areas)
        }
    }
}

/// Sutherland–Hodgman clipping of a large square; each edge remembers the
/// constraint that produced it.
fn clip_polygon(keep: &[usize], na: &[Vec<f64>], nb: &[f64], bound: f64) -> (f64, Vec<(usize, f64)>) {
    const NONE: usize = usize::MAX;
    let bnd = bound.max(1e-9);
    let mut poly: Vec<([f64; 2], usize)> = vec![
        ([-bnd, -bnd], NONE),
        ([bnd, -bnd], NONE),
        ([bnd, bnd], NONE),
        ([-bnd, bnd], NONE),
    ];
    let tol = 1e-13 * bnd;
    for &i in keep {
        if poly.len() < 3 {
            break;
        }
        let (a, b) = ([na[i][0], na[i][1]], nb[i]);
        let side = |p: &[f64; 2]| a[0] * p[0] + a[1] * p[1] - b;
        let mut out: Vec<([f64; 2], usize)> = Vec::with_capacity(poly.len() + 1);
        let k = poly.len();
        for idx in 0..k {
            let (p, lab) = poly[idx];
            let (q, _) = poly[(idx + 1) % k];
            let (sp, sq) = (side(&p), side(&q));
            let pin = sp <= tol;
            let qin = sq <= tol;
            let cross = |sp: f64, sq: f64| {
                let t = sp / (sp - sq);
                [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
            };
            match (pin, qin) {
                (true, true) => out.push((p, lab)),
                (true, false) => {
                    out.push((p, lab));
                    if sp < -tol {
                        out.push((cross(sp, sq), i));
                    } else {
                        // p sits on the line: the edge leaving p runs along it
                        out.last_mut().unwrap().1 = i;
                    }
                }
                (false, true) => {
                    if sq < -tol {
                        out.push((cross(sp, sq), lab));
                    }
                }
                (false, false) => {}
            }
        }
        poly = out;
    }
    if poly.len() < 3 {
        return (0.0, Vec::new());
    }
    let k = poly.len();
    let mut area = 0.0;
    let mut lens = Vec::new();
    for idx in 0..k {
        let (p, lab) = poly[idx];
        let (q, _) = poly[(idx + 1) % k];
        area += p[0] * q[1] - q[0] * p[1];
        if lab != NONE {
            lens.push((lab, (q[0] - p[0]).hypot(q[1] - p[1])));
        }
    }
    (0.5 * area.abs(), lens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(n: usize, a: f64) -> HPolytope {
        let normals = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        HPolytope::new(normals, vec![a; n]).unwrap()
    }

    #[test]
    fn cube_volume_and_facets() {
        for n in 1..=5 {
            let c = cube(n, 1.0);
            assert_eq!(c.normals().len(), 2 * n);
            assert!((c.volume() - 2f64.powi(n as i32)).abs() < 1e-10, "n={n}");
            let areas = c.facet_areas();
            for a in areas {
                assert!((a - 2f64.powi(n as i32 - 1)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cross_polytope_volume() {
        for n in 2..=4usize {
            let mut normals = Vec::new();
            for s in 0..(1 << n) {
                normals.push((0..n).map(|i| if s >> i & 1 == 1 { -1.0 } else { 1.0 }).collect());
            }
            let p = HPolytope::new(normals, vec![1.0; 1 << n]).unwrap();
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            assert!((p.volume() - 2f64.powi(n as i32) / fact).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn redundant_constraints_do_not_change_volume() {
        let mut normals = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let mut offsets = vec![1.0, 1.0, 5.0];
        let p = HPolytope::new(normals.clone(), offsets.clone()).unwrap();
        assert!((p.volume() - 4.0).abs() < 1e-12);
        normals.push(vec![1.0, 1.0]);
        offsets.push(1.0);
        let p = HPolytope::new(normals, offsets).unwrap();
        // square cut by |x+y| <= 1: the diamond-ish hexagon has area 3
        assert!((p.volume() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn vertex_gauge_and_polar() {
        let v = VPolytope::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(v.vertices().len(), 4);
        assert!((v.gauge(&[1.0, 1.0]) - 2.0).abs() < 1e-12);
        assert!((v.support(&[1.0, 1.0]) - 1.0).abs() < 1e-12);
        let h = v.polar().unwrap();
        assert!((h.gauge(&[1.0, 1.0]) - 1.0).abs() < 1e-12);
        assert!(VPolytope::new(vec![vec![1.0, 1.0]]).is_err());
    }

    #[test]
    fn unbounded_hpolytope_is_rejected() {
        assert!(HPolytope::new(vec![vec![1.0, 0.0]], vec![1.0]).is_err());
        assert!(HPolytope::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn complement_basis_is_orthonormal() {
        let u = crate::linalg::normalized(&[0.3, -0.5, 0.8, 0.1]).unwrap();
        let b = complement_basis(&u);
        for (i, x) in b.iter().enumerate() {
            assert!(dot(x, &u).abs() < 1e-14);
            for (j, y) in b.iter().enumerate() {
                let d = if i == j { 1.0 } else { 0.0 };
                assert!((dot(x, y) - d).abs() < 1e-14);
            }
        }
    }
}
