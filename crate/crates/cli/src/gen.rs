//! Body generators addressed by short specs such as `lp:3:1.5`.

use crate::error::{malformed, CliResult};
use isoslice::linalg::{Ellipsoid, LinearMap};
use isoslice::polytope::{HPolytope, VPolytope};
use isoslice::rng::{derive_seed, rng_for};
use isoslice::Body;
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

fn parse<T: std::str::FromStr>(spec: &str, field: &str, what: &str) -> CliResult<T> {
    field
        .parse()
        .map_err(|_| malformed(format!("body spec '{spec}': cannot parse {what} from '{field}'")))
}

fn gaussian_rows(rows: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_for(seed);
    (0..rows)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

/// Random rotation from the QR factor of a Gaussian matrix.
fn rotation(dim: usize, seed: u64) -> DMatrix<f64> {
    let rows = gaussian_rows(dim, dim, seed);
    let g = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    g.qr().q()
}

/// Builds the body named by `spec`. Random specs are symmetrized and
/// deterministic in `seed`.
pub fn generate(spec: &str, seed: u64) -> CliResult<Body> {
    let parts: Vec<&str> = spec.split(':').collect();
    let dim = |i: usize| -> CliResult<usize> {
        let f = parts
            .get(i)
            .ok_or_else(|| malformed(format!("body spec '{spec}': missing dimension")))?;
        let n: usize = parse(spec, f, "a dimension")?;
        if n == 0 {
            return Err(malformed(format!("body spec '{spec}': dimension must be positive")));
        }
        Ok(n)
    };
    let arity = |k: usize| -> CliResult<()> {
        if parts.len() != k {
            return Err(malformed(format!("body spec '{spec}': expected {} fields", k)));
        }
        Ok(())
    };
    let body = match parts[0] {
        "ball" => {
            arity(2)?;
            Body::unit_ball(dim(1)?)
        }
        "cube" => {
            arity(2)?;
            Body::cube(dim(1)?)
        }
        "cross" => {
            arity(2)?;
            Body::unit_cross(dim(1)?)
        }
        "lp" => {
            arity(3)?;
            let p: f64 = parse(spec, parts[2], "an exponent")?;
            Body::lp(dim(1)?, p)?
        }
        "random-hpoly" => {
            arity(3)?;
            let n = dim(1)?;
            let m: usize = parse(spec, parts[2], "a facet count")?;
            if m < 2 * n {
                return Err(malformed(format!("body spec '{spec}': need at least 2n facets")));
            }
            random_hpoly(n, m, seed)?
        }
        "random-vpoly" => {
            arity(3)?;
            let n = dim(1)?;
            let m: usize = parse(spec, parts[2], "a vertex count")?;
            if m < 2 * n {
                return Err(malformed(format!("body spec '{spec}': need at least 2n vertices")));
            }
            random_vpoly(n, m, seed)?
        }
        "ellipsoid" => {
            arity(3)?;
            let n = dim(1)?;
            let cond: f64 = parse(spec, parts[2], "a condition number")?;
            if cond.is_nan() || cond < 1.0 {
                return Err(malformed(format!(
                    "body spec '{spec}': condition number must be at least 1"
                )));
            }
            random_ellipsoid(n, cond, seed)?
        }
        other => return Err(malformed(format!("unknown body kind '{other}' in spec '{spec}'"))),
    };
    Ok(body.with_name(spec))
}

/// `m` facets in `±` pairs with unit-ish offsets; redrawn until bounded.
pub fn random_hpoly(n: usize, m: usize, seed: u64) -> CliResult<Body> {
    for attempt in 0..64u64 {
        let normals = gaussian_rows(m / 2, n, derive_seed(seed, &format!("hpoly-{attempt}")));
        let offsets = vec![1.0; normals.len()];
        if let Ok(p) = HPolytope::new(normals, offsets) {
            return Ok(Body::hpoly(p));
        }
    }
    Err(malformed("could not draw a bounded h-polytope"))
}

/// `m` vertices in `±` pairs on the unit sphere.
pub fn random_vpoly(n: usize, m: usize, seed: u64) -> CliResult<Body> {
    for attempt in 0..64u64 {
        let vs: Vec<Vec<f64>> = gaussian_rows(m / 2, n, derive_seed(seed, &format!("vpoly-{attempt}")))
            .into_iter()
            .map(|v| {
                let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / r).collect()
            })
            .collect();
        if let Ok(p) = VPolytope::new(vs) {
            return Ok(Body::vpoly(p));
        }
    }
    Err(malformed("could not draw a full-dimensional v-polytope"))
}

/// Rotated ellipsoid with semi-axes spread geometrically over `[1, cond]`.
pub fn random_ellipsoid(n: usize, cond: f64, seed: u64) -> CliResult<Body> {
    let axes: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                1.0
            } else {
                cond.powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect();
    let q = rotation(n, derive_seed(seed, "ellipsoid"));
    let d = DMatrix::from_diagonal(&DVector::from_iterator(n, axes.iter().map(|a| 1.0 / (a * a))));
    let form = &q * d * q.transpose();
    let form = (&form + form.transpose()) * 0.5;
    Ok(Body::ellipsoid(Ellipsoid::new(form)?))
}

/// `Q₁ diag(σ) Q₂` with singular values spread geometrically over `[1, cond]`.
pub fn random_linear_map(n: usize, cond: f64, seed: u64) -> CliResult<LinearMap> {
    let sv: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                1.0
            } else {
                cond.powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect();
    let q1 = rotation(n, derive_seed(seed, "left"));
    let q2 = rotation(n, derive_seed(seed, "right"));
    let m = q1 * DMatrix::from_diagonal(&DVector::from_vec(sv)) * q2;
    Ok(LinearMap::new(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_examples() {
        let c = generate("cube:3", 0).unwrap();
        assert_eq!(c.kind(), "box");
        assert_eq!(c.bounding_half_widths(), vec![1.0; 3]);
        let l = generate("lp:3:1.5", 0).unwrap();
        assert!((l.gauge_at(&[1.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        let a = generate("random-vpoly:2:8", 11).unwrap().to_json().unwrap();
        let b = generate("random-vpoly:2:8", 11).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        let m = random_linear_map(4, 10.0, 3).unwrap();
        assert!((m.condition_number() - 10.0).abs() < 1e-9);
        let h = generate("random-hpoly:3:18", 4).unwrap();
        assert!(h.contains(&[0.0; 3]));
        let e = generate("ellipsoid:3:10", 2).unwrap();
        let (r_in, r_out) = e.radii();
        assert!((r_out / r_in - 10.0).abs() < 1e-6);
        for bad in [
            "cube",
            "lp:3",
            "torus:3",
            "ball:x",
            "ball:0",
            "random-hpoly:3:2",
            "ellipsoid:2:0.5",
        ] {
            assert!(generate(bad, 0).is_err(), "{bad}");
        }
    }
}
