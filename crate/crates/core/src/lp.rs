//! Dense simplex for the small linear programs behind polytope support
//! functions and vertex-polytope gauges.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

/// Maximizes `c·x` subject to `A x <= b` with `x` free and `b > 0`.
///
/// `b > 0` makes the origin a strictly feasible start, so the slack basis
/// is feasible and no phase one is needed. Free variables are split as
/// `x = x⁺ - x⁻`. Dantzig pricing, switching to Bland's rule after a run of
/// degenerate pivots.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    debug_assert!(b.iter().all(|v| *v > 0.0));
    let cols = 2 * n + m;
    let width = cols + 1;
    let mut t = vec![0.0; m * width];
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        for j in 0..n {
            row[j] = a[i][j];
            row[n + j] = -a[i][j];
        }
        row[2 * n + i] = 1.0;
        row[cols] = b[i];
    }
    let mut obj = vec![0.0; width];
    for j in 0..n {
        obj[j] = -c[j];
        obj[n + j] = c[j];
    }
    let mut basis: Vec<usize> = (2 * n..2 * n + m).collect();
    let scale = c.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    let eps = 1e-12 * scale;
    let mut degenerate_run = 0usize;

    for _ in 0..50_000 {
        let bland = degenerate_run > 20;
        let mut enter = None;
        let mut most = -eps;
        for (j, &rc) in obj.iter().take(cols).enumerate() {
            if rc < most {
                enter = Some(j);
                if bland {
                    break;
                }
                most = rc;
            }
        }
        let Some(e) = enter else {
            let mut x = vec![0.0; n];
            for (i, &bv) in basis.iter().enumerate() {
                let v = t[i * width + cols];
                if bv < n {
                    x[bv] += v;
                } else if bv < 2 * n {
                    x[bv - n] -= v;
                }
            }
            return Ok(LpSolution { value: obj[cols], x });
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let aie = t[i * width + e];
            if aie > 1e-12 {
                let r = t[i * width + cols] / aie;
                let better =
                    r < best_ratio - 1e-15 || (r <= best_ratio + 1e-15 && leave.is_some_and(|l| basis[i] < basis[l]));
                if better {
                    best_ratio = r;
                    leave = Some(i);
                }
            }
        }
        let Some(l) = leave else { return Err(Error::Unbounded) };
        degenerate_run = if best_ratio <= 1e-14 { degenerate_run + 1 } else { 0 };

        let piv = t[l * width + e];
        for k in 0..width {
            t[l * width + k] /= piv;
        }
        let pivot_row: Vec<f64> = t[l * width..(l + 1) * width].to_vec();
        for i in 0..m {
            if i == l {
                continue;
            }
            let f = t[i * width + e];
            if f != 0.0 {
                let row = &mut t[i * width..(i + 1) * width];
                for k in 0..width {
                    row[k] -= f * pivot_row[k];
                }
            }
        }
        let f = obj[e];
        for k in 0..width {
            obj[k] -= f * pivot_row[k];
        }
        basis[l] = e;
    }
    Err(Error::Divergent("simplex iteration limit".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_support() {
        let a = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let b = vec![1.0; 4];
        let s = maximize(&[1.0, 1.0], &a, &b).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        let s = maximize(&[-3.0, 0.5], &a, &b).unwrap();
        assert!((s.value - 3.5).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        let a = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        assert_eq!(maximize(&[0.0, 1.0], &a, &[1.0, 1.0]), Err(Error::Unbounded));
    }

    #[test]
    fn degenerate_octahedron() {
        // |x|_1 <= 1 in R^3 written with all 8 sign facets
        let mut a = Vec::new();
        for s in 0..8 {
            a.push((0..3).map(|i| if s >> i & 1 == 1 { -1.0 } else { 1.0 }).collect());
        }
        let b = vec![1.0; 8];
        let s = maximize(&[0.2, -0.7, 0.1], &a, &b).unwrap();
        assert!((s.value - 0.7).abs() < 1e-12);
    }
}
