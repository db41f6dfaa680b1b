//! Linear maps with determinant bookkeeping, ellipsoids, and small
//! dense-vector helpers used on hot paths.

use crate::error::{check_dim, invalid, Error, Result};
use crate::special::unit_ball_volume;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `a / |a|`; `None` for the zero vector.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scaled(a, 1.0 / n))
}

/// Invertible `dim x dim` matrix with its determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    det: f64,
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid("linear map must be square"));
        }
        let det = matrix.determinant();
        let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        if !det.is_finite() || det.abs() <= 1e-13 * scale.powi(matrix.nrows() as i32) {
            return Err(Error::Singular { det });
        }
        let inverse = matrix.clone().try_inverse().ok_or(Error::Singular { det })?;
        Ok(Self { matrix, inverse, det })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("matrix rows must all have length equal to the row count"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is invertible")
    }

    pub fn scaling(dim: usize, s: f64) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim) * s)
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse_matrix(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.matrix, x)
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.inverse, x)
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        mat_t_vec(&self.matrix, x)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap) -> Result<LinearMap> {
        check_dim(self.dim(), inner.dim())?;
        LinearMap::new(&self.matrix * &inner.matrix)
    }

    pub fn inverse(&self) -> LinearMap {
        LinearMap {
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
            det: 1.0 / self.det,
        }
    }

    /// The inverse transpose `T^{-T}`.
    pub fn inverse_transpose(&self) -> LinearMap {
        LinearMap {
            matrix: self.inverse.transpose(),
            inverse: self.matrix.transpose(),
            det: 1.0 / self.det,
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    /// Ratio of the extreme singular values.
    pub fn condition_number(&self) -> f64 {
        let sv = self.matrix.clone().svd(false, false).singular_values;
        sv.max() / sv.min()
    }
}

impl Serialize for LinearMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        LinearMap::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let (r, c) = m.shape();
    debug_assert_eq!(c, x.len());
    (0..r).map(|i| (0..c).map(|j| m[(i, j)] * x[j]).sum()).collect()
}

pub fn mat_t_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let (r, c) = m.shape();
    debug_assert_eq!(r, x.len());
    (0..c).map(|j| (0..r).map(|i| m[(i, j)] * x[i]).sum()).collect()
}

/// `S^p` for a symmetric positive-definite `S` (via its eigen-decomposition).
pub fn spd_power(s: &DMatrix<f64>, p: f64) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(s.clone());
    if eig.eigenvalues.iter().any(|l| !(*l > 0.0)) {
        return Err(invalid("matrix is not positive definite"));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.powf(p)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// The ellipsoid `{x : x^T A x <= 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    form: DMatrix<f64>,
    form_inverse: DMatrix<f64>,
    volume: f64,
}

impl Ellipsoid {
    pub fn new(form: DMatrix<f64>) -> Result<Self> {
        if !form.is_square() {
            return Err(invalid("ellipsoid form must be square"));
        }
        let asym = (&form - form.transpose()).abs().max();
        if asym > 1e-10 * form.abs().max().max(1.0) {
            return Err(invalid("ellipsoid form must be symmetric"));
        }
        let form = symmetrize(&form);
        let eig = SymmetricEigen::new(form.clone());
        if eig.eigenvalues.iter().any(|l| !(*l > 0.0)) {
            return Err(invalid("ellipsoid form must be positive definite"));
        }
        let det: f64 = eig.eigenvalues.iter().product();
        let form_inverse = spd_power(&form, -1.0)?;
        let volume = unit_ball_volume(form.nrows()) / det.sqrt();
        Ok(Self {
            form,
            form_inverse,
            volume,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("form rows must all have length equal to the row count"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Axis-aligned ellipsoid with the given semi-axes.
    pub fn with_semi_axes(axes: &[f64]) -> Result<Self> {
        if axes.iter().any(|a| !(*a > 0.0)) {
            return Err(invalid("semi-axes must be positive"));
        }
        let d: Vec<f64> = axes.iter().map(|a| 1.0 / (a * a)).collect();
        Self::new(DMatrix::from_diagonal(&DVector::from_vec(d)))
    }

    pub fn dim(&self) -> usize {
        self.form.nrows()
    }

    pub fn form(&self) -> &DMatrix<f64> {
        &self.form
    }

    pub fn form_inverse(&self) -> &DMatrix<f64> {
        &self.form_inverse
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn gauge(&self, x: &[f64]) -> f64 {
        quad_form(&self.form, x).max(0.0).sqrt()
    }

    pub fn support(&self, theta: &[f64]) -> f64 {
        quad_form(&self.form_inverse, theta).max(0.0).sqrt()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.form.row(i).iter().copied().collect())
            .collect()
    }

    /// The map `x -> A^{1/2} x`, which sends the ellipsoid onto the unit ball.
    pub fn rounding_map(&self) -> Result<LinearMap> {
        LinearMap::new(spd_power(&self.form, 0.5)?)
    }

    /// Same shape, scaled to volume `v`.
    pub fn with_volume(&self, v: f64) -> Result<Self> {
        let s = (v / self.volume).powf(1.0 / self.dim() as f64);
        Self::new(&self.form / (s * s))
    }
}

pub fn quad_form(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * x[j];
        }
        acc += x[i] * row;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_is_tracked_through_composition() {
        let a = LinearMap::from_rows(&[vec![2.0, 1.0], vec![0.0, 3.0]]).unwrap();
        let b = LinearMap::diagonal(&[0.5, 4.0]).unwrap();
        let c = a.compose(&b).unwrap();
        assert!((c.det() - a.det() * b.det()).abs() < 1e-12);
        assert!((c.det() - c.matrix().determinant()).abs() <= 1e-10 * c.det().abs());
        let x = [0.3, -1.7];
        let back = c.apply_inverse(&c.apply(&x));
        assert!((back[0] - x[0]).abs() < 1e-14 && (back[1] - x[1]).abs() < 1e-14);
    }

    #[test]
    fn singular_maps_are_rejected() {
        let err = LinearMap::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn ellipsoid_volume_and_duality() {
        let e = Ellipsoid::with_semi_axes(&[2.0, 1.0]).unwrap();
        assert!((e.volume() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((e.support(&[1.0, 0.0]) - 2.0).abs() < 1e-14);
        assert!((e.gauge(&[2.0, 0.0]) - 1.0).abs() < 1e-14);
        assert!(Ellipsoid::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).is_err());
    }

    #[test]
    fn spd_power_roundtrip() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let h = spd_power(&s, 0.5).unwrap();
        assert!((&h * &h - &s).abs().max() < 1e-13);
    }
}
