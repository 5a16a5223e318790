use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{hstack, orthonormal_columns, rank_with_tol, Tolerance};

/// A linear subspace of ℝⁿ stored by an orthonormal basis (columns).
///
/// Two planes are the same point of the Grassmannian iff their spans agree,
/// which is what [`Plane::same_span`] tests; the basis itself is not canonical.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PlaneJson", into = "PlaneJson")]
pub struct Plane {
    basis: DMatrix<f64>,
}

/// Wire format: `{"n": .., "k": .., "basis": [row-major n*k floats]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneJson {
    pub n: usize,
    pub k: usize,
    pub basis: Vec<f64>,
}

impl Plane {
    /// Span of the columns of `m`; fails unless the columns are independent.
    pub fn from_basis(m: DMatrix<f64>, tol: &Tolerance) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("basis has non-finite entries".into()));
        }
        let basis = orthonormal_columns(&m, tol).ok_or_else(|| {
            Error::InvalidInput(format!(
                "basis of {} columns in R^{} is rank deficient",
                m.ncols(),
                m.nrows()
            ))
        })?;
        Ok(Plane { basis })
    }

    /// Span of the given column vectors of ℝⁿ.
    pub fn from_columns(n: usize, cols: &[Vec<f64>], tol: &Tolerance) -> Result<Self> {
        for c in cols {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "column length",
                    expected: n,
                    found: c.len(),
                });
            }
        }
        let m = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
        Plane::from_basis(m, tol)
    }

    /// Coordinate plane spanned by the standard vectors `e_i` (zero-based).
    pub fn coordinate(n: usize, idx: &[usize]) -> Self {
        let mut basis = DMatrix::zeros(n, idx.len());
        for (j, &i) in idx.iter().enumerate() {
            basis[(i, j)] = 1.0;
        }
        Plane { basis }
    }

    pub fn zero(n: usize) -> Self {
        Plane {
            basis: DMatrix::zeros(n, 0),
        }
    }

    pub(crate) fn from_orthonormal_unchecked(basis: DMatrix<f64>) -> Self {
        Plane { basis }
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn same_span(&self, other: &Plane, tol: &Tolerance) -> bool {
        if self.n() != other.n() || self.dim() != other.dim() {
            return false;
        }
        if self.dim() == 0 {
            return true;
        }
        rank_with_tol(&hstack(&self.basis, &other.basis), tol) == self.dim()
    }

    /// `self ⊂ other`
    pub fn is_subspace_of(&self, other: &Plane, tol: &Tolerance) -> bool {
        if self.n() != other.n() || self.dim() > other.dim() {
            return false;
        }
        if self.dim() == 0 {
            return true;
        }
        rank_with_tol(&hstack(&other.basis, &self.basis), tol) == other.dim()
    }

    /// Image `g · self` under an invertible n×n matrix.
    pub fn transformed(&self, g: &DMatrix<f64>, tol: &Tolerance) -> Result<Plane> {
        if g.nrows() != self.n() || g.ncols() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "transformation size",
                expected: self.n(),
                found: g.nrows(),
            });
        }
        Plane::from_basis(g * &self.basis, tol)
    }

    pub fn to_json(&self) -> PlaneJson {
        PlaneJson::from(self.clone())
    }
}

impl From<Plane> for PlaneJson {
    fn from(p: Plane) -> Self {
        let (n, k) = p.basis.shape();
        let mut basis = Vec::with_capacity(n * k);
        for i in 0..n {
            for j in 0..k {
                basis.push(p.basis[(i, j)]);
            }
        }
        PlaneJson { n, k, basis }
    }
}

impl TryFrom<PlaneJson> for Plane {
    type Error = Error;

    fn try_from(j: PlaneJson) -> Result<Self> {
        if j.basis.len() != j.n * j.k {
            return Err(Error::InvalidInput(format!(
                "plane basis has {} entries, expected n*k = {}",
                j.basis.len(),
                j.n * j.k
            )));
        }
        if j.k > j.n {
            return Err(Error::InvalidInput(format!("k = {} exceeds n = {}", j.k, j.n)));
        }
        let m = DMatrix::from_row_slice(j.n, j.k, &j.basis);
        Plane::from_basis(m, &Tolerance::default())
    }
}
