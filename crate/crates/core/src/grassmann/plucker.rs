use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::photon::{ExtReal, Photon, ProjParam};
use super::{GrassmannContext, Plane};
use crate::error::{Error, Result};

/// Unit vector of p×p minors of a basis, in lexicographic row-subset order,
/// with the first nonzero coordinate made positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PluckerVector {
    pub coords: Vec<f64>,
}

impl PluckerVector {
    /// Distance between the projective classes, `min(‖a − b‖, ‖a + b‖)`.
    pub fn projective_distance(&self, other: &PluckerVector) -> f64 {
        let minus: f64 = self.coords.iter().zip(&other.coords).map(|(a, b)| (a - b).powi(2)).sum();
        let plus: f64 = self.coords.iter().zip(&other.coords).map(|(a, b)| (a + b).powi(2)).sum();
        minus.min(plus).sqrt()
    }
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn lex_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn plucker(ctx: &GrassmannContext, x: &Plane) -> Result<PluckerVector> {
    if x.n() != ctx.n() {
        return Err(Error::DimensionMismatch {
            what: "plane ambient dimension",
            expected: ctx.n(),
            found: x.n(),
        });
    }
    let k = x.dim();
    let b = x.basis();
    let mut coords: Vec<f64> = lex_subsets(ctx.n(), k)
        .into_iter()
        .map(|rows| DMatrix::from_fn(k, k, |i, j| b[(rows[i], j)]).determinant())
        .collect();
    let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidInput("plane basis is degenerate".into()));
    }
    let lead = coords
        .iter()
        .map(|c| c / norm)
        .find(|c| c.abs() > ctx.tol.rank_rel)
        .unwrap_or(1.0);
    let scale = lead.signum() / norm;
    for c in coords.iter_mut() {
        *c *= scale;
    }
    Ok(PluckerVector { coords })
}

/// Third singular value of the Plücker images of the photon points at
/// `t = 0, 1, ∞`; zero exactly when the three images are collinear.
pub fn photon_collinearity_residual(ctx: &GrassmannContext, ph: &Photon) -> Result<f64> {
    let pp = ProjParam::canonical(ctx, ph.clone())?;
    let rows: Vec<PluckerVector> = [ExtReal::Finite(0.0), ExtReal::Finite(1.0), ExtReal::Infinity]
        .iter()
        .map(|t| plucker(ctx, &pp.eval(*t, &ctx.tol)?))
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(3, rows[0].coords.len(), |i, j| rows[i].coords[j]);
    let sv = crate::numerics::singular_values(&m);
    Ok(sv.get(2).copied().unwrap_or(0.0))
}
