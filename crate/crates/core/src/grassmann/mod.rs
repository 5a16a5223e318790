//! Incidence geometry of `Gr_p(ℝ^{p+q})`: planes, photons, Plücker
//! coordinates and cross ratios.

mod cross_ratio;
mod photon;
mod plane;
mod plucker;

pub use cross_ratio::{cross_ratio_flag, cross_ratio_proj};
pub(crate) use cross_ratio::{cross_ratio_angles, log_det_ratio};
pub use photon::{param_eval, photon_through, ExtReal, Photon, ProjParam};
pub use plane::{Plane, PlaneJson};
pub use plucker::{lex_subsets, photon_collinearity_residual, plucker, PluckerVector};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{hstack, rank_with_tol, Tolerance};

/// Dimensions of the Grassmannian of p-planes in ℝ^{p+q}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrassmannContext {
    pub p: usize,
    pub q: usize,
    pub tol: Tolerance,
}

impl GrassmannContext {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        Self::with_tolerance(p, q, Tolerance::default())
    }

    pub fn with_tolerance(p: usize, q: usize, tol: Tolerance) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidInput(format!("need p >= 1 and q >= 1 (got p = {p}, q = {q})")));
        }
        Ok(GrassmannContext { p, q, tol })
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    /// Real rank of the Grassmannian, `min(p, q)`.
    pub fn rank(&self) -> usize {
        self.p.min(self.q)
    }

    pub(crate) fn check_point(&self, x: &Plane, what: &'static str) -> Result<()> {
        self.check_dims(x, self.p, what)
    }

    pub(crate) fn check_dual(&self, xi: &Plane, what: &'static str) -> Result<()> {
        self.check_dims(xi, self.q, what)
    }

    fn check_dims(&self, x: &Plane, k: usize, what: &'static str) -> Result<()> {
        if x.n() != self.n() {
            return Err(Error::DimensionMismatch {
                what,
                expected: self.n(),
                found: x.n(),
            });
        }
        if x.dim() != k {
            return Err(Error::DimensionMismatch {
                what,
                expected: k,
                found: x.dim(),
            });
        }
        Ok(())
    }
}

/// `dim(x ∩ y)` for two p-planes.
pub fn intersect_dim(ctx: &GrassmannContext, x: &Plane, y: &Plane) -> Result<usize> {
    ctx.check_point(x, "x")?;
    ctx.check_point(y, "y")?;
    let r = rank_with_tol(&hstack(x.basis(), y.basis()), &ctx.tol);
    Ok(2 * ctx.p - r)
}

/// Minimal number of photon steps between x and y: `p − dim(x ∩ y)`.
pub fn arithmetic_distance(ctx: &GrassmannContext, x: &Plane, y: &Plane) -> Result<usize> {
    Ok(ctx.p - intersect_dim(ctx, x, y)?)
}

/// Whether a p-plane and a q-plane are transverse (`x ⊕ ξ = ℝⁿ`).
pub fn is_transverse(ctx: &GrassmannContext, x: &Plane, xi: &Plane) -> Result<bool> {
    ctx.check_point(x, "x")?;
    ctx.check_dual(xi, "xi")?;
    Ok(rank_with_tol(&hstack(x.basis(), xi.basis()), &ctx.tol) == ctx.n())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersection_examples() {
        let c = GrassmannContext::new(2, 2).unwrap();
        let e12 = Plane::coordinate(4, &[0, 1]);
        let e13 = Plane::coordinate(4, &[0, 2]);
        let e34 = Plane::coordinate(4, &[2, 3]);
        assert_eq!(intersect_dim(&c, &e12, &e12).unwrap(), 2);
        assert_eq!(intersect_dim(&c, &e12, &e13).unwrap(), 1);
        assert_eq!(arithmetic_distance(&c, &e12, &e12).unwrap(), 0);
        assert_eq!(arithmetic_distance(&c, &e12, &e13).unwrap(), 1);
        assert_eq!(arithmetic_distance(&c, &e12, &e34).unwrap(), 2);
    }

    #[test]
    fn dimension_mismatch() {
        let c = GrassmannContext::new(2, 2).unwrap();
        let line = Plane::coordinate(4, &[0]);
        let err = intersect_dim(&c, &line, &Plane::coordinate(4, &[0, 1])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        assert!(is_transverse(&c, &Plane::coordinate(4, &[0, 1]), &line).is_err());
    }

    #[test]
    fn transversality_examples() {
        let c = GrassmannContext::new(1, 2).unwrap();
        let e1 = Plane::coordinate(3, &[0]);
        assert!(is_transverse(&c, &e1, &Plane::coordinate(3, &[1, 2])).unwrap());
        assert!(!is_transverse(&c, &e1, &Plane::coordinate(3, &[0, 1])).unwrap());
    }

    #[test]
    fn context_validation() {
        assert!(GrassmannContext::new(0, 2).is_err());
        let c = GrassmannContext::new(2, 3).unwrap();
        assert_eq!((c.n(), c.rank()), (5, 2));
    }
}
