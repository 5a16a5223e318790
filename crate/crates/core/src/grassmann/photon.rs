use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{arithmetic_distance, GrassmannContext, Plane};
use crate::error::{Error, Result};
use crate::numerics::{column_space, hstack, null_space, orthonormal_columns, rank_with_tol, Tolerance};

/// A point of ℝ ∪ {∞}, the affine coordinate `b/a` of `[a:b]` on the projective line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    /// Angle θ ∈ (−π/2, π/2] with `t = tan θ`; the point `[cos θ : sin θ]`.
    pub fn to_angle(self) -> f64 {
        match self {
            ExtReal::Finite(t) => t.atan(),
            ExtReal::Infinity => FRAC_PI_2,
        }
    }

    /// Inverse of [`ExtReal::to_angle`], modulo π.
    pub fn from_angle(theta: f64) -> ExtReal {
        let r = theta.rem_euclid(PI);
        let (s, c) = r.sin_cos();
        if c.abs() <= 1e-300 || (r - FRAC_PI_2).abs() == 0.0 {
            ExtReal::Infinity
        } else {
            ExtReal::Finite(s / c)
        }
    }

    /// Homogeneous coordinates `[a : b]`.
    pub fn homogeneous(self) -> (f64, f64) {
        match self {
            ExtReal::Finite(t) => (1.0, t),
            ExtReal::Infinity => (0.0, 1.0),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinity)
    }
}

impl From<f64> for ExtReal {
    fn from(t: f64) -> Self {
        if t.is_infinite() {
            ExtReal::Infinity
        } else {
            ExtReal::Finite(t)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(t) => write!(f, "{t}"),
            ExtReal::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(t) => s.serialize_f64(*t),
            ExtReal::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(t) => Ok(ExtReal::Finite(t)),
            Raw::Tag(s) if s == "inf" => Ok(ExtReal::Infinity),
            Raw::Tag(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

/// The pencil of p-planes `{V : v0 ⊂ V ⊂ v1}` with `dim v0 = p−1`, `dim v1 = p+1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Photon {
    pub v0: Plane,
    pub v1: Plane,
}

impl Photon {
    pub fn new(ctx: &GrassmannContext, v0: Plane, v1: Plane) -> Result<Self> {
        let p = ctx.p;
        if v0.n() != ctx.n() || v1.n() != ctx.n() {
            return Err(Error::DimensionMismatch {
                what: "photon ambient dimension",
                expected: ctx.n(),
                found: v0.n().max(v1.n()),
            });
        }
        if v0.dim() != p - 1 {
            return Err(Error::DimensionMismatch {
                what: "photon v0",
                expected: p - 1,
                found: v0.dim(),
            });
        }
        if v1.dim() != p + 1 {
            return Err(Error::DimensionMismatch {
                what: "photon v1",
                expected: p + 1,
                found: v1.dim(),
            });
        }
        if !v0.is_subspace_of(&v1, &ctx.tol) {
            return Err(Error::InvalidInput("photon requires v0 ⊂ v1".into()));
        }
        Ok(Photon { v0, v1 })
    }

    /// Whether the p-plane `x` lies on this photon.
    pub fn contains(&self, x: &Plane, tol: &Tolerance) -> bool {
        self.v0.is_subspace_of(x, tol) && x.is_subspace_of(&self.v1, tol)
    }
}

/// Unique photon through two distinct p-planes, or `None` when they are not
/// at arithmetic distance one.
pub fn photon_through(ctx: &GrassmannContext, x: &Plane, y: &Plane) -> Result<Option<Photon>> {
    let d = arithmetic_distance(ctx, x, y)?;
    if d == 0 {
        return Err(Error::IdenticalPlanes);
    }
    if d != 1 {
        return Ok(None);
    }
    let tol = &ctx.tol;
    let p = ctx.p;
    let sum = column_space(&hstack(x.basis(), y.basis()), tol);
    // x ∩ y: kernel of [X | -Y] projected through X
    let stacked = hstack(x.basis(), &(-y.basis()));
    let ker = null_space(&stacked, tol);
    let common = x.basis() * ker.rows(0, p);
    let v0 = if p == 1 {
        Plane::zero(ctx.n())
    } else {
        let basis = orthonormal_columns(&common, tol).ok_or(Error::NotPhotonRelated)?;
        Plane::from_orthonormal_unchecked(basis)
    };
    let v1 = Plane::from_orthonormal_unchecked(sum);
    Photon::new(ctx, v0, v1).map(Some)
}

/// A projective parametrization `[a:b] ↦ span(v0, a·u + b·w)` of a photon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjParam {
    pub photon: Photon,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

impl ProjParam {
    pub fn new(ctx: &GrassmannContext, photon: Photon, u: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let n = ctx.n();
        if u.len() != n || w.len() != n {
            return Err(Error::DimensionMismatch {
                what: "frame vector",
                expected: n,
                found: u.len().min(w.len()),
            });
        }
        let frame = DMatrix::from_fn(n, 2, |i, j| if j == 0 { u[i] } else { w[i] });
        let all = hstack(photon.v0.basis(), &frame);
        if rank_with_tol(&all, &ctx.tol) != ctx.p + 1 {
            return Err(Error::InvalidInput("frame does not span a complement of v0".into()));
        }
        if rank_with_tol(&hstack(photon.v1.basis(), &frame), &ctx.tol) != ctx.p + 1 {
            return Err(Error::InvalidInput("frame vectors must lie in v1".into()));
        }
        Ok(ProjParam { photon, u, w })
    }

    /// Frame given by an orthonormal basis of `v1 ⊖ v0`.
    pub fn canonical(ctx: &GrassmannContext, photon: Photon) -> Result<Self> {
        let v0 = photon.v0.basis();
        let v1 = photon.v1.basis();
        let proj = v1 - v0 * (v0.transpose() * v1);
        let comp = column_space(&proj, &ctx.tol);
        if comp.ncols() != 2 {
            return Err(Error::InvalidInput("degenerate photon".into()));
        }
        let u = comp.column(0).iter().copied().collect();
        let w = comp.column(1).iter().copied().collect();
        ProjParam::new(ctx, photon, u, w)
    }

    /// Parametrization of the photon through `x` and `y` with `x` at `t = 0`
    /// and `y` at `t = 1`.
    pub fn through(ctx: &GrassmannContext, x: &Plane, y: &Plane) -> Result<Self> {
        let photon = photon_through(ctx, x, y)?.ok_or(Error::NotPhotonRelated)?;
        let v0 = photon.v0.basis().clone();
        let off = |m: &DMatrix<f64>| column_space(&(m - &v0 * (v0.transpose() * m)), &ctx.tol);
        let ux = off(x.basis());
        let uy = off(y.basis());
        if ux.ncols() != 1 || uy.ncols() != 1 {
            return Err(Error::NotPhotonRelated);
        }
        let u: Vec<f64> = ux.column(0).iter().copied().collect();
        let w: Vec<f64> = uy.column(0).iter().zip(&u).map(|(b, a)| b - a).collect();
        ProjParam::new(ctx, photon, u, w)
    }

    /// Orthonormal frame of the photon through `x` and `y`, with `x` at angle 0;
    /// returns the angle of `y`, in `(0, π)`.
    pub fn through_orthonormal(ctx: &GrassmannContext, x: &Plane, y: &Plane) -> Result<(Self, f64)> {
        let photon = photon_through(ctx, x, y)?.ok_or(Error::NotPhotonRelated)?;
        let v0 = photon.v0.basis().clone();
        let off = |m: &DMatrix<f64>| column_space(&(m - &v0 * (v0.transpose() * m)), &ctx.tol);
        let ux = off(x.basis());
        let uy = off(y.basis());
        if ux.ncols() != 1 || uy.ncols() != 1 {
            return Err(Error::NotPhotonRelated);
        }
        let c = ux.column(0).dot(&uy.column(0));
        let rest = uy.column(0) - ux.column(0) * c;
        let s = rest.norm();
        if s == 0.0 {
            return Err(Error::IdenticalPlanes);
        }
        let w: Vec<f64> = (rest / s).iter().copied().collect();
        let u: Vec<f64> = ux.column(0).iter().copied().collect();
        Ok((ProjParam::new(ctx, photon, u, w)?, s.atan2(c)))
    }

    /// Basis `[v0 | cos θ·u + sin θ·w]`, continuous in θ (antiperiodic with period π).
    pub fn basis_at_angle(&self, theta: f64) -> DMatrix<f64> {
        let v0 = self.photon.v0.basis();
        let n = v0.nrows();
        let k = v0.ncols();
        let (s, c) = theta.sin_cos();
        let mut m = DMatrix::zeros(n, k + 1);
        m.columns_mut(0, k).copy_from(v0);
        for i in 0..n {
            m[(i, k)] = c * self.u[i] + s * self.w[i];
        }
        m
    }

    pub fn eval_angle(&self, theta: f64, tol: &Tolerance) -> Result<Plane> {
        Plane::from_basis(self.basis_at_angle(theta), tol)
    }

    /// `span(v0 ∪ {u + t·w})`, or `span(v0 ∪ {w})` at `t = ∞`.
    pub fn eval(&self, t: ExtReal, tol: &Tolerance) -> Result<Plane> {
        let v0 = self.photon.v0.basis();
        let n = v0.nrows();
        let dir: DVector<f64> = match t {
            ExtReal::Finite(t) => DVector::from_fn(n, |i, _| self.u[i] + t * self.w[i]),
            ExtReal::Infinity => DVector::from_column_slice(&self.w),
        };
        let mut m = DMatrix::zeros(n, v0.ncols() + 1);
        m.columns_mut(0, v0.ncols()).copy_from(v0);
        m.column_mut(v0.ncols()).copy_from(&dir);
        Plane::from_basis(m, tol)
    }

    /// Angle of the point `x` on this photon, in (−π/2, π/2].
    pub fn angle_of(&self, x: &Plane, tol: &Tolerance) -> Result<f64> {
        // coordinates of x's direction off v0 in the (u, w) frame
        let v0 = self.photon.v0.basis();
        let n = v0.nrows();
        let frame = DMatrix::from_fn(n, 2, |i, j| if j == 0 { self.u[i] } else { self.w[i] });
        let frame_off = &frame - v0 * (v0.transpose() * &frame);
        let dir = column_space(&(x.basis() - v0 * (v0.transpose() * x.basis())), tol);
        if dir.ncols() != 1 {
            return Err(Error::InvalidInput("plane is not on the photon".into()));
        }
        // least squares through the normal equations of the 2-column frame
        let gram = frame_off.transpose() * &frame_off;
        let coeffs = gram
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("degenerate photon frame".into()))?
            * (frame_off.transpose() * &dir);
        let (a, b) = (coeffs[(0, 0)], coeffs[(1, 0)]);
        let residual = (&frame_off * &coeffs - &dir).norm();
        if residual > 1e-8 {
            return Err(Error::InvalidInput("plane is not on the photon".into()));
        }
        let mut theta = b.atan2(a);
        if theta <= -FRAC_PI_2 {
            theta += PI;
        } else if theta > FRAC_PI_2 {
            theta -= PI;
        }
        Ok(theta)
    }
}

/// `param_eval` on extended reals.
pub fn param_eval(pp: &ProjParam, t: ExtReal, tol: &Tolerance) -> Result<Plane> {
    pp.eval(t, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: usize, q: usize) -> GrassmannContext {
        GrassmannContext::new(p, q).unwrap()
    }

    #[test]
    fn photon_through_coordinate_planes() {
        let c = ctx(2, 2);
        let x = Plane::coordinate(4, &[0, 1]);
        let y = Plane::coordinate(4, &[0, 2]);
        let ph = photon_through(&c, &x, &y).unwrap().unwrap();
        assert!(ph.v0.same_span(&Plane::coordinate(4, &[0]), &c.tol));
        assert!(ph.v1.same_span(&Plane::coordinate(4, &[0, 1, 2]), &c.tol));
        assert!(ph.contains(&x, &c.tol) && ph.contains(&y, &c.tol));

        let far = Plane::coordinate(4, &[2, 3]);
        assert!(photon_through(&c, &x, &far).unwrap().is_none());
        assert_eq!(photon_through(&c, &x, &x).unwrap_err(), Error::IdenticalPlanes);
    }

    #[test]
    fn param_eval_examples() {
        let c = ctx(2, 2);
        let ph = Photon::new(&c, Plane::coordinate(4, &[0]), Plane::coordinate(4, &[0, 1, 2])).unwrap();
        let pp = ProjParam::new(&c, ph, vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let at0 = pp.eval(ExtReal::Finite(0.0), &c.tol).unwrap();
        assert!(at0.same_span(&Plane::coordinate(4, &[0, 1]), &c.tol));
        let at_inf = pp.eval(ExtReal::Infinity, &c.tol).unwrap();
        assert!(at_inf.same_span(&Plane::coordinate(4, &[0, 2]), &c.tol));
        let a = pp.eval(ExtReal::Finite(1.0), &c.tol).unwrap();
        let b = pp.eval(ExtReal::Finite(2.0), &c.tol).unwrap();
        assert_eq!(arithmetic_distance(&c, &a, &b).unwrap(), 1);
    }

    #[test]
    fn through_places_endpoints() {
        let c = ctx(2, 3);
        let x = Plane::coordinate(5, &[0, 1]);
        let y = Plane::from_columns(5, &[vec![1.0, 0.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.3, 0.0, 0.5]], &c.tol).unwrap();
        let pp = ProjParam::through(&c, &x, &y).unwrap();
        assert!(pp.eval(ExtReal::Finite(0.0), &c.tol).unwrap().same_span(&x, &c.tol));
        assert!(pp.eval(ExtReal::Finite(1.0), &c.tol).unwrap().same_span(&y, &c.tol));
        assert!(pp.angle_of(&x, &c.tol).unwrap().abs() < 1e-12);
        let ty = pp.angle_of(&y, &c.tol).unwrap();
        assert!((ty - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        let (pq, phi) = ProjParam::through_orthonormal(&c, &x, &y).unwrap();
        assert!(pq.eval_angle(0.0, &c.tol).unwrap().same_span(&x, &c.tol));
        assert!(pq.eval_angle(phi, &c.tol).unwrap().same_span(&y, &c.tol));
        assert!(phi > 0.0 && phi < PI);
    }

    #[test]
    fn ext_real_angles() {
        assert_eq!(ExtReal::Infinity.to_angle(), FRAC_PI_2);
        assert_eq!(ExtReal::from_angle(FRAC_PI_2), ExtReal::Infinity);
        match ExtReal::from_angle(ExtReal::Finite(-3.0).to_angle()) {
            ExtReal::Finite(t) => assert!((t + 3.0).abs() < 1e-12),
            ExtReal::Infinity => panic!("expected finite"),
        }
        let s = serde_json::to_string(&[ExtReal::Finite(1.5), ExtReal::Infinity]).unwrap();
        assert_eq!(s, r#"[1.5,"inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![ExtReal::Finite(1.5), ExtReal::Infinity]);
    }
}
