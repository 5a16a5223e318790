//! Domains in `Gr_p(ℝ^{p+q})`, their intersections with photons, and the
//! Hilbert length of photon segments.

mod complement;
mod probes;
mod symmetric;

pub use complement::HyperplaneComplementDomain;
pub use probes::{photon_convexity_probe, r_proper_probe, random_photon, random_photon_through, ProbeReport, ProbeWitness};
pub use symmetric::SymmetricDomain;

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{cross_ratio_angles, ExtReal, GrassmannContext, Plane, ProjParam};
use crate::numerics::{bisect_bracket, Tolerance};
use crate::rng::SplitRng;

/// Grid resolution of the photon ray-cast over one period `[θ, θ + π)`.
pub const RAY_GRID: usize = 1024;
const REFINE_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualVerdict {
    pub contained: bool,
    /// Set when the answer comes from sampling rather than an exact test.
    pub heuristic: bool,
}

/// Membership oracle for an open subset of the Grassmannian.
///
/// Photon queries use the angle coordinate `θ ↦ [cos θ : sin θ]` of a
/// [`ProjParam`], which is continuous on the whole circle.
pub trait Domain {
    fn context(&self) -> &GrassmannContext;

    fn contains(&self, x: &Plane) -> Result<bool>;

    /// Whether the q-plane `xi` lies in the dual domain (`Z_xi` misses the domain).
    fn dual_contains(&self, xi: &Plane) -> Result<DualVerdict>;

    /// A random interior point; `scale` controls how far from a base point it may be.
    fn sample_interior(&self, rng: &mut SplitRng, scale: f64) -> Result<Plane>;

    /// Membership of the photon point at angle θ.
    fn photon_membership<'a>(&'a self, pp: &'a ProjParam) -> Box<dyn Fn(f64) -> bool + 'a> {
        let tol = self.context().tol;
        Box::new(move |t| {
            pp.eval_angle(t, &tol)
                .and_then(|x| self.contains(&x))
                .unwrap_or(false)
        })
    }

    /// A function positive exactly on the photon points of the domain, at least
    /// on the component containing `seed`, and continuous there.
    fn photon_margin<'a>(&'a self, pp: &'a ProjParam, _seed: f64) -> Box<dyn Fn(f64) -> f64 + 'a> {
        let inside = self.photon_membership(pp);
        Box::new(move |t| if inside(t) { 1.0 } else { -1.0 })
    }

    /// False when components are over-approximated (sign cells).
    fn exact_components(&self) -> bool {
        true
    }
}

/// Either concrete domain, with the JSON wire format
/// `{"kind": "symmetric", "form": [...]}` or
/// `{"kind": "complement", "duals": [...], "reference": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DomainJson", into = "DomainJson")]
pub enum AnyDomain {
    Symmetric(SymmetricDomain),
    Complement(HyperplaneComplementDomain),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainJson {
    Symmetric { form: Vec<f64> },
    Complement { duals: Vec<Plane>, reference: Plane },
}

impl DomainJson {
    /// Validates and builds the domain with the given tolerances.
    pub fn build(self, tol: Tolerance) -> Result<AnyDomain> {
        match self {
            DomainJson::Symmetric { form } => {
                let n = (form.len() as f64).sqrt().round() as usize;
                if n * n != form.len() {
                    return Err(Error::InvalidInput(format!("form has {} entries, not a square", form.len())));
                }
                let m = DMatrix::from_row_slice(n, n, &form);
                Ok(AnyDomain::Symmetric(SymmetricDomain::new(m, tol)?))
            }
            DomainJson::Complement { duals, reference } => Ok(AnyDomain::Complement(
                HyperplaneComplementDomain::new(duals, reference, tol)?,
            )),
        }
    }
}

impl TryFrom<DomainJson> for AnyDomain {
    type Error = Error;

    fn try_from(j: DomainJson) -> Result<Self> {
        j.build(Tolerance::default())
    }
}

impl From<AnyDomain> for DomainJson {
    fn from(d: AnyDomain) -> Self {
        match d {
            AnyDomain::Symmetric(s) => {
                let f = s.form();
                let n = f.nrows();
                DomainJson::Symmetric {
                    form: (0..n * n).map(|k| f[(k / n, k % n)]).collect(),
                }
            }
            AnyDomain::Complement(c) => DomainJson::Complement {
                duals: c.duals().to_vec(),
                reference: c.reference().clone(),
            },
        }
    }
}

impl AnyDomain {
    pub fn as_symmetric(&self) -> Option<&SymmetricDomain> {
        match self {
            AnyDomain::Symmetric(s) => Some(s),
            AnyDomain::Complement(_) => None,
        }
    }

    fn inner(&self) -> &dyn Domain {
        match self {
            AnyDomain::Symmetric(s) => s,
            AnyDomain::Complement(c) => c,
        }
    }
}

impl From<SymmetricDomain> for AnyDomain {
    fn from(d: SymmetricDomain) -> Self {
        AnyDomain::Symmetric(d)
    }
}

impl From<HyperplaneComplementDomain> for AnyDomain {
    fn from(d: HyperplaneComplementDomain) -> Self {
        AnyDomain::Complement(d)
    }
}

impl Domain for AnyDomain {
    fn context(&self) -> &GrassmannContext {
        self.inner().context()
    }

    fn contains(&self, x: &Plane) -> Result<bool> {
        self.inner().contains(x)
    }

    fn dual_contains(&self, xi: &Plane) -> Result<DualVerdict> {
        self.inner().dual_contains(xi)
    }

    fn sample_interior(&self, rng: &mut SplitRng, scale: f64) -> Result<Plane> {
        self.inner().sample_interior(rng, scale)
    }

    fn photon_membership<'a>(&'a self, pp: &'a ProjParam) -> Box<dyn Fn(f64) -> bool + 'a> {
        self.inner().photon_membership(pp)
    }

    fn photon_margin<'a>(&'a self, pp: &'a ProjParam, seed: f64) -> Box<dyn Fn(f64) -> f64 + 'a> {
        self.inner().photon_margin(pp, seed)
    }

    fn exact_components(&self) -> bool {
        self.inner().exact_components()
    }
}

/// The component of `photon ∩ domain` around a seed, as an angle interval
/// `(lo_angle, hi_angle)` of width at most π, with the matching affine
/// parameters `lo`, `hi` (`t = tan θ`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhotonInterval {
    pub pp: ProjParam,
    pub lo: ExtReal,
    pub hi: ExtReal,
    pub whole_line: bool,
    pub lo_angle: f64,
    pub hi_angle: f64,
}

impl PhotonInterval {
    fn new(pp: ProjParam, lo_angle: f64, hi_angle: f64, whole_line: bool) -> Self {
        PhotonInterval {
            pp,
            lo: ExtReal::from_angle(lo_angle),
            hi: ExtReal::from_angle(hi_angle),
            whole_line,
            lo_angle,
            hi_angle,
        }
    }

    /// Whether the photon minus the interval has fewer than two points.
    pub fn is_degenerate(&self) -> bool {
        self.whole_line || self.hi_angle - self.lo_angle >= PI - 1e-9
    }

    /// Representative of θ (mod π) inside the open interval, if any.
    pub fn locate(&self, theta: f64) -> Option<f64> {
        if self.whole_line {
            return Some(theta);
        }
        let k = ((self.lo_angle - theta) / PI).floor() + 1.0;
        let t = theta + k * PI;
        (t > self.lo_angle && t < self.hi_angle).then_some(t)
    }

    /// Hilbert distance between the photon points at angles `a` and `b`.
    pub fn hilbert_length(&self, a: f64, b: f64) -> Result<f64> {
        if self.is_degenerate() {
            return Ok(0.0);
        }
        let a = self.locate(a).ok_or(Error::DifferentComponents)?;
        let b = self.locate(b).ok_or(Error::DifferentComponents)?;
        if a == b {
            return Ok(0.0);
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Ok(cross_ratio_angles(self.lo_angle, a, b, self.hi_angle).ln().abs())
    }

    /// [`PhotonInterval::hilbert_length`] in affine parameters.
    pub fn hilbert_length_params(&self, s: ExtReal, t: ExtReal) -> Result<f64> {
        self.hilbert_length(s.to_angle(), t.to_angle())
    }
}

/// Ray-casts the photon through the domain.
///
/// With a seed angle, returns the component containing it (the seed must be
/// inside). Without one, scans `RAY_GRID` angles for a first interior point.
/// Endpoints are grid crossings refined by bisection on the domain's margin.
pub fn photon_intersection<D: Domain + ?Sized>(domain: &D, pp: &ProjParam, seed: Option<f64>) -> Result<PhotonInterval> {
    let h = PI / RAY_GRID as f64;
    let theta0 = match seed {
        Some(t) => t,
        None => {
            let inside = domain.photon_membership(pp);
            (0..RAY_GRID)
                .map(|j| -FRAC_PI_2 + j as f64 * h)
                .find(|t| inside(*t))
                .ok_or(Error::EmptyIntersection)?
        }
    };
    let margin = domain.photon_margin(pp, theta0);
    if !(margin(theta0) > 0.0) {
        return Err(match seed {
            Some(_) => Error::not_in_domain("photon seed"),
            None => Error::EmptyIntersection,
        });
    }
    let right = (1..=RAY_GRID)
        .map(|k| theta0 + k as f64 * h)
        .find(|t| !(margin(*t) > 0.0));
    let Some(right_out) = right else {
        return Ok(PhotonInterval::new(pp.clone(), theta0 - FRAC_PI_2, theta0 + FRAC_PI_2, true));
    };
    let left = (1..RAY_GRID)
        .map(|k| theta0 - k as f64 * h)
        .take_while(|t| *t > right_out - PI)
        .find(|t| !(margin(*t) > 0.0));
    let f = |t: f64| margin(t);
    let (hi, _) = bisect_bracket(f, right_out - h, right_out, REFINE_ITERATIONS);
    let lo = match left {
        Some(left_out) => bisect_bracket(f, left_out + h, left_out, REFINE_ITERATIONS).0,
        None => hi - PI,
    };
    Ok(PhotonInterval::new(pp.clone(), lo, hi, false))
}

/// Hilbert length of the photon segment between `x` and `y`
/// (`|log cr(t₁, x, y, t₂)|`); zero when the photon meets the domain in a
/// whole line or a line minus a point.
pub fn segment_hilbert_length<D: Domain + ?Sized>(domain: &D, x: &Plane, y: &Plane) -> Result<f64> {
    let ctx = domain.context();
    ctx.check_point(x, "x")?;
    ctx.check_point(y, "y")?;
    if !domain.contains(x)? {
        return Err(Error::not_in_domain("x"));
    }
    if !domain.contains(y)? {
        return Err(Error::not_in_domain("y"));
    }
    if x.same_span(y, &ctx.tol) {
        return Ok(0.0);
    }
    let (pp, ty) = ProjParam::through_orthonormal(ctx, x, y)?;
    let iv = photon_intersection(domain, &pp, Some(0.0))?;
    iv.hilbert_length(0.0, ty)
}
