use nalgebra::DMatrix;

use super::{DualVerdict, Domain};
use crate::error::{Error, Result};
use crate::grassmann::{GrassmannContext, Plane, ProjParam};
use crate::numerics::{hstack, null_space, Tolerance};
use crate::rng::SplitRng;

const DUAL_CHECK_SAMPLES: usize = 500;
const DUAL_CHECK_SEED: u64 = 0x6475_616c;

/// The component of `reference` in the complement of the hyperplanes
/// `Z_ξ = {x : x ∩ ξ ≠ 0}`, over-approximated by its sign cell.
///
/// Signs are normalized so that the first dual has sign `+1`; membership is then
/// independent of the basis chosen for `x`. With no duals the domain is the
/// whole Grassmannian.
#[derive(Debug, Clone)]
pub struct HyperplaneComplementDomain {
    ctx: GrassmannContext,
    duals: Vec<Plane>,
    reference: Plane,
    signs: Vec<i8>,
}

fn sign(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

impl HyperplaneComplementDomain {
    pub fn new(duals: Vec<Plane>, reference: Plane, tol: Tolerance) -> Result<Self> {
        let n = reference.n();
        let p = reference.dim();
        let ctx = GrassmannContext::with_tolerance(p, n.saturating_sub(p), tol)?;
        for xi in &duals {
            ctx.check_dual(xi, "duals")?;
        }
        let mut dom = HyperplaneComplementDomain {
            ctx,
            duals,
            reference,
            signs: Vec::new(),
        };
        let dets = dom.dets(dom.reference.basis());
        if let Some(i) = dets.iter().position(|d| d.abs() <= tol.geom_abs) {
            return Err(Error::NonTransverseConfiguration {
                pair: format!("(reference, duals[{i}])"),
            });
        }
        let s0 = dets.first().map(|d| sign(*d)).unwrap_or(1);
        dom.signs = dets.iter().map(|d| sign(*d) * s0).collect();
        Ok(dom)
    }

    pub fn duals(&self) -> &[Plane] {
        &self.duals
    }

    pub fn reference(&self) -> &Plane {
        &self.reference
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    fn dets(&self, basis: &DMatrix<f64>) -> Vec<f64> {
        self.duals
            .iter()
            .map(|xi| hstack(basis, xi.basis()).determinant())
            .collect()
    }

    fn pattern_matches(&self, dets: &[f64], eps: f64) -> bool {
        if dets.iter().any(|d| d.abs() <= eps) {
            return false;
        }
        let s0 = dets.first().map(|d| sign(*d)).unwrap_or(1);
        dets.iter().zip(&self.signs).all(|(d, s)| sign(*d) * s0 == *s)
    }

    /// Photon coefficients: `det[basis(θ) | ξ_i] = a_i cos θ + b_i sin θ`,
    /// rescaled so that `(a_i, b_i)` is a unit vector.
    fn photon_coefficients(&self, pp: &ProjParam) -> Vec<(f64, f64)> {
        let a = self.dets(&pp.basis_at_angle(0.0));
        let b = self.dets(&pp.basis_at_angle(std::f64::consts::FRAC_PI_2));
        a.into_iter()
            .zip(b)
            .map(|(a, b)| {
                let r = a.hypot(b);
                if r == 0.0 {
                    (0.0, 0.0)
                } else {
                    (a / r, b / r)
                }
            })
            .collect()
    }
}

impl Domain for HyperplaneComplementDomain {
    fn context(&self) -> &GrassmannContext {
        &self.ctx
    }

    fn contains(&self, x: &Plane) -> Result<bool> {
        self.ctx.check_point(x, "x")?;
        Ok(self.pattern_matches(&self.dets(x.basis()), self.ctx.tol.geom_abs))
    }

    /// Exact for the defining duals. Otherwise `xi` is accepted when every
    /// sampled interior point is transverse to it with a constant determinant
    /// sign relative to the first dual; the verdict is then heuristic.
    fn dual_contains(&self, xi: &Plane) -> Result<DualVerdict> {
        self.ctx.check_dual(xi, "xi")?;
        if self.duals.iter().any(|d| d.same_span(xi, &self.ctx.tol)) {
            return Ok(DualVerdict {
                contained: true,
                heuristic: false,
            });
        }
        let mut rng = SplitRng::new(DUAL_CHECK_SEED);
        let mut seen: Option<i8> = None;
        for i in 0..DUAL_CHECK_SAMPLES {
            let x = if i == 0 {
                self.reference.clone()
            } else {
                self.sample_interior(&mut rng, 1.0)?
            };
            let d = hstack(x.basis(), xi.basis()).determinant();
            if d.abs() <= self.ctx.tol.geom_abs {
                return Ok(DualVerdict {
                    contained: false,
                    heuristic: true,
                });
            }
            let rel = match self.duals.first() {
                Some(first) => sign(d) * sign(hstack(x.basis(), first.basis()).determinant()),
                None => sign(d),
            };
            match seen {
                None => seen = Some(rel),
                Some(s) if s != rel => {
                    return Ok(DualVerdict {
                        contained: false,
                        heuristic: true,
                    })
                }
                _ => {}
            }
        }
        Ok(DualVerdict {
            contained: true,
            heuristic: true,
        })
    }

    /// Gaussian perturbation of the reference in its graph chart, rejected
    /// until it lands in the sign cell; falls back to the reference.
    fn sample_interior(&self, rng: &mut SplitRng, scale: f64) -> Result<Plane> {
        let (p, q) = (self.ctx.p, self.ctx.q);
        let xr = self.reference.basis();
        let perp = null_space(&xr.transpose(), &self.ctx.tol);
        let mut s = scale;
        for attempt in 0..64 {
            if attempt > 0 && attempt % 16 == 0 {
                s *= 0.5;
            }
            let a = rng.normal_matrix(q, p) * s;
            let x = Plane::from_basis(xr + &perp * a, &self.ctx.tol)?;
            if self.contains(&x)? {
                return Ok(x);
            }
        }
        Ok(self.reference.clone())
    }

    fn photon_membership<'a>(&'a self, pp: &'a ProjParam) -> Box<dyn Fn(f64) -> bool + 'a> {
        let coef = self.photon_coefficients(pp);
        let eps = self.ctx.tol.geom_abs;
        Box::new(move |t| {
            let (s, c) = t.sin_cos();
            let d: Vec<f64> = coef.iter().map(|(a, b)| a * c + b * s).collect();
            self.pattern_matches(&d, eps)
        })
    }

    /// `min_i σ s_i d_i(θ)` for normalized determinants `d_i`, with the
    /// orientation `σ` frozen at the seed so the margin stays continuous.
    fn photon_margin<'a>(&'a self, pp: &'a ProjParam, seed: f64) -> Box<dyn Fn(f64) -> f64 + 'a> {
        let coef = self.photon_coefficients(pp);
        let (s0, c0) = seed.sin_cos();
        let orient = coef.first().map(|(a, b)| sign(a * c0 + b * s0)).unwrap_or(1);
        let signs = self.signs.clone();
        Box::new(move |t| {
            let (s, c) = t.sin_cos();
            coef.iter()
                .zip(&signs)
                .map(|((a, b), sg)| f64::from(orient * sg) * (a * c + b * s))
                .fold(f64::INFINITY, f64::min)
        })
    }

    fn exact_components(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, v: &[f64]) -> Plane {
        Plane::from_columns(n, &[v.to_vec()], &Tolerance::default()).unwrap()
    }

    #[test]
    fn sign_cell_membership() {
        // three lines in the projective line cut it into three arcs
        let duals = vec![line(2, &[1.0, 0.0]), line(2, &[1.0, 3f64.sqrt()]), line(2, &[-1.0, 3f64.sqrt()])];
        let reference = line(2, &[1.0, 0.3]);
        let d = HyperplaneComplementDomain::new(duals.clone(), reference, Tolerance::default()).unwrap();
        assert_eq!(d.signs()[0], 1);
        assert!(d.contains(&line(2, &[1.0, 0.5])).unwrap());
        assert!(d.contains(&line(2, &[-1.0, -0.5])).unwrap());
        assert!(!d.contains(&line(2, &[0.0, 1.0])).unwrap());
        assert!(!d.contains(&line(2, &[-1.0, 0.5])).unwrap());
        assert!(d.dual_contains(&duals[1]).unwrap().contained);
        assert!(!d.dual_contains(&duals[1]).unwrap().heuristic);
    }

    #[test]
    fn reference_must_be_transverse() {
        let err = HyperplaneComplementDomain::new(
            vec![line(2, &[1.0, 0.0])],
            line(2, &[1.0, 0.0]),
            Tolerance::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonTransverseConfiguration { .. }));
    }

    #[test]
    fn no_duals_is_everything() {
        let d = HyperplaneComplementDomain::new(vec![], Plane::coordinate(4, &[0, 1]), Tolerance::default()).unwrap();
        assert!(d.contains(&Plane::coordinate(4, &[2, 3])).unwrap());
        let v = d.dual_contains(&Plane::coordinate(4, &[2, 3])).unwrap();
        assert!(!v.contained && v.heuristic);
    }

    #[test]
    fn samples_stay_in_cell() {
        let tol = Tolerance::default();
        let duals = vec![Plane::coordinate(4, &[2, 3]), Plane::from_columns(4, &[vec![1.0, 0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0, -1.0]], &tol).unwrap()];
        let d = HyperplaneComplementDomain::new(duals, Plane::coordinate(4, &[0, 1]), tol).unwrap();
        let mut rng = SplitRng::new(3);
        for _ in 0..20 {
            let x = d.sample_interior(&mut rng, 0.5).unwrap();
            assert!(d.contains(&x).unwrap());
        }
    }
}
