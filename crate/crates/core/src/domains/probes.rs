use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{photon_intersection, Domain, RAY_GRID};
use crate::error::{Error, Result};
use crate::grassmann::{ExtReal, GrassmannContext, Photon, Plane, ProjParam};
use crate::numerics::{null_space, orthonormal_columns};
use crate::rng::SplitRng;

/// Outcome of a sampled probe; the evidence is heuristic by nature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe: String,
    pub seed: u64,
    pub samples: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    /// Largest number of connected components seen (convexity probe only).
    pub max_components: Option<usize>,
    pub heuristic: bool,
    pub witnesses: Vec<ProbeWitness>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeWitness {
    pub sample: usize,
    pub photon: ProjParam,
    pub components: Option<usize>,
    pub lo: Option<ExtReal>,
    pub hi: Option<ExtReal>,
    pub whole_line: bool,
}

const MAX_WITNESSES: usize = 3;

/// A photon through `x` in a random direction, parametrized with `x` at θ = 0.
pub fn random_photon_through(ctx: &GrassmannContext, x: &Plane, rng: &mut SplitRng) -> Result<ProjParam> {
    ctx.check_point(x, "x")?;
    let (p, n) = (ctx.p, ctx.n());
    let xb = x.basis();
    // a random hyperplane of x and the unit normal to it inside x
    let r = rng.normal_matrix(p, p - 1);
    let normal = null_space(&r.transpose(), &ctx.tol);
    if normal.ncols() != 1 {
        return Err(Error::InvalidInput("degenerate random frame".into()));
    }
    let u = xb * normal.column(0);
    let v0 = if p == 1 {
        Plane::zero(n)
    } else {
        Plane::from_basis(xb * r, &ctx.tol)?
    };
    let g = DMatrix::from_fn(n, 1, |_, _| rng.normal());
    let w = &g - xb * (xb.transpose() * &g);
    let wn = w.norm();
    if wn == 0.0 {
        return Err(Error::InvalidInput("degenerate random direction".into()));
    }
    let w = w / wn;
    let v1 = Plane::from_basis(crate::numerics::hstack(xb, &w), &ctx.tol)?;
    let photon = Photon::new(ctx, v0, v1)?;
    ProjParam::new(ctx, photon, u.iter().copied().collect(), w.iter().copied().collect())
}

/// A photon spanned by a uniformly random flag `v0 ⊂ v1`.
pub fn random_photon(ctx: &GrassmannContext, rng: &mut SplitRng) -> Result<ProjParam> {
    let (p, n) = (ctx.p, ctx.n());
    let v1 = orthonormal_columns(&rng.normal_matrix(n, p + 1), &ctx.tol)
        .ok_or_else(|| Error::InvalidInput("degenerate random frame".into()))?;
    let v0 = if p == 1 {
        Plane::zero(n)
    } else {
        Plane::from_basis(&v1 * rng.normal_matrix(p + 1, p - 1), &ctx.tol)?
    };
    let photon = Photon::new(ctx, v0, Plane::from_basis(v1, &ctx.tol)?)?;
    ProjParam::canonical(ctx, photon)
}

/// Samples photons through random interior points and checks that each meets
/// the domain in an interval whose complement has at least two points.
pub fn r_proper_probe<D: Domain + ?Sized>(domain: &D, sample_count: usize, rng: SplitRng) -> Result<ProbeReport> {
    let ctx = *domain.context();
    let mut report = ProbeReport {
        probe: "r_proper".into(),
        seed: rng.seed(),
        samples: sample_count,
        passed: 0,
        failed: 0,
        skipped: 0,
        max_components: None,
        heuristic: true,
        witnesses: Vec::new(),
    };
    for i in 0..sample_count {
        let mut r = rng.split(i as u64);
        let x = domain.sample_interior(&mut r, 1.0)?;
        let pp = random_photon_through(&ctx, &x, &mut r)?;
        let iv = match photon_intersection(domain, &pp, Some(0.0)) {
            Ok(iv) => iv,
            Err(Error::NotInDomain { .. }) | Err(Error::EmptyIntersection) => {
                report.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if iv.is_degenerate() {
            report.failed += 1;
            if report.witnesses.len() < MAX_WITNESSES {
                report.witnesses.push(ProbeWitness {
                    sample: i,
                    photon: pp,
                    components: None,
                    lo: (!iv.whole_line).then_some(iv.lo),
                    hi: (!iv.whole_line).then_some(iv.hi),
                    whole_line: iv.whole_line,
                });
            }
        } else {
            report.passed += 1;
        }
    }
    Ok(report)
}

/// Number of maximal runs of `true` on a circular grid.
fn circular_runs(inside: &[bool]) -> usize {
    if inside.iter().all(|b| *b) {
        return 1;
    }
    let n = inside.len();
    (0..n).filter(|&j| inside[j] && !inside[(j + n - 1) % n]).count()
}

/// Counts connected components of `photon ∩ domain` on a `RAY_GRID` scan.
///
/// Even-numbered samples use photons through interior points, odd ones
/// uniformly random photons; photons missing the domain are skipped.
pub fn photon_convexity_probe<D: Domain + ?Sized>(domain: &D, sample_count: usize, rng: SplitRng) -> Result<ProbeReport> {
    let ctx = *domain.context();
    let mut report = ProbeReport {
        probe: "photon_convexity".into(),
        seed: rng.seed(),
        samples: sample_count,
        passed: 0,
        failed: 0,
        skipped: 0,
        max_components: Some(0),
        heuristic: true,
        witnesses: Vec::new(),
    };
    let h = PI / RAY_GRID as f64;
    let mut best = 0;
    for i in 0..sample_count {
        let mut r = rng.split(i as u64);
        let pp = if i % 2 == 0 {
            let x = domain.sample_interior(&mut r, 1.0)?;
            random_photon_through(&ctx, &x, &mut r)?
        } else {
            random_photon(&ctx, &mut r)?
        };
        let inside_at = domain.photon_membership(&pp);
        let grid: Vec<bool> = (0..RAY_GRID).map(|j| inside_at(-FRAC_PI_2 + j as f64 * h)).collect();
        drop(inside_at);
        if !grid.iter().any(|b| *b) {
            report.skipped += 1;
            continue;
        }
        let k = circular_runs(&grid);
        if k <= 1 {
            report.passed += 1;
        } else {
            report.failed += 1;
        }
        if k > best || report.witnesses.is_empty() {
            best = best.max(k);
            report.witnesses = vec![ProbeWitness {
                sample: i,
                photon: pp,
                components: Some(k),
                lo: None,
                hi: None,
                whole_line: grid.iter().all(|b| *b),
            }];
        }
    }
    report.max_components = Some(best);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{DualVerdict, HyperplaneComplementDomain, SymmetricDomain};
    use crate::numerics::Tolerance;

    #[test]
    fn runs_are_circular() {
        assert_eq!(circular_runs(&[true, false, true]), 1);
        assert_eq!(circular_runs(&[true, false, true, false]), 2);
        assert_eq!(circular_runs(&[false, false]), 0);
        assert_eq!(circular_runs(&[true, true]), 1);
    }

    #[test]
    fn photon_through_contains_point() {
        let ctx = GrassmannContext::new(3, 2).unwrap();
        let mut rng = SplitRng::new(1);
        let x = Plane::from_basis(rng.normal_matrix(5, 3), &ctx.tol).unwrap();
        let pp = random_photon_through(&ctx, &x, &mut rng).unwrap();
        assert!(pp.eval_angle(0.0, &ctx.tol).unwrap().same_span(&x, &ctx.tol));
        assert!(pp.photon.contains(&x, &ctx.tol));
        let rp = random_photon(&ctx, &mut rng).unwrap();
        assert_eq!(rp.photon.v1.dim(), 4);
    }

    #[test]
    fn symmetric_domains_are_r_proper_and_convex() {
        for (p, q) in [(1, 1), (1, 2), (2, 2), (2, 3)] {
            let d = SymmetricDomain::standard(p, q).unwrap();
            let r = r_proper_probe(&d, 200, SplitRng::new(7)).unwrap();
            assert_eq!((r.passed, r.failed), (200, 0), "({p},{q})");
            let c = photon_convexity_probe(&d, 200, SplitRng::new(7)).unwrap();
            assert_eq!(c.max_components, Some(1), "({p},{q})");
            assert_eq!(c.passed + c.skipped, 200);
        }
    }

    #[test]
    fn whole_grassmannian_fails_everywhere() {
        let d = HyperplaneComplementDomain::new(vec![], Plane::coordinate(4, &[0, 1]), Tolerance::default()).unwrap();
        let r = r_proper_probe(&d, 50, SplitRng::new(2)).unwrap();
        assert_eq!((r.passed, r.failed), (0, 50));
        assert_eq!(r.witnesses.len(), MAX_WITNESSES);
    }

    #[test]
    fn complement_with_generic_duals_reports() {
        let tol = Tolerance::default();
        let mut rng = SplitRng::new(11);
        let duals: Vec<Plane> = (0..3).map(|_| Plane::from_basis(rng.normal_matrix(4, 2), &tol).unwrap()).collect();
        let reference = Plane::from_basis(rng.normal_matrix(4, 2), &tol).unwrap();
        let d = HyperplaneComplementDomain::new(duals, reference, tol).unwrap();
        let r = r_proper_probe(&d, 100, SplitRng::new(4)).unwrap();
        assert_eq!(r.passed + r.failed + r.skipped, 100);
        assert!(r.heuristic);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["seed"], 4);
    }

    /// Union of two sign cells of the projective line, a deliberately
    /// non-convex domain.
    struct TwoCells {
        a: HyperplaneComplementDomain,
        b: HyperplaneComplementDomain,
    }

    impl Domain for TwoCells {
        fn context(&self) -> &GrassmannContext {
            self.a.context()
        }
        fn contains(&self, x: &Plane) -> Result<bool> {
            Ok(self.a.contains(x)? || self.b.contains(x)?)
        }
        fn dual_contains(&self, _xi: &Plane) -> Result<DualVerdict> {
            Ok(DualVerdict {
                contained: false,
                heuristic: true,
            })
        }
        fn sample_interior(&self, rng: &mut SplitRng, scale: f64) -> Result<Plane> {
            self.a.sample_interior(rng, scale)
        }
    }

    #[test]
    fn two_cells_break_convexity() {
        let tol = Tolerance::default();
        let line = |v: [f64; 2]| Plane::from_columns(2, &[v.to_vec()], &tol).unwrap();
        // cells (0°, 45°) and (90°, 135°) of four lines through the origin
        let duals = vec![line([1.0, 0.0]), line([1.0, 1.0]), line([0.0, 1.0]), line([-1.0, 1.0])];
        let d = TwoCells {
            a: HyperplaneComplementDomain::new(duals.clone(), line([1.0, 0.4]), tol).unwrap(),
            b: HyperplaneComplementDomain::new(duals, line([-0.4, 1.0]), tol).unwrap(),
        };
        let r = photon_convexity_probe(&d, 10, SplitRng::new(0)).unwrap();
        assert_eq!(r.max_components, Some(2));
        assert_eq!(r.failed, 10);
    }

    #[test]
    fn empty_photons_are_skipped() {
        // a thin cap around e_1 in the 2-sphere of lines: most random photons miss it
        let form = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -100.0, -100.0]));
        let d = SymmetricDomain::new(form, Tolerance::default()).unwrap();
        let r = photon_convexity_probe(&d, 40, SplitRng::new(3)).unwrap();
        assert!(r.skipped > 0);
        assert_eq!(r.passed + r.skipped, 40);
        assert_eq!(r.failed, 0);
    }
}
