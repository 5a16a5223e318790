use nalgebra::DMatrix;
use rand::RngCore;

use super::{frame_at, frame_inverse};
use crate::domains::{AnyDomain, Domain, SymmetricDomain};
use crate::error::{Error, Result};
use crate::grassmann::{log_det_ratio, Plane};
use crate::numerics::{minimize, spd_inv_sqrt, MinimizeOptions};
use crate::rng::SplitRng;

/// Sampled duals sit at `1 − ε` from the dual boundary with `log₁₀ ε`
/// uniform in this range.
const BOUNDARY_EPS_LOG10: (f64, f64) = (-6.0, -1.0);
/// Chart coordinates beyond this norm are refused by the optimizer, which
/// keeps optimized duals at least about `1e-9` inside the dual domain.
const MAX_CHART_NORM: f64 = 1e4;
const OPTIMIZE_BUDGET: usize = 600;

#[derive(Debug, Clone)]
pub struct CaratheodoryBound {
    /// `|log|cr(ξ, x, y, η)||` for the witness pair.
    pub value: f64,
    pub xi: Plane,
    pub eta: Plane,
    /// The best value among the given duals, before optimization.
    pub sampled_value: f64,
}

/// Dual points for the Carathéodory bound.
///
/// Complement domains use their defining duals. Symmetric domains draw
/// `count` duals `M·[C; I]`, where `M` is the frame at `x` (even samples) or
/// at `y` (odd samples) and `C = U diag(1 − ε_i) Vᵀ` with Haar-random `U`, `V`.
/// Sample `i` only depends on `rng.split(i)`, so shorter samples are prefixes
/// of longer ones.
pub fn sample_duals(dom: &AnyDomain, x: &Plane, y: &Plane, count: usize, rng: &SplitRng) -> Result<Vec<Plane>> {
    let sym = match dom {
        AnyDomain::Complement(c) => return Ok(c.duals().to_vec()),
        AnyDomain::Symmetric(s) => s,
    };
    let (p, q) = (sym.context().p, sym.context().q);
    let r = sym.context().rank();
    let frames = [frame_at(sym, x)?, frame_at(sym, y)?];
    (0..count)
        .map(|i| {
            let mut g = rng.split(i as u64);
            let u = g.orthogonal(p);
            let v = g.orthogonal(q);
            let mut c = DMatrix::zeros(p, q);
            for j in 0..r {
                let eps = 10f64.powf(g.uniform(BOUNDARY_EPS_LOG10.0, BOUNDARY_EPS_LOG10.1));
                c += u.column(j) * v.column(j).transpose() * (1.0 - eps);
            }
            let mut m = DMatrix::zeros(p + q, q);
            m.view_mut((0, 0), (p, q)).copy_from(&c);
            m.view_mut((p, 0), (q, q)).fill_with_identity();
            Plane::from_basis(&frames[i % 2] * m, &sym.context().tol)
        })
        .collect()
}

/// Carathéodory lower bound `max |log|cr(ξ, x, y, η)||` over pairs of `duals`.
///
/// The flag cross ratio splits as `exp(h(ξ) − h(η))` with
/// `h(ξ) = log|det[x|ξ]| − log|det[y|ξ]|`, so the maximum over pairs is
/// `max h − min h`. With `optimize` on a symmetric domain both extremes are
/// then improved by Nelder–Mead in the dual chart at `x`.
pub fn caratheodory_lower(
    dom: &AnyDomain,
    x: &Plane,
    y: &Plane,
    duals: &[Plane],
    optimize: bool,
    rng: &SplitRng,
) -> Result<CaratheodoryBound> {
    let ctx = dom.context();
    ctx.check_point(x, "x")?;
    ctx.check_point(y, "y")?;
    for (z, what) in [(x, "x"), (y, "y")] {
        if !dom.contains(z)? {
            return Err(Error::not_in_domain(what));
        }
    }
    if duals.is_empty() {
        return Err(Error::EmptyDualSample);
    }
    let mut best_hi = (f64::NEG_INFINITY, 0usize);
    let mut best_lo = (f64::INFINITY, 0usize);
    for (i, xi) in duals.iter().enumerate() {
        ctx.check_dual(xi, "duals")?;
        if !dom.dual_contains(xi)?.contained {
            return Err(Error::DualNotAdmissible {
                what: format!("duals[{i}]"),
            });
        }
        let h = log_det_ratio(x, y, xi);
        if !h.is_finite() {
            continue;
        }
        if h > best_hi.0 {
            best_hi = (h, i);
        }
        if h < best_lo.0 {
            best_lo = (h, i);
        }
    }
    if !best_hi.0.is_finite() {
        return Err(Error::EmptyDualSample);
    }
    let mut xi = duals[best_hi.1].clone();
    let mut eta = duals[best_lo.1].clone();
    let sampled_value = best_hi.0 - best_lo.0;
    let (mut hi, mut lo) = (best_hi.0, best_lo.0);
    if let (true, AnyDomain::Symmetric(sym)) = (optimize, dom) {
        if !x.same_span(y, &ctx.tol) {
            if let Some((cand, h)) = refine_extreme(sym, x, y, &xi, 1.0, rng.split(0))? {
                if h > hi {
                    (xi, hi) = (cand, h);
                }
            }
            if let Some((cand, h)) = refine_extreme(sym, x, y, &eta, -1.0, rng.split(1))? {
                if h < lo {
                    (eta, lo) = (cand, h);
                }
            }
        }
    }
    Ok(CaratheodoryBound {
        value: hi - lo,
        xi,
        eta,
        sampled_value,
    })
}

/// Pushes `h` up (`direction = 1`) or down (`-1`) from `start`.
///
/// In the frame at `x` a dual is `[C; I]` with `‖C‖ < 1` and, up to a constant,
/// `h = −log|det(P − C Q)|` where `[P; Q]` is `y` in the same frame. `C` is
/// parametrized as `Z (I + ZᵀZ)^{-1/2}`, which covers the open unit ball.
fn refine_extreme(
    dom: &SymmetricDomain,
    x: &Plane,
    y: &Plane,
    start: &Plane,
    direction: f64,
    mut rng: SplitRng,
) -> Result<Option<(Plane, f64)>> {
    let (p, q) = (dom.context().p, dom.context().q);
    let m = frame_at(dom, x)?;
    let minv = frame_inverse(dom, &m);
    let yc = &minv * y.basis();
    let (py, qy) = (yc.rows(0, p).into_owned(), yc.rows(p, q).into_owned());
    let sc = &minv * start.basis();
    let Some(s_inv) = sc.rows(p, q).into_owned().try_inverse() else {
        return Ok(None);
    };
    let c0 = sc.rows(0, p) * s_inv;
    let Some(w) = spd_inv_sqrt(&(DMatrix::identity(q, q) - c0.transpose() * &c0)) else {
        return Ok(None);
    };
    let z0 = c0 * w;
    let chart = |z: &[f64]| -> Option<DMatrix<f64>> {
        let z = DMatrix::from_column_slice(p, q, z);
        if z.norm() > MAX_CHART_NORM {
            return None;
        }
        let w = spd_inv_sqrt(&(DMatrix::identity(q, q) + z.transpose() * &z))?;
        Some(z * w)
    };
    let objective = |z: &[f64]| -> f64 {
        match chart(z) {
            Some(c) => direction * (&py - c * &qy).determinant().abs().ln(),
            None => f64::INFINITY,
        }
    };
    let opts = MinimizeOptions {
        budget: OPTIMIZE_BUDGET,
        restarts: 3,
        seed: rng.next_u64(),
        initial_step: 0.1,
    };
    let res = minimize(objective, z0.as_slice(), &opts);
    let Some(c) = chart(&res.x) else {
        return Ok(None);
    };
    let mut basis = DMatrix::zeros(p + q, q);
    basis.view_mut((0, 0), (p, q)).copy_from(&c);
    basis.view_mut((p, 0), (q, q)).fill_with_identity();
    let Ok(xi) = Plane::from_basis(&m * basis, &dom.context().tol) else {
        return Ok(None);
    };
    if !dom.dual_contains(&xi)?.contained {
        return Ok(None);
    }
    let h = log_det_ratio(x, y, &xi);
    Ok(h.is_finite().then_some((xi, h)))
}
