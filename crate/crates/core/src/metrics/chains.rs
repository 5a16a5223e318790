use nalgebra::DMatrix;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{geodesic_r_chain, Chain};
use crate::domains::{AnyDomain, Domain};
use crate::error::{Error, Result};
use crate::grassmann::{arithmetic_distance, Plane};
use crate::numerics::{hstack, minimize, null_space, svd, MinimizeOptions, Tolerance};
use crate::rng::SplitRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSearchConfig {
    pub max_segments: usize,
    pub restarts: usize,
    /// Objective evaluations shared by all searches of one call.
    pub budget: usize,
}

impl Default for ChainSearchConfig {
    fn default() -> Self {
        ChainSearchConfig {
            max_segments: 4,
            restarts: 3,
            budget: 600,
        }
    }
}

/// Principal vectors of a pair: `x = span(W, A)`, `y = span(W, B)` with
/// `W = x ∩ y` and `A`, `B` of width `d = arithmetic_distance(x, y)`.
struct Principal {
    shared: DMatrix<f64>,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl Principal {
    fn new(x: &Plane, y: &Plane, d: usize) -> Self {
        let p = x.dim();
        let s = svd(&(x.basis().transpose() * y.basis()));
        let xa = x.basis() * &s.u;
        let yb = y.basis() * &s.v;
        Principal {
            shared: xa.columns(0, p - d).into_owned(),
            a: xa.columns(p - d, d).into_owned(),
            b: yb.columns(p - d, d).into_owned(),
        }
    }

    fn d(&self) -> usize {
        self.a.ncols()
    }

    /// `z_i = span(W, B·Q[:, ..i], A·P[:, i..])`; consecutive points share all
    /// but one spanning vector.
    fn points(&self, x: &Plane, y: &Plane, pm: &DMatrix<f64>, qm: &DMatrix<f64>, tol: &Tolerance) -> Option<Vec<Plane>> {
        let d = self.d();
        let mut pts = vec![x.clone()];
        let bq = &self.b * qm;
        let ap = &self.a * pm;
        for i in 1..d {
            let m = hstack(&hstack(&self.shared, &bq.columns(0, i).into_owned()), &ap.columns(i, d - i).into_owned());
            pts.push(Plane::from_basis(m, tol).ok()?);
        }
        pts.push(y.clone());
        Some(pts)
    }
}

fn total_or_inf(dom: &AnyDomain, pts: Option<Vec<Plane>>) -> f64 {
    pts.and_then(|p| Chain::from_points(dom, p).ok())
        .map(|c| c.total())
        .unwrap_or(f64::INFINITY)
}

/// `(I + ΔP, I + ΔQ)` from a flat parameter vector.
fn mixing(params: &[f64], d: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let id = DMatrix::<f64>::identity(d, d);
    let pm = &id + DMatrix::from_column_slice(d, d, &params[..d * d]);
    let qm = &id + DMatrix::from_column_slice(d, d, &params[d * d..]);
    (pm, qm)
}

/// Chains of `d` segments through intermediate planes meeting both endpoints
/// in codimension one, searched over mixings of the principal vectors.
fn principal_search(dom: &AnyDomain, x: &Plane, y: &Plane, d: usize, budget: usize, restarts: usize, rng: &mut SplitRng) -> Option<Chain> {
    let tol = dom.context().tol;
    let pr = Principal::new(x, y, d);
    let eval = |params: &[f64]| {
        let (pm, qm) = mixing(params, d);
        total_or_inf(dom, pr.points(x, y, &pm, &qm, &tol))
    };
    let dim = 2 * d * d;
    let mut start = vec![0.0; dim];
    let mut start_v = eval(&start);
    let mut used = 1;
    for _ in 0..4 * (restarts + 1) {
        let cand: Vec<f64> = (0..dim).map(|_| 0.5 * rng.normal()).collect();
        let v = eval(&cand);
        used += 1;
        if v < start_v {
            (start, start_v) = (cand, v);
        }
    }
    let opts = MinimizeOptions {
        budget: budget.saturating_sub(used).max(1),
        restarts,
        seed: rng.next_u64(),
        initial_step: 0.1,
    };
    let res = minimize(eval, &start, &opts);
    let best = if res.value <= start_v { res.x } else { start };
    let (pm, qm) = mixing(&best, d);
    Chain::from_points(dom, pr.points(x, y, &pm, &qm, &tol)?).ok()
}

/// Principal chains `x → m → y` through a via point `m`, moved in the graph
/// chart at `m0` (`p·q` coordinates).
fn via_search(dom: &AnyDomain, x: &Plane, y: &Plane, m0: &Plane, max_segments: usize, budget: usize, restarts: usize, rng: &mut SplitRng) -> Option<Chain> {
    let ctx = dom.context();
    let tol = ctx.tol;
    let (p, q) = (ctx.p, ctx.q);
    let perp = null_space(&m0.basis().transpose(), &tol);
    let via = |params: &[f64]| -> Option<Plane> {
        let a = DMatrix::from_column_slice(q, p, params);
        Plane::from_basis(m0.basis() + &perp * a, &tol).ok()
    };
    let chain_through = |m: &Plane| -> Option<Vec<Plane>> {
        let d1 = arithmetic_distance(ctx, x, m).ok()?;
        let d2 = arithmetic_distance(ctx, m, y).ok()?;
        if d1 + d2 > max_segments {
            return None;
        }
        let leg = |a: &Plane, b: &Plane, d: usize| -> Option<Vec<Plane>> {
            if d == 0 {
                return Some(vec![a.clone()]);
            }
            let id = DMatrix::identity(d, d);
            Principal::new(a, b, d).points(a, b, &id, &id, &tol)
        };
        let mut pts = leg(x, m, d1)?;
        pts.pop();
        pts.extend(leg(m, y, d2)?);
        Some(pts)
    };
    let eval = |params: &[f64]| total_or_inf(dom, via(params).and_then(|m| chain_through(&m)));
    let opts = MinimizeOptions {
        budget: budget.max(1),
        restarts,
        seed: rng.next_u64(),
        initial_step: 0.1,
    };
    let res = minimize(eval, &vec![0.0; p * q], &opts);
    if !res.value.is_finite() {
        return None;
    }
    Chain::from_points(dom, chain_through(&via(&res.x)?)?).ok()
}

/// Upper bound for the Kobayashi distance: the shortest chain found with at
/// most `max_segments` segments, together with the chain.
///
/// Candidates are the geodesic r-chain on symmetric domains, principal-vector
/// chains with `arithmetic_distance(x, y)` segments, and two-leg chains through
/// a via point (the reference point of a complement domain, or the best chain's
/// middle point). Photon-related points are joined by their own segment.
pub fn kobayashi_upper(dom: &AnyDomain, x: &Plane, y: &Plane, cfg: &ChainSearchConfig, rng: &SplitRng) -> Result<(f64, Chain)> {
    let ctx = dom.context();
    ctx.check_point(x, "x")?;
    ctx.check_point(y, "y")?;
    for (z, what) in [(x, "x"), (y, "y")] {
        if !dom.contains(z)? {
            return Err(Error::not_in_domain(what));
        }
    }
    if x.same_span(y, &ctx.tol) {
        return Ok((0.0, Chain::single(x.clone())));
    }
    let d = arithmetic_distance(ctx, x, y)?;
    if d == 1 && cfg.max_segments >= 1 {
        if let Ok(c) = Chain::from_points(dom, vec![x.clone(), y.clone()]) {
            return Ok((c.total(), c));
        }
    }
    let mut rng = rng.split(0);
    let mut candidates: Vec<Chain> = Vec::new();
    if let AnyDomain::Symmetric(s) = dom {
        if let Ok(c) = geodesic_r_chain(s, x, y) {
            if c.segments() <= cfg.max_segments {
                candidates.push(c);
            }
        }
    }
    let searches = 1 + usize::from(d >= 2 && d <= cfg.max_segments);
    let share = cfg.budget / searches;
    if d >= 2 && d <= cfg.max_segments {
        candidates.extend(principal_search(dom, x, y, d, share, cfg.restarts, &mut rng));
    }
    let via0 = match dom {
        AnyDomain::Complement(c) => Some(c.reference().clone()),
        AnyDomain::Symmetric(_) => candidates
            .iter()
            .min_by(|a, b| a.total().total_cmp(&b.total()))
            .and_then(|c| c.points.get(c.points.len() / 2).cloned()),
    };
    if let Some(m0) = via0 {
        candidates.extend(via_search(dom, x, y, &m0, cfg.max_segments, share, cfg.restarts, &mut rng));
    }
    candidates
        .into_iter()
        .filter(|c| c.total().is_finite())
        .min_by(|a, b| a.total().total_cmp(&b.total()))
        .map(|c| (c.total(), c))
        .ok_or_else(|| Error::NoChainFound {
            reason: format!("no admissible chain with at most {} segments within budget {}", cfg.max_segments, cfg.budget),
        })
}
