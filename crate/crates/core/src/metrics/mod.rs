//! Kobayashi and Carathéodory distances on Grassmannian domains.

mod caratheodory;
mod chains;
mod report;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domains::{segment_hilbert_length, Domain, SymmetricDomain};
use crate::error::{Error, Result};
use crate::grassmann::Plane;
use crate::numerics::{hstack, null_space, singular_values, spd_inv_sqrt, svd, sym_eigenvalues};

pub use caratheodory::{caratheodory_lower, sample_duals, CaratheodoryBound};
pub use chains::{kobayashi_upper, ChainSearchConfig};
pub use report::{
    four_point_delta, hyperbolicity_csv, hyperbolicity_probe, sandwich, HyperbolicityConfig, HyperbolicityRow,
    MetricReport, SandwichConfig,
};

/// Scaling between the Carathéodory and Kobayashi metrics for the Plücker
/// representation: the highest weight evaluates to 1 on its own coroot.
pub const CHI_H_ALPHA: f64 = 1.0;

/// Relative positions with a singular value within this of 1 are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

/// Singular values at or below this are treated as zero when building r-chains.
const SMALL_SIGMA: f64 = 0.5;

pub const CHAIN_SIGMA_FLOOR: f64 = 1e-10;

/// Singular values `σ_i` of the relative position of two points of a
/// symmetric domain, with flat coordinates `t_i = log((1+σ_i)/(1−σ_i))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativePosition {
    pub sigmas: Vec<f64>,
    pub flat_coords: Vec<f64>,
}

/// Consecutive points are photon-related and `segment_lengths[i]` is the
/// Hilbert length of the segment from `points[i]` to `points[i + 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Chain {
    pub points: Vec<Plane>,
    pub segment_lengths: Vec<f64>,
}

impl Chain {
    pub fn single(x: Plane) -> Self {
        Chain {
            points: vec![x],
            segment_lengths: Vec::new(),
        }
    }

    /// Measures every segment; fails if some pair is not photon-related or
    /// leaves the domain.
    pub fn from_points<D: Domain + ?Sized>(domain: &D, points: Vec<Plane>) -> Result<Self> {
        let segment_lengths = points
            .windows(2)
            .map(|w| segment_hilbert_length(domain, &w[0], &w[1]))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Chain {
            points,
            segment_lengths,
        })
    }

    pub fn total(&self) -> f64 {
        self.segment_lengths.iter().sum()
    }

    pub fn segments(&self) -> usize {
        self.segment_lengths.len()
    }
}

fn require_inside(dom: &SymmetricDomain, x: &Plane, what: &'static str) -> Result<()> {
    dom.context().check_point(x, what)?;
    if dom.contains(x)? {
        Ok(())
    } else {
        Err(Error::not_in_domain(what))
    }
}

/// `[X | N]` with `X` spanning `x`, `N` its form-orthocomplement, and
/// `Mᵀ φ M = diag(I_p, −I_q)`.
pub(crate) fn frame_at(dom: &SymmetricDomain, x: &Plane) -> Result<DMatrix<f64>> {
    require_inside(dom, x, "x")?;
    let phi = dom.form();
    let q = dom.context().q;
    let xb = x.basis();
    let gx = xb.transpose() * phi * xb;
    let xs = xb * spd_inv_sqrt(&gx).ok_or_else(|| Error::not_in_domain("x"))?;
    let n0 = null_space(&(phi * &xs).transpose(), &dom.context().tol);
    if n0.ncols() != q {
        return Err(Error::ChartDegeneracy);
    }
    let gn = -(n0.transpose() * phi * &n0);
    let ns = &n0 * spd_inv_sqrt(&gn).ok_or(Error::ChartDegeneracy)?;
    Ok(hstack(&xs, &ns))
}

/// Inverse of a frame from [`frame_at`]: `J Mᵀ φ`.
fn frame_inverse(dom: &SymmetricDomain, m: &DMatrix<f64>) -> DMatrix<f64> {
    let p = dom.context().p;
    let mut t = m.transpose() * dom.form();
    for mut row in t.row_iter_mut().skip(p) {
        row.neg_mut();
    }
    t
}

/// A form-preserving `g` with `g · x₀ = x`, where `x₀` is the base point.
pub fn normalize_to_base(dom: &SymmetricDomain, x: &Plane) -> Result<DMatrix<f64>> {
    Ok(frame_at(dom, x)? * dom.frame_inv())
}

/// `y` written as a graph `[I; B]` in the frame at `x`.
fn relative_graph(dom: &SymmetricDomain, x: &Plane, y: &Plane) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let m = frame_at(dom, x)?;
    require_inside(dom, y, "y")?;
    let p = dom.context().p;
    let coords = frame_inverse(dom, &m) * y.basis();
    let top = coords.rows(0, p).into_owned();
    let bottom = coords.rows(p, coords.nrows() - p).into_owned();
    let inv = top.try_inverse().ok_or(Error::ChartDegeneracy)?;
    Ok((m, bottom * inv))
}

/// Eigenvalues `μ_i = cosh²(t_i/2)` of `A^{-1/2} C B^{-1} Cᵀ A^{-1/2}` with
/// `A = XᵀφX`, `B = YᵀφY`, `C = XᵀφY`; basis independent and invariant under
/// the orthogonal group of the form, so no frame has to be built.
fn relative_eigenvalues(dom: &SymmetricDomain, x: &Plane, y: &Plane) -> Result<Vec<f64>> {
    require_inside(dom, x, "x")?;
    require_inside(dom, y, "y")?;
    let phi = dom.form();
    let (xb, yb) = (x.basis(), y.basis());
    let a = xb.transpose() * phi * xb;
    let b = yb.transpose() * phi * yb;
    let c = xb.transpose() * phi * yb;
    let ai = spd_inv_sqrt(&a).ok_or_else(|| Error::not_in_domain("x"))?;
    let bi = b.try_inverse().ok_or_else(|| Error::not_in_domain("y"))?;
    let s = &ai * &c * bi * c.transpose() * &ai;
    let s = (&s + s.transpose()) * 0.5;
    let mut mu = sym_eigenvalues(&s);
    mu.reverse();
    mu.truncate(dom.context().rank());
    Ok(mu.into_iter().map(|m| m.max(1.0)).collect())
}

/// Singular values of the relative position of `y` seen from `x`, largest first.
pub fn relative_position(dom: &SymmetricDomain, x: &Plane, y: &Plane) -> Result<RelativePosition> {
    let mu = relative_eigenvalues(dom, x, y)?;
    if x.same_span(y, &dom.context().tol) {
        let zeros = vec![0.0; mu.len()];
        return Ok(RelativePosition {
            sigmas: zeros.clone(),
            flat_coords: zeros,
        });
    }
    let mut sigmas: Vec<f64> = mu.iter().map(|m| (1.0 - 1.0 / m).sqrt()).collect();
    if let Some(&s) = sigmas.first() {
        if s >= 1.0 - BOUNDARY_MARGIN {
            return Err(Error::BoundaryProximity { sigma: s });
        }
    }
    let mut flat_coords: Vec<f64> = mu.iter().map(|m| 2.0 * m.sqrt().acosh()).collect();
    // sqrt(1 - 1/μ) loses half the digits near σ = 0; the chart SVD does not
    if sigmas.iter().any(|&s| s < SMALL_SIGMA) {
        let (_, b) = relative_graph(dom, x, y)?;
        for (i, s) in singular_values(&b).into_iter().enumerate().take(sigmas.len()) {
            if sigmas[i] < SMALL_SIGMA {
                sigmas[i] = s;
                flat_coords[i] = 2.0 * s.atanh();
            }
        }
    }
    Ok(RelativePosition { sigmas, flat_coords })
}

/// `Σ_i log((1+σ_i)/(1−σ_i))`; exactly symmetric in `x` and `y`.
pub fn kobayashi_closed_form(dom: &SymmetricDomain, x: &Plane, y: &Plane) -> Result<f64> {
    let swap = x
        .basis()
        .iter()
        .zip(y.basis().iter())
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| o.is_ne())
        .is_some_and(|o| o.is_gt());
    let rp = if swap {
        relative_position(dom, y, x)
    } else {
        relative_position(dom, x, y)
    };
    Ok(rp?.flat_coords.iter().sum())
}

/// The chain whose i-th point is the graph of `diag(σ_1, …, σ_i, 0, …)` in the
/// frame diagonalizing the relative position; one segment per nonzero `σ_i`.
pub fn geodesic_r_chain(dom: &SymmetricDomain, x: &Plane, y: &Plane) -> Result<Chain> {
    let (m, b) = relative_graph(dom, x, y)?;
    let tol = dom.context().tol;
    if x.same_span(y, &tol) {
        return Ok(Chain::single(x.clone()));
    }
    let p = dom.context().p;
    let d = svd(&b);
    let active: Vec<usize> = (0..d.s.len()).filter(|&i| d.s[i] > CHAIN_SIGMA_FLOOR).collect();
    let mut points = vec![x.clone()];
    let mut partial = DMatrix::zeros(b.nrows(), p);
    for &i in active.iter().take(active.len().saturating_sub(1)) {
        partial += d.u.column(i) * d.v.column(i).transpose() * d.s[i];
        let mut g = DMatrix::identity(m.nrows(), p);
        g.view_mut((p, 0), (b.nrows(), p)).copy_from(&partial);
        points.push(Plane::from_basis(&m * g, &tol)?);
    }
    points.push(y.clone());
    Chain::from_points(dom, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::arithmetic_distance;
    use crate::numerics::{singular_values, Tolerance};
    use crate::rng::SplitRng;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn graph(d: &SymmetricDomain, rows: usize, cols: usize, v: &[f64]) -> Plane {
        d.graph_point(&DMatrix::from_row_slice(rows, cols, v)).unwrap()
    }

    fn j_form(p: usize, q: usize) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_fn(p + q, |i, _| if i < p { 1.0 } else { -1.0 }))
    }

    /// Random element of the orthogonal group of the form: block rotations
    /// composed with boosts, conjugated into the domain's own frame.
    fn random_isometry(d: &SymmetricDomain, rng: &mut SplitRng) -> DMatrix<f64> {
        let (p, q) = (d.context().p, d.context().q);
        let n = p + q;
        let mut g = DMatrix::<f64>::identity(n, n);
        for _ in 0..3 {
            let mut k = DMatrix::zeros(n, n);
            k.view_mut((0, 0), (p, p)).copy_from(&rng.orthogonal(p));
            k.view_mut((p, p), (q, q)).copy_from(&rng.orthogonal(q));
            let t = rng.uniform(-1.0, 1.0);
            let (i, j) = (rng.below(p), p + rng.below(q));
            let mut a = DMatrix::identity(n, n);
            a[(i, i)] = t.cosh();
            a[(j, j)] = t.cosh();
            a[(i, j)] = t.sinh();
            a[(j, i)] = t.sinh();
            g = g * k * a;
        }
        d.frame() * g * d.frame_inv()
    }

    #[test]
    fn normalize_preserves_form_and_moves_base() {
        let tol = Tolerance::default();
        let form = DMatrix::from_row_slice(4, 4, &[2.0, 0.3, 0.0, 0.1, 0.3, 1.0, 0.2, 0.0, 0.0, 0.2, -1.5, 0.4, 0.1, 0.0, 0.4, -0.7]);
        let d = SymmetricDomain::new(form.clone(), tol).unwrap();
        let base = d.base_point();
        let mut rng = SplitRng::new(4);
        for _ in 0..100 {
            let x = d.sample_interior(&mut rng, 2.0).unwrap();
            let g = normalize_to_base(&d, &x).unwrap();
            let res = (g.transpose() * &form * &g - &form).abs().max();
            assert!(res <= 1e-10, "form residual {res}");
            assert!(base.transformed(&g, &tol).unwrap().same_span(&x, &tol));
            let back = x.transformed(&g.clone().try_inverse().unwrap(), &tol).unwrap();
            assert!(back.same_span(&base, &tol));
        }
        let g0 = normalize_to_base(&d, &base).unwrap();
        assert!(base.transformed(&g0, &tol).unwrap().same_span(&base, &tol));
    }

    #[test]
    fn rank_one_examples() {
        let d = SymmetricDomain::standard(1, 2).unwrap();
        let x0 = d.base_point();
        let y = graph(&d, 2, 1, &[0.5, 0.0]);
        let rp = relative_position(&d, &x0, &y).unwrap();
        assert!((rp.sigmas[0] - 0.5).abs() < 1e-15);
        assert!((kobayashi_closed_form(&d, &x0, &y).unwrap() - 3f64.ln()).abs() < 1e-14);
        for k in 1..10 {
            let t = 0.1 * k as f64;
            let y = graph(&d, 2, 1, &[t, 0.0]);
            let k = kobayashi_closed_form(&d, &x0, &y).unwrap();
            assert!((k - ((1.0 + t) / (1.0 - t)).ln()).abs() <= 1e-12);
        }
        assert_eq!(kobayashi_closed_form(&d, &y, &y).unwrap(), 0.0);
    }

    #[test]
    fn log_five_and_its_chain() {
        let d = SymmetricDomain::standard(2, 2).unwrap();
        let x0 = d.base_point();
        let y = graph(&d, 2, 2, &[0.5, 0.0, 0.0, 0.25]);
        let rp = relative_position(&d, &x0, &y).unwrap();
        assert!((rp.sigmas[0] - 0.5).abs() < 1e-15 && (rp.sigmas[1] - 0.25).abs() < 1e-15);
        let k = kobayashi_closed_form(&d, &x0, &y).unwrap();
        assert!((k - 5f64.ln()).abs() <= 1e-12);
        let chain = geodesic_r_chain(&d, &x0, &y).unwrap();
        assert_eq!(chain.segments(), 2);
        assert!((chain.segment_lengths[0] - 3f64.ln()).abs() < 1e-10);
        assert!((chain.segment_lengths[1] - (5.0f64 / 3.0).ln()).abs() < 1e-10);
        for z in &chain.points {
            assert!(d.contains(z).unwrap());
        }
        let same = geodesic_r_chain(&d, &y, &y).unwrap();
        assert_eq!((same.points.len(), same.total()), (1, 0.0));
    }

    #[test]
    fn near_boundary_is_rejected() {
        let d = SymmetricDomain::standard(1, 1).unwrap();
        let x0 = d.base_point();
        // inside by the membership test, but σ is within the margin of 1
        let y = graph(&d, 1, 1, &[1.0 - 1e-13]);
        if d.contains(&y).unwrap() {
            assert!(matches!(relative_position(&d, &x0, &y), Err(Error::BoundaryProximity { .. })));
        }
        let out = graph(&d, 1, 1, &[1.5]);
        assert!(matches!(relative_position(&d, &x0, &out), Err(Error::NotInDomain { .. })));
    }

    #[test]
    fn flat_distances_are_l1() {
        let d = SymmetricDomain::standard(2, 2).unwrap();
        for &big in &[2.0f64, 4.0, 8.0, 16.0] {
            let s = (big / 2.0).tanh();
            let x = graph(&d, 2, 2, &[0.0; 4]);
            let y = graph(&d, 2, 2, &[s, 0.0, 0.0, s]);
            let z = graph(&d, 2, 2, &[s, 0.0, 0.0, 0.0]);
            let w = graph(&d, 2, 2, &[0.0, 0.0, 0.0, s]);
            let k = |a: &Plane, b: &Plane| kobayashi_closed_form(&d, a, b).unwrap();
            assert!((k(&x, &y) - 2.0 * big).abs() < 1e-9 * big);
            assert!((k(&z, &w) - 2.0 * big).abs() < 1e-9 * big, "{}", k(&z, &w) - 2.0 * big);
            assert!((k(&x, &z) - big).abs() < 1e-9 * big);
            assert!((k(&y, &w) - big).abs() < 1e-9 * big);
        }
    }

    #[test]
    fn graph_chart_svd_agrees_with_invariant_eigenvalues() {
        let form = DMatrix::from_row_slice(5, 5, &[
            1.0, 0.2, 0.0, 0.0, 0.1, 0.2, 2.0, 0.0, 0.3, 0.0, 0.0, 0.0, -1.0, 0.1, 0.0, 0.0, 0.3, 0.1, -2.0, 0.0, 0.1, 0.0,
            0.0, 0.0, -0.5,
        ]);
        let d = SymmetricDomain::new(form, Tolerance::default()).unwrap();
        let mut rng = SplitRng::new(17);
        for _ in 0..50 {
            let x = d.sample_interior(&mut rng, 2.0).unwrap();
            let y = d.sample_interior(&mut rng, 2.0).unwrap();
            let (_, b) = relative_graph(&d, &x, &y).unwrap();
            let direct = singular_values(&b);
            let rp = relative_position(&d, &x, &y).unwrap();
            for (a, e) in direct.iter().zip(&rp.sigmas) {
                assert!((a - e).abs() < 1e-10, "{direct:?} vs {:?}", rp.sigmas);
            }
        }
    }

    #[test]
    fn standard_form_has_standard_frame() {
        let d = SymmetricDomain::standard(2, 3).unwrap();
        let f = d.frame();
        assert!((f.transpose() * d.form() * f - j_form(2, 3)).abs().max() < 1e-15);
    }

    #[test]
    fn monotone_under_inclusion() {
        // scaling the negative part shrinks the positive cone
        let big = SymmetricDomain::standard(2, 2).unwrap();
        let small = SymmetricDomain::new(
            DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 1.0, -2.0, -2.0])),
            Tolerance::default(),
        )
        .unwrap();
        let mut rng = SplitRng::new(5);
        for _ in 0..50 {
            let x = small.sample_interior(&mut rng, 2.0).unwrap();
            let y = small.sample_interior(&mut rng, 2.0).unwrap();
            assert!(big.contains(&x).unwrap() && big.contains(&y).unwrap());
            let kb = kobayashi_closed_form(&big, &x, &y).unwrap();
            let ks = kobayashi_closed_form(&small, &x, &y).unwrap();
            assert!(kb <= ks + 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn invariance_symmetry_and_chain(seed in any::<u64>(), pq in 0usize..4) {
            let (p, q) = [(1, 2), (2, 2), (2, 3), (3, 2)][pq];
            let d = SymmetricDomain::standard(p, q).unwrap();
            let tol = Tolerance::default();
            let mut rng = SplitRng::new(seed);
            let x = d.sample_interior(&mut rng, 2.0).unwrap();
            let y = d.sample_interior(&mut rng, 2.0).unwrap();
            let k = kobayashi_closed_form(&d, &x, &y).unwrap();
            prop_assert_eq!(k, kobayashi_closed_form(&d, &y, &x).unwrap());
            let g = random_isometry(&d, &mut rng);
            let gx = x.transformed(&g, &tol).unwrap();
            let gy = y.transformed(&g, &tol).unwrap();
            prop_assert!((kobayashi_closed_form(&d, &gx, &gy).unwrap() - k).abs() <= 1e-8);
            let chain = geodesic_r_chain(&d, &x, &y).unwrap();
            prop_assert!((chain.total() - k).abs() <= 1e-10, "chain {} vs {}", chain.total(), k);
            let rp = relative_position(&d, &x, &y).unwrap();
            let nonzero = rp.sigmas.iter().filter(|s| **s > CHAIN_SIGMA_FLOOR).count();
            prop_assert_eq!(chain.segments(), nonzero);
            prop_assert_eq!(nonzero, arithmetic_distance(d.context(), &x, &y).unwrap());
            for w in chain.points.windows(2) {
                prop_assert!(arithmetic_distance(d.context(), &w[0], &w[1]).unwrap() <= 1);
            }
        }

        #[test]
        fn triangle_inequality(seed in any::<u64>()) {
            let d = SymmetricDomain::standard(2, 3).unwrap();
            let mut rng = SplitRng::new(seed);
            let pts: Vec<Plane> = (0..3).map(|_| d.sample_interior(&mut rng, 3.0).unwrap()).collect();
            let k = |a: usize, b: usize| kobayashi_closed_form(&d, &pts[a], &pts[b]).unwrap();
            prop_assert!(k(0, 2) <= k(0, 1) + k(1, 2) + 1e-8);
        }
    }
}
