//! Numerical primitives: tolerances, rank decisions, root bracketing, a
//! Nelder–Mead minimizer, and a few dense linear-algebra helpers.

use std::cell::Cell;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Singular values below `rank_rel * sigma_max` count as zero.
    pub rank_rel: f64,
    pub geom_abs: f64,
    pub metric_abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rel: 1e-10,
            geom_abs: 1e-12,
            metric_abs: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, geom_abs: f64, metric_abs: f64) -> Result<Self> {
        let all_positive = [rank_rel, geom_abs, metric_abs]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !all_positive || rank_rel > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "tolerances must be positive with rank_rel <= 1e-6 (got {rank_rel}, {geom_abs}, {metric_abs})"
            )));
        }
        Ok(Tolerance {
            rank_rel,
            geom_abs,
            metric_abs,
        })
    }
}

/// Numerical rank: singular values above `rank_rel` times the largest one.
pub fn rank_with_tol(m: &DMatrix<f64>, tol: &Tolerance) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = singular_values(m);
    let smax = sv[0];
    if smax <= 0.0 || !smax.is_finite() {
        return 0;
    }
    sv.iter().filter(|s| **s > tol.rank_rel * smax).count()
}

/// Thin singular value decomposition `m = u · diag(s) · vᵀ`, `s` nonincreasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

fn augmented_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    let mut a = DMatrix::zeros(r + c, r + c);
    a.view_mut((0, r), (r, c)).copy_from(m);
    a.view_mut((r, 0), (c, r)).copy_from(&m.transpose());
    let e = a.symmetric_eigen();
    let mut idx: Vec<usize> = (0..r + c).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[j].total_cmp(&e.eigenvalues[i]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(r + c, r + c, |row, col| e.eigenvectors[(row, idx[col])]);
    (vals, vecs)
}

/// Fills columns `filled..` of `basis` with an orthonormal completion of the
/// first `filled` (orthonormal) columns, by Gram–Schmidt on coordinate vectors.
fn complete_orthonormal(basis: &mut DMatrix<f64>, mut filled: usize) {
    let (dim, k) = basis.shape();
    for e in 0..dim {
        if filled == k {
            return;
        }
        let mut col = nalgebra::DVector::<f64>::zeros(dim);
        col[e] = 1.0;
        for _ in 0..2 {
            for j in 0..filled {
                let d = basis.column(j).dot(&col);
                col -= basis.column(j) * d;
            }
        }
        let nrm = col.norm();
        if nrm > 1e-3 {
            basis.set_column(filled, &(col / nrm));
            filled += 1;
        }
    }
}

/// Singular values in nonincreasing order.
///
/// Computed from the symmetric eigenproblem of `[[0, m], [mᵀ, 0]]`, whose
/// eigenvalues are `±s_i` (plus zeros).
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Vec::new();
    }
    let (vals, _) = augmented_eigen(m);
    vals.into_iter().take(k).map(|v| v.max(0.0)).collect()
}

/// Thin SVD through the same symmetric eigenproblem. The nalgebra SVD can
/// return inaccurate singular vectors for rank-deficient input, so it is not
/// used anywhere in this crate.
pub fn svd(m: &DMatrix<f64>) -> Svd {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Svd {
            u: DMatrix::zeros(r, 0),
            s: Vec::new(),
            v: DMatrix::zeros(c, 0),
        };
    }
    let (vals, vecs) = augmented_eigen(m);
    let smax = vals[0].max(0.0);
    let cutoff = 1e-13 * smax.max(f64::MIN_POSITIVE);
    let mut s = Vec::with_capacity(k);
    let mut u = DMatrix::zeros(r, k);
    let mut v = DMatrix::zeros(c, k);
    let mut kept = 0;
    for j in 0..k {
        if vals[j] <= cutoff {
            break;
        }
        // eigenvectors of +s_j are (u_j; v_j)/√2
        let uj = vecs.view((0, j), (r, 1)).into_owned();
        let vj = vecs.view((r, j), (c, 1)).into_owned();
        let (nu, nv) = (uj.norm(), vj.norm());
        if nu == 0.0 || nv == 0.0 {
            break;
        }
        u.set_column(j, &(uj / nu).column(0));
        v.set_column(j, &(vj / nv).column(0));
        s.push(vals[j]);
        kept += 1;
    }
    complete_orthonormal(&mut u, kept);
    complete_orthonormal(&mut v, kept);
    s.resize(k, 0.0);
    Svd { u, s, v }
}

/// Bisection root of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `geom_abs` or `f` vanishes exactly,
/// so the returned point satisfies the bracket-width guarantee.
pub fn bracketed_root<F>(mut f: F, lo: f64, hi: f64, tol: &Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..200 {
        if b - a <= tol.geom_abs {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Bisection on a sign change with a fixed iteration budget, returning the
/// final bracket `(inside, outside)` where `inside` keeps the sign of `f(inside)`.
pub(crate) fn bisect_bracket<F>(mut f: F, inside: f64, outside: f64, iterations: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (inside, outside);
    let positive = f(a) > 0.0;
    for _ in 0..iterations {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if (f(mid) > 0.0) == positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    /// Total number of objective evaluations across all restarts.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    pub initial_step: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            budget: 500,
            restarts: 3,
            seed: 0,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Derivative-free minimization: Nelder–Mead with seeded random restarts
/// around the incumbent. Non-finite objective values count as `+inf`.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &MinimizeOptions) -> MinimizeResult
where
    F: FnMut(&[f64]) -> f64,
{
    let evals = Cell::new(0usize);
    let budget = opts.budget.max(1);
    let mut eval = |x: &[f64]| -> f64 {
        // hard cap: once the budget is spent every probe reads as +inf
        if evals.get() >= budget {
            return f64::INFINITY;
        }
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best_x = x0.to_vec();
    let mut best_v = eval(x0);
    let dim = x0.len();
    if dim == 0 || opts.budget <= 1 {
        return MinimizeResult {
            x: best_x,
            value: best_v,
            evaluations: evals.get(),
        };
    }

    let mut rng = SplitRng::new(opts.seed).split(0x6e6d);
    for run in 0..=opts.restarts {
        if evals.get() >= opts.budget {
            break;
        }
        let step = if run == 0 {
            opts.initial_step
        } else {
            opts.initial_step * rng.uniform(0.5, 1.5)
        };
        // first run uses the coordinate simplex, restarts a random rotation of it
        let dirs: DMatrix<f64> = if run == 0 {
            DMatrix::identity(dim, dim)
        } else {
            rng.orthogonal(dim)
        };
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        let mut values: Vec<f64> = Vec::with_capacity(dim + 1);
        simplex.push(best_x.clone());
        values.push(best_v);
        for j in 0..dim {
            if evals.get() >= opts.budget {
                break;
            }
            let mut v = best_x.clone();
            for (i, vi) in v.iter_mut().enumerate() {
                let scale = if best_x[i].abs() > 1.0 { best_x[i].abs() } else { 1.0 };
                *vi += step * scale * dirs[(i, j)];
            }
            let fv = eval(&v);
            simplex.push(v);
            values.push(fv);
        }
        if simplex.len() < dim + 1 {
            break;
        }
        nelder_mead_run(&mut simplex, &mut values, &mut eval, &|| evals.get(), opts.budget);
        for (x, v) in simplex.iter().zip(values.iter()) {
            if *v < best_v {
                best_v = *v;
                best_x = x.clone();
            }
        }
    }

    MinimizeResult {
        x: best_x,
        value: best_v,
        evaluations: evals.get(),
    }
}

fn nelder_mead_run<F, C>(
    simplex: &mut [Vec<f64>],
    values: &mut [f64],
    f: &mut F,
    count: &C,
    budget: usize,
) where
    F: FnMut(&[f64]) -> f64,
    C: Fn() -> usize,
{
    let n = simplex.len() - 1;
    let (alpha, gamma, rho, shrink) = (1.0, 2.0, 0.5, 0.5);
    let mut order: Vec<usize> = (0..=n).collect();

    while count() < budget {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];

        let spread = values[worst] - values[best];
        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (spread.is_finite() && spread <= 1e-15 * (1.0 + values[best].abs())) && diameter <= 1e-12 {
            break;
        }
        if diameter <= 1e-14 {
            break;
        }

        let mut centroid = vec![0.0; simplex[0].len()];
        for &i in order.iter().take(n) {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = f(&xr);
        if fr < values[best] {
            let xe = along(gamma);
            let fe = f(&xe);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[worst] {
            let xc = along(rho);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < values[worst].min(fr) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &i in order.iter().skip(1) {
            if count() >= budget {
                return;
            }
            let v: Vec<f64> = anchor
                .iter()
                .zip(&simplex[i])
                .map(|(a, x)| a + shrink * (x - a))
                .collect();
            values[i] = f(&v);
            simplex[i] = v;
        }
    }
}

/// Orthonormal basis of the column span of `m` (column-pivoted QR), or
/// `None` when the columns are numerically dependent.
pub fn orthonormal_columns(m: &DMatrix<f64>, tol: &Tolerance) -> Option<DMatrix<f64>> {
    let k = m.ncols();
    if k == 0 {
        return Some(DMatrix::zeros(m.nrows(), 0));
    }
    if k > m.nrows() || rank_with_tol(m, tol) < k {
        return None;
    }
    let qr = m.clone().col_piv_qr();
    let q = qr.q();
    Some(q.columns(0, k).into_owned())
}

/// Orthonormal basis of the column span of `m`, of dimension equal to its
/// numerical rank (column-pivoted QR; only singular values come from the SVD).
pub fn column_space(m: &DMatrix<f64>, tol: &Tolerance) -> DMatrix<f64> {
    let n = m.nrows();
    let r = rank_with_tol(m, tol);
    if r == 0 {
        return DMatrix::zeros(n, 0);
    }
    let q = m.clone().col_piv_qr().q();
    q.columns(0, r).into_owned()
}

/// Orthonormal basis of the kernel of `m` (as columns): the orthogonal
/// complement of the row space.
pub fn null_space(m: &DMatrix<f64>, tol: &Tolerance) -> DMatrix<f64> {
    let cols = m.ncols();
    let r = rank_with_tol(m, tol);
    if r == 0 {
        return DMatrix::identity(cols, cols);
    }
    // pad so that Q is square
    let mut mt = DMatrix::zeros(cols, m.nrows().max(cols));
    mt.columns_mut(0, m.nrows()).copy_from(&m.transpose());
    let q = mt.col_piv_qr().q();
    q.columns(r, cols - r).into_owned()
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `m^{-1/2}` for a symmetric positive definite matrix.
pub fn spd_inv_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Some(DMatrix::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|l| *l <= 0.0) {
        return None;
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Some(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

pub(crate) fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut m = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_with_tol(&DMatrix::identity(3, 3), &tol()), 3);
        assert_eq!(rank_with_tol(&DMatrix::zeros(2, 4), &tol()), 0);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        assert_eq!(rank_with_tol(&m, &tol()), 1);
    }

    #[test]
    fn column_space_of_rank_one_block() {
        // U-only SVD returned a wrong left vector for this matrix
        let m = DMatrix::from_row_slice(
            4,
            2,
            &[
                0.006707549401349766, 0.07116779273265707,
                0.08361480047727965, 0.8871616791300888,
                -0.024501305565583165, -0.25996138557250287,
                0.034177027799007775, 0.3626217989730463,
            ],
        );
        let c = column_space(&m, &tol());
        assert_eq!(c.ncols(), 1);
        assert!((&m - &c * (c.transpose() * &m)).norm() < 1e-12);
        let d = svd(&m);
        let rebuilt = &d.u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.s.clone())) * d.v.transpose();
        assert!((rebuilt - &m).norm() < 1e-12);
    }

    fn check_svd(m: &DMatrix<f64>) -> std::result::Result<(), String> {
        let d = svd(m);
        let k = m.nrows().min(m.ncols());
        let sigma = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.s.clone()));
        let err = (&d.u * sigma * d.v.transpose() - m).norm();
        let ortho_u = (d.u.transpose() * &d.u - DMatrix::identity(k, k)).norm();
        let ortho_v = (d.v.transpose() * &d.v - DMatrix::identity(k, k)).norm();
        let sorted = d.s.windows(2).all(|w| w[0] >= w[1]);
        if err < 1e-12 && ortho_u < 1e-12 && ortho_v < 1e-12 && sorted {
            Ok(())
        } else {
            Err(format!("err {err:e}, ortho {ortho_u:e} {ortho_v:e}, s {:?}", d.s))
        }
    }

    #[test]
    fn svd_edge_cases() {
        check_svd(&DMatrix::zeros(3, 2)).unwrap();
        check_svd(&DMatrix::identity(3, 3)).unwrap();
        check_svd(&DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0])).unwrap();
        assert!(svd(&DMatrix::zeros(0, 3)).s.is_empty());
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(1e-10, 1e-12, 1e-8).is_ok());
        assert!(Tolerance::new(1e-3, 1e-12, 1e-8).is_err());
        assert!(Tolerance::new(1e-10, 0.0, 1e-8).is_err());
    }

    #[test]
    fn root_examples() {
        let t = tol();
        let r = bracketed_root(|x| x - 0.5, 0.0, 1.0, &t).unwrap();
        assert!((r - 0.5).abs() <= t.geom_abs);
        let r = bracketed_root(|x| x * x - 2.0, 0.0, 2.0, &t).unwrap();
        assert!((r - 2f64.sqrt()).abs() <= t.geom_abs);
        let r = bracketed_root(|x| x, -1.0, 1.0, &t).unwrap();
        assert!(r.abs() <= t.geom_abs);
    }

    #[test]
    fn root_requires_sign_change() {
        let err = bracketed_root(|x| x * x + 1.0, -1.0, 1.0, &tol()).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
    }

    #[test]
    fn minimize_examples() {
        let opts = MinimizeOptions::default();
        let r = minimize(|x| x.iter().map(|v| v * v).sum(), &[1.0, 1.0], &opts);
        assert!(r.value <= 1e-6, "{}", r.value);
        assert!(r.evaluations <= 500);

        let r = minimize(|x| x[0].abs() + x[1].abs(), &[0.3, -0.2], &opts);
        assert!(r.value <= 1e-4, "{}", r.value);

        let r = minimize(|_| 5.0, &[0.1, 0.2, 0.3], &opts);
        assert_eq!(r.value, 5.0);
    }

    #[test]
    fn minimize_is_deterministic() {
        let opts = MinimizeOptions {
            seed: 99,
            ..Default::default()
        };
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + x[0] * x[0]).powi(2);
        let a = minimize(f, &[0.0, 0.0], &opts);
        let b = minimize(f, &[0.0, 0.0], &opts);
        assert_eq!(a, b);
    }

    #[test]
    fn null_space_and_column_space() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let ns = null_space(&m, &tol());
        assert_eq!(ns.ncols(), 1);
        assert!((ns[(2, 0)].abs() - 1.0).abs() < 1e-12);
        let cs = column_space(&m.transpose(), &tol());
        assert_eq!(cs.ncols(), 2);
    }

    #[test]
    fn inverse_sqrt() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 9.0]);
        let s = spd_inv_sqrt(&m).unwrap();
        assert!((s[(0, 0)] - 0.5).abs() < 1e-14);
        assert!((s[(1, 1)] - 1.0 / 3.0).abs() < 1e-14);
        assert!(spd_inv_sqrt(&(-m)).is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {

            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn svd_reconstructs_low_rank(seed in any::<u64>(), r in 1usize..6, c in 1usize..6, rank in 0usize..4) {
                let mut rng = SplitRng::new(seed);
                let m = rng.normal_matrix(r, rank) * rng.normal_matrix(rank, c);
                prop_assert!(check_svd(&m).is_ok(), "{:?}", check_svd(&m));
            }

            #[test]
            fn rank_is_transpose_invariant(rows in 1usize..6, cols in 1usize..6, rank in 0usize..4, seed in any::<u64>()) {
                let mut rng = SplitRng::new(seed);
                let r = rank.min(rows).min(cols);
                let m = rng.normal_matrix(rows, r) * rng.normal_matrix(r, cols);
                prop_assert_eq!(rank_with_tol(&m, &tol()), rank_with_tol(&m.transpose(), &tol()));
            }

            #[test]
            fn root_stays_in_bracket(c in -0.99f64..0.99, lo in -3.0f64..-1.0, hi in 1.0f64..3.0) {
                let r = bracketed_root(|x| x - c, lo, hi, &tol()).unwrap();
                prop_assert!(r >= lo && r <= hi);
            }

            #[test]
            fn minimize_never_worse_than_start(a in -2.0f64..2.0, b in -2.0f64..2.0, seed in any::<u64>()) {
                let f = |x: &[f64]| (x[0] * x[1]).sin() + (x[0] - x[1]).abs();
                let opts = MinimizeOptions { budget: 80, seed, ..Default::default() };
                let r = minimize(f, &[a, b], &opts);
                prop_assert!(r.value <= f(&[a, b]));
            }
        }
    }
}
