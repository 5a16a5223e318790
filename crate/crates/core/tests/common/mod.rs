#![allow(dead_code)]

use grassmetric::domains::{Domain, SymmetricDomain};
use grassmetric::grassmann::Plane;
use grassmetric::numerics::Tolerance;
use grassmetric::rng::SplitRng;
use nalgebra::{DMatrix, DVector};
use num::{BigInt, BigRational, One, Zero};

/// Rank of an integer matrix by Gaussian elimination over ℚ.
pub fn rational_rank(m: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
        .collect();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = BigRational::one() / a[rank][c].clone();
        for r in 0..rows {
            if r != rank && !a[r][c].is_zero() {
                let f = a[r][c].clone() * &inv;
                for k in c..cols {
                    let sub = f.clone() * &a[rank][k];
                    a[r][k] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Two integer `n × p` bases whose spans meet in dimension at least `shared`;
/// returned column-major as lists of columns.
pub fn integer_pair(rng: &mut SplitRng, n: usize, p: usize, shared: usize) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let col = |rng: &mut SplitRng| -> Vec<i64> { (0..n).map(|_| rng.below(7) as i64 - 3).collect() };
    let common: Vec<Vec<i64>> = (0..shared).map(|_| col(rng)).collect();
    let mut x = common.clone();
    let mut y = common;
    while x.len() < p {
        x.push(col(rng));
    }
    while y.len() < p {
        y.push(col(rng));
    }
    // mix the shared columns into y so the bases differ
    for j in shared..p {
        for i in 0..shared {
            let k = rng.below(5) as i64 - 2;
            let add: Vec<i64> = y[i].iter().map(|v| v * k).collect();
            for (t, a) in y[j].iter_mut().zip(add) {
                *t += a;
            }
        }
    }
    (x, y)
}

pub fn plane_from_int(cols: &[Vec<i64>]) -> Option<Plane> {
    let n = cols[0].len();
    let f: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().map(|&v| v as f64).collect()).collect();
    Plane::from_columns(n, &f, &Tolerance::default()).ok()
}

/// Rows of the `n × (cols)` matrix with the given columns.
pub fn rows_of(cols: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = cols[0].len();
    (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// Random element of the orthogonal group of the domain's form, built from
/// block rotations and hyperbolic boosts in the standard frame.
pub fn random_isometry(d: &SymmetricDomain, rng: &mut SplitRng) -> DMatrix<f64> {
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

/// Graph point with the given singular values on the diagonal.
pub fn diagonal_graph(d: &SymmetricDomain, sigmas: &[f64]) -> Plane {
    let (p, q) = (d.context().p, d.context().q);
    let mut c = DMatrix::zeros(q, p);
    for (i, s) in sigmas.iter().enumerate() {
        c[(i, i)] = *s;
    }
    d.graph_point(&c).unwrap()
}

pub fn signature_form(p: usize, q: usize) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_fn(p + q, |i, _| if i < p { 1.0 } else { -1.0 }))
}
