#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use grassmetric::domains::{Domain, SymmetricDomain};
use grassmetric::grassmann::{arithmetic_distance, intersect_dim, plucker, GrassmannContext};
use grassmetric::metrics::{kobayashi_closed_form, relative_position};
use grassmetric::numerics::{rank_with_tol, Tolerance};
use grassmetric::rng::SplitRng;
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn rational_rank_basics() {
    assert_eq!(rational_rank(&[vec![1, 2], vec![2, 4]]), 1);
    assert_eq!(rational_rank(&[vec![0, 0], vec![0, 0]]), 0);
    assert_eq!(rational_rank(&[vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 2]]), 2);
    // nearly singular in floating point, exactly regular over ℚ
    let big = 1 << 26;
    assert_eq!(rational_rank(&[vec![big, big + 1], vec![big - 1, big]]), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn float_rank_matches_rational(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6, drop in 0usize..3) {
        let mut rng = SplitRng::new(seed);
        let mut m: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| rng.below(9) as i64 - 4).collect()).collect();
        // force dependent rows
        for i in 0..drop.min(rows.saturating_sub(1)) {
            let k = rng.below(3) as i64 + 1;
            m[rows - 1 - i] = m[0].iter().map(|v| v * k).collect();
        }
        let f = DMatrix::from_fn(rows, cols, |i, j| m[i][j] as f64);
        prop_assert_eq!(rank_with_tol(&f, &Tolerance::default()), rational_rank(&m));
    }

    #[test]
    fn intersection_matches_rational(seed in any::<u64>(), pq in prop::sample::select(vec![(1usize, 2usize), (2, 2), (2, 3), (3, 2), (3, 3)])) {
        let (p, q) = pq;
        let mut rng = SplitRng::new(seed);
        let shared = rng.below(p + 1);
        let (xc, yc) = integer_pair(&mut rng, p + q, p, shared);
        prop_assume!(rational_rank(&rows_of(&xc)) == p && rational_rank(&rows_of(&yc)) == p);
        let (x, y) = (plane_from_int(&xc).unwrap(), plane_from_int(&yc).unwrap());
        let mut both = xc.clone();
        both.extend(yc);
        let exact = 2 * p - rational_rank(&rows_of(&both));
        let ctx = GrassmannContext::new(p, q).unwrap();
        prop_assert_eq!(intersect_dim(&ctx, &x, &y).unwrap(), exact);
        prop_assert_eq!(arithmetic_distance(&ctx, &x, &y).unwrap(), p - exact);
    }

    #[test]
    fn plucker_vector_is_basis_independent(seed in any::<u64>()) {
        let mut rng = SplitRng::new(seed);
        let ctx = GrassmannContext::new(2, 3).unwrap();
        let (xc, _) = integer_pair(&mut rng, 5, 2, 0);
        prop_assume!(rational_rank(&rows_of(&xc)) == 2);
        let x = plane_from_int(&xc).unwrap();
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, -1.0, 3.0]);
        let x2 = grassmetric::grassmann::Plane::from_basis(x.basis() * g, &Tolerance::default()).unwrap();
        let a = plucker(&ctx, &x).unwrap();
        let b = plucker(&ctx, &x2).unwrap();
        prop_assert!(a.projective_distance(&b) < 1e-12);
    }

    #[test]
    fn closed_form_matches_diagonal_sigmas(s1 in 0.0f64..0.95, s2 in 0.0f64..0.95, seed in any::<u64>()) {
        let d = SymmetricDomain::standard(2, 3).unwrap();
        let tol = Tolerance::default();
        let mut rng = SplitRng::new(seed);
        let g = random_isometry(&d, &mut rng);
        let x = d.base_point().transformed(&g, &tol).unwrap();
        let y = diagonal_graph(&d, &[s1, s2]).transformed(&g, &tol).unwrap();
        let expect = ((1.0 + s1) / (1.0 - s1)).ln() + ((1.0 + s2) / (1.0 - s2)).ln();
        let k = kobayashi_closed_form(&d, &x, &y).unwrap();
        prop_assert!((k - expect).abs() < 1e-9 * (1.0 + expect), "{} vs {}", k, expect);
        let rp = relative_position(&d, &x, &y).unwrap();
        let (hi, lo) = if s1 >= s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!((rp.sigmas[0] - hi).abs() < 1e-9 && (rp.sigmas[1] - lo).abs() < 1e-9);
    }
}

#[test]
fn isometries_preserve_the_form() {
    let d = SymmetricDomain::standard(2, 3).unwrap();
    let phi = signature_form(2, 3);
    let mut rng = SplitRng::new(5);
    for _ in 0..20 {
        let g = random_isometry(&d, &mut rng);
        assert!((g.transpose() * &phi * &g - &phi).abs().max() < 1e-10);
        assert!(d.contains(&d.base_point().transformed(&g, &Tolerance::default()).unwrap()).unwrap());
    }
}
