use freeprod::freegroup::*;
use freeprod::linalg::{c, real, sparse_max_abs_diff, to_dense};
use freeprod::schur::cb_norm;
use freeprod::{Error, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn e(i: usize, j: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(i, j)] = real(1.0);
    m
}

#[test]
fn lambda_is_a_partial_permutation() {
    let ball = GroupBall::new(2, 4).unwrap();
    for w in &ball.words()[..ball.size(2)] {
        let m = to_dense(&lambda_rect(&ball, w, 2).unwrap());
        let gram = m.adjoint() * &m;
        assert_eq!(gram, DMatrix::identity(gram.nrows(), gram.ncols()));
        assert!(m.iter().all(|z| *z == real(0.0) || *z == real(1.0)));
    }
}

#[test]
fn rectangles_compose_like_the_group() {
    let ball = GroupBall::new(2, 5).unwrap();
    let pairs: [(&[i32], &[i32]); 4] = [(&[1], &[2]), (&[1, 2], &[-2]), (&[-1], &[1, 1]), (&[2, -1], &[1, -2])];
    for (v, w) in pairs {
        let inner = lambda_rect(&ball, w, 1).unwrap();
        let outer = lambda_rect(&ball, v, 1 + w.len()).unwrap();
        let product = &outer * &inner;
        let vw = multiply(v, w);
        let direct = lambda_rect(&ball, &vw, 1).unwrap();
        let padded = to_dense(&direct);
        let dense = to_dense(&product);
        for j in 0..dense.ncols() {
            for i in 0..dense.nrows() {
                let expected = if i < padded.nrows() { padded[(i, j)] } else { real(0.0) };
                assert_eq!(dense[(i, j)], expected);
            }
        }
    }
    let g = lambda_rect(&ball, &[1], 0).unwrap();
    let col: Vec<usize> = g.col(0).row_indices().to_vec();
    assert_eq!(col, vec![ball.index_of(&[1]).unwrap()]);
}

#[test]
fn haagerup_fixtures() {
    let ball = GroupBall::new(2, 9).unwrap();
    let r = haagerup_check(&ball, &[(vec![1], real(1.0))], 4).unwrap();
    assert!(r.passed());
    assert!((r.truncated_norm - 1.0).abs() < 1e-12 && r.constant == 2.0);

    let pair = [(vec![1], real(1.0)), (vec![2], real(1.0))];
    let r = haagerup_check(&ball, &pair, 8).unwrap();
    assert!(r.passed());
    assert!(r.truncated_norm >= 1.9 && r.truncated_norm <= 2.0 * SQRT2 + 1e-8);
    assert!((r.truncated_norm - 2.0).abs() <= 0.1);
    assert_eq!(r.vacuum_norm, r.l2_norm);
    assert!((r.l2_norm - SQRT2).abs() < 1e-15);

    let merged = haagerup_check(&ball, &[(vec![1], real(1.0)), (vec![1, 2, -2], real(1.0))], 2).unwrap();
    assert!((merged.l2_norm - 2.0).abs() < 1e-15);
    assert!((merged.truncated_norm - 2.0).abs() < 1e-12);

    assert!(matches!(
        haagerup_check(&ball, &[(vec![1], real(1.0)), (vec![1, 2], real(1.0))], 2),
        Err(Error::BadParameter(_))
    ));
}

#[test]
fn random_haagerup_and_leinert() {
    let ball = GroupBall::new(2, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let two: Vec<Vec<i32>> = ball.words().iter().filter(|w| w.len() == 2).cloned().collect();
    for _ in 0..5 {
        let coeffs: Vec<(Vec<i32>, C64)> = two
            .iter()
            .map(|w| (w.clone(), c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)))
            .collect();
        let r = haagerup_check(&ball, &coeffs, 6).unwrap();
        assert!(r.passed() && r.constant == 3.0);
        assert!((r.vacuum_norm - r.l2_norm).abs() <= 1e-15 * r.l2_norm.max(1.0) * 8.0);
    }
    let r = leinert_check(&ball, &[e(0, 0), e(1, 0)], 4).unwrap();
    assert!((r.column - SQRT2).abs() < 1e-12);
    assert!((r.row - 1.0).abs() < 1e-12);
    assert!(r.passed());
    let ones = [
        DMatrix::from_element(1, 1, real(1.0)),
        DMatrix::from_element(1, 1, real(1.0)),
    ];
    let r = leinert_check(&ball, &ones, 7).unwrap();
    assert!((r.bound - 2.0 * SQRT2).abs() < 1e-12);
    assert!(r.truncated_norm > 1.9 && r.truncated_norm <= 2.0);
    let single = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.5), real(2.0), real(0.0), c(0.0, -1.0)]);
    let r = leinert_check(&ball, std::slice::from_ref(&single), 3).unwrap();
    let exact = single.clone().svd(false, false).singular_values.max();
    assert!((r.truncated_norm - exact).abs() < 1e-10);
    assert!(r.passed());
}

#[test]
fn radial_symbols() {
    let ball = GroupBall::new(2, 3).unwrap();
    let ones = radial_symbol(&ball, 2, |_| 1.0).unwrap();
    assert!(ones.matrix().iter().all(|z| *z == real(1.0)));
    let id = radial_symbol(&ball, 2, |n| if n == 0 { 1.0 } else { 0.0 }).unwrap();
    assert_eq!(id.matrix(), &DMatrix::identity(ball.size(2), ball.size(2)));
    for r in [0.3f64, 0.7] {
        for radius in 1..=3 {
            let a = radial_symbol(&ball, radius, |n| r.powi(n as i32)).unwrap();
            let cb = cb_norm(&a, 1e-7).unwrap();
            assert!(cb.upper <= 1.0 + 1e-6, "r={r} R={radius}: {}", cb.upper);
            assert!(cb.lower >= 1.0 - 1e-6);
        }
    }
    assert!(matches!(
        radial_symbol(&ball, 4, |_| 1.0),
        Err(Error::CapacityExceeded { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_is_a_group_law(a in prop::collection::vec(prop::sample::select(vec![-2, -1, 1, 2]), 0..6),
                                b in prop::collection::vec(prop::sample::select(vec![-2, -1, 1, 2]), 0..6)) {
        let ab = multiply(&a, &b);
        prop_assert_eq!(reduce(&ab), ab.clone());
        prop_assert_eq!(multiply(&ab, &inverse(&b)), reduce(&a));
        prop_assert_eq!(inverse(&ab), multiply(&inverse(&b), &inverse(&a)));
    }

    #[test]
    fn lambda_sum_is_linear(s in 0u64..1000) {
        let ball = GroupBall::new(2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let words: Vec<Vec<i32>> = ball.words()[1..5].to_vec();
        let coeffs: Vec<(Vec<i32>, C64)> = words.iter().map(|w| (w.clone(), c(rng.gen(), rng.gen()))).collect();
        let total = lambda_sum(&ball, &coeffs, 2).unwrap();
        let mut acc = lambda_sum(&ball, &coeffs[..1], 2).unwrap();
        for k in 1..coeffs.len() {
            acc = acc + lambda_sum(&ball, &coeffs[k..=k], 2).unwrap();
        }
        prop_assert!(sparse_max_abs_diff(&total, &acc) < 1e-14);
    }
}
