mod common;

use std::sync::Arc;

use common::*;
use freeprod::algebra::{diagonal_state, tracial};
use freeprod::fock::{represent_element, represent_with_degree, FockSpace};
use freeprod::freepoly::{approximating_radius, truncated_poisson_bound, Family, StatePreservingMap, Superoperator};
use freeprod::instance::{generate_instance, random_letter, GeneratorSpec};
use freeprod::khintchine::enclose_norm;
use freeprod::linalg::{c, real, sparse_max_abs_diff, to_dense};
use freeprod::{Error, FreeElement, Letter, MatrixElement, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family() -> Arc<Family> {
    Family::new(vec![tracial(2), diagonal_state(&[0.3, 0.7]).unwrap(), tracial(2)])
}

fn random(fam: &Arc<Family>, degree: usize, seed: u64) -> FreeElement {
    generate_instance(fam, &GeneratorSpec::mixed(degree), seed).unwrap()
}

#[test]
fn bernoulli_product_examples() {
    let fam = bernoulli_family(2);
    let x = word(&fam, &[0, 1]).multiply(&word(&fam, &[1])).unwrap();
    assert!(x.coefficient_distance(&word(&fam, &[0])) < 1e-15);
    let y = word(&fam, &[0]).multiply(&word(&fam, &[1])).unwrap();
    assert!(y.coefficient_distance(&word(&fam, &[0, 1])) < 1e-15);
    assert_eq!(word(&fam, &[0, 1]).free_state(), C64::new(0.0, 0.0));
    assert_eq!(FreeElement::one(&fam).free_state(), real(1.0));
    let adj = word(&fam, &[0, 1]).adjoint();
    assert!(adj.coefficient_distance(&word(&fam, &[1, 0])) < 1e-15);
}

#[test]
fn same_algebra_product_splits_off_the_state() {
    let fam = family();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_letter(&fam, 1, 1.0, &mut rng);
    let b = random_letter(&fam, 1, 1.0, &mut rng);
    let ab = FreeElement::letter(&fam, a.clone())
        .unwrap()
        .multiply(&FreeElement::letter(&fam, b.clone()).unwrap())
        .unwrap();
    let m = &a.matrix * &b.matrix;
    let phi = fam.algebra(1).state(&m).unwrap();
    assert!((ab.free_state() - phi).norm() < 1e-14);
    assert_eq!(ab.terms().len(), 1);
    let mut centered = m.clone();
    for i in 0..2 {
        centered[(i, i)] -= phi;
    }
    assert!((ab.terms()[0].letters[0].matrix.clone() - centered)
        .iter()
        .all(|z| z.norm() < 1e-14));
}

#[test]
fn representation_is_multiplicative() {
    let fam = family();
    let fock = FockSpace::new(&fam, 8).unwrap();
    for seed in 0..8 {
        let x = random(&fam, 1 + (seed as usize % 3), seed);
        let y = random(&fam, 1 + ((seed as usize + 1) % 3), 100 + seed);
        let xy = x.multiply(&y).unwrap();
        let len = 2;
        let ry = represent_element(&fock, &y, len).unwrap();
        let rx = represent_element(&fock, &x, len + y.degree()).unwrap();
        let composed = rx.matrix() * ry.matrix();
        let direct = represent_with_degree(&fock, &MatrixElement::from(&xy), len, x.degree() + y.degree()).unwrap();
        assert!(sparse_max_abs_diff(&composed, direct.matrix()) <= 1e-10, "seed {seed}");
    }
}

#[test]
fn free_state_is_the_vacuum_expectation() {
    let fam = family();
    let fock = FockSpace::new(&fam, 6).unwrap();
    for seed in 0..10 {
        let x = random(&fam, 3, seed);
        let op = to_dense(represent_element(&fock, &x, 0).unwrap().matrix());
        assert_eq!(op[(0, 0)], x.free_state());
        let norm_sq: f64 = op.column(0).iter().map(|z| z.norm_sqr()).sum();
        let xsx = x.adjoint().multiply(&x).unwrap().free_state();
        assert!((xsx - real(norm_sq)).norm() <= 1e-10 * norm_sq.max(1.0));
        let xxs = x.multiply(&x.adjoint()).unwrap().free_state();
        let adj = to_dense(represent_element(&fock, &x.adjoint(), 0).unwrap().matrix());
        let adj_sq: f64 = adj.column(0).iter().map(|z| z.norm_sqr()).sum();
        assert!(xxs.re >= 0.0);
        assert!((xxs - real(adj_sq)).norm() <= 1e-10 * adj_sq.max(1.0));
    }
}

#[test]
fn alternating_products_of_centered_elements_have_zero_state() {
    let fam = family();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let mut acc = FreeElement::one(&fam);
        for k in [0, 1, 2, 0, 1] {
            let l = random_letter(&fam, k, 1.0, &mut rng);
            acc = acc.multiply(&FreeElement::letter(&fam, l).unwrap()).unwrap();
        }
        assert_eq!(acc.free_state(), C64::new(0.0, 0.0));
    }
}

#[test]
fn adjoint_preserves_truncated_norms() {
    let fam = family();
    let fock = FockSpace::new(&fam, 6).unwrap();
    for seed in 0..4 {
        let x = random(&fam, 2, seed);
        let y = random(&fam, 2, seed + 50);
        assert!(
            x.multiply(&y)
                .unwrap()
                .adjoint()
                .coefficient_distance(&y.adjoint().multiply(&x.adjoint()).unwrap())
                < 1e-12
        );
        let ex = enclose_norm(&MatrixElement::from(&x), &fock, 3).unwrap();
        let ea = enclose_norm(&MatrixElement::from(&x.adjoint()), &fock, 3).unwrap();
        assert!(ex.lower <= ea.upper + 1e-9 && ea.lower <= ex.upper + 1e-9);
    }
}

#[test]
fn homogeneous_parts_and_truncation() {
    let fam = bernoulli_family(2);
    let x = word(&fam, &[0]).add(&word(&fam, &[0, 1])).unwrap();
    assert!(x.homogeneous_part(2).coefficient_distance(&word(&fam, &[0, 1])) == 0.0);
    assert_eq!(FreeElement::one(&fam).homogeneous_part(0), FreeElement::one(&fam));
    let fam = family();
    for seed in 0..10 {
        let x = random(&fam, 3, seed);
        let mut total = FreeElement::zero(&fam);
        for d in 0..=3 {
            let p = x.homogeneous_part(d);
            assert_eq!(p.homogeneous_part(d), p);
            total = total.add(&p).unwrap();
        }
        assert!(total.coefficient_distance(&x) == 0.0);
        assert_eq!(x.truncate_degree(3), x);
        assert!(x.truncate_degree(0).terms().is_empty());
        let q1 = x.homogeneous_part(0).add(&x.homogeneous_part(1)).unwrap();
        assert!(x.truncate_degree(1).coefficient_distance(&q1) == 0.0);
    }
}

#[test]
fn free_product_maps() {
    let fam = bernoulli_family(2);
    let r = 0.37;
    let t = StatePreservingMap::poisson_letters(&fam, r);
    assert!(t.cp_certified());
    let x = word(&fam, &[0, 1]);
    let image = x.bd_free_product_map(&t).unwrap();
    assert!(image.coefficient_distance(&x.scale(real(r * r))) < 1e-15);

    let fam = family();
    let id = StatePreservingMap::identity(&fam);
    let e = StatePreservingMap::expectation(&fam);
    for seed in 0..10 {
        let x = random(&fam, 3, seed);
        assert!(x.bd_free_product_map(&id).unwrap().coefficient_distance(&x) == 0.0);
        let scalar = x.bd_free_product_map(&e).unwrap();
        assert!(scalar.terms().is_empty());
        assert_eq!(scalar.free_state(), x.free_state());
        let t = StatePreservingMap::poisson_letters(&fam, 0.6);
        let lhs = x.bd_free_product_map(&t).unwrap();
        assert!(lhs.coefficient_distance(&x.poisson(0.6).unwrap()) < 1e-14);
        for d in 0..=3 {
            let a = lhs.homogeneous_part(d);
            let b = x.homogeneous_part(d).bd_free_product_map(&t).unwrap();
            assert!(a.coefficient_distance(&b) == 0.0);
        }
    }
}

#[test]
fn non_positive_maps_are_flagged() {
    let fam = Family::new(vec![tracial(2)]);
    let transpose = Superoperator::from_fn(2, |a| a.transpose());
    let t = StatePreservingMap::new(&fam, vec![transpose]).unwrap();
    assert!(!t.cp_certified());
    assert!(t.min_choi_eigenvalues()[0] < -0.1);
    let shift = Superoperator::from_fn(2, |a| a * real(2.0));
    assert!(matches!(
        StatePreservingMap::new(&fam, vec![shift]),
        Err(Error::NotStatePreserving(_))
    ));
    let unitary = DMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)]);
    let conj = Superoperator::from_kraus(&[unitary]);
    let t = StatePreservingMap::new(&fam, vec![conj]).unwrap();
    assert!(t.cp_certified());
}

#[test]
fn poisson_semigroup_and_truncation() {
    let fam = family();
    for seed in 0..10 {
        let x = random(&fam, 3, seed);
        let r = 0.2 + 0.07 * seed as f64;
        let s = 0.9 - 0.05 * seed as f64;
        let twice = x.poisson(r).unwrap().poisson(s).unwrap();
        assert!(twice.coefficient_distance(&x.poisson(r * s).unwrap()) <= 1e-15);
        assert!(
            x.poisson(0.0)
                .unwrap()
                .coefficient_distance(&FreeElement::scalar(&fam, x.free_state()))
                == 0.0
        );
        let (t, _) = x.poisson_truncated(r, 3).unwrap();
        assert_eq!(t, x.poisson(r).unwrap());
        let (t0, _) = x.poisson_truncated(r, 0).unwrap();
        assert!(t0.terms().is_empty());
    }
    assert!(matches!(
        FreeElement::one(&fam).poisson(1.0),
        Err(Error::BadParameter(_))
    ));
    assert_eq!(truncated_poisson_bound(0.5, 2), 9.0);
    assert!((approximating_radius(4) - 0.5).abs() < 1e-15);
}

#[test]
fn poisson_does_not_increase_certified_norms() {
    let fam = family();
    let fock = FockSpace::new(&fam, 6).unwrap();
    for seed in 0..6 {
        let x = MatrixElement::from(random(&fam, 2, seed));
        let y = x.map(|p| p.poisson(0.5).unwrap());
        let ex = enclose_norm(&x, &fock, 3).unwrap();
        let ey = enclose_norm(&y, &fock, 3).unwrap();
        assert!(ey.lower <= ex.upper + 1e-8);
    }
}

#[test]
fn family_mismatch_is_rejected() {
    let a = family();
    let b = bernoulli_family(3);
    assert!(matches!(
        FreeElement::one(&a).add(&FreeElement::one(&b)),
        Err(Error::FamilyMismatch)
    ));
    let l = Letter::new(
        0,
        DMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real(0.0)]),
    );
    assert!(matches!(FreeElement::letter(&a, l), Err(Error::NotCentered(_))));
    let u0 = FreeElement::word(&a, vec![u_m2(0), u_m2(0)], real(1.0));
    assert!(u0.is_err());
}

fn u_m2(i: usize) -> Letter {
    Letter::new(
        i,
        DMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)]),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn multiplication_is_associative(s1 in 0u64..1000, s2 in 0u64..1000, s3 in 0u64..1000) {
        let fam = family();
        let x = random(&fam, 2, s1);
        let y = random(&fam, 1, s2);
        let z = random(&fam, 2, s3);
        let left = x.multiply(&y).unwrap().multiply(&z).unwrap();
        let right = x.multiply(&y.multiply(&z).unwrap()).unwrap();
        let scale = 1.0 + left.terms().iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
        let fock = FockSpace::new(&fam, 5).unwrap();
        let a = represent_with_degree(&fock, &MatrixElement::from(&left), 0, 5).unwrap();
        let b = represent_with_degree(&fock, &MatrixElement::from(&right), 0, 5).unwrap();
        prop_assert!(sparse_max_abs_diff(a.matrix(), b.matrix()) <= 1e-10 * scale);
        prop_assert!((left.free_state() - right.free_state()).norm() <= 1e-10 * scale);
    }

    #[test]
    fn scaling_commutes_with_poisson(seed in 0u64..1000, re in -2.0f64..2.0, im in -2.0f64..2.0, r in 0.0f64..0.99) {
        let fam = family();
        let x = random(&fam, 3, seed);
        let z = c(re, im);
        let a = x.scale(z).poisson(r).unwrap();
        let b = x.poisson(r).unwrap().scale(z);
        prop_assert!(a.coefficient_distance(&b) <= 1e-12 * (1.0 + z.norm()));
    }
}
