#![allow(dead_code)]

use std::sync::Arc;

use freeprod::freepoly::Family;
use freeprod::linalg::real;
use freeprod::{commutative, FreeElement, Letter, C64};
use nalgebra::{DMatrix, DVector};

/// `N` copies of `C²` with the uniform state.
pub fn bernoulli_family(n: usize) -> Arc<Family> {
    Family::new((0..n).map(|_| commutative(&[0.5, 0.5]).unwrap()).collect())
}

/// The Bernoulli letter `diag(1, −1)` in algebra `i`.
pub fn u(i: usize) -> Letter {
    Letter::new(
        i,
        DMatrix::from_diagonal(&DVector::from_vec(vec![real(1.0), real(-1.0)])),
    )
}

pub fn word(fam: &Arc<Family>, letters: &[usize]) -> FreeElement {
    FreeElement::word(fam, letters.iter().map(|&i| u(i)).collect(), real(1.0)).unwrap()
}

pub fn sum(fam: &Arc<Family>, xs: &[FreeElement]) -> FreeElement {
    xs.iter().fold(FreeElement::zero(fam), |acc, x| acc.add(x).unwrap())
}

pub fn dense_top_singular(m: &DMatrix<C64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}
