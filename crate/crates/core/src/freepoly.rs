//! Symbolic arithmetic in the algebraic free product.
//!
//! An element is a scalar plus a finite combination of alternating words
//! `a_1 ⊗ … ⊗ a_d` of centered letters. Products are reduced to this
//! canonical form by collapsing equal-index junctions: `ab = (ab − φ(ab)1) + φ(ab)1`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebra::{AlgebraWithState, Letter};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, real};
use crate::C64;

/// Letters closer than this (entrywise) are merged into one term key.
pub const LETTER_MERGE_TOL: f64 = 1e-12;
/// Coefficients below this magnitude are pruned.
pub const COEFF_PRUNE_TOL: f64 = 1e-14;
/// Unitality, state preservation and Choi positivity tolerance.
pub const MAP_TOL: f64 = 1e-10;

/// An ordered family `(A_i, φ_i)` shared by elements and Fock spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    algebras: Vec<AlgebraWithState>,
}

impl Family {
    pub fn new(algebras: Vec<AlgebraWithState>) -> Arc<Family> {
        Arc::new(Family { algebras })
    }

    pub fn len(&self) -> usize {
        self.algebras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.algebras.is_empty()
    }

    pub fn algebra(&self, i: usize) -> &AlgebraWithState {
        &self.algebras[i]
    }

    pub fn algebras(&self) -> &[AlgebraWithState] {
        &self.algebras
    }
}

pub(crate) fn same_family(a: &Arc<Family>, b: &Arc<Family>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// One elementary tensor with its coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub letters: Vec<Letter>,
    pub coeff: C64,
}

impl Term {
    pub fn degree(&self) -> usize {
        self.letters.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeElement {
    family: Arc<Family>,
    scalar: C64,
    terms: Vec<Term>,
}

/// `λ` with `b = λ·a` when every letter of `b` is a multiple of the matching
/// letter of `a` up to [`LETTER_MERGE_TOL`].
fn proportion(a: &[Letter], b: &[Letter]) -> Option<C64> {
    if a.len() != b.len() {
        return None;
    }
    let mut lambda = real(1.0);
    for (x, y) in a.iter().zip(b) {
        if x.algebra != y.algebra || x.matrix.shape() != y.matrix.shape() {
            return None;
        }
        if x.matrix == y.matrix {
            continue;
        }
        let nx = x.matrix.norm_squared();
        if nx == 0.0 {
            return None;
        }
        let l: C64 = x
            .matrix
            .iter()
            .zip(y.matrix.iter())
            .map(|(p, q)| p.conj() * q)
            .sum::<C64>()
            / nx;
        let tol = LETTER_MERGE_TOL * y.matrix.norm().max(1.0);
        if x.matrix
            .iter()
            .zip(y.matrix.iter())
            .any(|(p, q)| (q - p * l).norm() > tol)
        {
            return None;
        }
        lambda *= l;
    }
    Some(lambda)
}

impl FreeElement {
    pub fn zero(family: &Arc<Family>) -> Self {
        FreeElement {
            family: family.clone(),
            scalar: C64::new(0.0, 0.0),
            terms: Vec::new(),
        }
    }

    pub fn scalar(family: &Arc<Family>, value: C64) -> Self {
        let mut x = Self::zero(family);
        x.scalar = value;
        x
    }

    pub fn one(family: &Arc<Family>) -> Self {
        Self::scalar(family, real(1.0))
    }

    /// A single word; letters must be centered and alternate.
    pub fn word(family: &Arc<Family>, letters: Vec<Letter>, coeff: C64) -> Result<Self> {
        for w in letters.windows(2) {
            if w[0].algebra == w[1].algebra {
                return Err(Error::BadParameter(format!(
                    "consecutive letters share algebra index {}",
                    w[0].algebra
                )));
            }
        }
        for l in &letters {
            if l.algebra >= family.len() {
                return Err(Error::FamilyMismatch);
            }
            family.algebra(l.algebra).check_centered(&l.matrix)?;
        }
        let mut x = Self::zero(family);
        if letters.is_empty() {
            x.scalar = coeff;
        } else {
            x.push_term(letters, coeff);
        }
        Ok(x)
    }

    pub fn letter(family: &Arc<Family>, letter: Letter) -> Result<Self> {
        Self::word(family, vec![letter], real(1.0))
    }

    pub fn family(&self) -> &Arc<Family> {
        &self.family
    }

    pub fn scalar_part(&self) -> C64 {
        self.scalar
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(Term::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.scalar.norm() < COEFF_PRUNE_TOL
    }

    /// Adds `coeff · letters` to the canonical form, merging equal keys.
    fn push_term(&mut self, letters: Vec<Letter>, coeff: C64) {
        if letters.is_empty() {
            self.scalar += coeff;
            return;
        }
        if let Some((t, lambda)) = self
            .terms
            .iter_mut()
            .find_map(|t| proportion(&t.letters, &letters).map(|l| (t, l)))
        {
            t.coeff += coeff * lambda;
        } else {
            self.terms.push(Term { letters, coeff });
        }
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|t| t.coeff.norm() >= COEFF_PRUNE_TOL);
        if self.scalar.norm() < COEFF_PRUNE_TOL {
            self.scalar = C64::new(0.0, 0.0);
        }
        self
    }

    fn check_family(&self, other: &FreeElement) -> Result<()> {
        if same_family(&self.family, &other.family) {
            Ok(())
        } else {
            Err(Error::FamilyMismatch)
        }
    }

    pub fn add(&self, other: &FreeElement) -> Result<FreeElement> {
        self.check_family(other)?;
        let mut out = self.clone();
        out.scalar += other.scalar;
        for t in &other.terms {
            out.push_term(t.letters.clone(), t.coeff);
        }
        Ok(out.pruned())
    }

    pub fn scale(&self, c: C64) -> FreeElement {
        let mut out = self.clone();
        out.scalar *= c;
        out.terms.iter_mut().for_each(|t| t.coeff *= c);
        out.pruned()
    }

    pub fn sub(&self, other: &FreeElement) -> Result<FreeElement> {
        self.add(&other.scale(real(-1.0)))
    }

    /// Product in the free product, reduced to canonical form.
    pub fn multiply(&self, other: &FreeElement) -> Result<FreeElement> {
        self.check_family(other)?;
        let mut out = FreeElement::zero(&self.family);
        let lhs = self.as_words();
        let rhs = other.as_words();
        for (l, cl) in &lhs {
            for (r, cr) in &rhs {
                self.concat_reduce(l, r, cl * cr, &mut out);
            }
        }
        Ok(out.pruned())
    }

    fn as_words(&self) -> Vec<(Vec<Letter>, C64)> {
        let mut v = Vec::with_capacity(self.terms.len() + 1);
        if self.scalar.norm() > 0.0 {
            v.push((Vec::new(), self.scalar));
        }
        v.extend(self.terms.iter().map(|t| (t.letters.clone(), t.coeff)));
        v
    }

    /// Appends `coeff · left·right` to `out`. Only the junction can break the
    /// alternation, so one collapse per level suffices.
    fn concat_reduce(&self, left: &[Letter], right: &[Letter], coeff: C64, out: &mut FreeElement) {
        match (left.last(), right.first()) {
            (Some(a), Some(b)) if a.algebra == b.algebra => {
                let alg = self.family.algebra(a.algebra);
                let ab = &a.matrix * &b.matrix;
                let phi = alg.state(&ab).expect("letters have the algebra's size");
                let mut centered = ab;
                for i in 0..alg.n() {
                    centered[(i, i)] -= phi;
                }
                let head = &left[..left.len() - 1];
                let tail = &right[1..];
                if centered.iter().any(|z| z.norm() > COEFF_PRUNE_TOL) {
                    let mut letters = head.to_vec();
                    letters.push(Letter::new(a.algebra, centered));
                    letters.extend_from_slice(tail);
                    out.push_term(letters, coeff);
                }
                if phi.norm() > 0.0 {
                    self.concat_reduce(head, tail, coeff * phi, out);
                }
            }
            _ => {
                let mut letters = left.to_vec();
                letters.extend_from_slice(right);
                out.push_term(letters, coeff);
            }
        }
    }

    /// The free product state: the coefficient of `1`.
    pub fn free_state(&self) -> C64 {
        self.scalar
    }

    /// Reverses every word, takes letter adjoints and conjugates coefficients.
    pub fn adjoint(&self) -> FreeElement {
        let mut out = FreeElement::zero(&self.family);
        out.scalar = self.scalar.conj();
        for t in &self.terms {
            let letters = t.letters.iter().rev().map(Letter::adjoint).collect();
            out.push_term(letters, t.coeff.conj());
        }
        out
    }

    /// Terms of length exactly `d` (the scalar for `d = 0`).
    pub fn homogeneous_part(&self, d: usize) -> FreeElement {
        let mut out = FreeElement::zero(&self.family);
        if d == 0 {
            out.scalar = self.scalar;
        } else {
            out.terms = self.terms.iter().filter(|t| t.degree() == d).cloned().collect();
        }
        out
    }

    /// Terms of length at most `d`.
    pub fn truncate_degree(&self, d: usize) -> FreeElement {
        let mut out = self.clone();
        out.terms.retain(|t| t.degree() <= d);
        out
    }

    pub fn is_homogeneous(&self, d: usize) -> bool {
        if d == 0 {
            self.terms.is_empty()
        } else {
            self.scalar.norm() < COEFF_PRUNE_TOL && self.terms.iter().all(|t| t.degree() == d)
        }
    }

    /// Applies `T_{i_j}` letterwise; the scalar part is fixed.
    pub fn bd_free_product_map(&self, map: &StatePreservingMap) -> Result<FreeElement> {
        map.check_family(&self.family)?;
        let mut out = FreeElement::zero(&self.family);
        out.scalar = self.scalar;
        'terms: for t in &self.terms {
            let mut letters = Vec::with_capacity(t.letters.len());
            for l in &t.letters {
                let image = map.apply(l.algebra, &l.matrix);
                if image.iter().all(|z| z.norm() <= COEFF_PRUNE_TOL) {
                    continue 'terms;
                }
                letters.push(Letter::new(l.algebra, image));
            }
            out.push_term(letters, t.coeff);
        }
        Ok(out.pruned())
    }

    /// `Σ_k r^k 𝒫_k(x)`.
    pub fn poisson(&self, r: f64) -> Result<FreeElement> {
        check_radius(r)?;
        Ok(self.scale_by_degree(|k| r.powi(k as i32), usize::MAX))
    }

    /// `Σ_{k ≤ n} r^k 𝒫_k(x)` together with the cb-norm bound of the truncated kernel.
    pub fn poisson_truncated(&self, r: f64, n: usize) -> Result<(FreeElement, f64)> {
        check_radius(r)?;
        Ok((
            self.scale_by_degree(|k| r.powi(k as i32), n),
            truncated_poisson_bound(r, n),
        ))
    }

    fn scale_by_degree(&self, weight: impl Fn(usize) -> f64, max_degree: usize) -> FreeElement {
        let mut out = self.clone();
        out.terms.retain(|t| t.degree() <= max_degree);
        out.terms.iter_mut().for_each(|t| t.coeff *= weight(t.degree()));
        out.pruned()
    }

    /// Largest coefficient deviation between canonical forms, matching terms by
    /// key; unmatched terms count with their full modulus.
    pub fn coefficient_distance(&self, other: &FreeElement) -> f64 {
        let mut worst = (self.scalar - other.scalar).norm();
        let mut seen = vec![false; other.terms.len()];
        for t in &self.terms {
            let matched = other
                .terms
                .iter()
                .enumerate()
                .find_map(|(i, u)| proportion(&t.letters, &u.letters).map(|l| (i, l)));
            match matched {
                Some((i, lambda)) => {
                    seen[i] = true;
                    worst = worst.max((t.coeff - other.terms[i].coeff * lambda).norm());
                }
                None => worst = worst.max(t.coeff.norm()),
            }
        }
        for (i, u) in other.terms.iter().enumerate() {
            if !seen[i] {
                worst = worst.max(u.coeff.norm());
            }
        }
        worst
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::BadParameter(format!("r = {r} must lie in [0, 1)")));
    }
    Ok(())
}

/// `1 + 4 n r^n / (1 − r)²`, the cb-norm bound of the truncated Poisson kernel.
pub fn truncated_poisson_bound(r: f64, n: usize) -> f64 {
    1.0 + 4.0 * n as f64 * r.powi(n as i32) / ((1.0 - r) * (1.0 - r))
}

/// The radius `1 − 1/√n` used by the approximating sequence `𝒯_n`.
pub fn approximating_radius(n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        1.0 - 1.0 / (n as f64).sqrt()
    }
}

/// `M_s`-valued element `Σ_r m_r ⊗ x_r`.
#[derive(Debug, Clone)]
pub struct MatrixElement {
    size: usize,
    parts: Vec<(DMatrix<C64>, FreeElement)>,
}

impl MatrixElement {
    pub fn new(size: usize, parts: Vec<(DMatrix<C64>, FreeElement)>) -> Result<Self> {
        if size == 0 {
            return Err(Error::BadParameter("amplification must be positive".into()));
        }
        for (m, _) in &parts {
            if m.shape() != (size, size) {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    actual: m.nrows(),
                });
            }
        }
        if let Some((_, first)) = parts.first() {
            if parts.iter().any(|(_, x)| !same_family(x.family(), first.family())) {
                return Err(Error::FamilyMismatch);
            }
        }
        Ok(MatrixElement { size, parts })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn parts(&self) -> &[(DMatrix<C64>, FreeElement)] {
        &self.parts
    }

    pub fn degree(&self) -> usize {
        self.parts.iter().map(|(_, x)| x.degree()).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self, d: usize) -> bool {
        self.parts.iter().all(|(_, x)| x.is_homogeneous(d))
    }

    pub fn family(&self) -> Option<&Arc<Family>> {
        self.parts.first().map(|(_, x)| x.family())
    }

    /// Applies a coefficientwise map to every scalar-valued part.
    pub fn map(&self, f: impl Fn(&FreeElement) -> FreeElement) -> MatrixElement {
        MatrixElement {
            size: self.size,
            parts: self.parts.iter().map(|(m, x)| (m.clone(), f(x))).collect(),
        }
    }

    pub fn homogeneous_part(&self, d: usize) -> MatrixElement {
        self.map(|x| x.homogeneous_part(d))
    }

    pub fn truncate_degree(&self, d: usize) -> MatrixElement {
        self.map(|x| x.truncate_degree(d))
    }
}

impl From<FreeElement> for MatrixElement {
    fn from(x: FreeElement) -> Self {
        MatrixElement {
            size: 1,
            parts: vec![(DMatrix::from_element(1, 1, real(1.0)), x)],
        }
    }
}

impl From<&FreeElement> for MatrixElement {
    fn from(x: &FreeElement) -> Self {
        MatrixElement::from(x.clone())
    }
}

/// A linear map on `M_n`, stored as its action on column-major `vec(a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    n: usize,
    matrix: DMatrix<C64>,
}

impl Superoperator {
    pub fn from_fn(n: usize, f: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> Self {
        let mut matrix = DMatrix::zeros(n * n, n * n);
        for col in 0..n * n {
            let mut e = DMatrix::zeros(n, n);
            e[(col % n, col / n)] = real(1.0);
            let image = f(&e);
            for (row, v) in image.iter().enumerate() {
                matrix[(row, col)] = *v;
            }
        }
        Superoperator { n, matrix }
    }

    pub fn identity(n: usize) -> Self {
        Superoperator {
            n,
            matrix: DMatrix::identity(n * n, n * n),
        }
    }

    /// `a ↦ Σ_k K_k a K_k*`.
    pub fn from_kraus(kraus: &[DMatrix<C64>]) -> Self {
        let n = kraus.first().map(|k| k.nrows()).unwrap_or(1);
        Self::from_fn(n, |a| {
            kraus
                .iter()
                .fold(DMatrix::zeros(n, n), |acc, k| acc + k * a * k.adjoint())
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, a: &DMatrix<C64>) -> DMatrix<C64> {
        let v = nalgebra::DVector::from_iterator(self.n * self.n, a.iter().cloned());
        let image = &self.matrix * v;
        DMatrix::from_iterator(self.n, self.n, image.iter().cloned())
    }

    /// Choi matrix `Σ_{kl} E_kl ⊗ T(E_kl)`.
    pub fn choi(&self) -> DMatrix<C64> {
        let n = self.n;
        let mut choi = DMatrix::zeros(n * n, n * n);
        for k in 0..n {
            for l in 0..n {
                let mut e = DMatrix::zeros(n, n);
                e[(k, l)] = real(1.0);
                let t = self.apply(&e);
                for i in 0..n {
                    for j in 0..n {
                        choi[(k * n + i, l * n + j)] = t[(i, j)];
                    }
                }
            }
        }
        choi
    }
}

/// Per-algebra unital state-preserving maps `T_i`.
#[derive(Debug, Clone)]
pub struct StatePreservingMap {
    family: Arc<Family>,
    maps: Vec<Superoperator>,
    cp_certified: Vec<bool>,
    min_choi_eigenvalues: Vec<f64>,
}

impl StatePreservingMap {
    /// Validates unitality and `φ_i ∘ T_i = φ_i`; complete positivity is
    /// recorded per algebra but not required.
    pub fn new(family: &Arc<Family>, maps: Vec<Superoperator>) -> Result<Self> {
        if maps.len() != family.len() {
            return Err(Error::FamilyMismatch);
        }
        let mut cp_certified = Vec::with_capacity(maps.len());
        let mut min_choi = Vec::with_capacity(maps.len());
        for (i, t) in maps.iter().enumerate() {
            let alg = family.algebra(i);
            let n = alg.n();
            if t.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: t.n(),
                });
            }
            let one = DMatrix::<C64>::identity(n, n);
            let unit_err = (t.apply(&one) - &one).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if unit_err > MAP_TOL {
                return Err(Error::NotStatePreserving(format!(
                    "T_{i}(1) deviates from 1 by {unit_err:e}"
                )));
            }
            for k in 0..n {
                for l in 0..n {
                    let mut e = DMatrix::zeros(n, n);
                    e[(k, l)] = real(1.0);
                    let before = alg.state(&e)?;
                    let after = alg.state(&t.apply(&e))?;
                    if (before - after).norm() > MAP_TOL {
                        return Err(Error::NotStatePreserving(format!(
                            "phi_{i}(T(E_{k}{l})) differs from phi_{i}(E_{k}{l}) by {:e}",
                            (before - after).norm()
                        )));
                    }
                }
            }
            let min = hermitian_eigen(&t.choi()).0[0];
            cp_certified.push(min >= -MAP_TOL);
            min_choi.push(min);
        }
        Ok(StatePreservingMap {
            family: family.clone(),
            maps,
            cp_certified,
            min_choi_eigenvalues: min_choi,
        })
    }

    pub fn identity(family: &Arc<Family>) -> Self {
        let maps = family
            .algebras()
            .iter()
            .map(|a| Superoperator::identity(a.n()))
            .collect();
        Self::new(family, maps).expect("identity is state preserving")
    }

    /// `a ↦ φ_i(a)·1` on every algebra.
    pub fn expectation(family: &Arc<Family>) -> Self {
        Self::poisson_letters(family, 0.0)
    }

    /// `U_{r,i}(a) = r a + (1 − r) φ_i(a) 1` on every algebra.
    pub fn poisson_letters(family: &Arc<Family>, r: f64) -> Self {
        let maps = family
            .algebras()
            .iter()
            .map(|alg| {
                Superoperator::from_fn(alg.n(), |a| {
                    let phi = alg.state(a).expect("size matches");
                    a * real(r) + DMatrix::identity(alg.n(), alg.n()) * (phi * (1.0 - r))
                })
            })
            .collect();
        Self::new(family, maps).expect("U_r is unital and state preserving")
    }

    pub fn cp_certified(&self) -> bool {
        self.cp_certified.iter().all(|&b| b)
    }

    pub fn cp_flags(&self) -> &[bool] {
        &self.cp_certified
    }

    pub fn min_choi_eigenvalues(&self) -> &[f64] {
        &self.min_choi_eigenvalues
    }

    pub fn apply(&self, algebra: usize, a: &DMatrix<C64>) -> DMatrix<C64> {
        self.maps[algebra].apply(a)
    }

    fn check_family(&self, family: &Arc<Family>) -> Result<()> {
        if same_family(&self.family, family) {
            Ok(())
        } else {
            Err(Error::FamilyMismatch)
        }
    }
}

/// Largest `|φ(a)|` over the letters of `x`.
pub fn max_letter_state(x: &FreeElement) -> f64 {
    x.terms()
        .iter()
        .flat_map(|t| t.letters.iter())
        .map(|l| {
            x.family()
                .algebra(l.algebra)
                .state(&l.matrix)
                .map(|z| z.norm())
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}
