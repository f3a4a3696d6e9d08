//! Matrix algebras `M_n` with faithful states and their GNS data.
//!
//! The GNS space `H = L₂(M_n, φ)` is `M_n` with `⟨â, b̂⟩ = φ(a*b)`. Coordinates
//! are taken in the orthonormal basis `{ξ} ∪ hbar_basis` where `ξ = 1̂` and
//! `hbar_basis` spans the centered part `H̊ = ξ^⊥`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, real};
use crate::C64;

/// Smallest admissible eigenvalue of a density matrix.
pub const EPS_FAITHFUL: f64 = 1e-8;
/// Tolerance for `φ(a) = 0` and for `trace(ρ) = 1`.
pub const EPS_CENTER: f64 = 1e-10;
const GRAM_SCHMIDT_DROP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraWithState {
    n: usize,
    rho: DMatrix<C64>,
    /// The diagonal subalgebra `C^n ⊂ M_n` instead of all of `M_n`.
    commutative: bool,
    hbar_basis: Vec<DMatrix<C64>>,
}

/// A centered element `a ∈ Å_i` tagged with its algebra index.
#[derive(Debug, Clone, PartialEq)]
pub struct Letter {
    pub algebra: usize,
    pub matrix: DMatrix<C64>,
}

impl Letter {
    pub fn new(algebra: usize, matrix: DMatrix<C64>) -> Self {
        Letter { algebra, matrix }
    }

    pub fn adjoint(&self) -> Letter {
        Letter::new(self.algebra, self.matrix.adjoint())
    }

    /// Entrywise comparison with the canonical-form tolerance.
    pub fn approx_eq(&self, other: &Letter, tol: f64) -> bool {
        self.algebra == other.algebra
            && self.matrix.shape() == other.matrix.shape()
            && self
                .matrix
                .iter()
                .zip(other.matrix.iter())
                .all(|(a, b)| (a - b).norm() <= tol)
    }
}

/// Builds `M_n` with the state `φ(a) = trace(ρ a)`.
pub fn make_algebra(n: usize, rho: DMatrix<C64>) -> Result<AlgebraWithState> {
    if n == 0 {
        return Err(Error::NotDensityMatrix("size must be positive".into()));
    }
    if rho.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rho.nrows(),
        });
    }
    let herm_err = rho
        .iter()
        .zip(rho.adjoint().iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if herm_err > EPS_CENTER {
        return Err(Error::NotDensityMatrix(format!(
            "not Hermitian (deviation {herm_err:e})"
        )));
    }
    let trace = rho.trace();
    if (trace - real(1.0)).norm() > EPS_CENTER {
        return Err(Error::NotDensityMatrix(format!("trace is {trace}")));
    }
    let (eigs, _) = hermitian_eigen(&rho);
    let min = eigs[0];
    if min < -EPS_CENTER {
        return Err(Error::NotDensityMatrix(format!("negative eigenvalue {min:e}")));
    }
    if min < EPS_FAITHFUL {
        return Err(Error::NotFaithful {
            min_eigenvalue: min,
            threshold: EPS_FAITHFUL,
        });
    }
    let mut alg = AlgebraWithState {
        n,
        rho,
        commutative: false,
        hbar_basis: Vec::new(),
    };
    alg.hbar_basis = alg.orthonormal_centered_basis();
    Ok(alg)
}

/// `M_n` with the normalized trace.
pub fn tracial(n: usize) -> AlgebraWithState {
    make_algebra(n, DMatrix::identity(n, n) * real(1.0 / n as f64)).expect("normalized trace is a faithful state")
}

/// `M_n` with a diagonal density matrix.
pub fn diagonal_state(weights: &[f64]) -> Result<AlgebraWithState> {
    let n = weights.len();
    let rho = DMatrix::from_diagonal(&DVector::from_iterator(n, weights.iter().map(|&w| real(w))));
    make_algebra(n, rho)
}

/// The commutative algebra `C^k` of diagonal `k×k` matrices with the state
/// given by `weights`. Its GNS space has dimension `k`, not `k²`.
pub fn commutative(weights: &[f64]) -> Result<AlgebraWithState> {
    let mut alg = diagonal_state(weights)?;
    alg.commutative = true;
    alg.hbar_basis = alg.orthonormal_centered_basis();
    Ok(alg)
}

impl AlgebraWithState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn gns_dim(&self) -> usize {
        if self.commutative {
            self.n
        } else {
            self.n * self.n
        }
    }

    pub fn is_commutative(&self) -> bool {
        self.commutative
    }

    /// Dimension of `H̊`, i.e. `gns_dim − 1`.
    pub fn hbar_dim(&self) -> usize {
        self.hbar_basis.len()
    }

    pub fn hbar_basis(&self) -> &[DMatrix<C64>] {
        &self.hbar_basis
    }

    /// The matrix whose hat is `ξ`.
    pub fn xi(&self) -> DMatrix<C64> {
        DMatrix::identity(self.n, self.n)
    }

    fn check_dim(&self, a: &DMatrix<C64>) -> Result<()> {
        if a.shape() != (self.n, self.n) {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: a.nrows().max(a.ncols()),
            });
        }
        Ok(())
    }

    /// Checks the size and, for commutative algebras, that `a` is diagonal.
    pub fn check_member(&self, a: &DMatrix<C64>) -> Result<()> {
        self.check_dim(a)?;
        if self.commutative {
            for i in 0..self.n {
                for j in 0..self.n {
                    if i != j && a[(i, j)].norm() > EPS_CENTER {
                        return Err(Error::BadParameter(format!(
                            "entry ({i}, {j}) of an element of a commutative algebra is nonzero"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn trace_rho(&self, a: &DMatrix<C64>) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.n {
            for j in 0..self.n {
                acc += self.rho[(i, j)] * a[(j, i)];
            }
        }
        acc
    }

    /// `φ(a) = trace(ρ a)`.
    pub fn state(&self, a: &DMatrix<C64>) -> Result<C64> {
        self.check_dim(a)?;
        Ok(self.trace_rho(a))
    }

    /// GNS inner product `⟨â, b̂⟩ = φ(a* b)`.
    pub fn inner(&self, a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
        self.trace_rho(&(a.adjoint() * b))
    }

    /// Opposite-side pairing `φ(a b*)`, the inner product of `H^op`.
    pub fn inner_op(&self, a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
        self.trace_rho(&(a * b.adjoint()))
    }

    /// `a − φ(a)·1`.
    pub fn center(&self, algebra: usize, a: &DMatrix<C64>) -> Result<Letter> {
        let phi = self.state(a)?;
        let mut m = a.clone();
        for i in 0..self.n {
            m[(i, i)] -= phi;
        }
        Ok(Letter::new(algebra, m))
    }

    /// Checks that `a` is centered up to [`EPS_CENTER`].
    pub fn check_centered(&self, a: &DMatrix<C64>) -> Result<()> {
        self.check_member(a)?;
        let phi = self.state(a)?;
        if phi.norm() > EPS_CENTER {
            return Err(Error::NotCentered(phi.norm()));
        }
        Ok(())
    }

    /// Coordinates of `â` in the basis `{ξ} ∪ hbar_basis`.
    pub fn hat(&self, a: &DMatrix<C64>) -> DVector<C64> {
        let mut v = DVector::zeros(self.gns_dim());
        v[0] = self.trace_rho(a);
        for (k, b) in self.hbar_basis.iter().enumerate() {
            v[k + 1] = self.inner(b, a);
        }
        v
    }

    /// Matrix of `b̂ ↦ (ab)^` in the basis `{ξ} ∪ hbar_basis`.
    pub fn gns_left_mult(&self, a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        self.check_member(a)?;
        let dim = self.gns_dim();
        let mut basis = Vec::with_capacity(dim);
        basis.push(self.xi());
        basis.extend(self.hbar_basis.iter().cloned());
        let mut out = DMatrix::zeros(dim, dim);
        for (col, b) in basis.iter().enumerate() {
            let ab = a * b;
            for (row, e) in basis.iter().enumerate() {
                out[(row, col)] = self.inner(e, &ab);
            }
        }
        Ok(out)
    }

    /// Modified Gram–Schmidt with a second orthogonalization pass over the
    /// centered matrix units `E_kl − φ(E_kl)·1`.
    fn orthonormal_centered_basis(&self) -> Vec<DMatrix<C64>> {
        let mut basis: Vec<DMatrix<C64>> = Vec::new();
        let target = self.gns_dim() - 1;
        for k in 0..self.n {
            for l in 0..self.n {
                if self.commutative && k != l {
                    continue;
                }
                if basis.len() == target {
                    return basis;
                }
                let mut e = DMatrix::zeros(self.n, self.n);
                e[(k, l)] = real(1.0);
                let phi = self.trace_rho(&e);
                for i in 0..self.n {
                    e[(i, i)] -= phi;
                }
                let initial = self.inner(&e, &e).re.sqrt();
                for _ in 0..2 {
                    for b in basis.iter() {
                        let proj = self.inner(b, &e);
                        e -= b * proj;
                    }
                }
                let norm = self.inner(&e, &e).re.sqrt();
                if norm > GRAM_SCHMIDT_DROP * initial.max(1.0) {
                    basis.push(e / real(norm));
                }
            }
        }
        basis
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    fn random_density(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let g = random_matrix(n, rng);
        let mut rho = &g * g.adjoint() + DMatrix::identity(n, n) * real(0.1);
        let t = rho.trace();
        rho /= t;
        rho
    }

    fn bernoulli() -> DMatrix<C64> {
        DMatrix::from_diagonal(&DVector::from_vec(vec![real(1.0), real(-1.0)]))
    }

    #[test]
    fn scalar_algebra_has_empty_hbar() {
        let alg = make_algebra(1, DMatrix::from_element(1, 1, real(1.0))).unwrap();
        assert_eq!(alg.gns_dim(), 1);
        assert_eq!(alg.hbar_dim(), 0);
    }

    #[test]
    fn normalized_trace_m2() {
        let alg = tracial(2);
        assert_eq!(alg.gns_dim(), 4);
        assert_eq!(alg.hbar_dim(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(2, &mut rng);
        let expected = (a.adjoint() * &b).trace() / real(2.0);
        assert!((alg.inner(&a, &b) - expected).norm() < 1e-14);
    }

    #[test]
    fn bernoulli_letter_is_centered_unit() {
        let alg = diagonal_state(&[0.5, 0.5]).unwrap();
        let u = bernoulli();
        assert!(alg.state(&u).unwrap().norm() < 1e-15);
        assert!((alg.inner(&u, &u) - real(1.0)).norm() < 1e-15);
    }

    #[test]
    fn state_examples() {
        let alg = diagonal_state(&[0.7, 0.3]).unwrap();
        assert!((alg.state(&bernoulli()).unwrap() - real(0.4)).norm() < 1e-15);
        assert!((alg.state(&DMatrix::identity(2, 2)).unwrap() - real(1.0)).norm() < 1e-15);
        let half = tracial(2);
        assert!(half.state(&bernoulli()).unwrap().norm() < 1e-15);
        assert!(matches!(
            half.state(&DMatrix::identity(3, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn center_examples() {
        let alg = diagonal_state(&[0.7, 0.3]).unwrap();
        let e11 = DMatrix::from_diagonal(&DVector::from_vec(vec![real(1.0), real(0.0)]));
        let centered = alg.center(0, &e11).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![real(0.3), real(-0.7)]));
        assert!(max_abs_diff(&centered.matrix, &expected) < 1e-15);
        let again = alg.center(0, &centered.matrix).unwrap();
        assert!(max_abs_diff(&again.matrix, &centered.matrix) < 1e-15);
        let id = alg.center(0, &DMatrix::identity(2, 2)).unwrap();
        assert!(id.matrix.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn rejects_bad_density_matrices() {
        let not_trace_one = DMatrix::identity(2, 2) * real(0.7);
        assert!(matches!(
            make_algebra(2, not_trace_one),
            Err(Error::NotDensityMatrix(_))
        ));
        let pure = DMatrix::from_diagonal(&DVector::from_vec(vec![real(1.0), real(0.0)]));
        assert!(matches!(make_algebra(2, pure), Err(Error::NotFaithful { .. })));
        let indefinite = DMatrix::from_diagonal(&DVector::from_vec(vec![real(1.5), real(-0.5)]));
        assert!(matches!(make_algebra(2, indefinite), Err(Error::NotDensityMatrix(_))));
        let non_hermitian = DMatrix::from_row_slice(2, 2, &[real(0.5), real(0.1), real(0.0), real(0.5)]);
        assert!(matches!(
            make_algebra(2, non_hermitian),
            Err(Error::NotDensityMatrix(_))
        ));
    }

    #[test]
    fn hbar_basis_is_orthonormal_and_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            let alg = make_algebra(n, random_density(n, &mut rng)).unwrap();
            assert_eq!(alg.hbar_dim(), n * n - 1);
            for (i, a) in alg.hbar_basis().iter().enumerate() {
                assert!(alg.state(a).unwrap().norm() < 1e-12);
                for (j, b) in alg.hbar_basis().iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((alg.inner(a, b) - real(expected)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn hat_map_is_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alg = make_algebra(3, random_density(3, &mut rng)).unwrap();
        for _ in 0..10 {
            let a = random_matrix(3, &mut rng);
            let b = random_matrix(3, &mut rng);
            let coords = alg.hat(&a).dotc(&alg.hat(&b));
            let direct = (alg.rho() * a.adjoint() * &b).trace();
            assert!((coords - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn opposite_pairing_matches_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let alg = make_algebra(2, random_density(2, &mut rng)).unwrap();
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(2, &mut rng);
        let direct = (alg.rho() * &a * b.adjoint()).trace();
        assert!((alg.inner_op(&a, &b) - direct).norm() < 1e-12);
    }

    #[test]
    fn gns_left_mult_examples() {
        let alg = diagonal_state(&[0.5, 0.5]).unwrap();
        let id = alg.gns_left_mult(&DMatrix::identity(2, 2)).unwrap();
        assert!(max_abs_diff(&id, &DMatrix::identity(4, 4)) < 1e-14);
        // u·û = (u²)^ = ξ
        let u = bernoulli();
        let lu = alg.gns_left_mult(&u).unwrap();
        let image = &lu * alg.hat(&u);
        let xi = alg.hat(&DMatrix::identity(2, 2));
        assert!((image - xi).norm() < 1e-14);
    }

    #[test]
    fn gns_left_mult_is_a_star_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let alg = make_algebra(3, random_density(3, &mut rng)).unwrap();
        for _ in 0..5 {
            let a = random_matrix(3, &mut rng);
            let b = random_matrix(3, &mut rng);
            let la = alg.gns_left_mult(&a).unwrap();
            let lb = alg.gns_left_mult(&b).unwrap();
            let lab = alg.gns_left_mult(&(&a * &b)).unwrap();
            assert!(max_abs_diff(&lab, &(&la * &lb)) < 1e-12);
            let ladj = alg.gns_left_mult(&a.adjoint()).unwrap();
            assert!(max_abs_diff(&ladj, &la.adjoint()) < 1e-12);
            // ⟨x̂, a ŷ⟩ = ⟨(a*x)^, ŷ⟩
            let x = random_matrix(3, &mut rng);
            let y = random_matrix(3, &mut rng);
            let lhs = alg.inner(&x, &(&a * &y));
            let rhs = alg.inner(&(a.adjoint() * &x), &y);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
