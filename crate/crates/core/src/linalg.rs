//! Dense and sparse linear-algebra helpers: operator norms with residual
//! certificates, Hermitian spectra, and a few matrix constructors.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CscMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::C64;

/// Below this many columns the Gram matrix is diagonalized densely.
pub const DENSE_COLUMN_LIMIT: usize = 300;
/// Relative residual target for the iterative path.
pub const LANCZOS_REL_TOL: f64 = 1e-13;
/// Cap on the total number of Krylov steps, summed over restarts.
pub const LANCZOS_ITERATION_CAP: usize = 10_000;
const LANCZOS_BASIS: usize = 120;

/// How a largest singular value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    /// Trivial operator (no columns or no entries).
    Zero,
    /// Dense Hermitian eigensolver on the Gram matrix.
    DenseGram,
    /// Restarted Lanczos on the Gram operator.
    Lanczos,
}

/// Largest singular value of a matrix together with its certificate.
///
/// `sigma` is `‖A v‖` for the returned unit vector `v`, so it never exceeds
/// the true largest singular value beyond roundoff; `residual` is
/// `‖A*A v − sigma² v‖`.
#[derive(Debug, Clone)]
pub struct SingularEstimate {
    pub sigma: f64,
    pub residual: f64,
    pub method: NormMethod,
    pub iterations: usize,
    pub vector: DVector<C64>,
}

impl SingularEstimate {
    /// `sqrt(σ² + residual)`. Some eigenvalue of `A*A` lies within `residual` of
    /// `σ²`; when that eigenvalue is the top one this bounds the largest singular value.
    pub fn upper(&self) -> f64 {
        (self.sigma * self.sigma + self.residual).sqrt()
    }

    /// Residual relative to `sigma²`, the quantity certified against tolerances.
    pub fn relative_residual(&self) -> f64 {
        if self.sigma == 0.0 {
            0.0
        } else {
            self.residual / (self.sigma * self.sigma)
        }
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Operator norm of a dense matrix.
pub fn op_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
/// The input is symmetrized first so tiny anti-Hermitian roundoff is ignored.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let h = (m + m.adjoint()) * real(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_eigen(m).0.first().cloned().unwrap_or(0.0)
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |r, col| a[(r / br, col / bc)] * b[(r % br, col % bc)])
}

/// Positive square root of a positive semidefinite matrix.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = hermitian_eigen(m);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| real(v.max(0.0).sqrt())),
    ));
    &vecs * d * vecs.adjoint()
}

pub fn to_dense(a: &CscMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols());
    for (r, col, v) in a.triplet_iter() {
        out[(r, col)] += *v;
    }
    out
}

pub fn from_dense(a: &DMatrix<C64>) -> CscMatrix<C64> {
    let mut coo = CooMatrix::new(a.nrows(), a.ncols());
    for col in 0..a.ncols() {
        for r in 0..a.nrows() {
            let v = a[(r, col)];
            if v != C64::new(0.0, 0.0) {
                coo.push(r, col, v);
            }
        }
    }
    CscMatrix::from(&coo)
}

/// Builds a CSC matrix from per-column sparse lists. Duplicate rows within a
/// column are summed; exact zeros are dropped.
pub fn csc_from_columns(nrows: usize, columns: Vec<Vec<(usize, C64)>>) -> CscMatrix<C64> {
    let ncols = columns.len();
    let mut offsets = Vec::with_capacity(ncols + 1);
    let mut rows = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);
    for mut column in columns {
        column.sort_by_key(|&(r, _)| r);
        let mut last: Option<usize> = None;
        for (r, v) in column {
            debug_assert!(r < nrows);
            if last == Some(r) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                vals.push(v);
                last = Some(r);
            }
        }
        offsets.push(rows.len());
    }
    let m =
        CscMatrix::try_from_csc_data(nrows, ncols, offsets, rows, vals).expect("column lists produce valid CSC data");
    prune(&m)
}

/// `A ⊗ M` with row/column index `i·s + c`, `s = M.nrows()`.
pub fn sparse_kron(a: &CscMatrix<C64>, m: &DMatrix<C64>) -> CscMatrix<C64> {
    let s = m.nrows();
    let t = m.ncols();
    let mut columns = vec![Vec::new(); a.ncols() * t];
    for (r, col, v) in a.triplet_iter() {
        for c in 0..t {
            for q in 0..s {
                let z = m[(q, c)];
                if z != C64::new(0.0, 0.0) {
                    columns[col * t + c].push((r * s + q, *v * z));
                }
            }
        }
    }
    csc_from_columns(a.nrows() * s, columns)
}

/// Drops explicitly stored zeros.
pub fn prune(a: &CscMatrix<C64>) -> CscMatrix<C64> {
    let zero = C64::new(0.0, 0.0);
    if a.values().iter().all(|v| *v != zero) {
        return a.clone();
    }
    let mut coo = CooMatrix::new(a.nrows(), a.ncols());
    for (r, col, v) in a.triplet_iter() {
        if *v != zero {
            coo.push(r, col, *v);
        }
    }
    CscMatrix::from(&coo)
}

/// Maximum absolute entrywise difference between two sparse matrices of the same shape.
pub fn sparse_max_abs_diff(a: &CscMatrix<C64>, b: &CscMatrix<C64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let diff = a - b;
    diff.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `y = A x` for a CSC matrix.
fn csc_apply(a: &CscMatrix<C64>, x: &[C64], y: &mut [C64]) {
    y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    let offsets = a.col_offsets();
    let rows = a.row_indices();
    let vals = a.values();
    for col in 0..a.ncols() {
        let xc = x[col];
        if xc == C64::new(0.0, 0.0) {
            continue;
        }
        for k in offsets[col]..offsets[col + 1] {
            y[rows[k]] += vals[k] * xc;
        }
    }
}

/// `x = A* y` for a CSC matrix.
fn csc_apply_adjoint(a: &CscMatrix<C64>, y: &[C64], x: &mut [C64]) {
    let offsets = a.col_offsets();
    let rows = a.row_indices();
    let vals = a.values();
    for col in 0..a.ncols() {
        let mut acc = C64::new(0.0, 0.0);
        for k in offsets[col]..offsets[col + 1] {
            acc += vals[k].conj() * y[rows[k]];
        }
        x[col] = acc;
    }
}

/// Removes empty rows; the singular values are unchanged.
fn compress_rows(a: &CscMatrix<C64>) -> CscMatrix<C64> {
    let mut used = vec![usize::MAX; a.nrows()];
    let mut count = 0;
    for &r in a.row_indices() {
        if used[r] == usize::MAX {
            used[r] = 0;
        }
    }
    for slot in used.iter_mut() {
        if *slot == 0 {
            *slot = count;
            count += 1;
        }
    }
    // The renumbering is monotone, so each column stays sorted.
    let rows: Vec<usize> = a.row_indices().iter().map(|&r| used[r]).collect();
    CscMatrix::try_from_csc_data(count, a.ncols(), a.col_offsets().to_vec(), rows, a.values().to_vec())
        .expect("valid CSC layout")
}

fn gram_residual(a: &CscMatrix<C64>, v: &DVector<C64>, sigma: f64) -> f64 {
    let mut av = vec![C64::new(0.0, 0.0); a.nrows()];
    let mut g = vec![C64::new(0.0, 0.0); a.ncols()];
    csc_apply(a, v.as_slice(), &mut av);
    csc_apply_adjoint(a, &av, &mut g);
    g.iter()
        .zip(v.iter())
        .map(|(gi, vi)| (gi - vi * sigma * sigma).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn norm_of_image(a: &CscMatrix<C64>, v: &DVector<C64>) -> f64 {
    let mut av = vec![C64::new(0.0, 0.0); a.nrows()];
    csc_apply(a, v.as_slice(), &mut av);
    av.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value of a sparse matrix.
///
/// Small problems diagonalize the dense Gram matrix; larger ones run a
/// restarted Lanczos iteration with full reorthogonalization on `A*A`.
pub fn largest_singular_value(a: &CscMatrix<C64>) -> SingularEstimate {
    if a.ncols() == 0 || a.nnz() == 0 {
        return SingularEstimate {
            sigma: 0.0,
            residual: 0.0,
            method: NormMethod::Zero,
            iterations: 0,
            vector: DVector::from_element(a.ncols(), C64::new(0.0, 0.0)),
        };
    }
    let a = compress_rows(a);
    if a.ncols() <= DENSE_COLUMN_LIMIT {
        let mut adj = a.transpose();
        adj.values_mut().iter_mut().for_each(|v| *v = v.conj());
        let gram = to_dense(&(&adj * &a));
        let (vals, vecs) = hermitian_eigen(&gram);
        let top = vals.len() - 1;
        let v = vecs.column(top).into_owned();
        let sigma = norm_of_image(&a, &v);
        let residual = gram_residual(&a, &v, sigma);
        return SingularEstimate {
            sigma,
            residual,
            method: NormMethod::DenseGram,
            iterations: 1,
            vector: v,
        };
    }
    let (v, iterations) = lanczos_top(&a);
    let sigma = norm_of_image(&a, &v);
    let residual = gram_residual(&a, &v, sigma);
    SingularEstimate {
        sigma,
        residual,
        method: NormMethod::Lanczos,
        iterations,
        vector: v,
    }
}

/// Convenience: largest singular value only.
pub fn sparse_op_norm(a: &CscMatrix<C64>) -> f64 {
    largest_singular_value(a).sigma
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn normalize(x: &mut [C64]) -> f64 {
    let n = dot(x, x).re.sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

/// Top eigenvector of `A*A` by restarted Lanczos. Returns the Ritz vector
/// and the number of Krylov steps taken.
fn lanczos_top(a: &CscMatrix<C64>) -> (DVector<C64>, usize) {
    let n = a.ncols();
    let basis_size = LANCZOS_BASIS.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut start: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    normalize(&mut start);

    let mut scratch = vec![C64::new(0.0, 0.0); a.nrows()];
    let mut total_steps = 0;
    let mut best = DVector::from_vec(start.clone());
    while total_steps < LANCZOS_ITERATION_CAP {
        let mut basis: Vec<Vec<C64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut converged = false;
        let mut ritz: Option<(f64, DVector<f64>)> = None;
        for j in 0..basis_size {
            total_steps += 1;
            let mut w = vec![C64::new(0.0, 0.0); n];
            csc_apply(a, &basis[j], &mut scratch);
            csc_apply_adjoint(a, &scratch, &mut w);
            let aj = dot(&basis[j], &w).re;
            alpha.push(aj);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for q in basis.iter() {
                    let proj = dot(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= proj * qi;
                    }
                }
            }
            let bj = normalize(&mut w);
            let (theta, s) = tridiagonal_top(&alpha, &beta);
            let bound = bj * s[s.len() - 1].abs();
            ritz = Some((theta, s));
            let scale = theta.abs().max(f64::MIN_POSITIVE);
            if bound <= LANCZOS_REL_TOL * scale || bj <= 1e-14 * scale.max(1.0) {
                converged = true;
                break;
            }
            if j + 1 == basis_size {
                break;
            }
            beta.push(bj);
            basis.push(w);
        }
        let (_, s) = ritz.expect("at least one Lanczos step");
        let mut y = vec![C64::new(0.0, 0.0); n];
        for (coef, q) in s.iter().zip(basis.iter()) {
            for (yi, qi) in y.iter_mut().zip(q) {
                *yi += qi * *coef;
            }
        }
        normalize(&mut y);
        best = DVector::from_vec(y.clone());
        if converged || basis_size == n {
            break;
        }
        start = y;
    }
    (best, total_steps)
}

/// Largest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`.
fn tridiagonal_top(alpha: &[f64], beta: &[f64]) -> (f64, DVector<f64>) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let mut top = 0;
    for i in 1..k {
        if eig.eigenvalues[i] > eig.eigenvalues[top] {
            top = i;
        }
    }
    (eig.eigenvalues[top], eig.eigenvectors.column(top).into_owned())
}
