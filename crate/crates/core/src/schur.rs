//! Completely bounded norms of Schur multipliers and the polarization of a
//! factorization into a difference of positive symbols.
//!
//! `‖M_a‖_cb = min max_s‖x_s‖·max_t‖y_t‖` over `a_st = ⟨x_s, y_t⟩`, with
//! `⟨x, y⟩ = Σ_k x_k ȳ_k`. Upper bounds come from explicit factorizations,
//! lower bounds from `‖M_a‖ ≥ ‖D_ξ a D_η‖₁` for unit vectors `ξ, η ≥ 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, op_norm, real};
use crate::C64;

/// Cap on alternating-projection sweeps per bisection level.
pub const PROJECTION_ITERATION_CAP: usize = 20_000;
/// Cap on bisection levels.
pub const BISECTION_CAP: usize = 60;
const DUAL_ASCENT_CAP: usize = 500;
/// Cap on dual scaling steps before falling back to projections.
pub const SCALING_ITERATION_CAP: usize = 20_000;
const WITNESS_CHECK_EVERY: usize = 10;
const WITNESS_ACCURACY: f64 = 1e-10;
const RANK_CUTOFF: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct SchurSymbol {
    matrix: DMatrix<C64>,
}

impl SchurSymbol {
    pub fn new(matrix: DMatrix<C64>) -> Self {
        SchurSymbol { matrix }
    }

    pub fn from_real(matrix: DMatrix<f64>) -> Self {
        SchurSymbol::new(matrix.map(real))
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// `M_a(x) = a ∘ x`.
    pub fn apply(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        self.matrix.component_mul(x)
    }

    pub fn adjoint(&self) -> SchurSymbol {
        SchurSymbol::new(self.matrix.adjoint())
    }

    /// The compression to the given rows and columns.
    pub fn compress(&self, rows: &[usize], cols: &[usize]) -> SchurSymbol {
        SchurSymbol::new(DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            self.matrix[(rows[i], cols[j])]
        }))
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Vectors with `⟨x_s, y_t⟩ = a_st`.
#[derive(Debug, Clone)]
pub struct CbFactorization {
    pub x: Vec<DVector<C64>>,
    pub y: Vec<DVector<C64>>,
    /// `max_s‖x_s‖ · max_t‖y_t‖`.
    pub value: f64,
}

fn inner(x: &DVector<C64>, y: &DVector<C64>) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

fn max_norm(v: &[DVector<C64>]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl CbFactorization {
    /// Rescales `x` and `y` in opposite directions so their maximal norms agree.
    pub fn balanced(mut self) -> Self {
        let px = max_norm(&self.x);
        let py = max_norm(&self.y);
        if px > 0.0 && py > 0.0 {
            let t = (py / px).sqrt();
            self.x.iter_mut().for_each(|v| *v *= real(t));
            self.y.iter_mut().for_each(|v| *v *= real(1.0 / t));
        }
        self.value = max_norm(&self.x) * max_norm(&self.y);
        self
    }

    /// The matrix `(⟨x_s, y_t⟩)`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.x.len(), self.y.len(), |s, t| inner(&self.x[s], &self.y[t]))
    }

    pub fn max_error(&self, a: &SchurSymbol) -> f64 {
        (self.reconstruct() - a.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Factors a PSD block matrix `[[P, a], [a*, Q]]` of size `m + n`.
    fn from_block(block: &DMatrix<C64>, m: usize) -> Self {
        let (vals, vecs) = hermitian_eigen(block);
        let h = block.nrows();
        let mut f = DMatrix::<C64>::zeros(h, h);
        for k in 0..h {
            let s = vals[k].max(0.0).sqrt();
            for r in 0..h {
                f[(r, k)] = vecs[(r, k)] * s;
            }
        }
        let x = (0..m).map(|s| f.row(s).transpose()).collect();
        let y = (m..h).map(|t| f.row(t).transpose()).collect();
        CbFactorization { x, y, value: 0.0 }.balanced()
    }
}

/// Result of the cb-norm computation.
#[derive(Debug, Clone)]
pub struct CbNorm {
    /// The certified upper bound, attained by `factorization`.
    pub value: f64,
    /// Certified lower bound `‖D_ξ a D_η‖₁`.
    pub lower: f64,
    pub upper: f64,
    pub factorization: CbFactorization,
    pub dual_xi: DVector<f64>,
    pub dual_eta: DVector<f64>,
    pub bisection_steps: usize,
    pub projection_iterations: usize,
}

impl CbNorm {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Factorization from the singular value decomposition `a = UΣV*`:
/// `x_s = (UΣ^½)_s`, `y_t = (VΣ^½)_t`.
pub fn polar_factorization(a: &SchurSymbol) -> CbFactorization {
    let svd = a.matrix().clone().svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let r = svd.singular_values.len();
    let x = (0..a.nrows())
        .map(|s| DVector::from_fn(r, |k, _| u[(s, k)] * svd.singular_values[k].sqrt()))
        .collect();
    let y = (0..a.ncols())
        .map(|t| DVector::from_fn(r, |k, _| v_t[(k, t)].conj() * svd.singular_values[k].sqrt()))
        .collect();
    CbFactorization { x, y, value: 0.0 }.balanced()
}

fn trace_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

fn weighted(a: &DMatrix<C64>, xi: &DVector<f64>, eta: &DVector<f64>) -> DMatrix<C64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |s, t| a[(s, t)] * (xi[s] * eta[t]))
}

fn positive_unit(v: DVector<f64>, fallback: &DVector<f64>) -> DVector<f64> {
    let v = v.map(|z| z.max(0.0));
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        fallback.clone()
    }
}

/// Alternating ascent of `‖D_ξ a D_η‖₁` from one starting pair.
pub fn dual_lower_bound(a: &SchurSymbol, xi0: DVector<f64>, eta0: DVector<f64>) -> (f64, DVector<f64>, DVector<f64>) {
    let mut xi = xi0;
    let mut eta = eta0;
    let mut best = trace_norm(&weighted(a.matrix(), &xi, &eta));
    for _ in 0..DUAL_ASCENT_CAP {
        let m = weighted(a.matrix(), &xi, &eta);
        let svd = m.svd(true, true);
        let w = svd.u.expect("requested") * svd.v_t.expect("requested");
        let b = DMatrix::from_fn(a.nrows(), a.ncols(), |s, t| (w[(s, t)].conj() * a.matrix()[(s, t)]).re);
        let new_xi = positive_unit(&b * &eta, &xi);
        let new_eta = positive_unit(b.transpose() * &new_xi, &eta);
        let value = trace_norm(&weighted(a.matrix(), &new_xi, &new_eta));
        if value <= best * (1.0 + 1e-15) {
            if value > best {
                best = value;
                xi = new_xi;
                eta = new_eta;
            }
            break;
        }
        best = value;
        xi = new_xi;
        eta = new_eta;
    }
    (best, xi, eta)
}

fn unit_basis(n: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })
}

fn best_dual(a: &SchurSymbol, witness: &CbFactorization) -> (f64, DVector<f64>, DVector<f64>) {
    let (m, n) = (a.nrows(), a.ncols());
    let mut starts = vec![(
        DVector::from_element(m, 1.0 / (m as f64).sqrt()),
        DVector::from_element(n, 1.0 / (n as f64).sqrt()),
    )];
    let (mut bs, mut bt, mut bv) = (0, 0, -1.0);
    for s in 0..m {
        for t in 0..n {
            if a.matrix()[(s, t)].norm() > bv {
                bv = a.matrix()[(s, t)].norm();
                bs = s;
                bt = t;
            }
        }
    }
    starts.push((unit_basis(m, bs), unit_basis(n, bt)));
    // Rows and columns of largest witness norm carry the extremal constraints.
    let xn = DVector::from_iterator(m, witness.x.iter().map(|v| v.norm_squared()));
    let yn = DVector::from_iterator(n, witness.y.iter().map(|v| v.norm_squared()));
    starts.push((positive_unit(xn, &starts[0].0), positive_unit(yn, &starts[0].1)));
    starts
        .into_iter()
        .map(|(xi, eta)| dual_lower_bound(a, xi, eta))
        .fold(None, |acc: Option<(f64, DVector<f64>, DVector<f64>)>, cand| match acc {
            Some(best) if best.0 >= cand.0 => Some(best),
            _ => Some(cand),
        })
        .expect("at least one start")
}

/// Factorization read off a dual pair: with `T = D_ξ a D_η = UΣV*`,
/// `x_s = (a D_η V Σ^{-½})_s` and `y_t = (a* D_ξ U Σ^{-½})_t`. For positive
/// weights these are `(UΣ^½)_s / ξ_s` and `(VΣ^½)_t / η_t`, and the form
/// without division stays accurate as weights of inactive rows decay.
/// Returns it with `‖T‖₁`.
fn scaled_factorization(a: &SchurSymbol, xi: &DVector<f64>, eta: &DVector<f64>) -> (CbFactorization, f64) {
    let t = weighted(a.matrix(), xi, eta);
    let svd = t.svd(true, true);
    let u = svd.u.expect("requested");
    let v = svd.v_t.expect("requested").adjoint();
    let sv = &svd.singular_values;
    let trace_norm = sv.iter().sum();
    let cutoff = sv.max() * RANK_CUTOFF;
    let keep: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] > cutoff).collect();
    let a_eta = DMatrix::from_fn(a.nrows(), a.ncols(), |s, t| a.matrix()[(s, t)] * real(eta[t]));
    let a_xi = DMatrix::from_fn(a.nrows(), a.ncols(), |s, t| a.matrix()[(s, t)] * real(xi[s])).adjoint();
    let xs = a_eta * &v;
    let ys = a_xi * &u;
    let x = (0..a.nrows())
        .map(|s| DVector::from_iterator(keep.len(), keep.iter().map(|&k| xs[(s, k)] / real(sv[k].sqrt()))))
        .collect();
    let y = (0..a.ncols())
        .map(|t| DVector::from_iterator(keep.len(), keep.iter().map(|&k| ys[(t, k)] / real(sv[k].sqrt()))))
        .collect();
    (CbFactorization { x, y, value: 0.0 }.balanced(), trace_norm)
}

/// Absorbs the residual `a − ⟨x, y⟩` into extra coordinates carrying its
/// polar factorization, scaled by `t` and `1/t`. Rows left out of the active
/// set usually have slack, so a good `t` costs nothing.
fn repaired(a: &SchurSymbol, fact: CbFactorization) -> CbFactorization {
    let residual = SchurSymbol::new(a.matrix() - fact.reconstruct());
    let extra = polar_factorization(&residual);
    let sq = |v: &[DVector<C64>]| v.iter().map(|z| z.norm_squared()).collect::<Vec<f64>>();
    let (ax, bx, ay, by) = (sq(&fact.x), sq(&extra.x), sq(&fact.y), sq(&extra.y));
    let cost = |log_t: f64| {
        let t2 = (2.0 * log_t).exp();
        let row = ax.iter().zip(&bx).map(|(p, q)| p + t2 * q).fold(0.0, f64::max);
        let col = ay.iter().zip(&by).map(|(p, q)| p + q / t2).fold(0.0, f64::max);
        (row * col).sqrt()
    };
    let mut best = (0.0, cost(0.0));
    for k in -80..=80 {
        let lt = 0.25 * k as f64;
        let v = cost(lt);
        if v < best.1 {
            best = (lt, v);
        }
    }
    let (mut lo, mut hi) = (best.0 - 0.25, best.0 + 0.25);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if cost(m1) <= cost(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = (0.5 * (lo + hi)).exp();
    let join = |base: &[DVector<C64>], add: &[DVector<C64>], scale: f64| -> Vec<DVector<C64>> {
        base.iter()
            .zip(add)
            .map(|(b, e)| {
                DVector::from_iterator(b.len() + e.len(), b.iter().copied().chain(e.iter().map(|z| z * scale)))
            })
            .collect()
    };
    let x = join(&fact.x, &extra.x, t);
    let y = join(&fact.y, &extra.y, 1.0 / t);
    CbFactorization { x, y, value: 0.0 }.balanced()
}

struct Scaling {
    lower: f64,
    xi: DVector<f64>,
    eta: DVector<f64>,
    witness: CbFactorization,
    iterations: usize,
}

/// Gradient ascent of `‖D_ξ a D_η‖₁` over positive unit vectors. The gradient
/// in `ξ` is `ξ_s‖x_s‖²` for the scaled factorization, so the ascent also
/// equalizes the row norms and drives the factorization value down to the
/// dual value. Requires `a` without zero rows or columns.
fn scaling_ascent(a: &SchurSymbol, tol: f64) -> Scaling {
    let (m, n) = (a.nrows(), a.ncols());
    let mut xi = DVector::from_element(m, 1.0 / (m as f64).sqrt());
    let mut eta = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let (mut witness, mut lower) = scaled_factorization(a, &xi, &eta);
    let accuracy = WITNESS_ACCURACY * a.max_abs_entry();
    let (mut best_xi, mut best_eta) = (xi.clone(), eta.clone());
    let mut iterations = 0;
    for it in 1..=SCALING_ITERATION_CAP {
        iterations = it;
        let (fact, _) = scaled_factorization(a, &xi, &eta);
        let gx = DVector::from_fn(m, |s, _| xi[s] * fact.x[s].norm_squared());
        xi = &gx / gx.norm();
        let (fact, _) = scaled_factorization(a, &xi, &eta);
        let gy = DVector::from_fn(n, |t, _| eta[t] * fact.y[t].norm_squared());
        eta = &gy / gy.norm();
        if !(xi.iter().all(|v| v.is_finite()) && eta.iter().all(|v| v.is_finite())) {
            break;
        }
        let (fact, value) = scaled_factorization(a, &xi, &eta);
        if value > lower {
            lower = value;
            best_xi = xi.clone();
            best_eta = eta.clone();
        }
        let fact = if fact.max_error(a) > accuracy {
            repaired(a, fact)
        } else {
            fact
        };
        if fact.value < witness.value && fact.max_error(a) <= accuracy {
            witness = fact;
        }
        if witness.value - lower <= tol {
            break;
        }
    }
    Scaling {
        lower,
        xi: best_xi,
        eta: best_eta,
        witness,
        iterations,
    }
}

/// Runs the scaling ascent on the nonzero rows and columns and pads back.
fn scaling_on_support(a: &SchurSymbol, tol: f64) -> Scaling {
    let (m, n) = a.matrix().shape();
    let rows: Vec<usize> = (0..m)
        .filter(|&s| a.matrix().row(s).iter().any(|z| z.norm() > 0.0))
        .collect();
    let cols: Vec<usize> = (0..n)
        .filter(|&t| a.matrix().column(t).iter().any(|z| z.norm() > 0.0))
        .collect();
    if rows.is_empty() {
        let zero = DVector::zeros(1);
        return Scaling {
            lower: 0.0,
            xi: DVector::from_element(m, 1.0 / (m as f64).sqrt()),
            eta: DVector::from_element(n, 1.0 / (n as f64).sqrt()),
            witness: CbFactorization {
                x: vec![zero.clone(); m],
                y: vec![zero; n],
                value: 0.0,
            },
            iterations: 0,
        };
    }
    let inner = scaling_ascent(&a.compress(&rows, &cols), tol);
    let r = inner.witness.x[0].len();
    let mut x = vec![DVector::zeros(r); m];
    let mut y = vec![DVector::zeros(r); n];
    let mut xi = DVector::zeros(m);
    let mut eta = DVector::zeros(n);
    for (k, &s) in rows.iter().enumerate() {
        x[s] = inner.witness.x[k].clone();
        xi[s] = inner.xi[k];
    }
    for (k, &t) in cols.iter().enumerate() {
        y[t] = inner.witness.y[k].clone();
        eta[t] = inner.eta[k];
    }
    Scaling {
        lower: inner.lower,
        xi,
        eta,
        witness: CbFactorization {
            x,
            y,
            value: inner.witness.value,
        },
        iterations: inner.iterations,
    }
}

fn block_of(f: &CbFactorization, m: usize, n: usize) -> DMatrix<C64> {
    let vecs: Vec<&DVector<C64>> = f.x.iter().chain(f.y.iter()).collect();
    DMatrix::from_fn(m + n, m + n, |i, j| inner(vecs[i], vecs[j]))
}

fn project_psd(y: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = hermitian_eigen(y);
    let h = y.nrows();
    let mut f = DMatrix::<C64>::zeros(h, h);
    for k in 0..h {
        let s = vals[k].max(0.0).sqrt();
        for r in 0..h {
            f[(r, k)] = vecs[(r, k)] * s;
        }
    }
    &f * f.adjoint()
}

fn project_affine(x: &mut DMatrix<C64>, a: &DMatrix<C64>, c: f64) {
    let (m, n) = a.shape();
    for s in 0..m {
        for t in 0..n {
            x[(s, m + t)] = a[(s, t)];
            x[(m + t, s)] = a[(s, t)].conj();
        }
    }
    for i in 0..m + n {
        x[(i, i)] = real(c);
    }
}

/// Turns a PSD `X` with `X₁₂ ≈ a` into an exact completion by adding
/// `[[δI, −E], [−E*, δI]] ⪰ 0` with `E = X₁₂ − a` and `δ = ‖E‖`.
fn exact_completion(x: &DMatrix<C64>, a: &DMatrix<C64>) -> DMatrix<C64> {
    let (m, n) = a.shape();
    let e = x.view((0, m), (m, n)) - a;
    let delta = op_norm(&e);
    let mut out = x.clone();
    for s in 0..m {
        for t in 0..n {
            out[(s, m + t)] = a[(s, t)];
            out[(m + t, s)] = a[(s, t)].conj();
        }
    }
    for i in 0..m + n {
        out[(i, i)] += real(delta);
    }
    out
}

struct LevelOutcome {
    witness: Option<CbFactorization>,
    iterate: DMatrix<C64>,
    iterations: usize,
}

/// Alternating projections between the PSD cone and `{X₁₂ = a, diag X = c}`.
fn try_level(a: &SchurSymbol, c: f64, start: &DMatrix<C64>, accept: f64) -> LevelOutcome {
    let m = a.nrows();
    let mut x = start.clone();
    let mut best: Option<CbFactorization> = None;
    for it in 1..=PROJECTION_ITERATION_CAP {
        project_affine(&mut x, a.matrix(), c);
        x = project_psd(&x);
        if it % WITNESS_CHECK_EVERY == 0 {
            let fact = CbFactorization::from_block(&exact_completion(&x, a.matrix()), m);
            if best.as_ref().is_none_or(|b| fact.value < b.value) {
                best = Some(fact);
            }
            if best.as_ref().is_some_and(|b| b.value <= accept) {
                return LevelOutcome {
                    witness: best,
                    iterate: x,
                    iterations: it,
                };
            }
        }
    }
    LevelOutcome {
        witness: best,
        iterate: x,
        iterations: PROJECTION_ITERATION_CAP,
    }
}

/// The cb-norm of `M_a` to within `tol`, with a factorization attaining the
/// upper end and a dual pair certifying the lower end.
pub fn cb_norm(a: &SchurSymbol, tol: f64) -> Result<CbNorm> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::BadParameter(format!("tolerance {tol} must be positive")));
    }
    if a.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::BadParameter("symbol has non-finite entries".into()));
    }
    let (m, n) = a.matrix().shape();
    let mut witness = polar_factorization(a);
    let (mut lower, mut xi, mut eta) = best_dual(a, &witness);
    lower = lower.max(a.max_abs_entry());
    let mut steps = 0;
    let mut iterations = 0;
    if witness.value - lower > tol {
        let scaled = scaling_on_support(a, tol);
        iterations += scaled.iterations;
        if scaled.lower > lower {
            lower = scaled.lower;
            xi = scaled.xi;
            eta = scaled.eta;
        }
        if scaled.witness.value < witness.value {
            witness = scaled.witness;
        }
    }
    if witness.value - lower > tol {
        let mut lo = lower;
        let mut start = block_of(&witness, m, n);
        let mut first = true;
        while witness.value - lo > tol && steps < BISECTION_CAP {
            steps += 1;
            let c = if first {
                lower + 0.5 * tol
            } else {
                0.5 * (lo + witness.value)
            };
            first = false;
            let outcome = try_level(a, c, &start, c + 0.25 * tol);
            iterations += outcome.iterations;
            let found = outcome
                .witness
                .filter(|w| w.value < witness.value)
                .map(|w| {
                    let hit = w.value <= c + 0.25 * tol;
                    witness = w;
                    hit
                })
                .unwrap_or(false);
            if found {
                start = outcome.iterate;
            } else {
                lo = c;
            }
        }
        let refined = best_dual(a, &witness);
        if refined.0 > lower {
            lower = refined.0;
            xi = refined.1;
            eta = refined.2;
        }
    }
    if witness.value - lower > tol {
        return Err(Error::NoConvergence {
            iterations,
            lower,
            upper: witness.value,
        });
    }
    Ok(CbNorm {
        value: witness.value,
        lower,
        upper: witness.value,
        factorization: witness,
        dual_xi: xi,
        dual_eta: eta,
        bisection_steps: steps,
        projection_iterations: iterations,
    })
}

/// `a = Gram((x+y)/2)`, `b = Gram((x−y)/2)` and the diagonal padding `d`.
#[derive(Debug, Clone)]
pub struct Polarization {
    pub a: DMatrix<C64>,
    pub b: DMatrix<C64>,
    pub d: DVector<f64>,
    pub eps: f64,
    /// `‖M_b‖_cb = max_s‖(x_s−y_s)/2‖²`.
    pub b_cb_norm: f64,
    /// `max|a − b − f|`.
    pub reconstruction_error: f64,
}

/// Splits `f_st = ⟨x_s, y_t⟩` (real symmetric, unit diagonal) as `a − b` with
/// `a, b` positive. Without `eps`, the factorization is balanced and
/// `eps = max(‖x_s‖², ‖y_s‖²) − 1`.
pub fn polarize(x: &[DVector<C64>], y: &[DVector<C64>], eps: Option<f64>) -> Result<Polarization> {
    const SYMBOL_TOL: f64 = 1e-7;
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::PreconditionViolated(format!(
            "need equally many nonempty x and y vectors, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let h = x[0].len();
    if x.iter().chain(y.iter()).any(|v| v.len() != h) {
        return Err(Error::PreconditionViolated("vectors of different lengths".into()));
    }
    let mut fact = CbFactorization {
        x: x.to_vec(),
        y: y.to_vec(),
        value: 0.0,
    };
    if eps.is_none() {
        fact = fact.balanced();
    }
    let m = x.len();
    let f = fact.reconstruct();
    for s in 0..m {
        if (f[(s, s)] - real(1.0)).norm() > SYMBOL_TOL {
            return Err(Error::PreconditionViolated(format!(
                "f({s},{s}) = {} is not 1",
                f[(s, s)]
            )));
        }
        for t in 0..m {
            if f[(s, t)].im.abs() > SYMBOL_TOL || (f[(s, t)] - f[(t, s)]).norm() > SYMBOL_TOL {
                return Err(Error::PreconditionViolated(format!(
                    "f is not real symmetric at ({s},{t})"
                )));
            }
        }
    }
    let max_sq = fact
        .x
        .iter()
        .chain(fact.y.iter())
        .map(|v| v.norm_squared())
        .fold(0.0, f64::max);
    let eps = match eps {
        Some(e) => {
            if max_sq > 1.0 + e + 1e-12 {
                return Err(Error::PreconditionViolated(format!(
                    "max squared norm {max_sq} exceeds 1 + eps = {}",
                    1.0 + e
                )));
            }
            e
        }
        None => (max_sq - 1.0).max(0.0),
    };
    let plus: Vec<DVector<C64>> = fact.x.iter().zip(&fact.y).map(|(p, q)| (p + q) * real(0.5)).collect();
    let minus: Vec<DVector<C64>> = fact.x.iter().zip(&fact.y).map(|(p, q)| (p - q) * real(0.5)).collect();
    let gram = |v: &[DVector<C64>]| DMatrix::from_fn(m, m, |s, t| inner(&v[s], &v[t]));
    let a = gram(&plus);
    let b = gram(&minus);
    let d = DVector::from_fn(m, |s, _| 1.0 + eps - a[(s, s)].re);
    let b_cb_norm = (0..m).map(|s| b[(s, s)].re).fold(0.0, f64::max);
    let reconstruction_error = (&a - &b - &f).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(Polarization {
        a,
        b,
        d,
        eps,
        b_cb_norm,
        reconstruction_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn all_ones_has_norm_one() {
        let a = SchurSymbol::from_real(DMatrix::from_element(4, 4, 1.0));
        let r = cb_norm(&a, 1e-9).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert!(r.factorization.max_error(&a) < 1e-10);
    }

    #[test]
    fn rotation_symbol_is_sqrt_two() {
        let a = SchurSymbol::from_real(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0]));
        let r = cb_norm(&a, 1e-9).unwrap();
        assert!((r.value - 2f64.sqrt()).abs() < 1e-9);
        assert!((r.lower - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn identity_symbol_polarizes_trivially() {
        let e: Vec<DVector<C64>> = (0..3)
            .map(|s| DVector::from_fn(3, |k, _| real(if k == s { 1.0 } else { 0.0 })))
            .collect();
        let p = polarize(&e, &e, None).unwrap();
        assert!((p.a.clone() - DMatrix::<C64>::identity(3, 3))
            .iter()
            .all(|z| z.norm() < 1e-15));
        assert!(p.b.iter().all(|z| z.norm() < 1e-15));
        assert_eq!(p.eps, 0.0);
    }

    #[test]
    fn polarize_rejects_non_unital_symbols() {
        let x = vec![DVector::from_vec(vec![c(2.0, 0.0)])];
        assert!(matches!(polarize(&x, &x, None), Err(Error::PreconditionViolated(_))));
    }
}
