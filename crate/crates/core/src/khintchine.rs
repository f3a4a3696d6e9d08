//! Khintchine-type two-sided estimates for homogeneous elements, band
//! decompositions, projection bounds and certified norm enclosures.

use std::collections::HashMap;

use nalgebra::DVector;
use nalgebra_sparse::CscMatrix;

use crate::algebra::Letter;
use crate::error::{Error, Result};
use crate::fock::{
    projection_pk, represent_element, represent_letter, represent_with_degree, submatrix, BandOperator, FockSpace,
};
use crate::freepoly::{FreeElement, MatrixElement};
use crate::linalg::{csc_from_columns, largest_singular_value, real, SingularEstimate};
use crate::C64;

/// Relative tolerance of every two-sided assertion.
pub const SANDWICH_TOL: f64 = 1e-8;

/// A compression of an operator to selected basis words, amplified by `M_s`.
#[derive(Debug, Clone)]
pub struct CompressedBlock {
    /// Fock indices of the target words, in increasing order.
    pub rows: Vec<usize>,
    /// Fock indices of the source words, in increasing order.
    pub cols: Vec<usize>,
    pub matrix: CscMatrix<C64>,
}

impl CompressedBlock {
    pub fn norm(&self) -> SingularEstimate {
        largest_singular_value(&self.matrix)
    }
}

/// The compressions realizing `ι(x)` for a homogeneous `x` of degree `d`.
#[derive(Debug, Clone)]
pub struct IotaBlocks {
    pub degree: usize,
    pub amplification: usize,
    /// `plain_blocks[k]`: length-`(d−k)` stratum to length-`k` stratum.
    pub plain_blocks: Vec<CompressedBlock>,
    /// `diag_blocks[k][j]`: the `(S, T)` compression for the diagonal slot `k+1` in algebra `j`.
    pub diag_blocks: Vec<Vec<CompressedBlock>>,
}

/// The `2d+1` block norms behind `‖ι(x)‖`.
#[derive(Debug, Clone)]
pub struct EdNorm {
    pub value: f64,
    /// Certified upper end of `value`.
    pub upper: f64,
    pub plain: Vec<f64>,
    /// Per `k`, the maximum over `j`.
    pub diagonal: Vec<f64>,
    pub diagonal_by_algebra: Vec<Vec<f64>>,
}

fn select(indices: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = indices.collect();
    v.sort_unstable();
    v
}

/// Entries of `a` between the given word lists, each word carrying `amp` slots.
pub fn compress(a: &CscMatrix<C64>, rows: &[usize], cols: &[usize], amp: usize) -> CscMatrix<C64> {
    let row_pos: HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let offsets = a.col_offsets();
    let ri = a.row_indices();
    let vals = a.values();
    let mut columns = Vec::with_capacity(cols.len() * amp);
    for &w in cols {
        for c in 0..amp {
            let col = w * amp + c;
            let mut column = Vec::new();
            if col < a.ncols() {
                for k in offsets[col]..offsets[col + 1] {
                    if let Some(&pos) = row_pos.get(&(ri[k] / amp)) {
                        column.push((pos * amp + ri[k] % amp, vals[k]));
                    }
                }
            }
            columns.push(column);
        }
    }
    csc_from_columns(rows.len() * amp, columns)
}

fn working_space(fock: &FockSpace, needed: usize) -> Result<FockSpace> {
    if fock.max_len() >= needed {
        Ok(fock.clone())
    } else {
        FockSpace::new(fock.family(), needed)
    }
}

/// Builds the plain and diagonal compressions of a homogeneous `x`.
pub fn iota(x: &MatrixElement, fock: &FockSpace) -> Result<IotaBlocks> {
    let d = x.degree();
    if !x.is_homogeneous(d) {
        return Err(Error::NotHomogeneous(d));
    }
    if fock.max_len() < d {
        return Err(Error::TruncationTooSmall {
            needed: d,
            available: fock.max_len(),
        });
    }
    let space = working_space(fock, 2 * d)?;
    let op = represent_with_degree(&space, x, d, d)?;
    let amp = x.size();
    let words_of = |p: usize| space.stratum_range(p);
    let last_of = |w: usize| space.word(w).last().map(|&(i, _)| i);

    let plain_blocks = (0..=d)
        .map(|k| {
            let rows: Vec<usize> = words_of(k).collect();
            let cols: Vec<usize> = words_of(d - k).collect();
            let matrix = submatrix(op.matrix(), op.stratum_range(k), op.stratum_range(d - k));
            CompressedBlock { rows, cols, matrix }
        })
        .collect();

    let n = space.num_algebras();
    let diag_blocks = (0..d)
        .map(|k| {
            (0..n)
                .map(|j| {
                    let cols = select(
                        words_of(d - k - 1)
                            .filter(|&w| last_of(w) != Some(j))
                            .chain(words_of(d - k).filter(|&w| last_of(w) == Some(j))),
                    );
                    let rows = select(
                        words_of(k)
                            .filter(|&w| last_of(w) != Some(j))
                            .chain(words_of(k + 1).filter(|&w| last_of(w) == Some(j))),
                    );
                    let matrix = compress(op.matrix(), &rows, &cols, amp);
                    CompressedBlock { rows, cols, matrix }
                })
                .collect()
        })
        .collect();

    Ok(IotaBlocks {
        degree: d,
        amplification: amp,
        plain_blocks,
        diag_blocks,
    })
}

/// `‖ι(x)‖`: the largest of the `2d+1` block norms.
pub fn ed_norm(blocks: &IotaBlocks) -> f64 {
    ed_norm_detail(blocks).value
}

pub fn ed_norm_detail(blocks: &IotaBlocks) -> EdNorm {
    let plain_est: Vec<SingularEstimate> = blocks.plain_blocks.iter().map(CompressedBlock::norm).collect();
    let diag_est: Vec<Vec<SingularEstimate>> = blocks
        .diag_blocks
        .iter()
        .map(|row| row.iter().map(CompressedBlock::norm).collect())
        .collect();
    let plain: Vec<f64> = plain_est.iter().map(|e| e.sigma).collect();
    let diagonal_by_algebra: Vec<Vec<f64>> = diag_est
        .iter()
        .map(|row| row.iter().map(|e| e.sigma).collect())
        .collect();
    let diagonal: Vec<f64> = diagonal_by_algebra
        .iter()
        .map(|row| row.iter().cloned().fold(0.0, f64::max))
        .collect();
    let value = plain.iter().chain(diagonal.iter()).cloned().fold(0.0, f64::max);
    let upper = plain_est
        .iter()
        .chain(diag_est.iter().flatten())
        .map(SingularEstimate::upper)
        .fold(0.0, f64::max);
    EdNorm {
        value,
        upper,
        plain,
        diagonal,
        diagonal_by_algebra,
    }
}

/// Outcome of one two-sided `(K_d)` check.
#[derive(Debug, Clone)]
pub struct KdReport {
    pub degree: usize,
    pub amplification: usize,
    pub domain_len: usize,
    pub ed: EdNorm,
    pub truncated_norm: f64,
    pub truncated_residual: f64,
    pub ratio: f64,
    pub constant: f64,
    pub tol: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    /// `(√N+1)d+1` against the diagonal families alone, reported but not asserted.
    pub finite_index: Option<FiniteIndexReport>,
}

#[derive(Debug, Clone)]
pub struct FiniteIndexReport {
    pub constant: f64,
    pub diagonal_norm: f64,
    pub holds: bool,
}

impl KdReport {
    pub fn passed(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Checks `‖ι(x)‖ ≤ ‖x‖_{F_L} ≤ (2d+1)‖ι(x)‖` on one instance.
pub fn verify_kd(x: &MatrixElement, fock: &FockSpace, domain_len: usize) -> Result<KdReport> {
    let d = x.degree();
    if domain_len < d {
        return Err(Error::BadParameter(format!(
            "domain length {domain_len} is below the degree {d}"
        )));
    }
    if fock.max_len() < domain_len + d {
        return Err(Error::TruncationTooSmall {
            needed: domain_len + d,
            available: fock.max_len(),
        });
    }
    let blocks = iota(x, fock)?;
    let ed = ed_norm_detail(&blocks);
    let op = represent_with_degree(fock, x, domain_len, d)?;
    let t = op.norm();
    let e = ed.value;
    let constant = (2 * d + 1) as f64;
    let tol = SANDWICH_TOL * e.max(1.0);
    let finite_index = if d >= 1 {
        let n = fock.num_algebras() as f64;
        let c = (n.sqrt() + 1.0) * d as f64 + 1.0;
        let diag = ed.diagonal.iter().cloned().fold(0.0, f64::max);
        Some(FiniteIndexReport {
            constant: c,
            diagonal_norm: diag,
            holds: t.sigma <= c * diag + tol,
        })
    } else {
        None
    };
    Ok(KdReport {
        degree: d,
        amplification: x.size(),
        domain_len,
        truncated_norm: t.sigma,
        truncated_residual: t.residual,
        ratio: if e > 0.0 { t.sigma / e } else { f64::NAN },
        constant,
        tol,
        lower_holds: e <= t.sigma + tol,
        upper_holds: t.sigma <= constant * e + tol,
        finite_index,
        ed,
    })
}

/// Radius beyond which `‖H_n(x)|_{H'_p}‖` no longer changes: `⌈(d−n)/2⌉`.
///
/// A diagonal step needs `q+1` letters after `q` annihilations, so with
/// `d − n` odd the supremum can first be reached at `p = (d−n+1)/2`.
pub fn stagnation_radius(degree: usize, n: i64) -> usize {
    let gap = degree as i64 - n;
    debug_assert!(gap >= 0);
    ((gap + 1) / 2) as usize
}

/// The radius `⌊(d−n)/2⌋` named in the stagnation lemma.
pub fn stated_stagnation_radius(degree: usize, n: i64) -> usize {
    ((degree as i64 - n) / 2) as usize
}

/// Band component norms for one `n`.
#[derive(Debug, Clone)]
pub struct BandCertificate {
    pub n: i64,
    pub radius: usize,
    pub norm: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub struct KhintchineCertificate {
    pub degree: usize,
    pub ed_norm: f64,
    pub weighted: f64,
}

/// A certified interval for the norm of `x` in the reduced free product.
#[derive(Debug, Clone)]
pub struct NormEnclosure {
    pub lower: f64,
    pub upper: f64,
    /// Truncation length and unit vector attaining `lower`.
    pub lower_witness: (usize, DVector<C64>),
    /// `‖x|_{F_p}‖` for `p = 0..=L`.
    pub lower_profile: Vec<f64>,
    pub band: Vec<BandCertificate>,
    pub band_sum: f64,
    pub khintchine: Vec<KhintchineCertificate>,
    pub khintchine_sum: f64,
}

impl NormEnclosure {
    pub fn is_consistent(&self) -> bool {
        self.lower <= self.upper + 1e-9 * self.upper.max(1.0)
    }
}

/// Lower bound from compressions to `F_p`, upper bound from band components
/// on their stagnation radius and from the per-degree Khintchine estimate.
pub fn enclose_norm(x: &MatrixElement, fock: &FockSpace, domain_len: usize) -> Result<NormEnclosure> {
    let d = x.degree();
    let needed = domain_len.max(d) + d;
    if fock.max_len() < needed {
        return Err(Error::TruncationTooSmall {
            needed,
            available: fock.max_len(),
        });
    }
    let full = represent_with_degree(fock, x, domain_len.max(d), d)?;

    let mut lower_profile = Vec::with_capacity(domain_len + 1);
    let mut best: Option<(usize, SingularEstimate)> = None;
    for p in 0..=domain_len {
        let est = full.restrict_domain(p).norm();
        lower_profile.push(est.sigma);
        if best.as_ref().is_none_or(|(_, b)| est.sigma > b.sigma) {
            best = Some((p, est));
        }
    }
    let (witness_len, witness) = best.expect("profile is nonempty");

    let mut band = Vec::with_capacity(2 * d + 1);
    for n in -(d as i64)..=(d as i64) {
        let radius = stagnation_radius(d, n);
        let est = full.band_component(n)?.restrict_domain(radius).norm();
        band.push(BandCertificate {
            n,
            radius,
            norm: est.sigma,
            upper: est.upper(),
        });
    }
    let band_sum = band.iter().map(|b| b.upper).sum::<f64>();

    let mut khintchine = Vec::with_capacity(d + 1);
    for e in 0..=d {
        let part = x.homogeneous_part(e);
        let ed = if part.parts().iter().all(|(_, p)| p.is_zero()) {
            0.0
        } else {
            ed_norm_detail(&iota(&part, fock)?).upper
        };
        khintchine.push(KhintchineCertificate {
            degree: e,
            ed_norm: ed,
            weighted: (2 * e + 1) as f64 * ed,
        });
    }
    let khintchine_sum = khintchine.iter().map(|k| k.weighted).sum::<f64>();

    Ok(NormEnclosure {
        lower: witness.sigma,
        upper: band_sum.min(khintchine_sum),
        lower_witness: (witness_len, witness.vector),
        lower_profile,
        band,
        band_sum,
        khintchine,
        khintchine_sum,
    })
}

/// One-sided projection checks against certified bounds.
#[derive(Debug, Clone)]
pub struct ProjectionReport {
    pub d: usize,
    pub upper_x: f64,
    pub lower_qd: f64,
    pub lower_pd: f64,
    pub qd_constant: f64,
    pub pd_constant: f64,
    pub tol: f64,
    pub qd_holds: bool,
    pub pd_holds: bool,
}

impl ProjectionReport {
    pub fn passed(&self) -> bool {
        self.qd_holds && self.pd_holds
    }
}

/// `lower(𝒬_d x) ≤ (2d+1)·upper(x)` and `lower(𝒫_d x) ≤ max(4d,1)·upper(x)`.
pub fn verify_projection_bounds(
    x: &MatrixElement,
    fock: &FockSpace,
    d: usize,
    domain_len: usize,
) -> Result<ProjectionReport> {
    let whole = enclose_norm(x, fock, domain_len)?;
    let qd = x.truncate_degree(d);
    let pd = x.homogeneous_part(d);
    let lower_of = |y: &MatrixElement| -> Result<f64> {
        let op = represent_with_degree(fock, y, domain_len, y.degree())?;
        Ok(op.norm().sigma)
    };
    let lower_qd = lower_of(&qd)?;
    let lower_pd = lower_of(&pd)?;
    let qd_constant = (2 * d + 1) as f64;
    let pd_constant = (4 * d).max(1) as f64;
    let tol = SANDWICH_TOL * whole.upper.max(1.0);
    Ok(ProjectionReport {
        d,
        upper_x: whole.upper,
        lower_qd,
        lower_pd,
        qd_constant,
        pd_constant,
        tol,
        qd_holds: lower_qd <= qd_constant * whole.upper + tol,
        pd_holds: lower_pd <= pd_constant * whole.upper + tol,
    })
}

/// `‖H_n(x)|_{H'_p}‖` for `p = 0..=max_p`, each a single stratum block.
pub fn stagnation_profile(x: &MatrixElement, fock: &FockSpace, n: i64, max_p: usize) -> Result<Vec<f64>> {
    let d = x.degree();
    let op = represent_with_degree(fock, x, max_p, d)?;
    stratum_profile(&op, n, max_p)
}

fn stratum_profile(op: &BandOperator, n: i64, max_p: usize) -> Result<Vec<f64>> {
    let band = op.band_component(n)?;
    Ok((0..=max_p)
        .map(|p| {
            let q = p as i64 + n;
            if q < 0 {
                0.0
            } else {
                largest_singular_value(&band.block(q as usize, p)).sigma
            }
        })
        .collect())
}

/// Per-`n` stagnation data for `x ∈ W_d` up to `max_p`.
#[derive(Debug, Clone)]
pub struct StagnationRow {
    pub n: i64,
    pub profile: Vec<f64>,
    pub stated_radius: usize,
    pub radius: usize,
    /// Largest deviation from the value at the stated radius, for `p ≥ stated_radius`.
    pub stated_spread: f64,
    /// Largest deviation from the value at `radius + 1`, for `p ≥ radius + 1`.
    pub tail_spread: f64,
    /// `max_{p ≤ radius}` minus `max_p` over the whole profile.
    pub sup_gap: f64,
}

pub fn stagnation_check(x: &MatrixElement, fock: &FockSpace, max_p: usize) -> Result<Vec<StagnationRow>> {
    let d = x.degree();
    let op = represent_with_degree(fock, x, max_p, d)?;
    let mut rows = Vec::with_capacity(2 * d + 1);
    for n in -(d as i64)..=(d as i64) {
        let profile = stratum_profile(&op, n, max_p)?;
        let stated = stated_stagnation_radius(d, n);
        let radius = stagnation_radius(d, n);
        let spread_from = |start: usize| {
            if start > max_p {
                return 0.0;
            }
            let base = profile[start];
            profile[start..].iter().map(|v| (v - base).abs()).fold(0.0, f64::max)
        };
        let sup_all = profile.iter().cloned().fold(0.0, f64::max);
        let sup_head = profile[..=radius.min(max_p)].iter().cloned().fold(0.0, f64::max);
        rows.push(StagnationRow {
            n,
            stated_radius: stated,
            radius,
            stated_spread: spread_from(stated),
            tail_spread: spread_from(radius + 1),
            sup_gap: sup_all - sup_head,
            profile,
        });
    }
    Ok(rows)
}

/// The `2d+1` sandwiched products decomposing one word, as square
/// matrices on `F_M` restricted to columns of `F_{M−d}`.
pub fn factdec_terms(fock: &FockSpace, letters: &[Letter]) -> Result<Vec<CscMatrix<C64>>> {
    let d = letters.len();
    let m = fock.max_len();
    if m < d {
        return Err(Error::TruncationTooSmall {
            needed: d,
            available: m,
        });
    }
    let big = FockSpace::new(fock.family(), m + 1)?;
    let dim = fock.dim(m);
    let identity = crate::linalg::csc_from_columns(dim, (0..dim).map(|i| vec![(i, real(1.0))]).collect());
    let mut pieces = Vec::with_capacity(d);
    for l in letters {
        let a = represent_letter(&big, l, m)?;
        let a = submatrix(a.matrix(), 0..dim, 0..dim);
        let p = projection_pk(fock, l.algebra, m)?;
        let q = &identity - &p;
        // Indexed by (left projection, right projection), `true` meaning P.
        let sandwich = |left: bool, right: bool| {
            let lp = if left { &p } else { &q };
            let rp = if right { &p } else { &q };
            &(lp * &a) * rp
        };
        pieces.push([sandwich(true, false), sandwich(false, true), sandwich(true, true)]);
    }
    let product = |choice: &dyn Fn(usize) -> usize| {
        let mut acc = identity.clone();
        for (idx, piece) in pieces.iter().enumerate() {
            acc = &acc * &piece[choice(idx)];
        }
        submatrix(&acc, 0..dim, 0..fock.dim(m - d))
    };
    let mut terms = Vec::with_capacity(2 * d + 1);
    for k in 0..=d {
        terms.push(product(&|idx| if idx < k { 0 } else { 1 }));
    }
    for k in 0..d {
        terms.push(product(&|idx| match idx.cmp(&k) {
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => 2,
            std::cmp::Ordering::Greater => 1,
        }));
    }
    Ok(terms)
}

/// Largest entrywise gap between the factdec sum and the exact representation.
pub fn factdec_defect(fock: &FockSpace, letters: &[Letter]) -> Result<f64> {
    let terms = factdec_terms(fock, letters)?;
    let d = letters.len();
    let x = FreeElement::word(fock.family(), letters.to_vec(), real(1.0))?;
    let exact = represent_element(fock, &x, fock.max_len() - d)?;
    let sum = terms.into_iter().reduce(|a, b| a + b).expect("at least one term");
    Ok(crate::linalg::sparse_max_abs_diff(&sum, exact.matrix()))
}
