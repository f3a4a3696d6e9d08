//! The truncated free Fock space and exact rectangular representations.
//!
//! Basis words are ordered by length, then lexicographically by index tuple,
//! then by basis-element tuple. Every truncation `F_p` is therefore a prefix of
//! the enumeration, and a word has the same index in every space containing it.
//! Operators act from `F_L` into `F_{L+d}`, so no column is ever truncated.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::DMatrix;
use nalgebra_sparse::CscMatrix;

use crate::algebra::AlgebraWithState;
use crate::error::{Error, Result};
use crate::freepoly::{Family, FreeElement, MatrixElement};
use crate::linalg::{csc_from_columns, largest_singular_value, real, SingularEstimate};
use crate::C64;

/// Letters `(algebra, hbar index)`, leftmost first.
pub type Word = Vec<(usize, usize)>;

/// Entries of a letter's GNS matrix below this fraction of its largest entry are dropped.
const ACTION_DROP: f64 = 1e-15;

#[derive(Debug, Clone)]
struct Stratum {
    offset: usize,
    /// Admissible index tuples in lexicographic order.
    tuples: Vec<Vec<usize>>,
    /// Start of each tuple block relative to `offset`, plus the total.
    tuple_offsets: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FockSpace {
    family: Arc<Family>,
    max_len: usize,
    hbar_dims: Vec<usize>,
    strata: Vec<Stratum>,
    /// `offsets[p]` is the index of the first length-`p` word; `offsets[L+1] = dim`.
    offsets: Vec<usize>,
}

impl FockSpace {
    pub fn new(family: &Arc<Family>, max_len: usize) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::BadParameter("empty algebra family".into()));
        }
        let hbar_dims: Vec<usize> = family.algebras().iter().map(|a| a.hbar_dim()).collect();
        let mut strata = Vec::with_capacity(max_len + 1);
        let mut offsets = Vec::with_capacity(max_len + 2);
        let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
        let mut next = 0usize;
        for p in 0..=max_len {
            if p > 0 {
                tuples = tuples
                    .iter()
                    .flat_map(|t| {
                        (0..family.len()).filter(move |&i| t.last() != Some(&i)).map(move |i| {
                            let mut u = t.clone();
                            u.push(i);
                            u
                        })
                    })
                    .collect();
            }
            let mut tuple_offsets = Vec::with_capacity(tuples.len() + 1);
            let mut acc = 0usize;
            for t in &tuples {
                tuple_offsets.push(acc);
                let size = t
                    .iter()
                    .try_fold(1usize, |s, &i| s.checked_mul(hbar_dims[i]))
                    .ok_or_else(|| Error::BadParameter("Fock space dimension overflows".into()))?;
                acc = acc
                    .checked_add(size)
                    .ok_or_else(|| Error::BadParameter("Fock space dimension overflows".into()))?;
            }
            tuple_offsets.push(acc);
            offsets.push(next);
            strata.push(Stratum {
                offset: next,
                tuples: tuples.clone(),
                tuple_offsets,
            });
            next = next
                .checked_add(acc)
                .ok_or_else(|| Error::BadParameter("Fock space dimension overflows".into()))?;
        }
        offsets.push(next);
        Ok(FockSpace {
            family: family.clone(),
            max_len,
            hbar_dims,
            strata,
            offsets,
        })
    }

    pub fn family(&self) -> &Arc<Family> {
        &self.family
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn num_algebras(&self) -> usize {
        self.family.len()
    }

    pub fn hbar_dim(&self, algebra: usize) -> usize {
        self.hbar_dims[algebra]
    }

    /// Dimension of `F_len`, words of length at most `len`.
    pub fn dim(&self, len: usize) -> usize {
        self.offsets[len.min(self.max_len) + 1]
    }

    /// Index range of the length-`p` stratum.
    pub fn stratum_range(&self, p: usize) -> Range<usize> {
        self.offsets[p]..self.offsets[p + 1]
    }

    /// Stratum offsets `0..=len+1`, for operators living on `F_len`.
    pub fn offsets(&self, len: usize) -> Vec<usize> {
        self.offsets[..=len + 1].to_vec()
    }

    /// Length of the word with the given index.
    pub fn length_of(&self, index: usize) -> usize {
        stratum_of(&self.offsets, index)
    }

    fn tuple_rank(&self, indices: impl Iterator<Item = usize>) -> usize {
        let n = self.family.len();
        let mut rank = 0usize;
        let mut prev: Option<usize> = None;
        for i in indices {
            rank = match prev {
                None => i,
                Some(q) => rank * (n - 1) + i - usize::from(i > q),
            };
            prev = Some(i);
        }
        rank
    }

    /// Index of a word given leftmost letter first.
    pub fn index(&self, word: &[(usize, usize)]) -> usize {
        self.index_from(word.len(), || word.iter().copied())
    }

    /// Index of a word stored rightmost letter first.
    fn index_rev(&self, rev: &[(usize, usize)]) -> usize {
        self.index_from(rev.len(), || rev.iter().rev().copied())
    }

    fn index_from<I: Iterator<Item = (usize, usize)>>(&self, len: usize, letters: impl Fn() -> I) -> usize {
        let stratum = &self.strata[len];
        let rank = self.tuple_rank(letters().map(|(i, _)| i));
        let mut elem = 0usize;
        for (i, e) in letters() {
            elem = elem * self.hbar_dims[i] + e;
        }
        stratum.offset + stratum.tuple_offsets[rank] + elem
    }

    /// The word with the given index, leftmost letter first.
    pub fn word(&self, index: usize) -> Word {
        let p = self.length_of(index);
        let stratum = &self.strata[p];
        let rel = index - stratum.offset;
        let t = stratum.tuple_offsets.partition_point(|&o| o <= rel) - 1;
        let tuple = &stratum.tuples[t];
        let mut elem = rel - stratum.tuple_offsets[t];
        let mut word = vec![(0, 0); p];
        for (slot, &i) in tuple.iter().enumerate().rev() {
            word[slot] = (i, elem % self.hbar_dims[i]);
            elem /= self.hbar_dims[i];
        }
        word
    }

    fn check_len(&self, needed: usize) -> Result<()> {
        if needed > self.max_len {
            return Err(Error::TruncationTooSmall {
                needed,
                available: self.max_len,
            });
        }
        Ok(())
    }
}

pub(crate) fn stratum_of(offsets: &[usize], index: usize) -> usize {
    offsets.partition_point(|&o| o <= index) - 1
}

/// Action of one matrix `a ∈ A_k` on basis words, read off `gns_left_mult(a)`.
#[derive(Debug, Clone)]
pub(crate) struct LetterAction {
    algebra: usize,
    /// `φ(a)`, the multiple of the identity seen by words not starting in `k`.
    scalar: C64,
    /// Coordinates of the centered part of `â`.
    create: Vec<(usize, C64)>,
    /// For an input first letter `e'`: centered output coordinates.
    act: Vec<Vec<(usize, C64)>>,
    /// For an input first letter `e'`: the `ξ` coefficient `⟨ξ, a ê'⟩`.
    annihilate: Vec<C64>,
}

impl LetterAction {
    pub(crate) fn new(algebra: usize, alg: &AlgebraWithState, a: &DMatrix<C64>) -> Result<Self> {
        let g = alg.gns_left_mult(a)?;
        let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let keep = |z: C64| z.norm() > ACTION_DROP * scale;
        let h = alg.hbar_dim();
        let create = (0..h).map(|e| (e, g[(1 + e, 0)])).filter(|&(_, z)| keep(z)).collect();
        let act = (0..h)
            .map(|src| {
                (0..h)
                    .map(|e| (e, g[(1 + e, 1 + src)]))
                    .filter(|&(_, z)| keep(z))
                    .collect()
            })
            .collect();
        let annihilate = (0..h)
            .map(|src| {
                let z = g[(0, 1 + src)];
                if keep(z) {
                    z
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        let scalar = if keep(g[(0, 0)]) { g[(0, 0)] } else { C64::new(0.0, 0.0) };
        Ok(LetterAction {
            algebra,
            scalar,
            create,
            act,
            annihilate,
        })
    }

    /// Applies the action to `coeff · rev` (rightmost letter first) and pushes results.
    fn apply(&self, rev: &[(usize, usize)], coeff: C64, out: &mut Vec<(Word, C64)>) {
        let zero = C64::new(0.0, 0.0);
        match rev.last() {
            Some(&(i, src)) if i == self.algebra => {
                let rest = &rev[..rev.len() - 1];
                if self.annihilate[src] != zero {
                    out.push((rest.to_vec(), coeff * self.annihilate[src]));
                }
                for &(e, z) in &self.act[src] {
                    let mut w = rest.to_vec();
                    w.push((self.algebra, e));
                    out.push((w, coeff * z));
                }
            }
            _ => {
                if self.scalar != zero {
                    out.push((rev.to_vec(), coeff * self.scalar));
                }
                for &(e, z) in &self.create {
                    let mut w = rev.to_vec();
                    w.push((self.algebra, e));
                    out.push((w, coeff * z));
                }
            }
        }
    }
}

/// A product of letter actions with a coefficient, applied right to left.
#[derive(Debug, Clone)]
struct CompiledTerm {
    actions: Vec<LetterAction>,
    coeff: C64,
}

impl CompiledTerm {
    fn apply(&self, word: &[(usize, usize)], out: &mut Vec<(Word, C64)>) {
        let mut frontier: Vec<(Word, C64)> = vec![(word.iter().rev().copied().collect(), self.coeff)];
        let mut next = Vec::new();
        for action in self.actions.iter().rev() {
            next.clear();
            for (w, z) in &frontier {
                action.apply(w, *z, &mut next);
            }
            std::mem::swap(&mut frontier, &mut next);
        }
        out.append(&mut frontier);
    }
}

fn compile(fock: &FockSpace, x: &FreeElement) -> Result<(C64, Vec<CompiledTerm>)> {
    if !crate::freepoly::same_family(fock.family(), x.family()) {
        return Err(Error::FamilyMismatch);
    }
    let terms = x
        .terms()
        .iter()
        .map(|t| {
            let actions = t
                .letters
                .iter()
                .map(|l| LetterAction::new(l.algebra, fock.family.algebra(l.algebra), &l.matrix))
                .collect::<Result<Vec<_>>>()?;
            Ok(CompiledTerm {
                actions,
                coeff: t.coeff,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((x.scalar_part(), terms))
}

/// Exact matrix of a bounded-degree operator from `F_L ⊗ C^s` into `F_{L+d} ⊗ C^s`.
///
/// Row and column `word·s + c` carries coefficient slot `c`.
#[derive(Debug, Clone)]
pub struct BandOperator {
    domain_len: usize,
    degree: usize,
    amp: usize,
    offsets: Vec<usize>,
    matrix: CscMatrix<C64>,
}

impl BandOperator {
    pub fn domain_len(&self) -> usize {
        self.domain_len
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn amplification(&self) -> usize {
        self.amp
    }

    pub fn matrix(&self) -> &CscMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CscMatrix<C64> {
        self.matrix
    }

    /// Stratum offsets of the codomain `F_{L+d}`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Amplified index range of the length-`p` stratum.
    pub fn stratum_range(&self, p: usize) -> Range<usize> {
        self.offsets[p] * self.amp..self.offsets[p + 1] * self.amp
    }

    /// The `(target length q, source length p)` block.
    pub fn block(&self, q: usize, p: usize) -> CscMatrix<C64> {
        submatrix(&self.matrix, self.stratum_range(q), self.stratum_range(p))
    }

    pub fn norm(&self) -> SingularEstimate {
        largest_singular_value(&self.matrix)
    }

    /// The same operator on the smaller domain `F_len`.
    pub fn restrict_domain(&self, len: usize) -> BandOperator {
        let len = len.min(self.domain_len);
        let rows = 0..self.offsets[len + self.degree + 1] * self.amp;
        let cols = 0..self.offsets[len + 1] * self.amp;
        BandOperator {
            domain_len: len,
            degree: self.degree,
            amp: self.amp,
            offsets: self.offsets[..=len + self.degree + 1].to_vec(),
            matrix: submatrix(&self.matrix, rows, cols),
        }
    }

    /// Columns of the length-`p` stratum only, as a matrix on all of `F_L`.
    pub fn restrict_to_stratum(&self, p: usize) -> CscMatrix<C64> {
        let rows = 0..self.matrix.nrows();
        submatrix(&self.matrix, rows, self.stratum_range(p))
    }

    fn stratum_of_row(&self, r: usize) -> usize {
        stratum_of(&self.offsets, r / self.amp)
    }

    /// `H_n` by exact block split: entries with target length − source length = `n`.
    pub fn band_component(&self, n: i64) -> Result<BandOperator> {
        if n.unsigned_abs() as usize > self.degree {
            return Err(Error::DegreeOutOfRange { n, degree: self.degree });
        }
        let mut columns = vec![Vec::new(); self.matrix.ncols()];
        for (r, c, v) in self.matrix.triplet_iter() {
            let q = self.stratum_of_row(r) as i64;
            let p = self.stratum_of_row(c) as i64;
            if q - p == n {
                columns[c].push((r, *v));
            }
        }
        Ok(self.with_matrix(csc_from_columns(self.matrix.nrows(), columns)))
    }

    /// `H_n` by the discrete Fourier average `(2D+1)⁻¹ Σ_m ω^{mn} U*_{ω^m} A U_{ω^m}`.
    pub fn band_component_fourier(&self, n: i64) -> Result<BandOperator> {
        if n.unsigned_abs() as usize > self.degree {
            return Err(Error::DegreeOutOfRange { n, degree: self.degree });
        }
        let nodes = 2 * self.degree + 1;
        let mut acc: Option<CscMatrix<C64>> = None;
        for m in 0..nodes {
            let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / nodes as f64);
            let out_u = uz_diagonal(&self.offsets, z.conj(), self.amp);
            let in_u = uz_diagonal(&self.offsets[..=self.domain_len + 1], z, self.amp);
            let term = &(&out_u * &self.matrix) * &in_u;
            let term = term * z.powi(n as i32);
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        let avg = acc.expect("at least one node") / real(nodes as f64);
        Ok(self.with_matrix(avg))
    }

    fn with_matrix(&self, matrix: CscMatrix<C64>) -> BandOperator {
        BandOperator {
            domain_len: self.domain_len,
            degree: self.degree,
            amp: self.amp,
            offsets: self.offsets.clone(),
            matrix,
        }
    }
}

/// Entries of `a` in the given row and column ranges, reindexed from zero.
pub fn submatrix(a: &CscMatrix<C64>, rows: Range<usize>, cols: Range<usize>) -> CscMatrix<C64> {
    let offsets = a.col_offsets();
    let ri = a.row_indices();
    let vals = a.values();
    let columns = cols
        .clone()
        .map(|c| {
            (offsets[c]..offsets[c + 1])
                .filter(|&k| rows.contains(&ri[k]))
                .map(|k| (ri[k] - rows.start, vals[k]))
                .collect()
        })
        .collect();
    csc_from_columns(rows.len(), columns)
}

fn diagonal(entries: Vec<C64>) -> CscMatrix<C64> {
    let n = entries.len();
    csc_from_columns(n, entries.into_iter().enumerate().map(|(i, v)| vec![(i, v)]).collect())
}

fn uz_diagonal(offsets: &[usize], z: C64, amp: usize) -> CscMatrix<C64> {
    let mut entries = Vec::with_capacity(offsets[offsets.len() - 1] * amp);
    for p in 0..offsets.len() - 1 {
        let zp = z.powi(p as i32);
        entries.extend(std::iter::repeat_n(zp, (offsets[p + 1] - offsets[p]) * amp));
    }
    diagonal(entries)
}

/// `U_z` on `F_len`: multiplication by `z^p` on the length-`p` stratum.
pub fn apply_uz(fock: &FockSpace, z: C64, len: usize) -> Result<CscMatrix<C64>> {
    if (z.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnimodular(z.norm()));
    }
    fock.check_len(len)?;
    Ok(uz_diagonal(&fock.offsets(len), z, 1))
}

/// `P_k` on `F_len`: words whose first letter comes from algebra `k`.
pub fn projection_pk(fock: &FockSpace, k: usize, len: usize) -> Result<CscMatrix<C64>> {
    if k >= fock.num_algebras() {
        return Err(Error::BadParameter(format!("algebra index {k} out of range")));
    }
    fock.check_len(len)?;
    Ok(diagonal(
        (0..fock.dim(len))
            .map(|i| {
                let hit = fock.word(i).first().map(|&(a, _)| a) == Some(k);
                real(if hit { 1.0 } else { 0.0 })
            })
            .collect(),
    ))
}

/// Projection of `F_len` onto the length-`p` stratum.
pub fn length_projection(fock: &FockSpace, p: usize, len: usize) -> Result<CscMatrix<C64>> {
    fock.check_len(len)?;
    let range = if p <= len { fock.stratum_range(p) } else { 0..0 };
    Ok(diagonal(
        (0..fock.dim(len))
            .map(|i| real(if range.contains(&i) { 1.0 } else { 0.0 }))
            .collect(),
    ))
}

/// The rectangular identity `F_L ⊗ C^s → F_{L+d} ⊗ C^s`.
pub fn rectangular_identity(fock: &FockSpace, domain_len: usize, degree: usize, amp: usize) -> Result<BandOperator> {
    fock.check_len(domain_len + degree)?;
    let rows = fock.dim(domain_len + degree) * amp;
    let columns = (0..fock.dim(domain_len) * amp).map(|c| vec![(c, real(1.0))]).collect();
    Ok(BandOperator {
        domain_len,
        degree,
        amp,
        offsets: fock.offsets(domain_len + degree),
        matrix: csc_from_columns(rows, columns),
    })
}

fn assemble(
    fock: &FockSpace,
    domain_len: usize,
    degree: usize,
    amp: usize,
    parts: &[(DMatrix<C64>, C64, Vec<CompiledTerm>)],
) -> Result<BandOperator> {
    fock.check_len(domain_len + degree)?;
    let rows = fock.dim(domain_len + degree) * amp;
    let ncols = fock.dim(domain_len);
    let mut columns: Vec<Vec<(usize, C64)>> = Vec::with_capacity(ncols * amp);
    let mut images: Vec<Vec<(usize, C64)>> = vec![Vec::new(); parts.len()];
    let mut scratch = Vec::new();
    for col in 0..ncols {
        let word = fock.word(col);
        for (slot, (_, scalar, terms)) in parts.iter().enumerate() {
            let image = &mut images[slot];
            image.clear();
            if *scalar != C64::new(0.0, 0.0) {
                image.push((col, *scalar));
            }
            for t in terms {
                scratch.clear();
                t.apply(&word, &mut scratch);
                image.extend(scratch.iter().map(|(w, z)| (fock.index_rev(w), *z)));
            }
        }
        for c in 0..amp {
            let mut column = Vec::new();
            for (slot, (m, _, _)) in parts.iter().enumerate() {
                for &(row, z) in &images[slot] {
                    for r in 0..amp {
                        let coef = m[(r, c)];
                        if coef != C64::new(0.0, 0.0) {
                            column.push((row * amp + r, coef * z));
                        }
                    }
                }
            }
            columns.push(column);
        }
    }
    Ok(BandOperator {
        domain_len,
        degree,
        amp,
        offsets: fock.offsets(domain_len + degree),
        matrix: csc_from_columns(rows, columns),
    })
}

/// Degree-one representation of a centered letter.
pub fn represent_letter(fock: &FockSpace, letter: &crate::algebra::Letter, domain_len: usize) -> Result<BandOperator> {
    let x = FreeElement::letter(fock.family(), letter.clone())?;
    represent_element(fock, &x, domain_len)
}

/// Left multiplication by an arbitrary `a ∈ A_k`, centered or not, as a degree-one operator.
pub fn represent_algebra_element(
    fock: &FockSpace,
    k: usize,
    a: &DMatrix<C64>,
    domain_len: usize,
) -> Result<BandOperator> {
    if k >= fock.num_algebras() {
        return Err(Error::BadParameter(format!("algebra index {k} out of range")));
    }
    let action = LetterAction::new(k, fock.family.algebra(k), a)?;
    let term = CompiledTerm {
        actions: vec![action],
        coeff: real(1.0),
    };
    let one = DMatrix::from_element(1, 1, real(1.0));
    assemble(fock, domain_len, 1, 1, &[(one, C64::new(0.0, 0.0), vec![term])])
}

/// Exact matrix of `x` on `F_L`, valued in `F_{L+deg x}`.
pub fn represent_element(fock: &FockSpace, x: &FreeElement, domain_len: usize) -> Result<BandOperator> {
    represent_with_degree(fock, &MatrixElement::from(x), domain_len, x.degree())
}

/// Exact matrix of `Σ_r m_r ⊗ x_r` on `F_L ⊗ C^s`.
pub fn represent_matrix_element(fock: &FockSpace, x: &MatrixElement, domain_len: usize) -> Result<BandOperator> {
    represent_with_degree(fock, x, domain_len, x.degree())
}

/// As [`represent_matrix_element`] with an explicit codomain padding `degree ≥ deg x`.
pub fn represent_with_degree(
    fock: &FockSpace,
    x: &MatrixElement,
    domain_len: usize,
    degree: usize,
) -> Result<BandOperator> {
    if degree < x.degree() {
        return Err(Error::BadParameter(format!(
            "degree {degree} is below the element degree {}",
            x.degree()
        )));
    }
    let parts = x
        .parts()
        .iter()
        .map(|(m, xr)| {
            let (scalar, terms) = compile(fock, xr)?;
            Ok((m.clone(), scalar, terms))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(fock, domain_len, degree, x.size(), &parts)
}

/// Applies `x` to the single basis word `word`, returning sparse coordinates.
pub fn apply_to_word(fock: &FockSpace, x: &FreeElement, word: &[(usize, usize)]) -> Result<Vec<(usize, C64)>> {
    fock.check_len(word.len() + x.degree())?;
    let (scalar, terms) = compile(fock, x)?;
    let mut out = Vec::new();
    if scalar != C64::new(0.0, 0.0) {
        out.push((fock.index(word), scalar));
    }
    let mut scratch = Vec::new();
    for t in &terms {
        scratch.clear();
        t.apply(word, &mut scratch);
        out.extend(scratch.iter().map(|(w, z)| (fock.index_rev(w), *z)));
    }
    out.sort_by_key(|&(i, _)| i);
    let mut merged: Vec<(usize, C64)> = Vec::with_capacity(out.len());
    for (i, z) in out {
        match merged.last_mut() {
            Some((j, acc)) if *j == i => *acc += z,
            _ => merged.push((i, z)),
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{commutative, tracial, Letter};
    use crate::linalg::{c, to_dense};

    fn bernoulli_family(n: usize) -> Arc<Family> {
        Family::new((0..n).map(|_| commutative(&[0.5, 0.5]).unwrap()).collect())
    }

    fn u(i: usize) -> Letter {
        Letter::new(
            i,
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![real(1.0), real(-1.0)])),
        )
    }

    #[test]
    fn index_round_trip() {
        let fam = Family::new(vec![tracial(2), tracial(1), tracial(3), tracial(2)]);
        let fock = FockSpace::new(&fam, 4).unwrap();
        for i in 0..fock.dim(4) {
            let w = fock.word(i);
            for pair in w.windows(2) {
                assert_ne!(pair[0].0, pair[1].0);
            }
            assert_eq!(fock.index(&w), i);
        }
    }

    #[test]
    fn enumeration_is_lexicographic_within_strata() {
        let fam = Family::new(vec![tracial(2), tracial(2), tracial(2)]);
        let fock = FockSpace::new(&fam, 3).unwrap();
        for p in 0..=3 {
            let words: Vec<Word> = fock.stratum_range(p).map(|i| fock.word(i)).collect();
            for w in words.windows(2) {
                let key = |x: &Word| {
                    (
                        x.iter().map(|l| l.0).collect::<Vec<_>>(),
                        x.iter().map(|l| l.1).collect::<Vec<_>>(),
                    )
                };
                assert!(key(&w[0]) < key(&w[1]));
            }
        }
    }

    #[test]
    fn dimension_formula() {
        let fam = Family::new(vec![tracial(2), tracial(2), tracial(2)]);
        let fock = FockSpace::new(&fam, 4).unwrap();
        let mut expected = 1;
        for p in 1..=4u32 {
            expected += 3 * 2usize.pow(p - 1) * 3usize.pow(p);
        }
        assert_eq!(fock.dim(4), expected);
    }

    #[test]
    fn single_algebra_has_only_short_words() {
        let fam = Family::new(vec![tracial(2)]);
        let fock = FockSpace::new(&fam, 3).unwrap();
        assert_eq!(fock.dim(3), 4);
    }

    #[test]
    fn bernoulli_letter_creates_and_annihilates() {
        let fam = bernoulli_family(2);
        let fock = FockSpace::new(&fam, 3).unwrap();
        let x = FreeElement::letter(&fam, u(0)).unwrap();
        let on_vacuum = apply_to_word(&fock, &x, &[]).unwrap();
        let hat_u = fock.index(&[(0, 0)]);
        assert_eq!(on_vacuum.len(), 1);
        assert_eq!(on_vacuum[0].0, hat_u);
        assert!((on_vacuum[0].1 - real(1.0)).norm() < 1e-14);
        let back = apply_to_word(&fock, &x, &[(0, 0)]).unwrap();
        let nonzero: Vec<_> = back.iter().filter(|(_, z)| z.norm() > 1e-14).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].0, 0);
        assert!((nonzero[0].1 - real(1.0)).norm() < 1e-14);
    }

    #[test]
    fn uz_and_band_split() {
        let fam = bernoulli_family(2);
        let fock = FockSpace::new(&fam, 4).unwrap();
        let z = c(0.6, 0.8);
        let u1 = apply_uz(&fock, z, 3).unwrap();
        let u2 = apply_uz(&fock, z.conj(), 3).unwrap();
        let prod = to_dense(&(&u1 * &u2));
        assert!((prod - DMatrix::<C64>::identity(fock.dim(3), fock.dim(3)))
            .iter()
            .all(|v| v.norm() < 1e-14));
        assert!(apply_uz(&fock, c(1.0, 0.1), 3).is_err());
        let x = FreeElement::letter(&fam, u(0)).unwrap();
        let op = represent_element(&fock, &x, 2).unwrap();
        let plus = op.band_component(1).unwrap();
        for (r, col, _) in plus.matrix().triplet_iter() {
            assert_eq!(fock.length_of(r), fock.length_of(col) + 1);
        }
        assert!(op.band_component(2).is_err());
    }
}
