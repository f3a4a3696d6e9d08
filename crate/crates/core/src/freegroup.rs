//! The left regular representation of a free group on finite balls.
//!
//! Generators are `1..=k`, inverses are negative. Reduced words are ordered
//! by length, then lexicographically with `g_1 < g_1⁻¹ < g_2 < …`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use nalgebra_sparse::CscMatrix;

use crate::error::{Error, Result};
use crate::linalg::{csc_from_columns, largest_singular_value, op_norm, real, sparse_kron};
use crate::schur::SchurSymbol;
use crate::C64;

pub type GroupWord = Vec<i32>;

/// Freely reduces a word by a stack scan.
pub fn reduce(w: &[i32]) -> GroupWord {
    let mut out: GroupWord = Vec::with_capacity(w.len());
    for &g in w {
        debug_assert!(g != 0);
        if out.last() == Some(&-g) {
            out.pop();
        } else {
            out.push(g);
        }
    }
    out
}

pub fn inverse(w: &[i32]) -> GroupWord {
    w.iter().rev().map(|g| -g).collect()
}

pub fn multiply(a: &[i32], b: &[i32]) -> GroupWord {
    let mut w = a.to_vec();
    w.extend_from_slice(b);
    reduce(&w)
}

fn letter_key(g: i32) -> (i32, bool) {
    (g.abs(), g < 0)
}

/// Reduced words of length at most `radius` over `k` generators.
#[derive(Debug, Clone)]
pub struct GroupBall {
    k: usize,
    radius: usize,
    words: Vec<GroupWord>,
    index: HashMap<GroupWord, usize>,
    /// `offsets[r]` is the number of words of length `< r`.
    offsets: Vec<usize>,
}

impl GroupBall {
    pub fn new(k: usize, radius: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadParameter("need at least one generator".into()));
        }
        let mut letters: Vec<i32> = (1..=k as i32).flat_map(|g| [g, -g]).collect();
        letters.sort_by_key(|&g| letter_key(g));
        let mut words: Vec<GroupWord> = vec![Vec::new()];
        let mut offsets = vec![0, 1];
        let mut layer: Vec<GroupWord> = vec![Vec::new()];
        for _ in 0..radius {
            let next: Vec<GroupWord> = layer
                .iter()
                .flat_map(|w| {
                    letters.iter().filter(move |&&g| w.last() != Some(&-g)).map(move |&g| {
                        let mut v = w.clone();
                        v.push(g);
                        v
                    })
                })
                .collect();
            words.extend(next.iter().cloned());
            offsets.push(words.len());
            layer = next;
        }
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(GroupBall {
            k,
            radius,
            words,
            index,
            offsets,
        })
    }

    pub fn generators(&self) -> usize {
        self.k
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn words(&self) -> &[GroupWord] {
        &self.words
    }

    /// Number of words of length at most `r`.
    pub fn size(&self, r: usize) -> usize {
        self.offsets[r.min(self.radius) + 1]
    }

    pub fn index_of(&self, w: &[i32]) -> Option<usize> {
        self.index.get(w).copied()
    }

    fn check_word(&self, w: &[i32]) -> Result<()> {
        if w.iter().any(|&g| g == 0 || g.unsigned_abs() as usize > self.k) {
            return Err(Error::BadParameter(format!("word {w:?} uses an unknown generator")));
        }
        Ok(())
    }
}

/// `λ(w)` from `ℓ²(B_R)` into `ℓ²(B_{R+|w|})`: `δ_v ↦ δ_{wv}`.
pub fn lambda_rect(ball: &GroupBall, w: &[i32], domain_radius: usize) -> Result<CscMatrix<C64>> {
    ball.check_word(w)?;
    let w = reduce(w);
    let needed = domain_radius + w.len();
    if needed > ball.radius() {
        return Err(Error::CapacityExceeded {
            needed,
            capacity: ball.radius(),
        });
    }
    let columns = ball.words[..ball.size(domain_radius)]
        .iter()
        .map(|v| {
            let target = ball.index_of(&multiply(&w, v)).expect("product lies in the ball");
            vec![(target, real(1.0))]
        })
        .collect();
    Ok(csc_from_columns(ball.size(needed), columns))
}

/// `Σ_w x_w λ(w)` on `ℓ²(B_R)`, codomain padded to `B_{R+deg}`.
pub fn lambda_sum(ball: &GroupBall, coeffs: &[(GroupWord, C64)], domain_radius: usize) -> Result<CscMatrix<C64>> {
    let degree = coeffs.iter().map(|(w, _)| reduce(w).len()).max().unwrap_or(0);
    let rows = domain_radius + degree;
    if rows > ball.radius() {
        return Err(Error::CapacityExceeded {
            needed: rows,
            capacity: ball.radius(),
        });
    }
    let mut acc: Option<CscMatrix<C64>> = None;
    for (w, z) in coeffs {
        let m = lambda_rect(ball, w, domain_radius)?;
        let m = pad_rows(&m, ball.size(rows)) * *z;
        acc = Some(match acc {
            None => m,
            Some(a) => a + m,
        });
    }
    Ok(acc.unwrap_or_else(|| csc_from_columns(ball.size(rows), vec![Vec::new(); ball.size(domain_radius)])))
}

fn pad_rows(m: &CscMatrix<C64>, rows: usize) -> CscMatrix<C64> {
    let columns = (0..m.ncols())
        .map(|c| {
            let col = m.col(c);
            col.row_indices()
                .iter()
                .copied()
                .zip(col.values().iter().copied())
                .collect()
        })
        .collect();
    csc_from_columns(rows, columns)
}

#[derive(Debug, Clone)]
pub struct HaagerupReport {
    pub degree: usize,
    pub radius: usize,
    pub l2_norm: f64,
    /// `‖x·δ_e‖`, equal to `l2_norm` exactly.
    pub vacuum_norm: f64,
    pub truncated_norm: f64,
    pub constant: f64,
    pub tol: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl HaagerupReport {
    pub fn passed(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// `‖x‖₂ ≤ ‖λ(x)|_{B_R}‖ ≤ (d+1)‖x‖₂` for `x` supported on words of length `d`.
pub fn haagerup_check(ball: &GroupBall, coeffs: &[(GroupWord, C64)], domain_radius: usize) -> Result<HaagerupReport> {
    let mut reduced: Vec<(GroupWord, C64)> = Vec::new();
    for (w, z) in coeffs {
        let w = reduce(w);
        match reduced.iter_mut().find(|(v, _)| *v == w) {
            Some((_, acc)) => *acc += z,
            None => reduced.push((w, *z)),
        }
    }
    let degree = reduced.first().map(|(w, _)| w.len()).unwrap_or(0);
    if reduced.iter().any(|(w, _)| w.len() != degree) {
        return Err(Error::BadParameter(
            "coefficients must sit on words of one length".into(),
        ));
    }
    let m = lambda_sum(ball, &reduced, domain_radius)?;
    let l2 = reduced.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt();
    let vacuum = m.col(0).values().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let t = largest_singular_value(&m).sigma;
    let constant = (degree + 1) as f64;
    let tol = 1e-8 * l2.max(1.0);
    Ok(HaagerupReport {
        degree,
        radius: domain_radius,
        l2_norm: l2,
        vacuum_norm: vacuum,
        truncated_norm: t,
        constant,
        tol,
        lower_holds: l2 <= t + tol,
        upper_holds: t <= constant * l2 + tol,
    })
}

#[derive(Debug, Clone)]
pub struct LeinertReport {
    pub radius: usize,
    pub column: f64,
    pub row: f64,
    pub truncated_norm: f64,
    pub bound: f64,
    pub tol: f64,
    pub upper_holds: bool,
    pub converse_holds: bool,
}

impl LeinertReport {
    pub fn passed(&self) -> bool {
        self.upper_holds && self.converse_holds
    }
}

/// `max(‖Σx_i*x_i‖^½, ‖Σx_ix_i*‖^½) ≤ ‖Σ λ(g_i) ⊗ x_i‖ ≤ 2·max(…)` on `B_R`.
pub fn leinert_check(ball: &GroupBall, xs: &[DMatrix<C64>], domain_radius: usize) -> Result<LeinertReport> {
    if xs.len() > ball.generators() {
        return Err(Error::BadParameter(format!(
            "{} coefficients for {} generators",
            xs.len(),
            ball.generators()
        )));
    }
    let m = xs.first().map(|x| x.nrows()).unwrap_or(1);
    if xs.iter().any(|x| x.shape() != (m, m)) {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: xs
                .iter()
                .map(|x| x.nrows().max(x.ncols()))
                .find(|&s| s != m)
                .unwrap_or(m),
        });
    }
    if domain_radius + 1 > ball.radius() {
        return Err(Error::CapacityExceeded {
            needed: domain_radius + 1,
            capacity: ball.radius(),
        });
    }
    let mut col_sum = DMatrix::<C64>::zeros(m, m);
    let mut row_sum = DMatrix::<C64>::zeros(m, m);
    let mut acc: Option<CscMatrix<C64>> = None;
    for (i, x) in xs.iter().enumerate() {
        col_sum += x.adjoint() * x;
        row_sum += x * x.adjoint();
        let term = sparse_kron(&lambda_rect(ball, &[i as i32 + 1], domain_radius)?, x);
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    let column = op_norm(&col_sum).sqrt();
    let row = op_norm(&row_sum).sqrt();
    let t = acc.map(|a| largest_singular_value(&a).sigma).unwrap_or(0.0);
    let scale = column.max(row);
    let tol = 1e-8 * scale.max(1.0);
    Ok(LeinertReport {
        radius: domain_radius,
        column,
        row,
        truncated_norm: t,
        bound: 2.0 * scale,
        tol,
        upper_holds: t <= 2.0 * scale + tol,
        converse_holds: domain_radius < 1 || scale <= t + tol,
    })
}

/// The Schur symbol `(f(|v⁻¹w|))_{v,w}` over the words of length at most `radius`.
pub fn radial_symbol(ball: &GroupBall, radius: usize, f: impl Fn(usize) -> f64) -> Result<SchurSymbol> {
    if radius > ball.radius() {
        return Err(Error::CapacityExceeded {
            needed: radius,
            capacity: ball.radius(),
        });
    }
    let words = &ball.words[..ball.size(radius)];
    let m = words.len();
    let a = DMatrix::from_fn(m, m, |s, t| real(f(multiply(&inverse(&words[s]), &words[t]).len())));
    Ok(SchurSymbol::new(a))
}
