//! Shared inputs for the benchmarks.

use std::sync::Arc;

use freeprod::freegroup::{radial_symbol, GroupBall};
use freeprod::freepoly::Family;
use freeprod::instance::{generate_matrix_instance, GeneratorSpec};
use freeprod::schur::SchurSymbol;
use freeprod::{diagonal_state, tracial, FockSpace, MatrixElement};

/// `n` copies of `M_2`, alternating the trace and a diagonal state.
pub fn family(n: usize) -> Arc<Family> {
    Family::new(
        (0..n)
            .map(|i| {
                if i % 2 == 0 {
                    tracial(2)
                } else {
                    diagonal_state(&[0.3, 0.7]).unwrap()
                }
            })
            .collect(),
    )
}

/// A seeded homogeneous element of degree `d` with `M_s` coefficients and a
/// Fock space large enough for domain length `len`.
pub fn instance(n: usize, d: usize, s: usize, len: usize, seed: u64) -> (MatrixElement, FockSpace) {
    let fam = family(n);
    let x = generate_matrix_instance(&fam, &GeneratorSpec::homogeneous(d), s, seed).unwrap();
    let fock = FockSpace::new(&fam, len + d).unwrap();
    (x, fock)
}

/// The radial symbol `r^{|v⁻¹w|}` on the ball of radius `radius` in `F_2`.
pub fn poisson_symbol(r: f64, radius: usize) -> SchurSymbol {
    let ball = GroupBall::new(2, radius).unwrap();
    radial_symbol(&ball, radius, |n| r.powi(n as i32)).unwrap()
}

/// A deterministic dense real symbol with entries in `[-1, 1]`.
pub fn dense_symbol(m: usize) -> SchurSymbol {
    SchurSymbol::from_real(nalgebra::DMatrix::from_fn(m, m, |i, j| {
        ((3 * i + 7 * j + 1) as f64).sin()
    }))
}
