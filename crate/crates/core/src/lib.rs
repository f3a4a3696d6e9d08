//! Reduced free products of matrix algebras on a truncated free Fock space.
//!
//! The crate builds exact rectangular matrices for elements of the algebraic
//! free product, certifies operator-norm enclosures, and checks the Khintchine
//! type inequalities, projection bounds, free-group estimates and Schur
//! multiplier decompositions that organize the theory.

pub mod algebra;
pub mod error;
pub mod fock;
pub mod freegroup;
pub mod freepoly;
pub mod instance;
pub mod khintchine;
pub mod linalg;
pub mod schur;

pub type C64 = num_complex::Complex64;

pub use algebra::{commutative, diagonal_state, make_algebra, tracial, AlgebraWithState, Letter};
pub use error::{Error, Result};
pub use fock::{BandOperator, FockSpace, Word};
pub use freepoly::{Family, FreeElement, MatrixElement, StatePreservingMap, Superoperator};
pub use linalg::{NormMethod, SingularEstimate};
