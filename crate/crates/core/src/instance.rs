//! Seeded random elements of the algebraic free product.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::Letter;
use crate::error::{Error, Result};
use crate::freepoly::{Family, FreeElement, MatrixElement};
use crate::linalg::{c, op_norm};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub degree: usize,
    pub letter_scale: f64,
    /// Words per degree.
    pub terms: usize,
    /// Only words of length `degree` when set; every length `0..=degree` otherwise.
    pub homogeneous: bool,
}

impl GeneratorSpec {
    pub fn homogeneous(degree: usize) -> Self {
        GeneratorSpec {
            degree,
            letter_scale: 1.0,
            terms: 2,
            homogeneous: true,
        }
    }

    pub fn mixed(degree: usize) -> Self {
        GeneratorSpec {
            homogeneous: false,
            ..Self::homogeneous(degree)
        }
    }

    fn validate(&self, family: &Family) -> Result<()> {
        if !(self.letter_scale.is_finite() && self.letter_scale > 0.0) {
            return Err(Error::BadSpec(format!(
                "letter_scale {} must be positive",
                self.letter_scale
            )));
        }
        if self.terms == 0 {
            return Err(Error::BadSpec("terms must be positive".into()));
        }
        if self.degree >= 2 && family.len() < 2 {
            return Err(Error::BadSpec("words of length ≥ 2 need at least two algebras".into()));
        }
        if self.degree >= 1 && family.algebras().iter().all(|a| a.hbar_dim() == 0) {
            return Err(Error::BadSpec("every algebra is trivial; no letters exist".into()));
        }
        Ok(())
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Centered complex Gaussian matrix scaled to operator norm `scale`.
pub fn random_letter(family: &Family, algebra: usize, scale: f64, rng: &mut ChaCha8Rng) -> Letter {
    let alg = family.algebra(algebra);
    let n = alg.n();
    loop {
        let commutative = alg.is_commutative();
        let a = DMatrix::from_fn(n, n, |i, j| {
            let z = gaussian(rng);
            if commutative && i != j {
                C64::new(0.0, 0.0)
            } else {
                z
            }
        });
        let centered = alg.center(algebra, &a).expect("size matches");
        let norm = op_norm(&centered.matrix);
        if norm > 1e-8 {
            return Letter::new(algebra, centered.matrix * C64::new(scale / norm, 0.0));
        }
    }
}

/// Uniform alternating index tuple of the given length over algebras with letters.
fn random_tuple(family: &Family, len: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let usable: Vec<usize> = (0..family.len())
        .filter(|&i| family.algebra(i).hbar_dim() > 0)
        .collect();
    let mut tuple: Vec<usize> = Vec::with_capacity(len);
    for _ in 0..len {
        let choices: Vec<usize> = usable.iter().copied().filter(|&i| tuple.last() != Some(&i)).collect();
        tuple.push(choices[rng.gen_range(0..choices.len())]);
    }
    tuple
}

fn random_element(family: &Arc<Family>, spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<FreeElement> {
    let degrees: Vec<usize> = if spec.homogeneous {
        vec![spec.degree]
    } else {
        (0..=spec.degree).collect()
    };
    let mut x = FreeElement::zero(family);
    for d in degrees {
        if d == 0 {
            x = x.add(&FreeElement::scalar(family, gaussian(rng)))?;
            continue;
        }
        for _ in 0..spec.terms {
            let letters = random_tuple(family, d, rng)
                .into_iter()
                .map(|i| random_letter(family, i, spec.letter_scale, rng))
                .collect();
            x = x.add(&FreeElement::word(family, letters, gaussian(rng))?)?;
        }
    }
    Ok(x)
}

/// A seeded random element; identical seeds give identical elements.
pub fn generate_instance(family: &Arc<Family>, spec: &GeneratorSpec, seed: u64) -> Result<FreeElement> {
    spec.validate(family)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_element(family, spec, &mut rng)
}

/// A seeded `M_s`-valued element `Σ_r m_r ⊗ x_r` with `s` Gaussian coefficient matrices.
pub fn generate_matrix_instance(
    family: &Arc<Family>,
    spec: &GeneratorSpec,
    amplification: usize,
    seed: u64,
) -> Result<MatrixElement> {
    spec.validate(family)?;
    if amplification == 0 {
        return Err(Error::BadSpec("amplification must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if amplification == 1 {
        return Ok(MatrixElement::from(random_element(family, spec, &mut rng)?));
    }
    let parts = (0..amplification)
        .map(|_| {
            let m = DMatrix::from_fn(amplification, amplification, |_, _| gaussian(&mut rng));
            let m = &m * C64::new(1.0 / op_norm(&m), 0.0);
            Ok((m, random_element(family, spec, &mut rng)?))
        })
        .collect::<Result<Vec<_>>>()?;
    MatrixElement::new(amplification, parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::tracial;
    use crate::freepoly::max_letter_state;

    fn family() -> Arc<Family> {
        Family::new(vec![tracial(2), tracial(2), tracial(2)])
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let fam = family();
        let spec = GeneratorSpec::mixed(3);
        let a = generate_instance(&fam, &spec, 17).unwrap();
        let b = generate_instance(&fam, &spec, 17).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(&fam, &spec, 18).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn degree_zero_is_scalar() {
        let x = generate_instance(&family(), &GeneratorSpec::homogeneous(0), 3).unwrap();
        assert!(x.terms().is_empty());
    }

    #[test]
    fn letters_are_centered_and_scaled() {
        let mut spec = GeneratorSpec::homogeneous(3);
        spec.letter_scale = 0.5;
        let x = generate_instance(&family(), &spec, 5).unwrap();
        assert!(max_letter_state(&x) <= 1e-12);
        for t in x.terms() {
            assert_eq!(t.degree(), 3);
            for l in &t.letters {
                assert!(op_norm(&l.matrix) <= 0.5 + 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = GeneratorSpec::homogeneous(2);
        spec.letter_scale = -1.0;
        assert!(matches!(generate_instance(&family(), &spec, 0), Err(Error::BadSpec(_))));
        let single = Family::new(vec![tracial(2)]);
        assert!(generate_instance(&single, &GeneratorSpec::homogeneous(2), 0).is_err());
    }
}
