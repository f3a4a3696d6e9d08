//! Task configuration schema and its translation into library objects.

use std::fmt;
use std::sync::Arc;

use freeprod::freegroup::{radial_symbol, GroupBall, GroupWord};
use freeprod::instance::{generate_matrix_instance, GeneratorSpec};
use freeprod::schur::SchurSymbol;
use freeprod::{commutative, make_algebra, Family, FreeElement, Letter, MatrixElement, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Version of the config and report schemas.
pub const SCHEMA_VERSION: u32 = 1;

/// `[re, im]`.
pub type Complex = [f64; 2];
/// Row-major rows of `[re, im]` pairs.
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    VerifyKd,
    EncloseNorm,
    ProjectionBounds,
    Poisson,
    Haagerup,
    Leinert,
    Cbnorm,
    Polarize,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = serde_json::to_value(self).expect("unit variant");
        write!(f, "{}", name.as_str().expect("string"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub algebras: Vec<AlgebraConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<ElementConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<SymbolConfig>,
    #[serde(default)]
    pub parameters: Parameters,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// `M_n` with density matrix `rho`, or the diagonal subalgebra `C^n` when
/// `commutative` is set (then `rho` must be diagonal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    pub n: usize,
    pub rho: Matrix,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub commutative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LetterConfig {
    pub algebra: usize,
    pub matrix: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub coeff: Complex,
    pub letters: Vec<LetterConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartConfig {
    pub coefficient: Matrix,
    #[serde(default)]
    pub scalar: Complex,
    #[serde(default)]
    pub terms: Vec<TermConfig>,
}

/// An explicit element `scalar + Σ coeff·(letters)`, or an `M_s`-valued
/// element `Σ coefficient ⊗ (scalar + Σ …)` given by `parts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementConfig {
    #[serde(default)]
    pub scalar: Complex,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<PartConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub degree: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub letter_scale: f64,
    #[serde(default = "two")]
    pub terms: usize,
    #[serde(default = "yes")]
    pub homogeneous: bool,
}

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupCoeff {
    pub word: Vec<i32>,
    pub coeff: Complex,
}

/// Free group data: `coeffs` for haagerup, `matrices` (one per generator) for leinert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coeffs: Vec<GroupCoeff>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matrices: Vec<Matrix>,
}

/// The symbol `r^{|v⁻¹w|}` on the ball of radius `radius` in `F_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialConfig {
    pub k: usize,
    pub radius: usize,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<RadialConfig>,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub L: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub R: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

/// A schema or semantic error, located by a JSON pointer into the config.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "config error at {at}: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

type Checked<T> = std::result::Result<T, ConfigError>;

impl TaskConfig {
    /// Parses and schema-checks a config. A missing field is reported at the
    /// pointer where it should have been.
    pub fn from_json(text: &str) -> Checked<TaskConfig> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let mut pointer = String::new();
            for seg in e.path().iter() {
                use serde_path_to_error::Segment;
                match seg {
                    Segment::Seq { index } => pointer.push_str(&format!("/{index}")),
                    Segment::Map { key } => pointer.push_str(&format!("/{key}")),
                    Segment::Enum { variant } => pointer.push_str(&format!("/{variant}")),
                    Segment::Unknown => {}
                }
            }
            let message = e.inner().to_string();
            if let Some(field) = missing_field(&message) {
                pointer.push('/');
                pointer.push_str(field);
            }
            ConfigError::new(pointer, message)
        })
    }

    pub fn parameter<T: Copy>(&self, name: &str, value: Option<T>) -> Checked<T> {
        value.ok_or_else(|| {
            ConfigError::new(
                format!("/parameters/{name}"),
                format!("task {} needs parameter {name}", self.task),
            )
        })
    }
}

fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

pub fn complex(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

pub fn matrix(m: &Matrix, pointer: &str) -> Checked<DMatrix<C64>> {
    let rows = m.len();
    let cols = m.first().map(Vec::len).unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(ConfigError::new(pointer, "matrix is empty"));
    }
    if let Some(i) = m.iter().position(|r| r.len() != cols) {
        return Err(ConfigError::new(
            format!("{pointer}/{i}"),
            format!("row has {} entries, expected {cols}", m[i].len()),
        ));
    }
    if m.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(ConfigError::new(pointer, "matrix has non-finite entries"));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| complex(&m[i][j])))
}

fn square(m: &Matrix, n: usize, pointer: &str) -> Checked<DMatrix<C64>> {
    let a = matrix(m, pointer)?;
    if a.shape() != (n, n) {
        return Err(ConfigError::new(
            pointer,
            format!("expected a {n}x{n} matrix, got {}x{}", a.nrows(), a.ncols()),
        ));
    }
    Ok(a)
}

pub fn build_family(cfg: &TaskConfig) -> Checked<Arc<Family>> {
    if cfg.algebras.is_empty() {
        return Err(ConfigError::new(
            "/algebras",
            format!("task {} needs algebras", cfg.task),
        ));
    }
    let algebras = cfg
        .algebras
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let at = format!("/algebras/{i}/rho");
            let rho = square(&a.rho, a.n, &at)?;
            let built = if a.commutative {
                if (0..a.n).any(|r| (0..a.n).any(|c| r != c && rho[(r, c)].norm() > 0.0)) {
                    return Err(ConfigError::new(&at, "a commutative algebra needs a diagonal rho"));
                }
                commutative(&(0..a.n).map(|k| rho[(k, k)].re).collect::<Vec<_>>())
            } else {
                make_algebra(a.n, rho)
            };
            built.map_err(|e| ConfigError::new(&at, e.to_string()))
        })
        .collect::<Checked<Vec<_>>>()?;
    Ok(Family::new(algebras))
}

fn build_scalar_element(
    family: &Arc<Family>,
    scalar: &Complex,
    terms: &[TermConfig],
    pointer: &str,
) -> Checked<FreeElement> {
    let mut x = FreeElement::scalar(family, complex(scalar));
    for (t, term) in terms.iter().enumerate() {
        let at = format!("{pointer}/terms/{t}");
        let letters = term
            .letters
            .iter()
            .enumerate()
            .map(|(l, letter)| {
                let lat = format!("{at}/letters/{l}");
                if letter.algebra >= family.len() {
                    return Err(ConfigError::new(
                        format!("{lat}/algebra"),
                        format!("no algebra with index {}", letter.algebra),
                    ));
                }
                let n = family.algebra(letter.algebra).n();
                Ok(Letter::new(
                    letter.algebra,
                    square(&letter.matrix, n, &format!("{lat}/matrix"))?,
                ))
            })
            .collect::<Checked<Vec<_>>>()?;
        let word = FreeElement::word(family, letters, complex(&term.coeff))
            .map_err(|e| ConfigError::new(&at, e.to_string()))?;
        x = x.add(&word).map_err(|e| ConfigError::new(&at, e.to_string()))?;
    }
    Ok(x)
}

/// The element of the config together with the seed used to generate it.
pub fn build_element(cfg: &TaskConfig, family: &Arc<Family>) -> Checked<(MatrixElement, Option<u64>)> {
    match (&cfg.element, &cfg.generator) {
        (Some(_), Some(_)) => Err(ConfigError::new(
            "/generator",
            "give either element or generator, not both",
        )),
        (None, None) => Err(ConfigError::new(
            "/element",
            format!("task {} needs an element or a generator", cfg.task),
        )),
        (Some(el), None) => {
            if el.parts.is_empty() {
                if cfg.parameters.s.is_some_and(|s| s != 1) {
                    return Err(ConfigError::new(
                        "/parameters/s",
                        "explicit amplified elements are given by element.parts",
                    ));
                }
                let x = build_scalar_element(family, &el.scalar, &el.terms, "/element")?;
                return Ok((MatrixElement::from(x), None));
            }
            if !el.terms.is_empty() || el.scalar != [0.0, 0.0] {
                return Err(ConfigError::new("/element", "give either scalar and terms, or parts"));
            }
            let size = el.parts[0].coefficient.len();
            let parts = el
                .parts
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let at = format!("/element/parts/{i}");
                    let m = square(&p.coefficient, size, &format!("{at}/coefficient"))?;
                    Ok((m, build_scalar_element(family, &p.scalar, &p.terms, &at)?))
                })
                .collect::<Checked<Vec<_>>>()?;
            if cfg.parameters.s.is_some_and(|s| s != size) {
                return Err(ConfigError::new("/parameters/s", format!("parts have size {size}")));
            }
            let x = MatrixElement::new(size, parts).map_err(|e| ConfigError::new("/element/parts", e.to_string()))?;
            Ok((x, None))
        }
        (None, Some(g)) => {
            let spec = GeneratorSpec {
                degree: g.degree,
                letter_scale: g.letter_scale,
                terms: g.terms,
                homogeneous: g.homogeneous,
            };
            let s = cfg.parameters.s.unwrap_or(1);
            let x = generate_matrix_instance(family, &spec, s, g.seed)
                .map_err(|e| ConfigError::new("/generator", e.to_string()))?;
            Ok((x, Some(g.seed)))
        }
    }
}

pub fn group(cfg: &TaskConfig) -> Checked<&GroupConfig> {
    cfg.group
        .as_ref()
        .ok_or_else(|| ConfigError::new("/group", format!("task {} needs group data", cfg.task)))
}

pub fn group_coeffs(g: &GroupConfig) -> Checked<Vec<(GroupWord, C64)>> {
    if g.coeffs.is_empty() {
        return Err(ConfigError::new("/group/coeffs", "no coefficients"));
    }
    g.coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if let Some(&bad) = c.word.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > g.k) {
                return Err(ConfigError::new(
                    format!("/group/coeffs/{i}/word"),
                    format!("letter {bad} is not a generator of F_{}", g.k),
                ));
            }
            Ok((c.word.clone(), complex(&c.coeff)))
        })
        .collect()
}

pub fn group_matrices(g: &GroupConfig) -> Checked<Vec<DMatrix<C64>>> {
    if g.matrices.is_empty() {
        return Err(ConfigError::new("/group/matrices", "no matrices"));
    }
    g.matrices
        .iter()
        .enumerate()
        .map(|(i, m)| matrix(m, &format!("/group/matrices/{i}")))
        .collect()
}

pub fn build_symbol(cfg: &TaskConfig) -> Checked<SchurSymbol> {
    let sym = cfg
        .symbol
        .as_ref()
        .ok_or_else(|| ConfigError::new("/symbol", format!("task {} needs a symbol", cfg.task)))?;
    match (&sym.matrix, &sym.radial) {
        (Some(m), None) => Ok(SchurSymbol::new(matrix(m, "/symbol/matrix")?)),
        (None, Some(rad)) => {
            if !(rad.r.is_finite() && rad.r >= 0.0) {
                return Err(ConfigError::new("/symbol/radial/r", "r must be finite and nonnegative"));
            }
            let ball =
                GroupBall::new(rad.k, rad.radius).map_err(|e| ConfigError::new("/symbol/radial/k", e.to_string()))?;
            radial_symbol(&ball, rad.radius, |n| rad.r.powi(n as i32))
                .map_err(|e| ConfigError::new("/symbol/radial", e.to_string()))
        }
        _ => Err(ConfigError::new("/symbol", "give exactly one of matrix and radial")),
    }
}
