//! Composition of density matrices into phrase and sentence meanings.

mod fragment;
mod pregroup;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{grouped_eigen, psd_sqrt, DensityMatrix, LinalgError};

pub use fragment::{compose_fragment, required_lemmas, Form, Fragment, Pattern, Role, Token};
pub use pregroup::{pregroup_reduce, Adjoint, Base, Lexicon, PregroupType, Reduction, SimpleType};

/// Compositions whose unnormalized trace falls below this are degenerate.
pub const DEGENERATE_TRACE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComposeError {
    #[error("out-of-vocabulary lemmas: {}", .0.join(", "))]
    Oov(Vec<String>),
    #[error("degenerate composition (trace {0:e})")]
    Degenerate(f64),
    #[error("invalid fragment: {0}")]
    InvalidFragment(String),
    #[error("{0} does not compose pairwise")]
    Unsupported(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl ComposeError {
    pub fn is_numeric(&self) -> bool {
        matches!(self, ComposeError::Degenerate(_) | ComposeError::Linalg(_))
    }
}

pub type ComposeResult<T> = std::result::Result<T, ComposeError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Add,
    Mult,
    Fuzz,
    Phaser,
    VerbOnly,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Add,
        Method::Mult,
        Method::Fuzz,
        Method::Phaser,
        Method::VerbOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Add => "add",
            Method::Mult => "mult",
            Method::Fuzz => "fuzz",
            Method::Phaser => "phaser",
            Method::VerbOnly => "verb_only",
        }
    }

    /// Whether the operator side matters for this method.
    pub fn uses_operator_side(self) -> bool {
        matches!(self, Method::Fuzz | Method::Phaser)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "add" => Ok(Method::Add),
            "mult" => Ok(Method::Mult),
            "fuzz" => Ok(Method::Fuzz),
            "phaser" => Ok(Method::Phaser),
            "verb_only" | "verb-only" => Ok(Method::VerbOnly),
            other => Err(format!("unknown composition method `{other}`")),
        }
    }
}

/// Which side acts as the operator in fuzz and phaser steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorSide {
    #[default]
    Verb,
    Noun,
}

impl OperatorSide {
    pub fn name(self) -> &'static str {
        match self {
            OperatorSide::Verb => "verb",
            OperatorSide::Noun => "noun",
        }
    }
}

impl std::str::FromStr for OperatorSide {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "verb" => Ok(OperatorSide::Verb),
            "noun" => Ok(OperatorSide::Noun),
            other => Err(format!("unknown operator side `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComposeConfig {
    pub method: Method,
    pub operator_side: OperatorSide,
    pub include_function_words: bool,
}

impl ComposeConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            operator_side: OperatorSide::Verb,
            include_function_words: false,
        }
    }

    pub fn with_side(mut self, side: OperatorSide) -> Self {
        self.operator_side = side;
        self
    }
}

impl Default for ComposeConfig {
    fn default() -> Self {
        Self::new(Method::Fuzz)
    }
}

fn finish(m: DMatrix<f64>) -> ComposeResult<DensityMatrix> {
    let trace = m.trace();
    if !(trace >= DEGENERATE_TRACE) {
        return Err(ComposeError::Degenerate(trace));
    }
    Ok(DensityMatrix::from_psd_unchecked(m)?)
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> ComposeResult<()> {
    if a.dim() != b.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        }
        .into());
    }
    Ok(())
}

/// `(A + B)` renormalized.
pub fn add(a: &DensityMatrix, b: &DensityMatrix) -> ComposeResult<DensityMatrix> {
    add_all(&[a, b])
}

/// Entrywise product renormalized.
pub fn mult(a: &DensityMatrix, b: &DensityMatrix) -> ComposeResult<DensityMatrix> {
    mult_all(&[a, b])
}

/// Sum of all matrices with a single renormalization.
pub fn add_all(ms: &[&DensityMatrix]) -> ComposeResult<DensityMatrix> {
    let (first, rest) = ms.split_first().ok_or(LinalgError::Empty)?;
    let mut acc = first.as_matrix().clone();
    for m in rest {
        check_dims(first, m)?;
        acc += m.as_matrix();
    }
    finish(acc)
}

/// Entrywise product of all matrices with a single renormalization.
pub fn mult_all(ms: &[&DensityMatrix]) -> ComposeResult<DensityMatrix> {
    let (first, rest) = ms.split_first().ok_or(LinalgError::Empty)?;
    let mut acc = first.as_matrix().clone();
    for m in rest {
        check_dims(first, m)?;
        acc.component_mul_assign(m.as_matrix());
    }
    finish(acc)
}

/// `Σ_g λ_g P_g B P_g` over the eigenspaces of the operator `A`, renormalized.
pub fn fuzz(a: &DensityMatrix, b: &DensityMatrix) -> ComposeResult<DensityMatrix> {
    check_dims(a, b)?;
    let d = a.dim();
    let mut acc = DMatrix::zeros(d, d);
    for g in grouped_eigen(a.as_matrix()).eigenspaces {
        if g.value <= 0.0 {
            continue;
        }
        // P B P = V (Vᵀ B V) Vᵀ
        let inner = g.basis.tr_mul(b.as_matrix()) * &g.basis;
        acc += (&g.basis * inner * g.basis.transpose()) * g.value;
    }
    finish(acc)
}

/// `A^{1/2} B A^{1/2}`, renormalized.
pub fn phaser(a: &DensityMatrix, b: &DensityMatrix) -> ComposeResult<DensityMatrix> {
    check_dims(a, b)?;
    let root = psd_sqrt(a.as_matrix())?;
    finish(&root * b.as_matrix() * &root)
}

/// Applies `method` with `operator` acting on `argument`.
pub fn compose_pair(
    operator: &DensityMatrix,
    argument: &DensityMatrix,
    method: Method,
) -> ComposeResult<DensityMatrix> {
    match method {
        Method::Add => add(operator, argument),
        Method::Mult => mult(operator, argument),
        Method::Fuzz => fuzz(operator, argument),
        Method::Phaser => phaser(operator, argument),
        Method::VerbOnly => Err(ComposeError::Unsupported("verb_only")),
    }
}
