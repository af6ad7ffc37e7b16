//! Dense symmetric positive semi-definite linear algebra for density matrices.
//!
//! A [`DensityMatrix`] is a real symmetric PSD matrix with unit trace. Every
//! constructor symmetrizes its input, clamps round-off negative eigenvalues to
//! zero and normalizes the trace, so downstream code can rely on those
//! invariants without re-checking them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum tolerated asymmetry `max |A_ij - A_ji|`, relative to `max(1, max |A_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues in `[-EIGEN_CLAMP_TOL * λmax, 0)` are round-off and clamped to 0.
pub const EIGEN_CLAMP_TOL: f64 = 1e-8;

/// Relative tolerance under which neighbouring eigenvalues share an eigenspace.
pub const EIGEN_GROUP_TOL: f64 = 1e-8;

/// Allowed deviation of the trace from 1 when a caller hands in a raw matrix
/// that claims to be normalized.
pub const TRACE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive semi-definite (eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("matrix has zero trace and cannot be normalized")]
    ZeroTrace,
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("trace {0} differs from 1")]
    NotNormalized(f64),
    #[error("invalid mixture weight {0}")]
    InvalidWeight(f64),
    #[error("no vectors given")]
    Empty,
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Similarity between two density matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Generalized inner product `Tr(A†B)`.
    #[default]
    Trace,
    /// `Tr(A†B) / sqrt(Tr(A†A) Tr(B†B))`.
    Cosine,
}

impl SimMode {
    pub fn name(self) -> &'static str {
        match self {
            SimMode::Trace => "trace",
            SimMode::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for SimMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "trace" => Ok(SimMode::Trace),
            "cosine" | "frobenius_cosine" => Ok(SimMode::Cosine),
            other => Err(format!("unknown similarity mode `{other}`")),
        }
    }
}

/// A trace-normalized, symmetric, positive semi-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<f64>,
}

impl DensityMatrix {
    /// Validates, clamps and trace-normalizes an arbitrary square matrix.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        let sym = symmetrized(m)?;
        let (values, vectors) = sorted_eigen(&sym);
        let lambda_max = values.first().copied().unwrap_or(0.0);
        let lambda_min = values.last().copied().unwrap_or(0.0);
        if lambda_max <= 0.0 {
            return if lambda_min < -f64::MIN_POSITIVE {
                Err(LinalgError::NotPsd(lambda_min))
            } else {
                Err(LinalgError::ZeroTrace)
            };
        }
        if lambda_min < -EIGEN_CLAMP_TOL * lambda_max {
            return Err(LinalgError::NotPsd(lambda_min));
        }
        let data = if lambda_min < 0.0 {
            let clamped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
            let rebuilt = reconstruct(&clamped, &vectors);
            symmetrized(rebuilt)?
        } else {
            sym
        };
        Self::normalized(data)
    }

    /// Normalizes a matrix the caller knows to be symmetric PSD, skipping the
    /// eigenvalue check. The matrix is still symmetrized.
    pub(crate) fn from_psd_unchecked(m: DMatrix<f64>) -> Result<Self> {
        Self::normalized(symmetrized(m)?)
    }

    fn normalized(data: DMatrix<f64>) -> Result<Self> {
        let trace = data.trace();
        if !(trace > 0.0) || !trace.is_finite() {
            return Err(LinalgError::ZeroTrace);
        }
        Ok(Self { data: data / trace })
    }

    /// The pure state `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn pure(v: &DVector<f64>) -> Result<Self> {
        build_density(&[(v.clone(), 1.0)])
    }

    /// The maximally mixed state `𝕀/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self {
            data: DMatrix::identity(dim, dim) / dim as f64,
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    pub fn eigen(&self) -> EigenSystem {
        eigendecompose(self)
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> f64 {
        entropy_from_eigenvalues(&sorted_eigen(&self.data).0)
    }

    pub fn similarity(&self, other: &DensityMatrix, mode: SimMode) -> Result<f64> {
        similarity(self, other, mode)
    }
}

/// A `d×m` matrix whose columns are sense embeddings; its density matrix is `BBᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseMatrix {
    data: DMatrix<f64>,
}

impl SenseMatrix {
    pub fn from_matrix(data: DMatrix<f64>) -> Result<Self> {
        if data.ncols() == 0 || data.nrows() == 0 {
            return Err(LinalgError::Empty);
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { data })
    }

    pub fn from_columns(columns: &[DVector<f64>]) -> Result<Self> {
        let first = columns.first().ok_or(LinalgError::Empty)?;
        for c in columns {
            if c.len() != first.len() {
                return Err(LinalgError::DimensionMismatch {
                    expected: first.len(),
                    found: c.len(),
                });
            }
        }
        Self::from_matrix(DMatrix::from_columns(columns))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn senses(&self) -> usize {
        self.data.ncols()
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        self.data.column(j).into_owned()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// `BBᵀ`, trace-normalized: every column weighted 1.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let gram = &self.data * self.data.transpose();
        DensityMatrix::from_psd_unchecked(gram)
    }
}

/// One eigenvalue with an orthonormal basis (`d×k`) for its eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub value: f64,
    pub basis: DMatrix<f64>,
}

impl Eigenspace {
    pub fn multiplicity(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projector `VVᵀ` onto the eigenspace.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }
}

/// Spectral decomposition with degenerate eigenvalues grouped into eigenspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// All eigenvalues, descending, clamped at 0.
    pub eigenvalues: Vec<f64>,
    pub eigenspaces: Vec<Eigenspace>,
}

impl EigenSystem {
    /// `Σ_g λ_g P_g`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = self.eigenspaces.first().map_or(0, |g| g.basis.nrows());
        let mut out = DMatrix::zeros(d, d);
        for g in &self.eigenspaces {
            out += g.projector() * g.value;
        }
        out
    }
}

/// Builds `Σ wᵢ|vᵢ⟩⟨vᵢ|` and normalizes its trace.
pub fn build_density(items: &[(DVector<f64>, f64)]) -> Result<DensityMatrix> {
    let d = items.first().ok_or(LinalgError::Empty)?.0.len();
    if d == 0 {
        return Err(LinalgError::Empty);
    }
    let mut acc = DMatrix::zeros(d, d);
    for (v, w) in items {
        if v.len() != d {
            return Err(LinalgError::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        if !w.is_finite() || *w < 0.0 {
            return Err(LinalgError::InvalidWeight(*w));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        if *w > 0.0 {
            acc.ger(*w, v, v, 1.0);
        }
    }
    DensityMatrix::from_psd_unchecked(acc)
}

/// Eigendecomposition of a density matrix with eigenspace grouping.
pub fn eigendecompose(a: &DensityMatrix) -> EigenSystem {
    grouped_eigen(a.as_matrix())
}

/// Grouped eigendecomposition of any symmetric matrix (eigenvalues clamped at 0).
pub fn grouped_eigen(m: &DMatrix<f64>) -> EigenSystem {
    let (values, vectors) = sorted_eigen(m);
    let clamped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let lambda_max = clamped.first().copied().unwrap_or(0.0);
    let tol = EIGEN_GROUP_TOL * lambda_max;

    let mut eigenspaces = Vec::new();
    let mut start = 0;
    for i in 1..=clamped.len() {
        if i == clamped.len() || clamped[i - 1] - clamped[i] > tol {
            let members = &clamped[start..i];
            let value = members.iter().sum::<f64>() / members.len() as f64;
            let basis = vectors.columns(start, i - start).into_owned();
            eigenspaces.push(Eigenspace { value, basis });
            start = i;
        }
    }
    EigenSystem {
        eigenvalues: clamped,
        eigenspaces,
    }
}

/// Symmetric PSD square root `S` with `S·S = A`. Eigenvalues at round-off
/// level (`d·ε·λmax`) are taken as zero.
pub fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = symmetrized(m.clone())?;
    let (values, vectors) = sorted_eigen(&sym);
    let lambda_max = values.first().copied().unwrap_or(0.0).max(0.0);
    if let Some(&lambda_min) = values.last() {
        if lambda_min < -EIGEN_CLAMP_TOL * lambda_max && lambda_min < 0.0 {
            return Err(LinalgError::NotPsd(lambda_min));
        }
    }
    let floor = values.len() as f64 * f64::EPSILON * lambda_max;
    let roots: Vec<f64> = values
        .iter()
        .map(|&v| if v <= floor { 0.0 } else { v.sqrt() })
        .collect();
    symmetrized(reconstruct(&roots, &vectors))
}

/// Von Neumann entropy `−Σ λ ln λ` (nats) of a raw matrix that should have unit trace.
pub fn von_neumann_entropy(m: &DMatrix<f64>) -> Result<f64> {
    let sym = symmetrized(m.clone())?;
    let trace = sym.trace();
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(LinalgError::NotNormalized(trace));
    }
    Ok(entropy_from_eigenvalues(&sorted_eigen(&sym).0))
}

fn entropy_from_eigenvalues(values: &[f64]) -> f64 {
    let h: f64 = values
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum();
    h.max(0.0)
}

/// Similarity of two density matrices under the given mode.
pub fn similarity(a: &DensityMatrix, b: &DensityMatrix, mode: SimMode) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let inner = frobenius_inner(a.as_matrix(), b.as_matrix());
    Ok(match mode {
        SimMode::Trace => inner,
        SimMode::Cosine => {
            let na = frobenius_inner(a.as_matrix(), a.as_matrix());
            let nb = frobenius_inner(b.as_matrix(), b.as_matrix());
            inner / (na * nb).sqrt()
        }
    })
}

/// `Tr(AᵀB) = Σ A_ij B_ij`.
pub fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Checks squareness, finiteness and symmetry, then returns `(A + Aᵀ)/2`.
pub(crate) fn symmetrized(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(LinalgError::Empty);
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let scale = m.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let mut asym = 0.0_f64;
    for i in 0..rows {
        for j in (i + 1)..rows {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL * scale {
        return Err(LinalgError::NotSymmetric(asym));
    }
    let t = m.transpose();
    Ok((m + t) * 0.5)
}

/// Eigenvalues in descending order with matching eigenvector columns.
pub(crate) fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .total_cmp(&eig.eigenvalues[i])
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let columns: Vec<DVector<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (values, DMatrix::from_columns(&columns))
}

fn reconstruct(values: &[f64], vectors: &DMatrix<f64>) -> DMatrix<f64> {
    let scaled = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| {
        vectors[(i, j)] * values[j]
    });
    scaled * vectors.transpose()
}
