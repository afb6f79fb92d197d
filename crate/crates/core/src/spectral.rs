//! Graph matrices, the normalized-Laplacian graph Fourier transform and
//! diagonal-response graph filters.
//!
//! Spectral indices exposed to callers are 1-based: index 1 is the zero
//! eigenvalue, index N the largest. Internally everything is 0-based.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;

/// Undirected graph with nonnegative weights and no self loops.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adjacency: DMatrix<f64>,
    bandwidth_sq: f64,
}

impl WeightedGraph {
    /// Wraps an adjacency matrix after checking it is square, symmetric,
    /// nonnegative and has a zero diagonal.
    pub fn new(adjacency: DMatrix<f64>, bandwidth_sq: f64) -> Result<Self> {
        let n = adjacency.nrows();
        if adjacency.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: adjacency.ncols(),
            });
        }
        for j in 0..n {
            if adjacency[(j, j)] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "adjacency diagonal entry {j} is nonzero"
                )));
            }
            for k in 0..n {
                let w = adjacency[(j, k)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency entry ({j},{k}) = {w} is not a nonnegative weight"
                    )));
                }
                if w != adjacency[(k, j)] {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency is not symmetric at ({j},{k})"
                    )));
                }
            }
        }
        Ok(Self {
            adjacency,
            bandwidth_sq,
        })
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// Squared kernel bandwidth the graph was built with.
    pub fn bandwidth_sq(&self) -> f64 {
        self.bandwidth_sq
    }

    pub fn n_vertices(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.n_vertices(),
            self.adjacency.row_iter().map(|row| row.sum()),
        )
    }
}

/// `D^{-1/2} (D - A) D^{-1/2}`.
pub fn normalized_laplacian(graph: &WeightedGraph) -> Result<DMatrix<f64>> {
    let n = graph.n_vertices();
    let degrees = graph.degrees();
    if let Some(vertex) = degrees.iter().position(|&d| d <= 0.0) {
        return Err(Error::ZeroDegree { vertex });
    }
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let a = graph.adjacency();
    Ok(DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            1.0
        } else {
            -a[(j, k)] * inv_sqrt[j] * inv_sqrt[k]
        }
    }))
}

/// Ascending eigenvalues and matching orthonormal eigenvectors (as columns)
/// of a real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralBasis {
    /// Builds a basis from precomputed parts without re-sorting. Used by
    /// tests that need an alternative basis of the same operator.
    pub fn from_parts(eigenvalues: DVector<f64>, eigenvectors: DMatrix<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        if eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: eigenvectors.ncols(),
            });
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Basis of the normalized Laplacian of `graph`.
    pub fn of_graph(graph: &WeightedGraph) -> Result<Self> {
        eigendecompose(&normalized_laplacian(graph)?)
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(λ) Uᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (mut col, &lambda) in scaled.column_iter_mut().zip(self.eigenvalues.iter()) {
            col *= lambda;
        }
        scaled * u.transpose()
    }
}

/// Symmetric eigendecomposition with eigenpairs in ascending order and a
/// fixed sign convention: each eigenvector's largest-magnitude entry is
/// positive (lowest index wins ties).
pub fn eigendecompose(matrix: &DMatrix<f64>) -> Result<SpectralBasis> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: matrix.ncols(),
        });
    }
    for j in 0..n {
        for k in (j + 1)..n {
            if (matrix[(j, k)] - matrix[(k, j)]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "matrix is not symmetric at ({j},{k})"
                )));
            }
        }
    }
    let a = faer::Mat::from_fn(n, n, |i, j| matrix[(i, j)]);
    let eig = a
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::ConvergenceFailure)?;
    let values: Vec<f64> = eig.S().column_vector().iter().copied().collect();
    let u = eig.U();
    let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| values[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).clone_owned();
        let mut pivot = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(SpectralBasis {
        eigenvalues,
        eigenvectors,
    })
}

/// What a graph signal represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    /// `x_j - mean(x)`.
    AdjustedPosition,
    /// `v_j / |v_j|²`.
    NormalizedVelocity,
    /// `exp(i θ_j)`.
    PhaseComplex,
    Raw,
}

impl SignalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::AdjustedPosition => "adjusted_position",
            Self::NormalizedVelocity => "normalized_velocity",
            Self::PhaseComplex => "phase_complex",
            Self::Raw => "raw",
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row per vertex, `m` columns per row. Complex signals keep their
/// imaginary part in a separate matrix of the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSignal {
    kind: SignalKind,
    re: DMatrix<f64>,
    im: Option<DMatrix<f64>>,
}

impl GraphSignal {
    pub fn real(kind: SignalKind, values: DMatrix<f64>) -> Self {
        Self {
            kind,
            re: values,
            im: None,
        }
    }

    pub fn complex(kind: SignalKind, re: DMatrix<f64>, im: DMatrix<f64>) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::DimensionMismatch {
                expected: re.nrows(),
                actual: im.nrows(),
            });
        }
        Ok(Self {
            kind,
            re,
            im: Some(im),
        })
    }

    /// Unit-modulus signal `exp(i θ_j)`, one column.
    pub fn from_phases(phases: &[f64]) -> Self {
        let n = phases.len();
        Self {
            kind: SignalKind::PhaseComplex,
            re: DMatrix::from_iterator(n, 1, phases.iter().map(|t| t.cos())),
            im: Some(DMatrix::from_iterator(n, 1, phases.iter().map(|t| t.sin()))),
        }
    }

    pub fn kind(&self) -> SignalKind {
        self.kind
    }

    pub fn re(&self) -> &DMatrix<f64> {
        &self.re
    }

    pub fn im(&self) -> Option<&DMatrix<f64>> {
        self.im.as_ref()
    }

    pub fn is_complex(&self) -> bool {
        self.im.is_some()
    }

    pub fn n_rows(&self) -> usize {
        self.re.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.re.ncols()
    }

    /// `Σ_d |f_{jd}|²` for every row `j`.
    pub fn row_sq_norms(&self) -> Vec<f64> {
        row_sq_norms(&self.re, self.im.as_ref())
    }

    /// Squared Frobenius norm.
    pub fn energy(&self) -> f64 {
        self.row_sq_norms().iter().sum()
    }
}

/// GFT coefficients; row `i` belongs to spectral index `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub re: DMatrix<f64>,
    pub im: Option<DMatrix<f64>>,
}

impl Spectrum {
    pub fn n_rows(&self) -> usize {
        self.re.nrows()
    }
}

fn row_sq_norms(re: &DMatrix<f64>, im: Option<&DMatrix<f64>>) -> Vec<f64> {
    (0..re.nrows())
        .map(|j| {
            let r = re.row(j).norm_squared();
            r + im.map_or(0.0, |im| im.row(j).norm_squared())
        })
        .collect()
}

fn check_rows(basis: &SpectralBasis, rows: usize) -> Result<()> {
    if rows != basis.n() {
        return Err(Error::DimensionMismatch {
            expected: basis.n(),
            actual: rows,
        });
    }
    Ok(())
}

/// `Uᵀ f`, column by column; real and imaginary parts separately.
pub fn gft(basis: &SpectralBasis, signal: &GraphSignal) -> Result<Spectrum> {
    check_rows(basis, signal.n_rows())?;
    let ut = basis.eigenvectors.transpose();
    Ok(Spectrum {
        re: &ut * &signal.re,
        im: signal.im.as_ref().map(|im| &ut * im),
    })
}

/// `U f̂`. The result is tagged [`SignalKind::Raw`].
pub fn igft(basis: &SpectralBasis, spectrum: &Spectrum) -> Result<GraphSignal> {
    check_rows(basis, spectrum.n_rows())?;
    let u = &basis.eigenvectors;
    Ok(GraphSignal {
        kind: SignalKind::Raw,
        re: u * &spectrum.re,
        im: spectrum.im.as_ref().map(|im| u * im),
    })
}

/// Per-index power `Σ_d |f̂_{id}|²`.
pub fn gft_power(spectrum: &Spectrum) -> DVector<f64> {
    DVector::from_vec(row_sq_norms(&spectrum.re, spectrum.im.as_ref()))
}

/// Diagonal frequency response `H` of a graph filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterSpec {
    /// `H_ii = 1` for `i` in the (1-based) pass set, 0 otherwise.
    Indicator { pass: BTreeSet<usize> },
    /// `H = Λ`, i.e. the normalized Laplacian itself.
    Lgs,
}

impl FilterSpec {
    pub fn indicator<I: IntoIterator<Item = usize>>(pass: I) -> Result<Self> {
        let pass: BTreeSet<usize> = pass.into_iter().collect();
        if pass.is_empty() {
            return Err(Error::EmptyPassSet);
        }
        if pass.contains(&0) {
            return Err(Error::IndexOutOfRange { index: 0, n: 0 });
        }
        Ok(Self::Indicator { pass })
    }

    /// Checks the filter against a graph with `n` vertices.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::Lgs => Ok(()),
            Self::Indicator { pass } => {
                if pass.is_empty() {
                    return Err(Error::EmptyPassSet);
                }
                match pass.iter().find(|&&i| i == 0 || i > n) {
                    Some(&index) => Err(Error::IndexOutOfRange { index, n }),
                    None => Ok(()),
                }
            }
        }
    }

    /// Diagonal of `H` for the given basis.
    pub fn response(&self, basis: &SpectralBasis) -> Result<DVector<f64>> {
        self.validate(basis.n())?;
        Ok(match self {
            Self::Lgs => basis.eigenvalues.clone(),
            Self::Indicator { pass } => DVector::from_fn(basis.n(), |i, _| {
                if pass.contains(&(i + 1)) {
                    1.0
                } else {
                    0.0
                }
            }),
        })
    }
}

/// `g = U H Uᵀ f`. The result is tagged [`SignalKind::Raw`].
pub fn apply_filter(
    basis: &SpectralBasis,
    filter: &FilterSpec,
    signal: &GraphSignal,
) -> Result<GraphSignal> {
    let response = filter.response(basis)?;
    let mut spectrum = gft(basis, signal)?;
    scale_rows(&mut spectrum.re, &response);
    if let Some(im) = spectrum.im.as_mut() {
        scale_rows(im, &response);
    }
    igft(basis, &spectrum)
}

fn scale_rows(m: &mut DMatrix<f64>, by: &DVector<f64>) {
    for (mut row, &h) in m.row_iter_mut().zip(by.iter()) {
        row *= h;
    }
}
