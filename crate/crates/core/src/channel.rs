//! Quantum channels in Kraus form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{matrix_from_rows, matrix_to_rows, MatrixRows};
use crate::linalg::{
    ensure_finite, hermitian_eigenvalues, hermiticity_residual, identity, max_abs_diff, numerical_rank, realign,
    vectorize, ComplexMatrix,
};

/// Completeness residual above which a channel is reported as suspicious.
pub const COMPLETENESS_WARN_TOL: f64 = 1e-9;
/// Completeness residual above which a channel is rejected outright.
pub const COMPLETENESS_REJECT_TOL: f64 = 1e-6;
/// Default Choi max-entry distance for channel equality.
pub const DEFAULT_EQUALITY_TOL: f64 = 1e-9;
/// Default relative eigenvalue cutoff for Kraus and Schmidt ranks.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// A channel `ρ ↦ Σ K_i ρ K_i†` on `⊗_α C^{d_α}`, possibly changing the
/// output dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelFile", into = "ChannelFile")]
pub struct KrausChannel {
    name: String,
    input_dims: Vec<usize>,
    output_dim: usize,
    kraus: Vec<ComplexMatrix>,
}

/// On-disk layout of a channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    name: String,
    input_dims: Vec<usize>,
    output_dim: usize,
    kraus: Vec<MatrixRows>,
}

impl TryFrom<ChannelFile> for KrausChannel {
    type Error = Error;

    fn try_from(f: ChannelFile) -> Result<Self> {
        let kraus = f.kraus.iter().map(matrix_from_rows).collect::<Result<Vec<_>>>()?;
        KrausChannel::new(f.name, f.input_dims, f.output_dim, kraus)
    }
}

impl From<KrausChannel> for ChannelFile {
    fn from(c: KrausChannel) -> Self {
        ChannelFile {
            kraus: c.kraus.iter().map(matrix_to_rows).collect(),
            name: c.name,
            input_dims: c.input_dims,
            output_dim: c.output_dim,
        }
    }
}

impl KrausChannel {
    /// Validates shapes and finiteness. Completeness is measured separately
    /// by [`KrausChannel::completeness_residual`].
    pub fn new(
        name: impl Into<String>,
        input_dims: Vec<usize>,
        output_dim: usize,
        kraus: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if input_dims.is_empty() {
            return Err(Error::InvalidChannel("at least one party is required".into()));
        }
        if input_dims.contains(&0) || output_dim == 0 {
            return Err(Error::InvalidChannel("dimensions must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("at least one Kraus operator is required".into()));
        }
        let d: usize = input_dims.iter().product();
        for (k, op) in kraus.iter().enumerate() {
            if op.shape() != (output_dim, d) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {k} is {}x{}, expected {output_dim}x{d}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            ensure_finite(op)?;
        }
        Ok(Self {
            name: name.into(),
            input_dims,
            output_dim,
            kraus,
        })
    }

    /// Syntax and schema problems surface as [`Error::Json`]; shape problems
    /// keep their own variants.
    pub fn from_json(s: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(s)?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel serialization cannot fail")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn input_dims(&self) -> &[usize] {
        &self.input_dims
    }

    pub fn parties(&self) -> usize {
        self.input_dims.len()
    }

    /// Total input dimension `D`.
    pub fn input_dim(&self) -> usize {
        self.input_dims.iter().product()
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// `max |Σ K_i†K_i − I|` over entries.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.input_dim();
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&sum, &identity(d))
    }

    /// Errors with [`Error::Incomplete`] when the residual exceeds `tol`.
    pub fn require_complete(&self, tol: f64) -> Result<f64> {
        let residual = self.completeness_residual();
        if residual > tol {
            Err(Error::Incomplete { residual })
        } else {
            Ok(residual)
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "state has dimension {}, channel input is {}",
                rho.dim(),
                self.input_dim()
            )));
        }
        let out = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.output_dim, self.output_dim), |acc, k| {
                acc + k * rho.matrix() * k.adjoint()
            });
        Ok(DensityMatrix { matrix: out })
    }

    /// Unnormalized Choi matrix `Σ vec(K_i) vec(K_i)†` with column-stacking
    /// `vec`; its trace is `D` for a complete channel.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let n = self.output_dim * self.input_dim();
        self.kraus.iter().fold(ComplexMatrix::zeros(n, n), |acc, k| {
            let v = vectorize(k);
            acc + &v * v.adjoint()
        })
    }

    /// Applies the Kraus freedom `K'_j = Σ_i v[j,i] K_i`, after padding with
    /// zero operators up to `v.ncols()`.
    pub fn remix(&self, v: &ComplexMatrix) -> Result<KrausChannel> {
        let padded = v.ncols();
        if padded < self.kraus.len() {
            return Err(Error::DimensionMismatch(format!(
                "mixing matrix has {padded} columns for {} Kraus operators",
                self.kraus.len()
            )));
        }
        let residual = max_abs_diff(&(v.adjoint() * v), &identity(padded));
        if residual > 1e-10 {
            return Err(Error::NotIsometric { residual });
        }
        let zero = ComplexMatrix::zeros(self.output_dim, self.input_dim());
        let kraus = (0..v.nrows())
            .map(|j| {
                self.kraus
                    .iter()
                    .enumerate()
                    .fold(zero.clone(), |acc, (i, k)| acc + k * v[(j, i)])
            })
            .collect();
        Ok(KrausChannel {
            name: format!("{}-remixed", self.name),
            input_dims: self.input_dims.clone(),
            output_dim: self.output_dim,
            kraus,
        })
    }

    /// Rank of the Choi matrix: eigenvalues above `rel_tol` times the largest.
    pub fn kraus_rank(&self, rel_tol: f64) -> usize {
        let eig = hermitian_eigenvalues(&self.choi_matrix()).expect("Choi matrix is Hermitian");
        let max = eig.last().copied().unwrap_or(0.0);
        if max <= 0.0 {
            return 0;
        }
        eig.iter().filter(|&&e| e > rel_tol * max).count()
    }

    /// Kraus operator with the largest Frobenius norm.
    pub fn dominant_kraus(&self) -> &ComplexMatrix {
        self.kraus
            .iter()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("channels have at least one Kraus operator")
    }
}

/// Choi-matrix distance between two channels on the same spaces: the largest
/// absolute entry of `J(a) − J(b)`. Equal iff the distance is within `tol`.
pub fn channels_equal(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<(bool, f64)> {
    if a.input_dim() != b.input_dim() || a.output_dim() != b.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "channels map {} -> {} and {} -> {}",
            a.input_dim(),
            a.output_dim(),
            b.input_dim(),
            b.output_dim()
        )));
    }
    let distance = max_abs_diff(&a.choi_matrix(), &b.choi_matrix());
    Ok((distance <= tol, distance))
}

/// Operator Schmidt rank of a square operator across the `(party | rest)` cut.
pub fn operator_schmidt_rank(m: &ComplexMatrix, dims: &[usize], party: usize, rel_tol: f64) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(numerical_rank(&realign(m, dims, party)?, rel_tol))
}

/// A normalized, positive semidefinite state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub const TOL: f64 = 1e-10;

    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        ensure_finite(&matrix)?;
        let residual = hermiticity_residual(&matrix);
        if residual > Self::TOL {
            return Err(Error::NotHermitian { residual });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > Self::TOL || trace.im.abs() > Self::TOL {
            return Err(Error::InvalidParams(format!("state trace is {trace}, expected 1")));
        }
        let min = hermitian_eigenvalues(&matrix)?.first().copied().unwrap_or(0.0);
        if min < -Self::TOL {
            return Err(Error::InvalidParams(format!("state has negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix })
    }

    pub fn pure(psi: &crate::linalg::ComplexVector) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }
}
