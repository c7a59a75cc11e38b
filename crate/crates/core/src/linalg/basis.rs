use super::{c64, identity, ComplexMatrix, ComplexVector, ZERO};
use crate::error::{Error, Result};

/// Hilbert–Schmidt orthonormal operator basis on `C^d`.
///
/// Element 0 is `I/√d`; the remaining `d² − 1` elements are traceless.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl OperatorBasis {
    /// Normalized generalized Gell-Mann basis: identity, then for each
    /// `j < k` the symmetric and antisymmetric off-diagonal pair, then the
    /// `d − 1` diagonal elements.
    pub fn gell_mann(d: usize) -> Self {
        assert!(d >= 1, "operator basis needs d >= 1");
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut elements = Vec::with_capacity(d * d);
        elements.push(identity(d).scale(1.0 / (d as f64).sqrt()));
        for j in 0..d {
            for k in (j + 1)..d {
                let mut sym = ComplexMatrix::zeros(d, d);
                sym[(j, k)] = c64(h, 0.0);
                sym[(k, j)] = c64(h, 0.0);
                elements.push(sym);

                let mut anti = ComplexMatrix::zeros(d, d);
                anti[(j, k)] = c64(0.0, -h);
                anti[(k, j)] = c64(0.0, h);
                elements.push(anti);
            }
        }
        for l in 1..d {
            let norm = ((l * (l + 1)) as f64).sqrt();
            let mut diag = ComplexMatrix::zeros(d, d);
            for j in 0..l {
                diag[(j, j)] = c64(1.0 / norm, 0.0);
            }
            diag[(l, l)] = c64(-(l as f64) / norm, 0.0);
            elements.push(diag);
        }
        Self { dim: d, elements }
    }

    /// Keeps element 0 and replaces the traceless elements by
    /// `E'_k = Σ_l u[k-1, l-1] E_l`. A unitary `u` preserves orthonormality.
    pub fn recombined(&self, u: &ComplexMatrix) -> Result<Self> {
        let n = self.elements.len() - 1;
        if u.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "recombination matrix must be {n}x{n}, got {}x{}",
                u.nrows(),
                u.ncols()
            )));
        }
        let mut elements = vec![self.elements[0].clone()];
        for k in 0..n {
            let mut e = ComplexMatrix::zeros(self.dim, self.dim);
            for l in 0..n {
                e += &self.elements[l + 1] * u[(k, l)];
            }
            elements.push(e);
        }
        Ok(Self {
            dim: self.dim,
            elements,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &ComplexMatrix {
        &self.elements[k]
    }

    /// Hilbert–Schmidt coefficients `trace(E_k† m)`.
    pub fn expand(&self, m: &ComplexMatrix) -> ComplexVector {
        ComplexVector::from_iterator(self.elements.len(), self.elements.iter().map(|e| hs_inner(e, m)))
    }

    pub fn resum(&self, coefficients: &ComplexVector) -> ComplexMatrix {
        self.elements
            .iter()
            .zip(coefficients.iter())
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, (e, &c)| acc + e * c)
    }
}

/// `trace(a† b)`
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> num_complex::Complex64 {
    a.iter().zip(b.iter()).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}
