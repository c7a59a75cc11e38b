//! Dense complex linear algebra at desk scale.
//!
//! Matrices are plain [`nalgebra::DMatrix`] values over [`Complex64`]. Every
//! routine here is a pure function of its inputs; tolerances are always
//! explicit arguments or named constants.

mod basis;
mod subset;

pub use basis::{hs_inner, OperatorBasis};
pub use subset::{represent_in_span, select_independent_subset, IndependentSubset, SpanSolver};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Relative threshold for deciding linear independence of pair products.
pub const DEFAULT_INDEPENDENCE_TOL: f64 = 1e-9;

/// Hermiticity residual above which an eigen-solve is refused.
pub const HERMITICITY_GUARD: f64 = 1e-6;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Builds a matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols);
    ComplexMatrix::from_fn(rows, cols, |i, j| c64(data[i * cols + j], 0.0))
}

pub fn ket(dim: usize, index: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[index] = ONE;
    v
}

/// `|v><v|`
pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

/// Kronecker product: entry `[(i*p + k), (j*q + l)] = a[i,j] * b[k,l]`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn tensor_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors.into_iter().fold(identity(1), |acc, f| tensor_product(&acc, f))
}

pub fn tensor_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vectorize(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(m.as_slice())
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Maps a flat index over the permuted factor order back to the original one.
fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let total: usize = dims.iter().product();
    let mut old_strides = vec![1usize; n];
    for s in (0..n.saturating_sub(1)).rev() {
        old_strides[s] = old_strides[s + 1] * dims[s + 1];
    }
    let new_dims: Vec<usize> = order.iter().map(|&s| dims[s]).collect();

    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let old: usize = digits.iter().zip(order).map(|(&d, &s)| d * old_strides[s]).sum();
        map.push(old);
        // increment the mixed-radix counter, last factor fastest
        for k in (0..n).rev() {
            digits[k] += 1;
            if digits[k] < new_dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    map
}

fn check_order(dims: &[usize], order: &[usize]) -> Result<()> {
    let mut seen = vec![false; dims.len()];
    if order.len() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "order has {} entries for {} factors",
            order.len(),
            dims.len()
        )));
    }
    for &s in order {
        if s >= dims.len() || seen[s] {
            return Err(Error::DimensionMismatch(format!(
                "{order:?} is not a permutation of the factors"
            )));
        }
        seen[s] = true;
    }
    Ok(())
}

/// Re-expresses a square operator on `H_{order[0]} ⊗ H_{order[1]} ⊗ ...`.
pub fn permute_subsystems(m: &ComplexMatrix, dims: &[usize], order: &[usize]) -> Result<ComplexMatrix> {
    check_order(dims, order)?;
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, factors {dims:?} need {total}x{total}",
            m.nrows(),
            m.ncols()
        )));
    }
    let map = permutation_map(dims, order);
    Ok(ComplexMatrix::from_fn(total, total, |i, j| m[(map[i], map[j])]))
}

/// Factor order that moves `party` to the front, keeping the rest in place.
pub fn party_first_order(parties: usize, party: usize) -> Vec<usize> {
    std::iter::once(party)
        .chain((0..parties).filter(|&p| p != party))
        .collect()
}

pub fn inverse_order(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (k, &s) in order.iter().enumerate() {
        inv[s] = k;
    }
    inv
}

/// Re-expresses `m` on `H_party ⊗ H_rest` with the remaining parties in
/// their original order. `party == 0` returns `m` unchanged.
pub fn permute_party_to_front(m: &ComplexMatrix, dims: &[usize], party: usize) -> Result<ComplexMatrix> {
    if party >= dims.len() {
        return Err(Error::PartyOutOfRange {
            party,
            parties: dims.len(),
        });
    }
    permute_subsystems(m, dims, &party_first_order(dims.len(), party))
}

/// Inverse of [`permute_party_to_front`].
pub fn permute_party_from_front(m: &ComplexMatrix, dims: &[usize], party: usize) -> Result<ComplexMatrix> {
    if party >= dims.len() {
        return Err(Error::PartyOutOfRange {
            party,
            parties: dims.len(),
        });
    }
    let order = party_first_order(dims.len(), party);
    let permuted_dims: Vec<usize> = order.iter().map(|&s| dims[s]).collect();
    permute_subsystems(m, &permuted_dims, &inverse_order(&order))
}

fn symmetrized(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    let residual = hermiticity_residual(h);
    if residual > HERMITICITY_GUARD * max_abs(h).max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    Ok((h + h.adjoint()).scale(0.5))
}

/// All eigenvalues of a Hermitian matrix, ascending.
///
/// Householder tridiagonalization followed by implicit QR (nalgebra's
/// `SymmetricEigen`), after explicit symmetrization.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    let h = symmetrized(h)?;
    if h.is_empty() {
        return Ok(Vec::new());
    }
    let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Eigenvalues (ascending) with matching unit eigenvectors as columns.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let h = symmetrized(h)?;
    let n = h.nrows();
    let se = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = idx.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, idx[j])]);
    Ok((values, vectors))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullspaceInfo {
    pub dimension: usize,
    pub eig_min: f64,
    pub eig_max: f64,
}

/// Nullspace dimension of `m` read off the spectrum of `m†m`: the number of
/// eigenvalues below `rel_tol * eig_max` (all columns when `m` vanishes).
pub fn nullspace_dimension(m: &ComplexMatrix, rel_tol: f64) -> NullspaceInfo {
    let gram = m.adjoint() * m;
    let eig = hermitian_eigenvalues(&gram).expect("m†m is Hermitian by construction");
    let eig_min = eig.first().copied().unwrap_or(0.0);
    let eig_max = eig.last().copied().unwrap_or(0.0);
    let dimension = if eig_max <= 0.0 {
        m.ncols()
    } else {
        eig.iter().filter(|&&e| e < rel_tol * eig_max).count()
    };
    NullspaceInfo {
        dimension,
        eig_min,
        eig_max,
    }
}

/// Orthonormal nullspace vectors of `m` under the same threshold as
/// [`nullspace_dimension`].
pub fn nullspace_basis(m: &ComplexMatrix, rel_tol: f64) -> Vec<ComplexVector> {
    let gram = m.adjoint() * m;
    let (values, vectors) = hermitian_eigen(&gram).expect("m†m is Hermitian by construction");
    let eig_max = values.last().copied().unwrap_or(0.0);
    values
        .iter()
        .enumerate()
        .filter(|(_, &e)| eig_max <= 0.0 || e < rel_tol * eig_max)
        .map(|(k, _)| vectors.column(k).into_owned())
        .collect()
}

/// Numerical rank via singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &ComplexMatrix, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Realigns a square operator across the `(party | rest)` cut so that a
/// product operator `A ⊗ B` becomes the rank-one matrix `vec(A) vec(B)^T`.
pub fn realign(m: &ComplexMatrix, dims: &[usize], party: usize) -> Result<ComplexMatrix> {
    let permuted = permute_party_to_front(m, dims, party)?;
    let da = dims[party];
    let db = permuted.nrows() / da;
    Ok(ComplexMatrix::from_fn(da * da, db * db, |r, c| {
        let (a, a2) = (r / da, r % da);
        let (b, b2) = (c / db, c % db);
        permuted[(a * db + b, a2 * db + b2)]
    }))
}

/// Draws a Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal pushed back into `Q`.
pub fn haar_unitary<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    use rand_distr::StandardNormal;
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = ComplexMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re * scale, im * scale)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    q
}
