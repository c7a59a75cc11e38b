use std::collections::BTreeMap;

use nalgebra::linalg::QR;

use super::{ComplexMatrix, ComplexVector};

/// A linearly independent selection from an indexed family of vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentSubset {
    /// Selected input indices, in scan order.
    pub indices: Vec<usize>,
    /// Coefficients over `indices` reproducing each rejected input.
    pub expansion: BTreeMap<usize, ComplexVector>,
}

impl IndependentSubset {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }

    /// Folds a coefficient vector over all inputs into one over the selected
    /// ones, using the stored expansions for rejected inputs.
    pub fn fold_coefficients(&self, full: &[num_complex::Complex64]) -> ComplexVector {
        let mut out = ComplexVector::from_iterator(self.len(), self.indices.iter().map(|&k| full[k]));
        for (&j, r) in &self.expansion {
            out += r * full[j];
        }
        out
    }
}

/// Greedy scan in input order using modified Gram–Schmidt with one
/// reorthogonalization pass.
///
/// A vector joins the subset iff its residual after projection onto the span
/// of those already chosen exceeds `tol` times the largest input norm. Scaling
/// by the family rather than by the vector itself keeps round-off sized
/// vectors (products that vanish analytically) out of the subset.
pub fn select_independent_subset(vectors: &[ComplexVector], tol: f64) -> IndependentSubset {
    assert!(tol > 0.0, "tolerance must be positive");
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut ortho: Vec<ComplexVector> = Vec::new();
    let mut indices = Vec::new();
    let mut rejected = Vec::new();

    for (k, v) in vectors.iter().enumerate() {
        let mut r = v.clone();
        for _pass in 0..2 {
            for q in &ortho {
                let overlap = q.dotc(&r);
                r.axpy(-overlap, q, num_complex::Complex64::new(1.0, 0.0));
            }
        }
        let residual = r.norm();
        if scale > 0.0 && residual > tol * scale {
            ortho.push(r.unscale(residual));
            indices.push(k);
        } else {
            rejected.push(k);
        }
    }

    let mut expansion = BTreeMap::new();
    if !indices.is_empty() {
        let solver = SpanSolver::new(indices.iter().map(|&k| &vectors[k]));
        for j in rejected {
            expansion.insert(j, solver.solve(&vectors[j]).0);
        }
    } else {
        for j in rejected {
            expansion.insert(j, ComplexVector::zeros(0));
        }
    }
    IndependentSubset { indices, expansion }
}

/// Least-squares solver for repeated targets against one fixed set of
/// linearly independent basis vectors.
pub struct SpanSolver {
    basis: ComplexMatrix,
    q: ComplexMatrix,
    r: ComplexMatrix,
}

impl SpanSolver {
    pub fn new<'a, I>(basis: I) -> Self
    where
        I: IntoIterator<Item = &'a ComplexVector>,
    {
        let columns: Vec<&ComplexVector> = basis.into_iter().collect();
        let basis = if columns.is_empty() {
            ComplexMatrix::zeros(0, 0)
        } else {
            ComplexMatrix::from_columns(&columns.iter().map(|c| (*c).clone()).collect::<Vec<_>>())
        };
        let qr = QR::new(basis.clone());
        let q = qr.q();
        let r = qr.r();
        Self { basis, q, r }
    }

    /// Returns least-squares coefficients and the residual norm.
    pub fn solve(&self, target: &ComplexVector) -> (ComplexVector, f64) {
        let k = self.basis.ncols();
        if k == 0 {
            return (ComplexVector::zeros(0), target.norm());
        }
        let y = self.q.adjoint() * target;
        let x = self
            .r
            .rows(0, k)
            .into_owned()
            .solve_upper_triangular(&y.rows(0, k).into_owned())
            .expect("basis vectors are linearly independent");
        let residual = (&self.basis * &x - target).norm();
        (x, residual)
    }
}

/// Least-squares coefficients of `target` over independent `basis`, with the
/// residual norm. Callers needing an exact representation check the residual.
pub fn represent_in_span(basis: &[ComplexVector], target: &ComplexVector) -> (ComplexVector, f64) {
    SpanSolver::new(basis).solve(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, ket};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> ComplexVector {
        ComplexVector::from_fn(n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn orthogonal_vectors_all_selected() {
        let vs = vec![ket(3, 0), ket(3, 1).scale(2.0), ket(3, 2)];
        let s = select_independent_subset(&vs, 1e-9);
        assert_eq!(s.indices, vec![0, 1, 2]);
        assert!(s.expansion.is_empty());
    }

    #[test]
    fn duplicate_direction_rejected_with_expansion() {
        let v = ket(3, 0) + ket(3, 1);
        let w = ket(3, 2);
        let s = select_independent_subset(&[v.clone(), v.scale(2.0), w], 1e-9);
        assert_eq!(s.indices, vec![0, 2]);
        let r = &s.expansion[&1];
        assert!((r[0] - c64(2.0, 0.0)).norm() < 1e-12);
        assert!(r[1].norm() < 1e-12);
    }

    #[test]
    fn all_zero_inputs_give_empty_subset() {
        let s = select_independent_subset(&[ComplexVector::zeros(4), ComplexVector::zeros(4)], 1e-9);
        assert!(s.is_empty());
    }

    #[test]
    fn round_off_sized_vectors_are_rejected() {
        let vs = vec![ket(4, 0), ket(4, 1).scale(1e-17), ket(4, 2)];
        let s = select_independent_subset(&vs, 1e-9);
        assert_eq!(s.indices, vec![0, 2]);
    }

    #[test]
    fn represent_simple_cases() {
        let (x, res) = represent_in_span(&[ket(2, 0), ket(2, 1)], &(ket(2, 0) + ket(2, 1)));
        assert!((x[0] - c64(1.0, 0.0)).norm() < 1e-14 && (x[1] - c64(1.0, 0.0)).norm() < 1e-14);
        assert!(res < 1e-14);

        let (x, res) = represent_in_span(&[ket(2, 0)], &ket(2, 1));
        assert!(x[0].norm() < 1e-14);
        assert!((res - 1.0).abs() < 1e-14);
    }

    #[test]
    fn represent_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let basis: Vec<ComplexVector> = (0..3).map(|_| random_vector(5, &mut rng)).collect();
        let target = random_vector(5, &mut rng);
        let (x, res) = represent_in_span(&basis, &target);

        // independent route: (A†A) x = A† b by LU
        let a = ComplexMatrix::from_columns(&basis);
        let normal = a.adjoint() * &a;
        let rhs = a.adjoint() * &target;
        let oracle = normal.lu().solve(&rhs).unwrap();
        assert!((&x - &oracle).norm() < 1e-10);
        assert!((res - (&a * &oracle - &target).norm()).abs() < 1e-10);
    }
}
