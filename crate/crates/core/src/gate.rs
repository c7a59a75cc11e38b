//! First-measurement gate.
//!
//! For each party `α` the channel's pair products `K_i†K_{i'}` are expanded
//! against `Λ_μ ⊗ Γ_ν` (`ν ≠ 0`), giving the matrix `Q_α` whose nullspace
//! holds every coefficient vector that could describe a first local
//! measurement `A ⊗ I`. The trivial solution (the identity) is removed by
//! appending the row `c_I†`. If the augmented `Q_α` has an empty nullspace for
//! every party, no LOCC protocol (finite or infinite) implements the channel.

use serde::{Deserialize, Serialize};

use crate::channel::{operator_schmidt_rank, KrausChannel, COMPLETENESS_REJECT_TOL, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, hs_inner, identity, nullspace_basis, nullspace_dimension, permute_party_to_front,
    select_independent_subset, tensor_product, vectorize, ComplexMatrix, ComplexVector, IndependentSubset,
    OperatorBasis, SpanSolver, DEFAULT_INDEPENDENCE_TOL,
};

/// Eigenvalues of `Q†Q` below this fraction of the largest count as zero.
pub const DEFAULT_GATE_TOL: f64 = 1e-13;

/// Floor on the residual allowed when expressing the identity over the
/// selected pair products.
pub const IDENTITY_RESIDUAL_TOL: f64 = 1e-9;

/// `K_i†K_{i'}` on the input space, re-expressed with one party's factor first.
#[derive(Debug, Clone, PartialEq)]
pub struct PairProduct {
    pub pair: (usize, usize),
    pub op: ComplexMatrix,
}

/// All `N²` products in row-major `(i, i')` order.
pub fn pair_products(c: &KrausChannel, party: usize) -> Result<Vec<PairProduct>> {
    if party >= c.parties() {
        return Err(Error::PartyOutOfRange {
            party,
            parties: c.parties(),
        });
    }
    let adjoints: Vec<ComplexMatrix> = c.kraus().iter().map(|k| k.adjoint()).collect();
    let mut out = Vec::with_capacity(c.len() * c.len());
    for (i, ki_dag) in adjoints.iter().enumerate() {
        for (j, kj) in c.kraus().iter().enumerate() {
            let op = permute_party_to_front(&(ki_dag * kj), c.input_dims(), party)?;
            out.push(PairProduct { pair: (i, j), op });
        }
    }
    Ok(out)
}

/// Unaugmented `Q` for one party together with the subset indexing its
/// columns.
#[derive(Debug, Clone)]
pub struct QMatrix {
    /// Rows `(μ, ν)` with `μ` outer over `[0, d_α²)` and `ν` inner over
    /// `[1, d_ᾱ²)`; columns follow `subset.indices`.
    pub q: ComplexMatrix,
    pub subset: IndependentSubset,
}

/// Builds `Q` from pair products already permuted to `H_α ⊗ H_ᾱ`.
pub fn build_q_from_products(
    products: &[PairProduct],
    party_basis: &OperatorBasis,
    rest_basis: &OperatorBasis,
    independence_tol: f64,
) -> Result<QMatrix> {
    let d = party_basis.dim() * rest_basis.dim();
    if let Some(p) = products.iter().find(|p| p.op.shape() != (d, d)) {
        return Err(Error::DimensionMismatch(format!(
            "pair product {:?} is {}x{}, bases need {d}x{d}",
            p.pair,
            p.op.nrows(),
            p.op.ncols()
        )));
    }
    let vectors: Vec<ComplexVector> = products.iter().map(|p| vectorize(&p.op)).collect();
    let subset = select_independent_subset(&vectors, independence_tol);

    let row_ops: Vec<ComplexMatrix> = party_basis
        .elements()
        .iter()
        .flat_map(|lambda| {
            rest_basis.elements()[1..]
                .iter()
                .map(move |gamma| tensor_product(lambda, gamma))
        })
        .collect();
    let q = ComplexMatrix::from_fn(row_ops.len(), subset.len(), |r, col| {
        hs_inner(&row_ops[r], &products[subset.indices[col]].op)
    });
    Ok(QMatrix { q, subset })
}

/// `Q` for `party` using generalized Gell-Mann bases on both factors.
pub fn build_q(c: &KrausChannel, party: usize) -> Result<QMatrix> {
    let products = pair_products(c, party)?;
    let (party_basis, rest_basis) = default_bases(c, party);
    build_q_from_products(&products, &party_basis, &rest_basis, DEFAULT_INDEPENDENCE_TOL)
}

/// Gell-Mann bases on the party and on the rest of the system.
pub fn default_bases(c: &KrausChannel, party: usize) -> (OperatorBasis, OperatorBasis) {
    let d_party = c.input_dims()[party];
    let d_rest = c.input_dim() / d_party;
    (OperatorBasis::gell_mann(d_party), OperatorBasis::gell_mann(d_rest))
}

/// Coefficients over the selected products that resum to the identity,
/// normalized to unit length.
pub fn identity_vector(subset: &IndependentSubset, products: &[PairProduct]) -> Result<ComplexVector> {
    identity_vector_with_tol(subset, products, IDENTITY_RESIDUAL_TOL)
}

pub fn identity_vector_with_tol(
    subset: &IndependentSubset,
    products: &[PairProduct],
    tol: f64,
) -> Result<ComplexVector> {
    let d = products.first().map(|p| p.op.nrows()).unwrap_or(0);
    let basis: Vec<ComplexVector> = subset.indices.iter().map(|&k| vectorize(&products[k].op)).collect();
    let target = vectorize(&identity(d));
    let (c, residual) = SpanSolver::new(&basis).solve(&target);
    if residual >= tol || c.is_empty() {
        return Err(Error::IdentityNotInSpan { residual });
    }
    let norm = c.norm();
    Ok(c.unscale(norm))
}

/// Everything computed for one party, kept for diagnostics and tests.
#[derive(Debug, Clone)]
pub struct PartyAnalysis {
    pub party: usize,
    pub products: Vec<PairProduct>,
    pub q: QMatrix,
    pub c_identity: ComplexVector,
    /// `Q` with the row `c_I†` appended.
    pub augmented: ComplexMatrix,
}

impl PartyAnalysis {
    pub fn report(&self, rel_tol: f64) -> PartyGateReport {
        let info = nullspace_dimension(&self.augmented, rel_tol);
        let ratio = if info.eig_max > 0.0 {
            info.eig_min / info.eig_max
        } else {
            0.0
        };
        PartyGateReport {
            party: self.party,
            pair_count: self.q.subset.len(),
            q_rows: self.augmented.nrows(),
            eig_min: info.eig_min,
            eig_max: info.eig_max,
            ratio,
            nullspace_dim: info.dimension,
            can_measure_first: info.dimension >= 1,
        }
    }

    /// Ascending eigenvalues of `Q†Q` for the augmented `Q`.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eigenvalues(&(self.augmented.adjoint() * &self.augmented)).expect("Q†Q is Hermitian")
    }

    pub fn nullspace(&self, rel_tol: f64) -> Vec<ComplexVector> {
        nullspace_basis(&self.augmented, rel_tol)
    }

    /// The pair `(i, i')` behind each column.
    pub fn column_pairs(&self) -> Vec<(usize, usize)> {
        self.q.subset.indices.iter().map(|&k| self.products[k].pair).collect()
    }
}

fn augment(q: &ComplexMatrix, c_identity: &ComplexVector) -> ComplexMatrix {
    let rows = q.nrows();
    let mut out = q.clone().insert_row(rows, crate::linalg::ZERO);
    for (j, c) in c_identity.iter().enumerate() {
        out[(rows, j)] = c.conj();
    }
    out
}

/// Runs the gate on products already permuted for `party`, in the order given.
pub fn analyze_products(
    party: usize,
    products: Vec<PairProduct>,
    party_basis: &OperatorBasis,
    rest_basis: &OperatorBasis,
    independence_tol: f64,
    identity_tol: f64,
) -> Result<PartyAnalysis> {
    let q = build_q_from_products(&products, party_basis, rest_basis, independence_tol)?;
    let c_identity = identity_vector_with_tol(&q.subset, &products, identity_tol)?;
    let augmented = augment(&q.q, &c_identity);
    Ok(PartyAnalysis {
        party,
        products,
        q,
        c_identity,
        augmented,
    })
}

fn identity_tol_for(c: &KrausChannel, residual: f64) -> f64 {
    // completeness error of size r per entry moves the identity at most
    // D·r off the span in Frobenius norm
    IDENTITY_RESIDUAL_TOL.max(2.0 * c.input_dim() as f64 * residual)
}

pub fn analyze_party_with_bases(
    c: &KrausChannel,
    party: usize,
    party_basis: &OperatorBasis,
    rest_basis: &OperatorBasis,
) -> Result<PartyAnalysis> {
    let residual = c.require_complete(COMPLETENESS_REJECT_TOL)?;
    let products = pair_products(c, party)?;
    analyze_products(
        party,
        products,
        party_basis,
        rest_basis,
        DEFAULT_INDEPENDENCE_TOL,
        identity_tol_for(c, residual),
    )
}

pub fn analyze_party(c: &KrausChannel, party: usize) -> Result<PartyAnalysis> {
    if party >= c.parties() {
        return Err(Error::PartyOutOfRange {
            party,
            parties: c.parties(),
        });
    }
    let (party_basis, rest_basis) = default_bases(c, party);
    analyze_party_with_bases(c, party, &party_basis, &rest_basis)
}

/// Per-party diagnostics of the augmented `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyGateReport {
    pub party: usize,
    pub pair_count: usize,
    pub q_rows: usize,
    pub eig_min: f64,
    pub eig_max: f64,
    /// `eig_min / eig_max` of `Q†Q`.
    pub ratio: f64,
    pub nullspace_dim: usize,
    pub can_measure_first: bool,
}

pub fn gate_party(c: &KrausChannel, party: usize, rel_tol: f64) -> Result<PartyGateReport> {
    Ok(analyze_party(c, party)?.report(rel_tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    /// No party can measure first: certified not implementable by LOCC.
    #[serde(rename = "NOT_LOCC")]
    NotLocc,
    /// Parties whose first measurement is not excluded. Necessary condition
    /// only; this does not establish an LOCC protocol.
    #[serde(rename = "FIRST_MOVE_CANDIDATES")]
    FirstMoveCandidates { parties: Vec<usize> },
    /// A single Kraus operator: no measurement needed, judged by whether the
    /// isometry is a product across every party.
    #[serde(rename = "DEGENERATE_KRAUS_RANK_ONE")]
    DegenerateKrausRankOne { local: bool },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::NotLocc => "NOT_LOCC",
            Verdict::FirstMoveCandidates { .. } => "FIRST_MOVE_CANDIDATES",
            Verdict::DegenerateKrausRankOne { .. } => "DEGENERATE_KRAUS_RANK_ONE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateVerdict {
    pub reports: Vec<PartyGateReport>,
    /// Smallest per-party ratio.
    pub lambda_hat: f64,
    pub kraus_rank: usize,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl GateVerdict {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serialization cannot fail")
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.ratio).collect()
    }
}

/// Channel-level verdict over all parties.
pub fn gate_channel(c: &KrausChannel, rel_tol: f64) -> Result<GateVerdict> {
    if c.parties() < 2 {
        return Err(Error::TooFewParties {
            needed: 2,
            got: c.parties(),
        });
    }
    c.require_complete(COMPLETENESS_REJECT_TOL)?;
    let reports = (0..c.parties())
        .map(|p| gate_party(c, p, rel_tol))
        .collect::<Result<Vec<_>>>()?;
    let lambda_hat = reports.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let kraus_rank = c.kraus_rank(DEFAULT_RANK_TOL);

    let verdict = if kraus_rank == 1 {
        Verdict::DegenerateKrausRankOne {
            local: is_local_isometry(c)?,
        }
    } else {
        let open: Vec<usize> = reports
            .iter()
            .filter(|r| r.can_measure_first)
            .map(|r| r.party)
            .collect();
        if open.is_empty() {
            Verdict::NotLocc
        } else {
            Verdict::FirstMoveCandidates { parties: open }
        }
    };
    Ok(GateVerdict {
        reports,
        lambda_hat,
        kraus_rank,
        verdict,
    })
}

fn is_local_isometry(c: &KrausChannel) -> Result<bool> {
    if c.output_dim() != c.input_dim() {
        return Ok(false);
    }
    let k = c.dominant_kraus();
    for party in 0..c.parties() {
        if operator_schmidt_rank(k, c.input_dims(), party, DEFAULT_RANK_TOL)? != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, max_abs};
    use crate::zoo;

    #[test]
    fn bell_products_and_subset() {
        let bell = zoo::bell_channel();
        let products = pair_products(&bell, 0).unwrap();
        assert_eq!(products.len(), 16);
        let zero = products.iter().filter(|p| max_abs(&p.op) < 1e-15).count();
        assert_eq!(zero, 12);
        let q = build_q(&bell, 0).unwrap();
        let diag: Vec<usize> = (0..4).map(|i| i * 4 + i).collect();
        assert_eq!(q.subset.indices, diag);
    }

    #[test]
    fn identity_channel_single_product() {
        let id = zoo::identity_channel(&[2, 2]);
        let products = pair_products(&id, 1).unwrap();
        assert_eq!(products.len(), 1);
        assert_eq!(products[0].op, identity(4));
    }

    #[test]
    fn products_are_adjoint_symmetric() {
        let domino = zoo::domino_channel();
        let products = pair_products(&domino, 1).unwrap();
        let n = domino.len();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(products[i * n + j].op.adjoint(), products[j * n + i].op);
            }
        }
    }

    #[test]
    fn identity_channel_q_is_zero_column() {
        let id = zoo::identity_channel(&[2, 2]);
        for party in 0..2 {
            let q = build_q(&id, party).unwrap();
            assert_eq!(q.q.shape(), (12, 1));
            assert!(max_abs(&q.q) < 1e-15);
        }
    }

    #[test]
    fn bell_q_has_three_correlation_rows() {
        let q = build_q(&zoo::bell_channel(), 0).unwrap().q;
        let nonzero: Vec<usize> = (0..q.nrows())
            .filter(|&r| q.row(r).iter().any(|z| z.norm() > 1e-12))
            .collect();
        // (μ, ν) = (x, x), (y, y), (z, z) with μ outer over 4, ν inner over 3
        assert_eq!(nonzero, vec![3, 7, 11]);
        // Φ+, Φ−, Ψ+, Ψ− correlations for σx⊗σx, σy⊗σy, σz⊗σz
        let expected = [[1.0, -1.0, 1.0, -1.0], [-1.0, 1.0, 1.0, -1.0], [1.0, 1.0, -1.0, -1.0]];
        for (r, row) in nonzero.iter().zip(expected) {
            for (col, e) in row.iter().enumerate() {
                assert!((q[(*r, col)] - c64(0.5 * e, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dephasing_q_vanishes_for_measuring_party_only() {
        let deph = zoo::local_dephasing_channel(&[2, 2], 0);
        let alice = build_q(&deph, 0).unwrap();
        assert_eq!(alice.subset.len(), 2);
        assert!(max_abs(&alice.q) < 1e-15);
        let bob = build_q(&deph, 1).unwrap();
        assert!(max_abs(&bob.q) > 0.1);
    }

    #[test]
    fn identity_vectors() {
        let bell = analyze_party(&zoo::bell_channel(), 0).unwrap();
        for c in bell.c_identity.iter() {
            assert!((c - c64(0.5, 0.0)).norm() < 1e-12);
        }
        let deph = analyze_party(&zoo::local_dephasing_channel(&[2, 2], 0), 0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for c in deph.c_identity.iter() {
            assert!((c - c64(s, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_outside_span_is_reported() {
        let products = vec![PairProduct {
            pair: (0, 0),
            op: crate::linalg::projector(&crate::linalg::ket(4, 0)),
        }];
        let subset = select_independent_subset(&[vectorize(&products[0].op)], 1e-9);
        assert!(matches!(
            identity_vector(&subset, &products),
            Err(Error::IdentityNotInSpan { .. })
        ));
    }

    #[test]
    fn bell_party_report() {
        let r = gate_party(&zoo::bell_channel(), 0, DEFAULT_GATE_TOL).unwrap();
        assert_eq!(r.nullspace_dim, 0);
        assert_eq!(r.q_rows, 13);
        assert_eq!(r.pair_count, 4);
        assert!((r.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dephasing_reports() {
        let deph = zoo::local_dephasing_channel(&[2, 2], 0);
        let alice = analyze_party(&deph, 0).unwrap();
        let report = alice.report(DEFAULT_GATE_TOL);
        assert_eq!(report.nullspace_dim, 1);
        assert!(report.can_measure_first);
        let v = &alice.nullspace(DEFAULT_GATE_TOL)[0];
        // ∝ (1, −1)/√2
        assert!((v[0] + v[1]).norm() < 1e-12);
        assert!((v[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        let bob = gate_party(&deph, 1, DEFAULT_GATE_TOL).unwrap();
        assert_eq!(bob.nullspace_dim, 0);
        assert!(!bob.can_measure_first);
    }

    #[test]
    fn identity_channel_blocks_both_parties_but_is_degenerate() {
        let id = zoo::identity_channel(&[2, 2]);
        let v = gate_channel(&id, DEFAULT_GATE_TOL).unwrap();
        assert!(v.reports.iter().all(|r| r.nullspace_dim == 0));
        assert_eq!(v.verdict, Verdict::DegenerateKrausRankOne { local: true });
    }

    #[test]
    fn bell_and_domino_verdicts() {
        let bell = gate_channel(&zoo::bell_channel(), DEFAULT_GATE_TOL).unwrap();
        assert_eq!(bell.verdict, Verdict::NotLocc);
        assert!((bell.lambda_hat - 1.0).abs() < 1e-9);
        let domino = gate_channel(&zoo::domino_channel(), DEFAULT_GATE_TOL).unwrap();
        assert_eq!(domino.verdict, Verdict::NotLocc);
        assert!((domino.lambda_hat - 1.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn gate_requires_two_parties() {
        let single = zoo::identity_channel(&[4]);
        assert!(matches!(
            gate_channel(&single, DEFAULT_GATE_TOL),
            Err(Error::TooFewParties { .. })
        ));
    }

    #[test]
    fn gate_rejects_incomplete_channel() {
        let c = KrausChannel::new("half", vec![2, 2], 4, vec![identity(4).scale(0.5)]).unwrap();
        assert!(matches!(
            gate_channel(&c, DEFAULT_GATE_TOL),
            Err(Error::Incomplete { .. })
        ));
    }

    #[test]
    fn verdict_json_shape() {
        let v = gate_channel(&zoo::bell_channel(), DEFAULT_GATE_TOL).unwrap();
        let json: serde_json::Value = serde_json::from_str(&v.to_json()).unwrap();
        assert_eq!(json["verdict"], "NOT_LOCC");
        assert_eq!(json["reports"].as_array().unwrap().len(), 2);
        for key in [
            "party",
            "pair_count",
            "q_rows",
            "eig_min",
            "eig_max",
            "ratio",
            "nullspace_dim",
            "can_measure_first",
        ] {
            assert!(json["reports"][0].get(key).is_some(), "missing {key}");
        }
        let back: GateVerdict = serde_json::from_value(json).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn usd_ratio_fades_toward_the_small_amplitude_corner() {
        let mut last = f64::INFINITY;
        for a1 in [0.2, 0.1, 0.05, 0.02, 0.01] {
            let p = zoo::UsdParams::from_magnitudes(a1, 0.05, 1.0).unwrap();
            let v = gate_channel(&zoo::usd_channel(&p).unwrap(), DEFAULT_GATE_TOL).unwrap();
            assert_eq!(v.verdict, Verdict::NotLocc, "a1 = {a1}");
            assert!(v.lambda_hat < last);
            last = v.lambda_hat;
        }
    }

    #[test]
    fn usd_gray_zone_is_reported_raw() {
        // close to both |alpha1| -> 0 and alpha3 -> 0: Bob's ratio is about 8e-14,
        // below the default threshold but far above rounding noise
        let p = zoo::UsdParams::new(
            c64(0.0037961117706708583, 0.0),
            c64(0.9999927947417544, 0.0),
            c64(-0.013280232372528683, -0.007691519872292571),
            c64(0.9998822310403289, 0.0),
            zoo::DEFAULT_ETA,
            zoo::DEFAULT_ETA,
        )
        .unwrap();
        let c = zoo::usd_channel(&p).unwrap();
        let v = gate_channel(&c, DEFAULT_GATE_TOL).unwrap();
        let bob = &v.reports[1];
        assert!(bob.ratio > 1e-14 && bob.ratio < 1e-13, "{}", bob.ratio);
        assert_eq!(v.verdict, Verdict::FirstMoveCandidates { parties: vec![1] });
        let strict = gate_channel(&c, 1e-15).unwrap();
        assert_eq!(strict.verdict, Verdict::NotLocc);
    }
}
