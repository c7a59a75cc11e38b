//! Finite-round LOCC protocols as trees of local measurements.
//!
//! Each node names the acting party and lists its measurement outcomes as
//! local Kraus operators (rectangular operators move that party into a new
//! local space). A leaf's Kraus operator is the ordered product of every
//! outcome on its branch, each embedded as `I ⊗ … ⊗ A ⊗ … ⊗ I`.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{channels_equal, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{identity, ket, max_abs, max_abs_diff, projector, tensor_all, ComplexMatrix, ComplexVector};

/// Node completeness required before a tree is compiled.
pub const NODE_COMPLETENESS_TOL: f64 = 1e-10;
/// Leaves whose accumulated operator is smaller than this (Frobenius norm)
/// occur with probability zero and are dropped from the compiled channel.
pub const ZERO_LEAF_TOL: f64 = 1e-12;
/// Per-leaf tolerance for an output map acting isometrically.
pub const ISOMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolTree {
    pub parties: usize,
    pub initial_dims: Vec<usize>,
    pub root: ProtocolNode,
    /// Map from the protocol's output space into a target channel's output
    /// space, applied to every leaf before comparison.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::json::option_matrix"
    )]
    pub output_isometry: Option<ComplexMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolNode {
    pub party: usize,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    #[serde(with = "crate::json::matrix")]
    pub op: ComplexMatrix,
    pub child: Option<Box<ProtocolNode>>,
}

impl Branch {
    pub fn leaf(op: ComplexMatrix) -> Self {
        Self { op, child: None }
    }

    pub fn then(op: ComplexMatrix, child: ProtocolNode) -> Self {
        Self {
            op,
            child: Some(Box::new(child)),
        }
    }
}

impl ProtocolNode {
    pub fn new(party: usize, branches: Vec<Branch>) -> Self {
        Self { party, branches }
    }

    /// Outcomes that all end the protocol.
    pub fn leaves(party: usize, ops: impl IntoIterator<Item = ComplexMatrix>) -> Self {
        Self::new(party, ops.into_iter().map(Branch::leaf).collect())
    }
}

impl ProtocolTree {
    pub fn new(initial_dims: Vec<usize>, root: ProtocolNode) -> Self {
        Self {
            parties: initial_dims.len(),
            initial_dims,
            root,
            output_isometry: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol serialization cannot fail")
    }

    /// Longest chain of hand-offs between different parties on any branch.
    pub fn communication_rounds(&self) -> usize {
        fn walk(node: &ProtocolNode) -> usize {
            node.branches
                .iter()
                .filter_map(|b| b.child.as_deref())
                .map(|child| walk(child) + usize::from(child.party != node.party))
                .max()
                .unwrap_or(0)
        }
        walk(&self.root)
    }
}

/// Visits nodes in preorder with the local dimensions in force at each.
fn visit<'a, F>(node: &'a ProtocolNode, dims: &[usize], f: &mut F) -> Result<()>
where
    F: FnMut(&'a ProtocolNode, &[usize]) -> Result<()>,
{
    f(node, dims)?;
    for b in &node.branches {
        if let Some(child) = b.child.as_deref() {
            let mut next = dims.to_vec();
            next[node.party] = b.op.nrows();
            visit(child, &next, f)?;
        }
    }
    Ok(())
}

/// Completeness residual `max |Σ_b A_b†A_b − I|` of every node, in preorder.
pub fn validate_protocol(t: &ProtocolTree) -> Result<Vec<f64>> {
    if t.parties == 0 || t.initial_dims.len() != t.parties {
        return Err(Error::InvalidProtocol(format!(
            "{} parties but initial_dims {:?}",
            t.parties, t.initial_dims
        )));
    }
    if t.initial_dims.contains(&0) {
        return Err(Error::InvalidProtocol("initial dimensions must be positive".into()));
    }
    let mut residuals = Vec::new();
    let mut index = 0usize;
    visit(&t.root, &t.initial_dims, &mut |node, dims| {
        if node.party >= t.parties {
            return Err(Error::InvalidProtocol(format!(
                "node {index} acts on party {} of {}",
                node.party, t.parties
            )));
        }
        if node.branches.is_empty() {
            return Err(Error::InvalidProtocol(format!("node {index} has no outcomes")));
        }
        let d = dims[node.party];
        let mut sum = ComplexMatrix::zeros(d, d);
        for (k, b) in node.branches.iter().enumerate() {
            if b.op.ncols() != d || b.op.nrows() == 0 {
                return Err(Error::InvalidProtocol(format!(
                    "node {index} outcome {k} is {}x{}, party {} has local dimension {d}",
                    b.op.nrows(),
                    b.op.ncols(),
                    node.party
                )));
            }
            crate::linalg::ensure_finite(&b.op)?;
            sum += b.op.adjoint() * &b.op;
        }
        residuals.push(max_abs_diff(&sum, &identity(d)));
        index += 1;
        Ok(())
    })?;
    Ok(residuals)
}

fn embed(op: &ComplexMatrix, dims: &[usize], party: usize) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = dims
        .iter()
        .enumerate()
        .map(|(p, &d)| if p == party { op.clone() } else { identity(d) })
        .collect();
    tensor_all(&factors)
}

/// Leaf Kraus operators with their output dimensions, zero-probability leaves
/// included.
fn compile_leaves(t: &ProtocolTree) -> Vec<(Vec<usize>, ComplexMatrix)> {
    fn walk(node: &ProtocolNode, dims: &[usize], acc: &ComplexMatrix, out: &mut Vec<(Vec<usize>, ComplexMatrix)>) {
        for b in &node.branches {
            let step = embed(&b.op, dims, node.party);
            let next_acc = step * acc;
            let mut next_dims = dims.to_vec();
            next_dims[node.party] = b.op.nrows();
            match b.child.as_deref() {
                Some(child) => walk(child, &next_dims, &next_acc, out),
                None => out.push((next_dims, next_acc)),
            }
        }
    }
    let d: usize = t.initial_dims.iter().product();
    let mut out = Vec::new();
    walk(&t.root, &t.initial_dims, &identity(d), &mut out);
    out
}

/// Compiles the tree into the channel it implements, one Kraus operator per
/// leaf of nonzero weight.
pub fn protocol_to_channel(t: &ProtocolTree) -> Result<KrausChannel> {
    let residuals = validate_protocol(t)?;
    if let Some((node, &residual)) = residuals.iter().enumerate().find(|(_, &r)| r > NODE_COMPLETENESS_TOL) {
        return Err(Error::ProtocolIncomplete { node, residual });
    }
    let leaves: Vec<(Vec<usize>, ComplexMatrix)> = compile_leaves(t)
        .into_iter()
        .filter(|(_, k)| k.norm() >= ZERO_LEAF_TOL)
        .collect();
    let Some((out_dims, _)) = leaves.first() else {
        return Err(Error::InvalidProtocol("every leaf has zero weight".into()));
    };
    let out_dims = out_dims.clone();
    if let Some((dims, _)) = leaves.iter().find(|(d, _)| *d != out_dims) {
        return Err(Error::InvalidProtocol(format!(
            "inconsistent leaf output dimensions {dims:?} and {out_dims:?}"
        )));
    }
    let output_dim = out_dims.iter().product();
    KrausChannel::new(
        "protocol",
        t.initial_dims.clone(),
        output_dim,
        leaves.into_iter().map(|(_, k)| k).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub ok: bool,
    pub choi_distance: f64,
}

/// Compiles `t`, maps each leaf through `output_isometry` when given, and
/// compares Choi matrices with `target`.
///
/// The output map only has to act isometrically on each leaf's range
/// (`K†W†WK = K†K`), so a map that merges classical records from different
/// branches is accepted.
pub fn verify_protocol(
    t: &ProtocolTree,
    target: &KrausChannel,
    output_isometry: Option<&ComplexMatrix>,
    tol: f64,
) -> Result<Verification> {
    let compiled = protocol_to_channel(t)?;
    let compiled = match output_isometry {
        None => compiled,
        Some(w) => {
            if w.ncols() != compiled.output_dim() {
                return Err(Error::DimensionMismatch(format!(
                    "output map takes dimension {}, protocol produces {}",
                    w.ncols(),
                    compiled.output_dim()
                )));
            }
            let mut mapped = Vec::with_capacity(compiled.len());
            for k in compiled.kraus() {
                let wk = w * k;
                let residual = max_abs_diff(&(wk.adjoint() * &wk), &(k.adjoint() * k));
                if residual > ISOMETRY_TOL {
                    return Err(Error::NotIsometric { residual });
                }
                mapped.push(wk);
            }
            KrausChannel::new("protocol", compiled.input_dims().to_vec(), w.nrows(), mapped)?
        }
    };
    let (ok, choi_distance) = channels_equal(&compiled, target, tol)?;
    Ok(Verification { ok, choi_distance })
}

/// One do-nothing node on party 0.
pub fn identity_protocol(dims: &[usize]) -> ProtocolTree {
    ProtocolTree::new(dims.to_vec(), ProtocolNode::leaves(0, [identity(dims[0])]))
}

fn proj3(v: ComplexVector) -> ComplexMatrix {
    projector(&v)
}

fn basis3(i: usize) -> ComplexMatrix {
    proj3(ket(3, i))
}

/// `cos θ|x⟩ + sin θ|y⟩` for `+`, `sin θ|x⟩ − cos θ|y⟩` for `−`.
fn rotated_projector(x: usize, y: usize, theta: f64, plus: bool) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    let v = if plus {
        ket(3, x).scale(c) + ket(3, y).scale(s)
    } else {
        ket(3, x).scale(s) - ket(3, y).scale(c)
    };
    proj3(v)
}

/// Three-round protocol for the rotated domino channel with `θ1 = 0`.
///
/// Bob (party 1) opens with `{[0], [1]+[2]}`. Outcomes that cannot occur on
/// the remaining support are kept as explicit branches so every node is a
/// complete measurement; they compile to zero operators and are dropped.
pub fn three_round_domino_protocol(theta2: f64, theta3: f64, theta4: f64) -> Result<ProtocolTree> {
    for (n, t) in [(2, theta2), (3, theta3), (4, theta4)] {
        if !(0.0..=FRAC_PI_4 + 1e-12).contains(&t) {
            return Err(Error::InvalidParams(format!("theta{n} = {t} outside [0, pi/4]")));
        }
    }
    const ALICE: usize = 0;
    const BOB: usize = 1;
    let p = basis3;

    // Bob saw [0]: Alice separates Ψ2, Ψ6, Ψ7.
    let after_bob_0 = ProtocolNode::leaves(
        ALICE,
        [
            p(0),
            rotated_projector(1, 2, theta3, true),
            rotated_projector(1, 2, theta3, false),
        ],
    );
    // Alice saw [2]: Bob separates Ψ4, Ψ5.
    let after_alice_2 = ProtocolNode::leaves(
        BOB,
        [
            rotated_projector(1, 2, theta2, true),
            rotated_projector(1, 2, theta2, false),
            p(0),
        ],
    );
    // Bob saw [1]: Alice separates Ψ3, Ψ1.
    let after_bob_1 = ProtocolNode::leaves(ALICE, [p(0), p(1), p(2)]);
    // Bob saw [2]: Alice separates Ψ8, Ψ9.
    let after_bob_2 = ProtocolNode::leaves(
        ALICE,
        [
            rotated_projector(0, 1, theta4, true),
            rotated_projector(0, 1, theta4, false),
            p(2),
        ],
    );
    let after_alice_01 = ProtocolNode::new(
        BOB,
        vec![
            Branch::then(p(1), after_bob_1),
            Branch::then(p(2), after_bob_2),
            Branch::leaf(p(0)),
        ],
    );
    let after_bob_12 = ProtocolNode::new(
        ALICE,
        vec![
            Branch::then(p(0) + p(1), after_alice_01),
            Branch::then(p(2), after_alice_2),
        ],
    );
    let root = ProtocolNode::new(
        BOB,
        vec![Branch::then(p(0), after_bob_0), Branch::then(p(1) + p(2), after_bob_12)],
    );
    Ok(ProtocolTree::new(vec![3, 3], root))
}

/// One-way protocol for the `α3 = 0` member of the unambiguous
/// discrimination family: Alice measures `{[0], [1]}`, then Bob maps into the
/// five-outcome flag space. The attached output map discards Alice's record.
pub fn usd_oneway_protocol(alpha1: Complex64, beta1: Complex64) -> Result<ProtocolTree> {
    let (a, b) = (alpha1.norm(), beta1.norm());
    if ((a * a + b * b) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "|alpha1|^2 + |beta1|^2 = {}, expected 1",
            a * a + b * b
        )));
    }
    if !(a > 0.0 && a < b) {
        return Err(Error::InvalidParams(format!(
            "need 0 < |alpha1| < |beta1|, got {a} and {b}"
        )));
    }
    // c² · 2|β1|² = 1 on ⟨1|; c² · 2|α1|² + c5² = 1 on ⟨0|
    let c = 1.0 / (2.0f64.sqrt() * b);
    let c5_sq = 1.0 - (a / b).powi(2);
    if c5_sq < 0.0 {
        return Err(Error::InvalidParams(
            "no valid weight for the inconclusive outcome".into(),
        ));
    }
    let c5 = c5_sq.sqrt();

    let flag = |n: usize| ket(5, n - 1);
    let bra = |v: ComplexVector| v.adjoint();
    let plus = ket(2, 0) * alpha1 + ket(2, 1) * beta1;
    let minus = ket(2, 0) * alpha1 - ket(2, 1) * beta1;

    let bob_after_0 = ProtocolNode::leaves(
        1,
        [
            (flag(1) * bra(plus)).scale(c),
            (flag(2) * bra(minus)).scale(c),
            (flag(5) * bra(ket(2, 0))).scale(c5),
        ],
    );
    let bob_after_1 = ProtocolNode::leaves(1, [flag(3) * bra(ket(2, 0)), flag(4) * bra(ket(2, 1))]);
    let root = ProtocolNode::new(
        0,
        vec![
            Branch::then(projector(&ket(2, 0)), bob_after_0),
            Branch::then(projector(&ket(2, 1)), bob_after_1),
        ],
    );
    let mut tree = ProtocolTree::new(vec![2, 2], root);
    tree.output_isometry = Some(flag_merging_map(2, 5));
    Ok(tree)
}

/// `|a⟩|n⟩ ↦ |n⟩`: forgets a `record`-dimensional classical register in
/// front of a `flags`-dimensional output.
pub fn flag_merging_map(record: usize, flags: usize) -> ComplexMatrix {
    let mut w = ComplexMatrix::zeros(flags, record * flags);
    for a in 0..record {
        for n in 0..flags {
            w[(n, a * flags + n)] = crate::linalg::ONE;
        }
    }
    w
}

/// Largest entry of any dropped (zero-probability) leaf operator.
pub fn dropped_leaf_weight(t: &ProtocolTree) -> f64 {
    compile_leaves(t)
        .iter()
        .filter(|(_, k)| k.norm() < ZERO_LEAF_TOL)
        .map(|(_, k)| max_abs(k))
        .fold(0.0, f64::max)
}
