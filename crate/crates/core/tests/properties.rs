use locc_core::gate::gate_channel;
use locc_core::linalg::{
    c64, haar_unitary, hermitian_eigenvalues, inverse_order, max_abs_diff, permute_subsystems, tensor_all,
    ComplexMatrix, ComplexVector,
};
use locc_core::protocol::{protocol_to_channel, Branch, ProtocolNode, ProtocolTree};
use locc_core::sweep::sample_rng;
use locc_core::zoo::{self, RotatedDominoParams};
use locc_core::{channels_equal, DensityMatrix, KrausChannel, DEFAULT_GATE_TOL};
use proptest::prelude::*;
use rand::Rng;

fn random_channel(seed: u64, dims: &[usize], n_u: usize) -> KrausChannel {
    zoo::random_unitary_channel(dims, n_u, &mut sample_rng(seed, 0)).unwrap()
}

fn random_state(seed: u64, d: usize) -> DensityMatrix {
    let mut rng = sample_rng(seed, 1);
    let u = haar_unitary(d, &mut rng);
    let weights: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let diag = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        d,
        weights.iter().map(|w| c64(w / total, 0.0)),
    ));
    DensityMatrix::new(&u * diag * u.adjoint()).unwrap()
}

/// Channel action read off the Choi matrix block by block.
fn apply_via_choi(c: &KrausChannel, rho: &ComplexMatrix) -> ComplexMatrix {
    let (d, m) = (c.input_dim(), c.output_dim());
    let j = c.choi_matrix();
    let mut out = ComplexMatrix::zeros(m, m);
    for a in 0..d {
        for b in 0..d {
            out += j.view((a * m, b * m), (m, m)) * rho[(a, b)];
        }
    }
    out
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        Just(vec![2, 2]),
        Just(vec![2, 3]),
        Just(vec![3, 2]),
        Just(vec![2, 2, 2])
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn subsystem_permutation_round_trips(seed in any::<u64>(), dims in dims_strategy()) {
        let d: usize = dims.iter().product();
        let m = haar_unitary(d, &mut sample_rng(seed, 0));
        let mut order: Vec<usize> = (0..dims.len()).collect();
        order.rotate_left(1);
        let permuted_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
        let there = permute_subsystems(&m, &dims, &order).unwrap();
        let back = permute_subsystems(&there, &permuted_dims, &inverse_order(&order)).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn permutation_moves_tensor_factors(seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 0);
        let (a, b) = (haar_unitary(2, &mut rng), haar_unitary(3, &mut rng));
        let ab = tensor_all(&[a.clone(), b.clone()]);
        let ba = permute_subsystems(&ab, &[2, 3], &[1, 0]).unwrap();
        prop_assert!(max_abs_diff(&ba, &tensor_all(&[b, a])) < 1e-15);
    }

    #[test]
    fn choi_matrix_is_psd_with_trace_d(seed in any::<u64>(), dims in dims_strategy(), n_u in 1usize..6) {
        let c = random_channel(seed, &dims, n_u);
        let j = c.choi_matrix();
        let eig = hermitian_eigenvalues(&j).unwrap();
        prop_assert!(eig[0] > -1e-12);
        prop_assert!((j.trace().re - c.input_dim() as f64).abs() < 1e-10);
    }

    #[test]
    fn action_agrees_with_choi_oracle(seed in any::<u64>(), dims in dims_strategy(), n_u in 1usize..5) {
        let c = random_channel(seed, &dims, n_u);
        let rho = random_state(seed, c.input_dim());
        let out = c.apply(&rho).unwrap();
        prop_assert!(max_abs_diff(out.matrix(), &apply_via_choi(&c, rho.matrix())) < 1e-12);
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn remixing_preserves_the_channel(seed in any::<u64>(), pad in 0usize..3) {
        let c = zoo::domino_channel();
        let v = haar_unitary(c.len() + pad, &mut sample_rng(seed, 2));
        let (same, dist) = channels_equal(&c, &c.remix(&v).unwrap(), 1e-10).unwrap();
        prop_assert!(same, "distance {}", dist);
    }

    #[test]
    fn remixing_preserves_nullspace_dimensions(seed in any::<u64>(), n_u in 2usize..7, pad in 0usize..3) {
        let c = random_channel(seed, &[2, 2], n_u);
        let v = haar_unitary(c.len() + pad, &mut sample_rng(seed, 3));
        let dims = |c: &KrausChannel| -> Vec<usize> {
            gate_channel(c, DEFAULT_GATE_TOL).unwrap().reports.iter().map(|r| r.nullspace_dim).collect()
        };
        prop_assert_eq!(dims(&c), dims(&c.remix(&v).unwrap()));
    }

    #[test]
    fn kraus_order_does_not_change_the_verdict(seed in any::<u64>()) {
        let p = RotatedDominoParams::new(std::array::from_fn(|i| 0.1 + 0.15 * i as f64)).unwrap();
        let c = zoo::rotated_domino_channel(&p).unwrap();
        let mut kraus = c.kraus().to_vec();
        let k = (seed % kraus.len() as u64) as usize;
        kraus.rotate_left(k);
        let last = kraus.len() - 1;
        kraus.swap(0, last);
        let shuffled = KrausChannel::new("shuffled", c.input_dims().to_vec(), c.output_dim(), kraus).unwrap();
        let (a, b) = (gate_channel(&c, DEFAULT_GATE_TOL).unwrap(), gate_channel(&shuffled, DEFAULT_GATE_TOL).unwrap());
        prop_assert_eq!(&a.verdict, &b.verdict);
        prop_assert!((a.lambda_hat - b.lambda_hat).abs() < 1e-10 * a.lambda_hat.max(1e-3));
    }

    #[test]
    fn quarter_turn_phases_leave_ratios_fixed(seed in any::<u64>(), n_u in 2usize..5) {
        let c = random_channel(seed, &[2, 2], n_u);
        let phases = [c64(1.0, 0.0), c64(-1.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0)];
        let kraus: Vec<ComplexMatrix> = c
            .kraus()
            .iter()
            .enumerate()
            .map(|(i, k)| k * phases[(i + seed as usize) % 4])
            .collect();
        let phased = KrausChannel::new("phased", vec![2, 2], 4, kraus).unwrap();
        let a = gate_channel(&c, DEFAULT_GATE_TOL).unwrap();
        let b = gate_channel(&phased, DEFAULT_GATE_TOL).unwrap();
        for (x, y) in a.reports.iter().zip(&b.reports) {
            prop_assert_eq!(x.nullspace_dim, y.nullspace_dim);
            prop_assert!((x.ratio - y.ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn rotated_domino_is_continuous_in_theta(seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 4);
        let theta: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.05..0.7));
        let mut nudged = theta;
        nudged[(seed % 4) as usize] += 1e-7;
        let a = zoo::rotated_domino_channel(&RotatedDominoParams::new(theta).unwrap()).unwrap();
        let b = zoo::rotated_domino_channel(&RotatedDominoParams::new(nudged).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&a.choi_matrix(), &b.choi_matrix()) < 1e-6);
        let (la, lb) = (gate_channel(&a, DEFAULT_GATE_TOL).unwrap().lambda_hat, gate_channel(&b, DEFAULT_GATE_TOL).unwrap().lambda_hat);
        prop_assert!((la - lb).abs() < 1e-5);
    }

    #[test]
    fn do_nothing_nodes_do_not_change_a_protocol(seed in any::<u64>(), party in 0usize..2) {
        let mut rng = sample_rng(seed, 5);
        let u = haar_unitary(2, &mut rng);
        let measurement: Vec<ComplexMatrix> = (0..2).map(|i| {
            let col = u.column(i).into_owned();
            &col * col.adjoint()
        }).collect();
        let plain = ProtocolTree::new(vec![2, 2], ProtocolNode::leaves(0, measurement.clone()));
        let padded_root = ProtocolNode::new(
            party,
            vec![Branch::then(
                ComplexMatrix::identity(2, 2),
                ProtocolNode::leaves(0, measurement),
            )],
        );
        let padded = ProtocolTree::new(vec![2, 2], padded_root);
        let (a, b) = (protocol_to_channel(&plain).unwrap(), protocol_to_channel(&padded).unwrap());
        prop_assert!(max_abs_diff(&a.choi_matrix(), &b.choi_matrix()) < 1e-12);
    }

    #[test]
    fn branch_order_does_not_change_a_protocol(seed in any::<u64>()) {
        let (t2, t3, t4) = {
            let mut rng = sample_rng(seed, 6);
            (rng.gen_range(0.0..0.78), rng.gen_range(0.0..0.78), rng.gen_range(0.0..0.78))
        };
        let tree = locc_core::protocol::three_round_domino_protocol(t2, t3, t4).unwrap();
        let mut reversed = tree.clone();
        fn reverse(node: &mut ProtocolNode) {
            node.branches.reverse();
            for b in &mut node.branches {
                if let Some(child) = b.child.as_deref_mut() {
                    reverse(child);
                }
            }
        }
        reverse(&mut reversed.root);
        let (a, b) = (protocol_to_channel(&tree).unwrap(), protocol_to_channel(&reversed).unwrap());
        prop_assert!(max_abs_diff(&a.choi_matrix(), &b.choi_matrix()) < 1e-12);
    }
}
