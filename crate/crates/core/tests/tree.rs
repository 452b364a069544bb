use proptest::prelude::*;
use std::sync::Arc;

use decopt::decompose::{build_neural_tree, enumerate_subpolicies, masked_pre_head, ActivationMask, TreeNode, UnitState};
use decopt::nn::{Head, LayerParams, Mlp, MlpPolicy};

fn policy(inputs: usize, hidden: usize, outputs: usize, params: &[f64]) -> MlpPolicy {
    let mut it = params.iter().copied().cycle();
    let mut layer = |i: usize, o: usize| {
        let mut l = LayerParams::zeros(i, o);
        for v in l.weights.iter_mut().chain(l.biases.iter_mut()) {
            *v = it.next().unwrap();
        }
        l
    };
    let net = Mlp::new(vec![layer(inputs, hidden), layer(hidden, outputs)]).unwrap();
    MlpPolicy::new(net, Head::Softmax).unwrap()
}

fn setup() -> impl Strategy<Value = (MlpPolicy, Vec<f64>)> {
    (1usize..5, 1usize..6, 2usize..4).prop_flat_map(|(i, h, o)| {
        (
            prop::collection::vec(-2.0..2.0f64, 64),
            prop::collection::vec(-3.0..3.0f64, i),
        )
            .prop_map(move |(params, x)| (policy(i, h, o, &params), x))
    })
}

proptest! {
    #[test]
    fn routed_leaf_has_the_activation_pattern((net, x) in setup()) {
        let tree = build_neural_tree(&net).unwrap();
        let hidden_pre = net.forward(&x).unwrap().hidden_pre;
        let TreeNode::Leaf { pattern, coeffs, offset } = tree.route(&x).unwrap() else {
            panic!("route ends at a leaf");
        };
        let active: Vec<bool> = hidden_pre.iter().map(|&z| z > 0.0).collect();
        prop_assert_eq!(pattern, &active);
        // The leaf equals the sub-policy whose mask clamps units to that pattern.
        let mask = ActivationMask(
            pattern.iter().map(|&a| if a { UnitState::ClampedOn } else { UnitState::ClampedOff }).collect(),
        );
        let masked = masked_pre_head(&net, &mask, &x).unwrap();
        for (k, m) in masked.iter().enumerate() {
            let row = &coeffs[k * x.len()..(k + 1) * x.len()];
            let lin: f64 = row.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>() + offset[k];
            prop_assert!((lin - m).abs() <= 1e-9);
        }
        prop_assert!(tree.leaf_count() <= 1 << pattern.len());
    }

    #[test]
    fn all_free_subpolicy_is_the_network((net, x) in setup()) {
        let subs = enumerate_subpolicies(Arc::new(net.clone()), 0, 14).unwrap();
        prop_assert!(subs[0].mask.is_all_free());
        let a = subs[0].forward(&x).unwrap();
        let b = net.forward(&x).unwrap().probs;
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() <= 1e-12);
        }
    }
}
