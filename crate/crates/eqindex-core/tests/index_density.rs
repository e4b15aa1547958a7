mod common;

use eqindex_core::equivariant_index::{
    cm_cocycle, equivariant_index_exact, jlo_limit, node_index_density, FixedPointNode, FixedPointStratum, GroupTable,
    GroupWord, Jet, PiSum,
};
use eqindex_core::mehler::gamma_phi_density;
use eqindex_core::scalar::{qc, PiScaled, QC};
use eqindex_core::volterra::ModelOperator;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const FUNCTIONS: [&str; 5] = ["f0", "f1", "f2", "f3", "f4"];

fn jet(rng: &mut ChaCha8Rng, n: usize) -> Jet<QC> {
    Jet {
        value: common::rational(rng),
        grad: (0..n).map(|_| common::rational(rng)).collect(),
    }
}

fn stratum(rng: &mut ChaCha8Rng, n: usize, a: usize, nodes: usize) -> FixedPointStratum<QC> {
    let nodes = (0..nodes)
        .map(|_| {
            let mut node = FixedPointNode::new(1.0, common::model_curvature(rng, n, a));
            for f in FUNCTIONS {
                node = node.with_jet(f, jet(rng, n));
            }
            node
        })
        .collect();
    FixedPointStratum::new(a, nodes).unwrap()
}

fn word(ids: &[&str]) -> GroupWord {
    GroupWord::new(&ids.iter().map(|f| (*f, "e")).collect::<Vec<_>>())
}

fn negated(s: &PiSum<QC>) -> PiSum<QC> {
    let mut out = PiSum::new();
    for (k, v) in &s.parts {
        out.add(PiScaled::new(*k, -v.clone()));
    }
    out
}

#[test]
fn volterra_density_matches_fixed_point_formula() {
    let mut rng = common::rng(31);
    for (n, a) in [(2, 0), (2, 2), (4, 0), (4, 2), (4, 4), (6, 2), (6, 4)] {
        for _ in 0..3 {
            let mc = common::model_curvature(&mut rng, n, a);
            let volterra = gamma_phi_density(&ModelOperator::one(n), &mc).unwrap();
            let direct = node_index_density(&FixedPointNode::new(1.0, mc), a, n).unwrap();
            assert_eq!(volterra, direct, "n = {n}, a = {a}");
        }
    }
}

#[test]
fn orientation_flips_the_density() {
    let mut rng = common::rng(32);
    let mc = common::model_curvature(&mut rng, 4, 2);
    let plus = node_index_density(&FixedPointNode::new(1.0, mc.clone()), 2, 4).unwrap();
    let minus = node_index_density(&FixedPointNode::new(1.0, mc).with_orientation(-1), 2, 4).unwrap();
    assert_eq!(minus.value, -plus.value);
}

#[test]
fn degree_zero_cocycle_weights_the_index() {
    let mut rng = common::rng(33);
    let (n, a) = (4, 2);
    let s = stratum(&mut rng, n, a, 3);
    let got = cm_cocycle(0, &word(&["f0"]), &GroupTable::trivial("e"), std::slice::from_ref(&s), n).unwrap();
    let mut expect = PiSum::new();
    for node in &s.nodes {
        let d = node_index_density(node, a, n).unwrap();
        expect.add(PiScaled::new(d.pi_half_pow, d.value * node.jets["f0"].value.clone()));
    }
    assert_eq!(got, expect);

    let mut ones = s.clone();
    for node in &mut ones.nodes {
        node.jets.insert("f0".into(), Jet::constant(qc(1, 1)));
    }
    let index = equivariant_index_exact(&[ones.clone()], n).unwrap();
    assert_eq!(cm_cocycle(0, &word(&["f0"]), &GroupTable::trivial("e"), &[ones], n).unwrap(), index);
}

#[test]
fn free_action_has_no_cocycle() {
    let t = GroupTable::trivial("e");
    let v = cm_cocycle::<QC>(1, &word(&["f0", "f1", "f2"]), &t, &[], 4).unwrap();
    assert!(v.is_zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_function_kills_the_cocycle(seed in any::<u64>(), slot in 1usize..=2) {
        let mut rng = common::rng(seed);
        let (n, a) = (4, 2 * rng.gen_range(1..=2));
        let mut s = stratum(&mut rng, n, a, 2);
        for node in &mut s.nodes {
            node.jets.insert(FUNCTIONS[slot].into(), Jet::constant(common::rational(&mut rng)));
        }
        let v = cm_cocycle(1, &word(&FUNCTIONS[..3]), &GroupTable::trivial("e"), &[s], n).unwrap();
        prop_assert!(v.is_zero());
    }

    #[test]
    fn degree_above_stratum_dimension_vanishes(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, a) = (4, 2);
        let s = stratum(&mut rng, n, a, 2);
        let v = cm_cocycle(2, &word(&FUNCTIONS), &GroupTable::trivial("e"), &[s], n).unwrap();
        prop_assert!(v.is_zero());
    }

    #[test]
    fn cocycle_is_alternating_in_the_differentials(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, a) = (4, 4);
        let s = vec![stratum(&mut rng, n, a, 2)];
        let t = GroupTable::trivial("e");
        let v = cm_cocycle(1, &word(&["f0", "f1", "f2"]), &t, &s, n).unwrap();
        let w = cm_cocycle(1, &word(&["f0", "f2", "f1"]), &t, &s, n).unwrap();
        prop_assert_eq!(&w, &negated(&v));
        prop_assert_eq!(jlo_limit(1, &word(&["f0", "f1", "f2"]), &t, &s, n).unwrap(), v);
    }
}
