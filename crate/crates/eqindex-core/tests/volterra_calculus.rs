mod common;

use eqindex_core::graded_algebra::{Ext, FormMatrix};
use eqindex_core::mehler::{harmonic_oscillator, mehler_fiber_series, mehler_kernel_symbolic, ModelCurvature};
use eqindex_core::scalar::{inv_factorial, qc, QC};
use eqindex_core::volterra::symbol::{asymptotic_coefficients, heat_parametrix};
use eqindex_core::volterra::{
    fiber_integral, getzler_order_and_model, model_product_check, GetzlerOperator, ModelOperator, OpKey,
};
use eqindex_core::{NormalAction, TwistData};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn laplacian(n: usize) -> ModelOperator<QC> {
    let mut l = ModelOperator::zero(n);
    for j in 0..n {
        let d = ModelOperator::d(n, j).unwrap();
        l = l.sub(&d.compose(&d).unwrap()).unwrap();
    }
    l
}

#[test]
fn schrodinger_coefficients_are_exponential() {
    for (n, v) in [(2, qc(-1, 2)), (4, qc(2, 1)), (4, qc(0, 1))] {
        let l = laplacian(n).add(&ModelOperator::scalar(n, v.clone())).unwrap();
        let p = heat_parametrix(&l, 8).unwrap();
        let c = asymptotic_coefficients(&p.layers, -2, &NormalAction::trivial(), n, 3).unwrap();
        assert_eq!(c.leading_two_exp, -(n as i32));
        let mut power = qc(1, 1);
        for (j, cj) in c.coefficients.iter().enumerate() {
            assert_eq!(*cj, Ext::scalar(n, power.clone() * inv_factorial::<QC>(j)), "n = {n}, j = {j}");
            power *= -v.clone();
        }
        assert!(c.half_slots.iter().all(|h| h.is_zero()));
    }
}

#[test]
fn parametrix_layers_are_homogeneous() {
    let mut rng = common::rng(21);
    let r = common::curvature(&mut rng, 4, 4);
    let p = heat_parametrix(&harmonic_oscillator(&r).unwrap(), 6).unwrap();
    for (l, q) in p.layers.iter().enumerate() {
        assert!(q.is_homogeneous(-2 - l as i32), "layer {l}");
    }
}

#[test]
fn oscillator_parametrix_reproduces_mehler() {
    let mut rng = common::rng(22);
    for n in [2, 4] {
        let r = common::curvature(&mut rng, n, n);
        let mc = ModelCurvature::new(r.clone(), FormMatrix::zeros(n, 0), NormalAction::trivial(), TwistData::trivial(n))
            .unwrap();
        let mehler = mehler_fiber_series(&mc).unwrap();
        let j_max = n / 2 + 1;
        let p = heat_parametrix(&harmonic_oscillator(&r).unwrap(), 2 * j_max + 1).unwrap();
        let c = asymptotic_coefficients(&p.layers, -2, &NormalAction::trivial(), n, j_max).unwrap();
        for (j, cj) in c.coefficients.iter().enumerate() {
            assert_eq!(*cj, mehler.coeff(2 * j as i32 - n as i32), "n = {n}, j = {j}");
        }
    }
}

#[test]
fn even_order_slot_is_not_forced_to_vanish() {
    // control for the odd-order vanishing: order 0 and order 2 models
    let mut rng = common::rng(23);
    let mc = common::model_curvature(&mut rng, 2, 0);
    let k = mehler_kernel_symbolic(&mc.full()).unwrap();
    let s = fiber_integral(&k, &mc.normal, 0).unwrap();
    assert!(!s.coeff(0).bidegree_part(0, 0, 0).is_zero());

    let mc = common::model_curvature(&mut rng, 2, 2);
    let omega = ModelOperator::form(Ext::monomial(2, 0b11, qc(1, 1)));
    let k = omega.apply_to_kernel(&mehler_kernel_symbolic(&mc.full()).unwrap()).unwrap();
    let s = fiber_integral(&k, &mc.normal, 2).unwrap();
    assert!(!s.coeff(-2).bidegree_part(2, 2, 0).is_zero());
}

fn getzler_operator(rng: &mut ChaCha8Rng, n: usize) -> GetzlerOperator<QC> {
    let mut p = GetzlerOperator::zero(n);
    while p.is_zero() {
        for _ in 0..rng.gen_range(1..=3) {
            let key = OpKey::new(common::multi_index(rng, n, 2), common::multi_index(rng, n, 2), rng.gen_range(0..=1));
            p.add_term(key, rng.gen_range(0..1u32 << n), common::rational(rng));
        }
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn composition_acts_on_kernels(seed in any::<u64>(), m1 in 0i32..=2, m2 in -1i32..=2) {
        let mut rng = common::rng(seed);
        let n = 2;
        let p = common::model_operator(&mut rng, n, m1);
        let q = common::model_operator(&mut rng, n, m2);
        let k = mehler_kernel_symbolic(&common::curvature(&mut rng, n, n)).unwrap();
        let lhs = p.compose(&q).unwrap().apply_to_kernel(&k).unwrap();
        let rhs = p.apply_to_kernel(&q.apply_to_kernel(&k).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn model_orders_add(seed in any::<u64>(), m1 in -1i32..=3, m2 in -1i32..=3) {
        let mut rng = common::rng(seed);
        let n = 4;
        let p = common::model_operator(&mut rng, n, m1);
        let q = common::model_operator(&mut rng, n, m2);
        prop_assert!(p.is_homogeneous(m1));
        let pq = p.compose(&q).unwrap();
        prop_assert!(pq.is_zero() || pq.is_homogeneous(m1 + m2));
    }

    #[test]
    fn getzler_order_is_subadditive(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = 2;
        let p = getzler_operator(&mut rng, n);
        let q = getzler_operator(&mut rng, n);
        let (m1, m2) = (p.order().unwrap(), q.order().unwrap());
        let pq = p.compose(&q).unwrap();
        if let Some(m) = pq.order() {
            prop_assert!(m <= m1 + m2);
        }
        prop_assert!(model_product_check(&p, &q));
    }

    #[test]
    fn model_of_lower_order_perturbation(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = 2;
        let p = getzler_operator(&mut rng, n);
        let (m, model) = getzler_order_and_model(&p).unwrap();
        let junk = GetzlerOperator::x(n, rng.gen_range(0..n)).unwrap().compose(&p).unwrap();
        prop_assert!(junk.order().is_none_or(|k| k < m));
        prop_assert_eq!(getzler_order_and_model(&p.add(&junk).unwrap()), Some((m, model)));
    }

    #[test]
    fn fiber_slots_follow_form_degree(seed in any::<u64>(), m in -1i32..=3, a in 0usize..=1) {
        let mut rng = common::rng(seed);
        let (n, a) = (4, 2 * a);
        let mc = common::model_curvature(&mut rng, n, a);
        let p = common::model_operator(&mut rng, n, m);
        let k = p.apply_to_kernel(&mehler_kernel_symbolic(&mc.full()).unwrap()).unwrap();
        let s = fiber_integral(&k, &mc.normal, a).unwrap();
        for (key, w) in s.terms() {
            let d = key + a as i32 + m;
            prop_assert!(d >= 0 && *w == w.degree_part(d as usize), "slot {} of order {}", key, m);
        }
    }
}
