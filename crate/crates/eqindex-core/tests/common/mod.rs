#![allow(dead_code)]

use eqindex_core::char_forms::TwistData;
use eqindex_core::graded_algebra::{Ext, FormMatrix};
use eqindex_core::mehler::ModelCurvature;
use eqindex_core::scalar::{qc, QC};
use eqindex_core::volterra::getzler::{ModelOperator, OpKey};
use eqindex_core::NormalAction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rational(rng: &mut ChaCha8Rng) -> QC {
    qc(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

/// Random homogeneous form of the given degree.
pub fn form(rng: &mut ChaCha8Rng, n: usize, degree: usize) -> Ext<QC> {
    let mut w = Ext::zero(n);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == degree && rng.gen_bool(0.6) {
            w.add_term(mask, rational(rng));
        }
    }
    w
}

/// Antisymmetric matrix of random 2-forms.
pub fn curvature(rng: &mut ChaCha8Rng, n: usize, size: usize) -> FormMatrix<QC> {
    let mut upper = Vec::new();
    for i in 0..size {
        for j in i + 1..size {
            upper.push((i, j, form(rng, n, 2)));
        }
    }
    FormMatrix::antisymmetric(n, size, &upper).unwrap()
}

/// 2×2 blocks only.
pub fn block_curvature(rng: &mut ChaCha8Rng, n: usize, size: usize) -> FormMatrix<QC> {
    let blocks: Vec<_> = (0..size / 2).map(|p| (2 * p, 2 * p + 1, form(rng, n, 2))).collect();
    FormMatrix::antisymmetric(n, size, &blocks).unwrap()
}

/// `(cos θ/2, sin θ/2)` with rational entries.
pub const HALF_ANGLES: [((i64, i64), (i64, i64)); 5] =
    [((0, 1), (1, 1)), ((3, 5), (4, 5)), ((4, 5), (3, 5)), ((5, 13), (12, 13)), ((12, 13), (5, 13))];

pub fn half_angle(rng: &mut ChaCha8Rng) -> (QC, QC) {
    let ((cn, cd), (sn, sd)) = HALF_ANGLES[rng.gen_range(0..HALF_ANGLES.len())];
    (qc(cn, cd), qc(sn, sd))
}

pub fn normal(rng: &mut ChaCha8Rng, planes: usize) -> NormalAction<QC> {
    NormalAction::from_half_angles((0..planes).map(|_| half_angle(rng)).collect()).unwrap()
}

pub fn line_twist(rng: &mut ChaCha8Rng, n: usize) -> TwistData<QC> {
    // 3/5 + 4i/5 has modulus one
    let phase = QC::new(qc(3, 5).re, qc(4, 5).re);
    TwistData::line(form(rng, n, 2), phase).unwrap()
}

pub fn model_curvature(rng: &mut ChaCha8Rng, n: usize, a: usize) -> ModelCurvature<QC> {
    let planes = (n - a) / 2;
    ModelCurvature::new(
        curvature(rng, n, a),
        block_curvature(rng, n, n - a),
        normal(rng, planes),
        line_twist(rng, n),
    )
    .unwrap()
}

pub fn multi_index(rng: &mut ChaCha8Rng, n: usize, max_order: usize) -> Vec<u32> {
    let mut m = vec![0u32; n];
    for _ in 0..rng.gen_range(0..=max_order) {
        m[rng.gen_range(0..n)] += 1;
    }
    m
}

/// Nonzero model operator, homogeneous of Getzler order `m`.
pub fn model_operator(rng: &mut ChaCha8Rng, n: usize, m: i32) -> ModelOperator<QC> {
    let mut op = ModelOperator::zero(n);
    while op.is_zero() {
        for _ in 0..4 {
            let x = multi_index(rng, n, 2);
            let d = multi_index(rng, n, 2);
            let s = rng.gen_range(0..=1u32);
            let degree = m - d.iter().sum::<u32>() as i32 + x.iter().sum::<u32>() as i32 - 2 * s as i32;
            if degree < 0 || degree > n as i32 {
                continue;
            }
            op.add_term(OpKey::new(x, d, s), form(rng, n, degree as usize));
        }
    }
    op
}
