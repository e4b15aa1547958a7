//! Dirac operator on the round S² twisted by a monopole of charge k, in the
//! spin-weighted harmonic basis `{}_sY_{jm}`. Positive spinors have spin weight
//! `s₊ = (k−1)/2`, negative ones `s₋ = (k+1)/2`, and D⁺ is the raising operator
//! `ð` with `ð {}_sY_{jm} = √((j−s)(j+s+1)) {}_{s+1}Y_{jm}`.

use std::collections::BTreeMap;

use eqindex_core::char_forms::{NormalAction, TwistData};
use eqindex_core::equivariant_index::{FixedPointNode, FixedPointStratum};
use eqindex_core::mehler::ModelCurvature;
use eqindex_core::{Ext, FormMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Level, ModelMeta, SpectralModel, IDENTITY, ZERO_TOL};
use crate::error::{ModelError, Result};

/// `Reversed` swaps the roles of the two half-spinor bundles, as a sign flip of
/// one Clifford generator would.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereGrading {
    #[default]
    Standard,
    Reversed,
}

struct Mode {
    lambda: f64,
    two_m: i32,
    w_plus: f64,
    w_minus: f64,
}

/// Dense eigensolve of the block with azimuthal number m = two_m/2.
fn diagonalize_block(k: i32, two_m: i32, j2_values: &[i32]) -> Vec<Mode> {
    let (sp2, sm2) = (k - 1, k + 1);
    // (is_plus, j2)
    let mut basis = Vec::new();
    for &j2 in j2_values.iter().filter(|&&j2| j2 >= two_m.abs()) {
        if j2 >= sp2.abs() {
            basis.push((true, j2));
        }
        if j2 >= sm2.abs() {
            basis.push((false, j2));
        }
    }
    let n = basis.len();
    if n == 0 {
        return Vec::new();
    }
    let mut d = DMatrix::<f64>::zeros(n, n);
    for (a, &(pa, ja)) in basis.iter().enumerate() {
        for (b, &(pb, jb)) in basis.iter().enumerate() {
            if pa && !pb && ja == jb {
                let c = 0.5 * (((ja - sp2) * (ja + sp2 + 2)) as f64).sqrt();
                d[(a, b)] = c;
                d[(b, a)] = c;
            }
        }
    }
    let eig = SymmetricEigen::new(d);
    (0..n)
        .map(|c| {
            let v = eig.eigenvectors.column(c);
            let mut w_plus = 0.0;
            let mut w_minus = 0.0;
            for (i, &(p, _)) in basis.iter().enumerate() {
                if p {
                    w_plus += v[i] * v[i];
                } else {
                    w_minus += v[i] * v[i];
                }
            }
            Mode {
                lambda: eig.eigenvalues[c],
                two_m,
                w_plus,
                w_minus,
            }
        })
        .collect()
}

fn jmin_twice(k: i32) -> i32 {
    (k - 1).abs().min((k + 1).abs())
}

pub fn build_sphere_model(lmax: usize, monopole_k: i32, rotations: &[(String, f64)]) -> Result<SpectralModel> {
    build_sphere_model_graded(lmax, monopole_k, rotations, SphereGrading::Standard)
}

/// Keeps `j = j_min, …, j_min + lmax`; rotation by θ about the polar axis acts
/// on `{}_sY_{jm}` by `e^{imθ}`.
pub fn build_sphere_model_graded(
    lmax: usize,
    monopole_k: i32,
    rotations: &[(String, f64)],
    grading: SphereGrading,
) -> Result<SpectralModel> {
    if lmax < 1 {
        return Err(ModelError::Invalid("lmax must be at least 1".into()));
    }
    if rotations.iter().any(|(id, _)| id == IDENTITY) {
        return Err(ModelError::Invalid(format!("`{IDENTITY}` is reserved for the identity")));
    }
    let k = monopole_k;
    let j0 = jmin_twice(k);
    let j2_values: Vec<i32> = (0..=lmax as i32).map(|l| j0 + 2 * l).collect();
    let jmax2 = *j2_values.last().expect("lmax ≥ 1");
    let blocks: Vec<Vec<Mode>> = (-jmax2..=jmax2)
        .step_by(2)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|two_m| diagonalize_block(k, two_m, &j2_values))
        .collect();
    let mut modes: Vec<Mode> = blocks.into_iter().flatten().collect();
    if grading == SphereGrading::Reversed {
        for m in &mut modes {
            std::mem::swap(&mut m.w_plus, &mut m.w_minus);
        }
    }
    modes.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));

    let mut elements: Vec<(String, f64)> = vec![(IDENTITY.to_string(), 0.0)];
    elements.extend(rotations.iter().cloned());
    let mut levels = Vec::new();
    let mut start = 0;
    while start < modes.len() {
        let lam = modes[start].lambda;
        let tol = 1e-8 * lam.abs().max(1.0);
        let end = start + modes[start..].iter().take_while(|m| (m.lambda - lam).abs() < tol).count();
        let group = &modes[start..end];
        let lambda = group.iter().map(|m| m.lambda).sum::<f64>() / group.len() as f64;
        let (lambda, factor) = if lambda.abs() < ZERO_TOL { (0.0, 1.0) } else { (lambda, 2.0) };
        let mut characters = BTreeMap::new();
        for (id, theta) in &elements {
            let mut cp = Complex64::new(0.0, 0.0);
            let mut cm = Complex64::new(0.0, 0.0);
            for m in group {
                let u = Complex64::from_polar(1.0, 0.5 * m.two_m as f64 * theta);
                cp += u * m.w_plus;
                cm += u * m.w_minus;
            }
            cp *= factor;
            cm *= factor;
            characters.insert(id.clone(), [cp.re, cp.im, cm.re, cm.im]);
        }
        let dims = &characters[IDENTITY];
        levels.push(Level {
            lambda,
            dim_plus: dims[0].round() as usize,
            dim_minus: dims[2].round() as usize,
            characters,
        });
        start = end;
    }
    SpectralModel::new(
        levels,
        lmax,
        ModelMeta::Sphere {
            monopole_k: k,
            jmax_twice: jmax2 as u32,
            grading,
        },
    )
}

/// `Σ_{j > j_max} 2(2j+1) e^{−tλ_j²}` with `λ_j² = (j+½)² − k²/4`.
pub(super) fn tail_bound(k: i32, jmax_twice: u32, t: f64) -> f64 {
    let mut sum = 0.0;
    let mut j2 = jmax_twice as i64 + 2;
    loop {
        let lam2 = ((j2 + 1) * (j2 + 1) - (k as i64) * (k as i64)) as f64 / 4.0;
        let term = 2.0 * (j2 + 1) as f64 * (-t * lam2).exp();
        let next2 = ((j2 + 3) * (j2 + 3) - (k as i64) * (k as i64)) as f64 / 4.0;
        let ratio = (j2 + 3) as f64 / (j2 + 1) as f64 * (-t * (next2 - lam2)).exp();
        sum += term;
        if ratio < 0.5 && term <= 1e-3 * sum.max(f64::MIN_POSITIVE) {
            return sum + term * ratio / (1.0 - ratio);
        }
        if term == 0.0 && ratio < 1.0 {
            return sum;
        }
        j2 += 2;
    }
}

/// The two poles fixed by a rotation of angle θ ∈ (0, π], with the monopole
/// lift acting by `e^{∓ikθ/2}`. The north pole's normal frame is negatively
/// oriented.
pub fn sphere_rotation_strata(monopole_k: i32, theta: f64) -> Result<Vec<FixedPointStratum<Complex64>>> {
    let normal = NormalAction::from_angles(&[theta])?;
    let node = |sign: i8| -> Result<FixedPointNode<Complex64>> {
        let phase = Complex64::from_polar(1.0, sign as f64 * monopole_k as f64 * theta / 2.0);
        let mc = ModelCurvature::new(
            FormMatrix::zeros(2, 0),
            FormMatrix::zeros(2, 2),
            normal.clone(),
            TwistData::line(Ext::zero(2), phase)?,
        )?;
        Ok(FixedPointNode::new(1.0, mc).with_orientation(sign))
    };
    Ok(vec![FixedPointStratum::new(0, vec![node(-1)?, node(1)?])?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn untwisted_multiplicities() {
        let m = build_sphere_model(4, 0, &[]).unwrap();
        let positive: Vec<(f64, usize)> = m
            .levels
            .iter()
            .filter(|l| l.lambda > 0.0)
            .map(|l| (l.lambda, l.dim_plus))
            .collect();
        assert_eq!(positive.len(), 5);
        for (i, (lam, d)) in positive.iter().enumerate() {
            assert!((lam - (i + 1) as f64).abs() < 1e-10);
            assert_eq!(*d, 2 * (i + 1));
        }
        assert!(m.levels.iter().all(|l| l.lambda != 0.0));
    }

    #[test]
    fn monopole_kernel() {
        let m = build_sphere_model(3, 2, &[]).unwrap();
        let zero = m.levels.iter().find(|l| l.lambda == 0.0).unwrap();
        assert_eq!((zero.dim_plus, zero.dim_minus), (2, 0));
        let r = build_sphere_model_graded(3, 2, &[], SphereGrading::Reversed).unwrap();
        let zero = r.levels.iter().find(|l| l.lambda == 0.0).unwrap();
        assert_eq!((zero.dim_plus, zero.dim_minus), (0, 2));
    }

    #[test]
    fn tail_matches_direct_sum() {
        let direct: f64 = (12..4000i64)
            .step_by(2)
            .map(|j2| 2.0 * (j2 + 1) as f64 * (-0.3 * ((j2 + 1) * (j2 + 1) - 4) as f64 / 4.0).exp())
            .sum();
        let b = tail_bound(2, 10, 0.3);
        assert!(b >= direct * (1.0 - 1e-12) && b < direct * 1.01, "{b} vs {direct}");
    }
}
