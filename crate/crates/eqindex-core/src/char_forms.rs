//! Characteristic forms of the fixed-point formula: Â, ν_φ, Ch_φ and the scalar
//! determinant factor `det^{1/2}(1 − φ^N)`.
//!
//! Square roots always take the branch with positive scalar part.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graded_algebra::{scalar_inverse, Ext, FormMatrix, PowerSeries};
use crate::scalar::Coeff;

/// Angles closer to 0 than this are rejected as singular.
pub const ANGLE_TOL: f64 = 1e-9;

/// Rotation of the normal bundle: one 2-plane block per angle θ_j ∈ (0, π],
/// stored as the half-angle pair `(cos(θ_j/2), sin(θ_j/2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalAction<C> {
    half: Vec<(C, C)>,
}

impl NormalAction<Complex64> {
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        let mut half = Vec::with_capacity(angles.len());
        for &t in angles {
            if !(t > ANGLE_TOL && t <= core::f64::consts::PI + 1e-12) {
                return Err(if t.abs() <= ANGLE_TOL {
                    Error::SingularNormal
                } else {
                    Error::AngleOutOfRange(format!("{t}"))
                });
            }
            let h = 0.5 * t.min(core::f64::consts::PI);
            half.push((
                Complex64::new(libm::cos(h), 0.0),
                Complex64::new(libm::sin(h), 0.0),
            ));
        }
        Ok(NormalAction { half })
    }
}

impl<C: Coeff> NormalAction<C> {
    /// Half-angle pairs; exact inputs must satisfy cos² + sin² = 1.
    pub fn from_half_angles(half: Vec<(C, C)>) -> Result<Self> {
        for (c, s) in &half {
            let norm = c.clone() * c.clone() + s.clone() * s.clone();
            let unit = if C::EXACT {
                norm == C::one()
            } else {
                norm.approx_eq(&C::one(), 1e-12)
            };
            if !unit {
                return Err(Error::AngleOutOfRange(format!("({c:?}, {s:?}) is not a unit pair")));
            }
            match (s.real_sign(), c.real_sign()) {
                (Some(Ordering::Greater), Some(Ordering::Greater | Ordering::Equal)) => {}
                (Some(Ordering::Equal), _) => return Err(Error::SingularNormal),
                _ => {
                    return Err(Error::AngleOutOfRange(format!(
                        "half angle ({c:?}, {s:?}) outside (0, pi/2]"
                    )))
                }
            }
            if !C::EXACT && s.to_c64().re < libm::sin(0.5 * ANGLE_TOL) {
                return Err(Error::SingularNormal);
            }
        }
        Ok(NormalAction { half })
    }

    pub fn trivial() -> Self {
        NormalAction { half: Vec::new() }
    }

    pub fn half_angles(&self) -> &[(C, C)] {
        &self.half
    }

    pub fn planes(&self) -> usize {
        self.half.len()
    }

    pub fn codim(&self) -> usize {
        2 * self.half.len()
    }

    /// `(cos θ, sin θ)` per plane.
    pub fn cos_sin(&self) -> Vec<(C, C)> {
        self.half
            .iter()
            .map(|(c, s)| {
                (
                    c.clone() * c.clone() - s.clone() * s.clone(),
                    C::from_i64(2) * c.clone() * s.clone(),
                )
            })
            .collect()
    }

    /// Row-major matrix of φ^N.
    pub fn matrix(&self) -> Vec<C> {
        let m = self.codim();
        let mut out = vec![C::zero(); m * m];
        for (j, (c, s)) in self.cos_sin().into_iter().enumerate() {
            let p = 2 * j;
            out[p * m + p] = c.clone();
            out[p * m + p + 1] = -s.clone();
            out[(p + 1) * m + p] = s;
            out[(p + 1) * m + p + 1] = c;
        }
        out
    }

    /// Row-major matrix of 1 − φ^N.
    pub fn one_minus(&self) -> Vec<C> {
        let m = self.codim();
        let mut out: Vec<C> = self.matrix().into_iter().map(|v| -v).collect();
        for i in 0..m {
            out[i * m + i] = out[i * m + i].clone() + C::one();
        }
        out
    }

    /// det(1 − φ^N) = ∏ 4 sin²(θ_j/2).
    pub fn det_one_minus(&self) -> C {
        self.half.iter().fold(C::one(), |acc, (_, s)| {
            acc * C::from_i64(4) * s.clone() * s.clone()
        })
    }

    /// det^{1/2}(1 − φ^N) = ∏ 2 sin(θ_j/2), in the coefficient field.
    pub fn det_sqrt_one_minus(&self) -> C {
        self.half
            .iter()
            .fold(C::one(), |acc, (_, s)| acc * C::from_i64(2) * s.clone())
    }

    pub fn to_c64(&self) -> NormalAction<Complex64> {
        NormalAction {
            half: self.half.iter().map(|(c, s)| (c.to_c64(), s.to_c64())).collect(),
        }
    }
}

/// ∏ 2 sin(θ_j/2); 1 for an empty normal action.
pub fn det_sqrt_one_minus<C: Coeff>(normal: &NormalAction<C>) -> f64 {
    normal.det_sqrt_one_minus().to_c64().re
}

/// Twisting bundle data on a stratum: restricted curvature and the lift of φ.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistData<C> {
    pub f0: FormMatrix<C>,
    /// Row-major p×p unitary matrix.
    pub phi_e: Vec<C>,
}

impl<C: Coeff> TwistData<C> {
    pub fn new(f0: FormMatrix<C>, phi_e: Vec<C>) -> Result<Self> {
        let p = f0.size();
        if phi_e.len() != p * p {
            return Err(Error::SizeMismatch(format!(
                "phi_e has {} entries, curvature has rank {p}",
                phi_e.len()
            )));
        }
        if f0.entries().iter().any(|e| !(e.is_zero() || e.filter(|m| m.count_ones() != 2).is_zero())) {
            return Err(Error::Invalid("twist curvature entries must be 2-forms".into()));
        }
        for i in 0..p {
            for j in 0..p {
                let mut s = C::zero();
                for k in 0..p {
                    s = s + phi_e[i * p + k].clone() * phi_e[j * p + k].conj();
                }
                let target = if i == j { C::one() } else { C::zero() };
                let ok = if C::EXACT { s == target } else { s.approx_eq(&target, 1e-12) };
                if !ok {
                    return Err(Error::Invalid("phi_e is not unitary".into()));
                }
            }
        }
        Ok(TwistData { f0, phi_e })
    }

    /// Trivial line bundle with trivial action.
    pub fn trivial(n: usize) -> Self {
        TwistData {
            f0: FormMatrix::zeros(n, 1),
            phi_e: vec![C::one()],
        }
    }

    /// Line bundle with curvature `f` and the lift acting by `phase`.
    pub fn line(f: Ext<C>, phase: C) -> Result<Self> {
        let n = f.dim();
        Self::new(FormMatrix::new(n, 1, vec![f])?, vec![phase])
    }

    pub fn rank(&self) -> usize {
        self.f0.size()
    }
}

fn check_curvature<C: Coeff>(r: &FormMatrix<C>) -> Result<()> {
    if !r.has_nilpotent_entries() {
        return Err(Error::Invalid("curvature entries must have no scalar part".into()));
    }
    if !r.is_antisymmetric() {
        return Err(Error::NotAntisymmetric);
    }
    Ok(())
}

/// det^{1/2}((R/2)/sinh(R/2)) = exp(½ tr log((R/2)/sinh(R/2))).
pub fn a_hat<C: Coeff>(r: &FormMatrix<C>) -> Result<Ext<C>> {
    check_curvature(r)?;
    let n = r.dim();
    let order = n + 2;
    let series = PowerSeries::<C>::x_over_sinh(order).rescale(&C::from_ratio(1, 2));
    let a = r.apply_series(&series)?;
    let nil = a.sub(&FormMatrix::identity(n, r.size()))?;
    nil.det_pow_one_plus(1, 2)
}

/// det^{−1/2}(1 + (1−φ^N)^{−1} φ^N (1 − e^{−R''})): the nilpotent factor of ν_φ.
pub fn nu_phi_reduced<C: Coeff>(rpp: &FormMatrix<C>, normal: &NormalAction<C>) -> Result<Ext<C>> {
    let m = normal.codim();
    if rpp.size() != m {
        return Err(Error::SizeMismatch(format!(
            "normal curvature is {}x{}, normal action has codimension {m}",
            rpp.size(),
            rpp.size()
        )));
    }
    check_curvature(rpp)?;
    let n = rpp.dim();
    let inv = scalar_inverse(&normal.one_minus(), m).ok_or(Error::SingularNormal)?;
    let inv = FormMatrix::from_scalars(n, m, &inv);
    let phi = FormMatrix::from_scalars(n, m, &normal.matrix());
    // 1 − e^{−R''} = −Σ_{k≥1} (−R'')^k / k!
    let mut coeffs = PowerSeries::<C>::exp_series(n + 2).coeffs;
    coeffs[0] = C::zero();
    let one_minus_exp = rpp.neg().series(&coeffs)?.neg();
    let x = inv.mul(&phi)?.mul(&one_minus_exp)?;
    x.det_pow_one_plus(-1, 2)
}

/// ν_φ(R'') = det^{−1/2}(1 − φ^N e^{−R''}).
pub fn nu_phi<C: Coeff>(rpp: &FormMatrix<C>, normal: &NormalAction<C>) -> Result<Ext<C>> {
    let reduced = nu_phi_reduced(rpp, normal)?;
    let s = normal.det_sqrt_one_minus().inv().ok_or(Error::SingularNormal)?;
    Ok(reduced.scale(&s))
}

/// Ch_φ(F) = tr[φ^E exp(−F_0)].
pub fn ch_phi<C: Coeff>(twist: &TwistData<C>) -> Result<Ext<C>> {
    let n = twist.f0.dim();
    let p = twist.rank();
    if twist.phi_e.len() != p * p {
        return Err(Error::SizeMismatch("phi_e vs curvature rank".into()));
    }
    let exp = twist
        .f0
        .neg()
        .series(&PowerSeries::<C>::exp_series(n + 2).coeffs)?;
    let phi = FormMatrix::from_scalars(n, p, &twist.phi_e);
    Ok(phi.mul(&exp)?.trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qc, QC};

    fn two_form(n: usize, mask: u32, c: QC) -> Ext<QC> {
        Ext::monomial(n, mask, c)
    }

    #[test]
    fn a_hat_of_zero_is_one() {
        let r = FormMatrix::<QC>::zeros(4, 4);
        assert_eq!(a_hat(&r).unwrap(), Ext::one(4));
    }

    #[test]
    fn a_hat_has_no_degree_two_part() {
        let w = two_form(4, 0b0011, qc(1, 2)) + two_form(4, 0b1100, qc(-3, 1));
        let r = FormMatrix::antisymmetric(4, 4, &[(0, 1, w.clone()), (2, 3, w)]).unwrap();
        let a = a_hat(&r).unwrap();
        assert!(a.degree_part(2).is_zero());
        assert_eq!(a.scalar_part(), qc(1, 1));
    }

    #[test]
    fn a_hat_rejects_symmetric() {
        let w = two_form(2, 0b11, qc(1, 1));
        let r = FormMatrix::new(2, 2, alloc::vec![Ext::zero(2), w.clone(), w, Ext::zero(2)]).unwrap();
        assert_eq!(a_hat(&r), Err(Error::NotAntisymmetric));
    }

    #[test]
    fn nu_phi_scalar_values() {
        let pi = NormalAction::from_half_angles(alloc::vec![(qc(0, 1), qc(1, 1))]).unwrap();
        let z = FormMatrix::<QC>::zeros(2, 2);
        assert_eq!(nu_phi(&z, &pi).unwrap(), Ext::scalar(2, qc(1, 2)));

        let theta = 1.1;
        let na = NormalAction::from_angles(&[theta]).unwrap();
        let v = nu_phi(&FormMatrix::zeros(2, 2), &na).unwrap().scalar_part();
        assert!((v.re - 1.0 / (2.0 * libm::sin(theta / 2.0))).abs() < 1e-14);
    }

    #[test]
    fn det_sqrt_examples() {
        let pi = NormalAction::from_angles(&[core::f64::consts::PI]).unwrap();
        assert!((det_sqrt_one_minus(&pi) - 2.0).abs() < 1e-15);
        assert_eq!(det_sqrt_one_minus(&NormalAction::<QC>::trivial()), 1.0);
        let na = NormalAction::from_angles(&[core::f64::consts::FRAC_PI_3, core::f64::consts::FRAC_PI_2]).unwrap();
        assert!((det_sqrt_one_minus(&na) - core::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn angle_validation() {
        assert_eq!(NormalAction::from_angles(&[0.0]), Err(Error::SingularNormal));
        assert!(matches!(
            NormalAction::from_angles(&[4.0]),
            Err(Error::AngleOutOfRange(_))
        ));
        assert!(NormalAction::from_half_angles(alloc::vec![(qc(1, 2), qc(1, 2))]).is_err());
        assert_eq!(
            NormalAction::from_half_angles(alloc::vec![(qc(1, 1), qc(0, 1))]),
            Err(Error::SingularNormal)
        );
    }

    #[test]
    fn ch_phi_examples() {
        let t = TwistData::<QC>::new(FormMatrix::zeros(2, 3), {
            let mut v = alloc::vec![qc(0, 1); 9];
            v[0] = qc(1, 1);
            v[4] = qc(1, 1);
            v[8] = qc(1, 1);
            v
        })
        .unwrap();
        assert_eq!(ch_phi(&t).unwrap(), Ext::scalar(2, qc(3, 1)));

        // rank 1: e^{iα}(1 − ω) in dimension 2
        let phase = QC::new(qc(3, 5).re, qc(4, 5).re);
        let w = two_form(2, 0b11, qc(2, 1));
        let ch = ch_phi(&TwistData::line(w.clone(), phase.clone()).unwrap()).unwrap();
        assert_eq!(ch, (Ext::one(2) - w).scale(&phase));
    }

    #[test]
    fn twist_rejects_non_unitary() {
        let r = TwistData::<QC>::new(FormMatrix::zeros(2, 1), alloc::vec![qc(2, 1)]);
        assert!(r.is_err());
    }
}
