//! Heat kernel of the curvature harmonic oscillator
//! `H_R = −Σ_i (∂_i − ¼ Σ_j R_ij x^j)²` and its equivariant fiber integral.
//!
//! With `z = x − y`,
//! `K_t(x, y) = G_t(z) · det^{1/2}((tR/2)/sinh(tR/2)) · exp(−¼⟨z, M(tR) z⟩/t − ¼⟨x, R z⟩)`
//! where `M(s) = (s/2) coth(s/2) − 1`. Every function of `R` is expanded as a power
//! series truncated by nilpotency, so no matrix square root is taken.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::char_forms::{a_hat, ch_phi, nu_phi_reduced, NormalAction, TwistData};
use crate::error::{Error, Result};
use crate::graded_algebra::{Ext, FormMatrix, PowerSeries};
use crate::scalar::{inv_factorial, minus_i_pow, Coeff, PiScaled};
use crate::volterra::{fiber_integral, GaussianKernel, HeatSeries, KernelKey, ModelOperator};

/// Curvature data of the model at a fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCurvature<C> {
    /// Horizontal block R′ (a×a).
    pub rp: FormMatrix<C>,
    /// Normal block R″ ((n−a)×(n−a)).
    pub rpp: FormMatrix<C>,
    pub normal: NormalAction<C>,
    pub twist: TwistData<C>,
}

fn check_two_form_matrix<C: Coeff>(r: &FormMatrix<C>) -> Result<()> {
    if !r.is_antisymmetric() {
        return Err(Error::NotAntisymmetric);
    }
    for e in r.entries() {
        if !e.filter(|m| m.count_ones() != 2).is_zero() {
            return Err(Error::Invalid("curvature entries must be 2-forms".into()));
        }
    }
    Ok(())
}

impl<C: Coeff> ModelCurvature<C> {
    pub fn new(
        rp: FormMatrix<C>,
        rpp: FormMatrix<C>,
        normal: NormalAction<C>,
        twist: TwistData<C>,
    ) -> Result<Self> {
        let n = rp.dim();
        if rpp.dim() != n || twist.f0.dim() != n {
            return Err(Error::DimensionMismatch(n, rpp.dim()));
        }
        if rp.size() + rpp.size() != n || rpp.size() != normal.codim() {
            return Err(Error::SizeMismatch(format!(
                "blocks {}+{} with codimension {} in dimension {n}",
                rp.size(),
                rpp.size(),
                normal.codim()
            )));
        }
        check_two_form_matrix(&rp)?;
        check_two_form_matrix(&rpp)?;
        Ok(ModelCurvature {
            rp,
            rpp,
            normal,
            twist,
        })
    }

    /// Flat model with trivial twist.
    pub fn flat(n: usize, normal: NormalAction<C>) -> Result<Self> {
        let m = normal.codim();
        if m > n {
            return Err(Error::InvalidStratumDim { a: 0, n });
        }
        Self::new(
            FormMatrix::zeros(n, n - m),
            FormMatrix::zeros(n, m),
            normal,
            TwistData::trivial(n),
        )
    }

    pub fn dim(&self) -> usize {
        self.rp.dim()
    }

    pub fn a_dim(&self) -> usize {
        self.rp.size()
    }

    /// Normal factor ν_φ; the endomorphism matrix of R″ is `(R″_ij)ᵀ`.
    pub fn nu_reduced(&self) -> Result<Ext<C>> {
        nu_phi_reduced(&self.rpp.transpose(), &self.normal)
    }

    /// R′ ⊕ R″.
    pub fn full(&self) -> FormMatrix<C> {
        FormMatrix::block_diag(&self.rp, &self.rpp).expect("same form dimension")
    }
}

/// `H_R` as a model operator.
pub fn harmonic_oscillator<C: Coeff>(r: &FormMatrix<C>) -> Result<ModelOperator<C>> {
    let n = r.dim();
    if r.size() != n {
        return Err(Error::SizeMismatch(format!("curvature of size {} in dimension {n}", r.size())));
    }
    let quarter = C::from_ratio(-1, 4);
    let mut h = ModelOperator::zero(n);
    for i in 0..n {
        let mut nabla = ModelOperator::d(n, i)?;
        for j in 0..n {
            let term = ModelOperator::form(r.get(i, j).scale(&quarter)).compose(&ModelOperator::x(n, j)?)?;
            nabla = nabla.add(&term)?;
        }
        h = h.sub(&nabla.compose(&nabla)?)?;
    }
    Ok(h)
}

/// Exact kernel of `(H_R + ∂_t)^{−1}` as a Gaussian kernel in `(x, z, t)`.
pub fn mehler_kernel_symbolic<C: Coeff>(r: &FormMatrix<C>) -> Result<GaussianKernel<C>> {
    let n = r.dim();
    if r.size() != n {
        return Err(Error::SizeMismatch(format!("curvature of size {} in dimension {n}", r.size())));
    }
    check_two_form_matrix(r)?;
    let key = |x: Vec<u32>, z: Vec<u32>, two_t: i32| KernelKey { x, z, two_t };
    let zero = || alloc::vec![0u32; n];

    let mut pre = GaussianKernel::zero(n);
    let ah = a_hat(r)?;
    for d in (0..=n).step_by(2) {
        pre.add_term(key(zero(), zero(), d as i32), ah.degree_part(d));
    }

    let mut expo = GaussianKernel::zero(n);
    let quarter = C::from_ratio(-1, 4);
    // −¼⟨x, R z⟩
    for i in 0..n {
        for j in 0..n {
            let w = r.get(i, j);
            if w.is_zero() {
                continue;
            }
            let mut x = zero();
            x[i] += 1;
            let mut z = zero();
            z[j] += 1;
            expo.add_term(key(x, z, 0), w.scale(&quarter));
        }
    }
    // −¼⟨z, M(tR) z⟩/t with M(tR) = Σ_{k≥1} c_{2k} (t/2)^{2k} R^{2k}
    let coth = PowerSeries::<C>::x_over_tanh(n + 2);
    let r2 = r.mul(r)?;
    let mut rk = r2.clone();
    let mut k = 2usize;
    while !rk.is_zero() && k < coth.order() {
        let c = coth.coeffs[k].clone() * C::from_ratio(1, 2).powi(k as i64).expect("nonzero") * quarter.clone();
        for i in 0..n {
            for j in 0..n {
                let w = rk.get(i, j);
                if w.is_zero() {
                    continue;
                }
                let mut z = zero();
                z[i] += 1;
                z[j] += 1;
                expo.add_term(key(zero(), z, 2 * (k as i32 - 1)), w.scale(&c));
            }
        }
        rk = rk.mul(&r2)?;
        k += 2;
    }

    let mut exp_e = GaussianKernel::heat(n);
    let mut power = GaussianKernel::heat(n);
    let mut p = 1usize;
    loop {
        power = power.mul_poly(&expo)?;
        if power.is_empty() {
            break;
        }
        exp_e = exp_e.add(&power.scale(&inv_factorial::<C>(p)))?;
        p += 1;
    }
    pre.mul_poly(&exp_e)
}

/// Numeric value of the Mehler kernel with form coefficients.
pub fn mehler_kernel<C: Coeff>(r: &FormMatrix<C>, x: &[f64], y: &[f64], t: f64) -> Result<Ext<Complex64>> {
    if t <= 0.0 {
        return Err(Error::NonPositiveTime(t));
    }
    mehler_kernel_symbolic(r)?.eval(x, y, t)
}

/// Heat kernel of `−Δ + Σ_i ω_i² x_i²` on ℝⁿ (real scalar mode, `ω_i ≥ 0`).
pub fn mehler_kernel_real(omega: &[f64], x: &[f64], y: &[f64], t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::NonPositiveTime(t));
    }
    if x.len() != omega.len() || y.len() != omega.len() {
        return Err(Error::SizeMismatch("point length vs frequency count".into()));
    }
    let mut out = 1.0;
    for ((&w, &a), &b) in omega.iter().zip(x).zip(y) {
        if w < 0.0 {
            return Err(Error::Invalid(format!("negative frequency {w}")));
        }
        out *= if w * t < 1e-8 {
            libm::exp(-(a - b) * (a - b) / (4.0 * t)) / libm::sqrt(4.0 * core::f64::consts::PI * t)
        } else {
            let s = libm::sinh(2.0 * w * t);
            let c = libm::cosh(2.0 * w * t);
            libm::sqrt(w / (2.0 * core::f64::consts::PI * s))
                * libm::exp(-w * ((a * a + b * b) * c - 2.0 * a * b) / (2.0 * s))
        };
    }
    Ok(out)
}

/// Closed form of `I_{(H_R+∂_t)^{−1}}(0, t)`:
/// `(4πt)^{−a/2} det^{−1}(1−φ^N) · Â(tR′) · det^{−1/2}(1 + (1−φ^N)^{−1}φ^N(1−e^{−tR″ᵀ}))`.
pub fn mehler_fiber_series<C: Coeff>(mc: &ModelCurvature<C>) -> Result<HeatSeries<C>> {
    let n = mc.dim();
    let a = mc.a_dim();
    let det_inv = mc.normal.det_one_minus().inv().ok_or(Error::SingularNormal)?;
    let w = a_hat(&mc.rp)?
        .wedge(&mc.nu_reduced()?)?
        .scale(&det_inv);
    let mut out = HeatSeries::zero(n, a);
    for d in 0..=n {
        out.add_term(d as i32 - a as i32, w.degree_part(d));
    }
    Ok(out)
}

pub fn mehler_fiber_integral<C: Coeff>(mc: &ModelCurvature<C>, t: f64) -> Result<Ext<Complex64>> {
    mehler_fiber_series(mc)?.eval(t)
}

/// `I_{(H_R+∂_t)^{−1}}` computed by integrating the Mehler kernel over the normal fiber.
pub fn mehler_fiber_by_integration<C: Coeff>(mc: &ModelCurvature<C>) -> Result<HeatSeries<C>> {
    fiber_integral(&mehler_kernel_symbolic(&mc.full())?, &mc.normal, mc.a_dim())
}

/// `I_{(H_R+∂_t)^{−(m+1)}} = (t^m/m!) I_{(H_R+∂_t)^{−1}}`.
pub fn resolvent_power_series<C: Coeff>(mc: &ModelCurvature<C>, m: usize) -> Result<HeatSeries<C>> {
    Ok(mehler_fiber_series(mc)?
        .mul_t(2 * m as i32)
        .scale(&inv_factorial::<C>(m)))
}

pub fn resolvent_power_fiber_integral<C: Coeff>(
    mc: &ModelCurvature<C>,
    m: usize,
    t: f64,
) -> Result<Ext<Complex64>> {
    resolvent_power_series(mc, m)?.eval(t)
}

/// `(−i)^{n/2} 2^{a/2} det^{1/2}(1−φ^N) |tr_E[φ^E I_{P(H_R+∂_t)^{−1}}(0,1) ∧ exp(−F_0)]|^{(a,0)}`.
pub fn gamma_phi_density<C: Coeff>(model_op: &ModelOperator<C>, mc: &ModelCurvature<C>) -> Result<PiScaled<C>> {
    let n = mc.dim();
    let a = mc.a_dim();
    if a % 2 == 1 || n % 2 == 1 {
        return Err(Error::OddDimension(if a % 2 == 1 { a } else { n }));
    }
    let kernel = model_op.apply_to_kernel(&mehler_kernel_symbolic(&mc.full())?)?;
    let at_one = fiber_integral(&kernel, &mc.normal, a)?.at_one();
    let w = at_one.value.wedge(&ch_phi(&mc.twist)?)?;
    let two_half_a = C::from_i64(1i64 << (a / 2));
    let scalar = minus_i_pow::<C>(n / 2) * two_half_a * mc.normal.det_sqrt_one_minus();
    Ok(PiScaled::new(at_one.pi_half_pow, w.berezin_horizontal(a)? * scalar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qc, QC};

    fn sample_curvature(n: usize) -> FormMatrix<QC> {
        let mut upper = Vec::new();
        let mut c = 1i64;
        for i in 0..n {
            for j in i + 1..n {
                let mut w = Ext::zero(n);
                for p in 0..n {
                    for q in p + 1..n {
                        c = (c * 7 + 3) % 11;
                        w.add_term((1 << p) | (1 << q), qc(c - 5, 3));
                    }
                }
                upper.push((i, j, w));
            }
        }
        FormMatrix::antisymmetric(n, n, &upper).unwrap()
    }

    #[test]
    fn flat_kernel_is_free() {
        let r = FormMatrix::<QC>::zeros(2, 2);
        assert_eq!(mehler_kernel_symbolic(&r).unwrap(), GaussianKernel::heat(2));
    }

    #[test]
    fn solves_heat_equation() {
        for n in [2usize, 4] {
            let r = sample_curvature(n);
            let k = mehler_kernel_symbolic(&r).unwrap();
            let h = harmonic_oscillator(&r).unwrap().add(&ModelOperator::dt(n)).unwrap();
            assert!(h.apply_to_kernel(&k).unwrap().is_empty(), "n = {n}");
        }
    }

    #[test]
    fn flat_point_density() {
        let theta = 1.3;
        let normal = NormalAction::from_angles(&[theta]).unwrap();
        let mc = ModelCurvature::flat(2, normal).unwrap();
        let g = gamma_phi_density(&ModelOperator::one(2), &mc).unwrap().to_c64();
        let expect = -1.0 / (2.0 * libm::sin(theta / 2.0));
        assert!((g - Complex64::new(0.0, expect)).norm() < 1e-13);
    }

    #[test]
    fn real_mode_free_limit() {
        let k0 = mehler_kernel_real(&[0.0], &[0.3], &[-0.2], 0.7).unwrap();
        let k1 = mehler_kernel_real(&[1e-12], &[0.3], &[-0.2], 0.7).unwrap();
        assert!((k0 - k1).abs() < 1e-12);
    }
}

