//! Coefficient fields: exact complex rationals and `Complex64`.

use core::cmp::Ordering;
use core::fmt::Debug;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact complex rational.
pub type QC = Complex<BigRational>;

/// Scalar ring used for form coefficients.
///
/// Transcendental operations return `None` when the exact field cannot represent
/// the result.
pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact binary value of the float in the exact field.
    fn from_f64(v: f64) -> Self;
    fn from_c64(v: Complex64) -> Self;
    fn imag_unit() -> Self;
    fn inv(&self) -> Option<Self>;
    fn conj(&self) -> Self;
    fn to_c64(&self) -> Complex64;
    /// Principal square root.
    fn sqrt(&self) -> Option<Self>;
    fn exp(&self) -> Option<Self>;
    fn ln(&self) -> Option<Self>;
    /// Sign of a real value; `None` when the value is not real.
    fn real_sign(&self) -> Option<Ordering>;

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|r| self.clone() * r)
    }

    fn powi(&self, k: i64) -> Option<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut out = Self::one();
        for _ in 0..k.unsigned_abs() {
            out = out * base.clone();
        }
        Some(out)
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.to_c64() - other.to_c64()).norm() <= tol
    }
}

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rat_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

impl Coeff for QC {
    const EXACT: bool = true;

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn from_i64(v: i64) -> Self {
        Complex::new(rat(v, 1), BigRational::zero())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(rat(num, den), BigRational::zero())
    }
    fn from_f64(v: f64) -> Self {
        let r = BigRational::from_float(v).expect("finite float");
        Complex::new(r, BigRational::zero())
    }
    fn from_c64(v: Complex64) -> Self {
        Complex::new(
            BigRational::from_float(v.re).expect("finite float"),
            BigRational::from_float(v.im).expect("finite float"),
        )
    }
    fn imag_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }
    fn inv(&self) -> Option<Self> {
        if Coeff::is_zero(self) {
            None
        } else {
            Some(Complex::inv(self))
        }
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn sqrt(&self) -> Option<Self> {
        if !self.im.is_zero() {
            return None;
        }
        if self.re.is_negative() {
            rat_sqrt(&-self.re.clone()).map(|r| Complex::new(BigRational::zero(), r))
        } else {
            rat_sqrt(&self.re).map(|r| Complex::new(r, BigRational::zero()))
        }
    }
    fn exp(&self) -> Option<Self> {
        Coeff::is_zero(self).then(<Self as Coeff>::one)
    }
    fn ln(&self) -> Option<Self> {
        (self == &<Self as Coeff>::one()).then(<Self as Coeff>::zero)
    }
    fn real_sign(&self) -> Option<Ordering> {
        self.im
            .is_zero()
            .then(|| self.re.cmp(&BigRational::zero()))
    }
}

/// Tolerance below which a float imaginary part counts as zero in `real_sign`.
const REAL_TOL: f64 = 1e-12;

impl Coeff for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn from_c64(v: Complex64) -> Self {
        v
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn inv(&self) -> Option<Self> {
        (!Coeff::is_zero(self)).then(|| Complex::inv(self))
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn sqrt(&self) -> Option<Self> {
        Some(Complex::sqrt(*self))
    }
    fn exp(&self) -> Option<Self> {
        Some(Complex::exp(*self))
    }
    fn ln(&self) -> Option<Self> {
        (!Coeff::is_zero(self)).then(|| Complex::ln(*self))
    }
    fn real_sign(&self) -> Option<Ordering> {
        if self.im.abs() > REAL_TOL * (1.0 + self.re.abs()) {
            return None;
        }
        self.re.partial_cmp(&0.0)
    }
}

/// Exact rational as a complex coefficient.
pub fn qc(num: i64, den: i64) -> QC {
    QC::from_ratio(num, den)
}

/// Binomial coefficient `r choose k` for rational `r = p/q`.
pub fn binom_ratio<C: Coeff>(p: i64, q: i64, k: usize) -> C {
    let mut out = C::one();
    for i in 0..k as i64 {
        out = out * C::from_ratio(p - i * q, q * (i + 1));
    }
    out
}

/// `s^(p/q)` for a scalar, using the principal branch.
pub fn pow_ratio<C: Coeff>(s: &C, p: i64, q: i64) -> Option<C> {
    match q {
        1 => s.powi(p),
        2 => s.sqrt()?.powi(p),
        _ => {
            if C::EXACT {
                None
            } else {
                let z = s.to_c64();
                Some(C::from_c64(Complex::powf(z, p as f64 / q as f64)))
            }
        }
    }
}

/// `1/k!` in the coefficient field.
pub fn inv_factorial<C: Coeff>(k: usize) -> C {
    let mut out = C::one();
    for i in 2..=k as i64 {
        out = out * C::from_ratio(1, i);
    }
    out
}

/// `(-i)^k`.
pub fn minus_i_pow<C: Coeff>(k: usize) -> C {
    match k % 4 {
        0 => C::one(),
        1 => -C::imag_unit(),
        2 => -C::one(),
        _ => C::imag_unit(),
    }
}

pub fn bigrational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `π^{pi_half_pow/2} · value`, keeping powers of π symbolic.
#[derive(Debug, Clone, PartialEq)]
pub struct PiScaled<T> {
    pub pi_half_pow: i32,
    pub value: T,
}

impl<T> PiScaled<T> {
    pub fn new(pi_half_pow: i32, value: T) -> Self {
        PiScaled { pi_half_pow, value }
    }

    pub fn pi_factor(&self) -> f64 {
        libm::pow(core::f64::consts::PI, self.pi_half_pow as f64 / 2.0)
    }
}

impl<C: Coeff> PiScaled<C> {
    pub fn to_c64(&self) -> Complex64 {
        self.value.to_c64() * self.pi_factor()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sqrt_of_squares() {
        assert_eq!(qc(9, 4).sqrt(), Some(qc(3, 2)));
        assert_eq!(qc(2, 1).sqrt(), None);
        assert_eq!(qc(-4, 1).sqrt(), Some(QC::imag_unit() * qc(2, 1)));
    }

    #[test]
    fn binomial_half() {
        // (1/2 choose 2) = -1/8
        assert_eq!(binom_ratio::<QC>(1, 2, 2), qc(-1, 8));
        assert_eq!(binom_ratio::<QC>(-1, 2, 1), qc(-1, 2));
    }

    #[test]
    fn powers_of_minus_i() {
        let z: QC = minus_i_pow(3);
        assert_eq!(z, QC::imag_unit());
        assert_eq!(minus_i_pow::<QC>(2), qc(-1, 1));
    }
}
