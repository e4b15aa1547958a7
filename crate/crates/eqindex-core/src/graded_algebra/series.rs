//! Power series of scalar-plus-nilpotent elements.

use alloc::vec;
use alloc::vec::Vec;

use super::Ext;
use crate::error::{Error, Result};
use crate::scalar::{binom_ratio, inv_factorial, pow_ratio, Coeff};

/// Analytic functions with closed-form Taylor coefficients at any scalar point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analytic {
    Exp,
    Log,
    Inverse,
    Sqrt,
    /// `x^(p/q)`, principal branch.
    Power(i64, i64),
}

impl Analytic {
    fn name(self) -> &'static str {
        match self {
            Analytic::Exp => "exp",
            Analytic::Log => "log",
            Analytic::Inverse => "inverse",
            Analytic::Sqrt => "sqrt",
            Analytic::Power(..) => "power",
        }
    }

    /// Taylor coefficients `f^{(k)}(s)/k!` for k = 0..=order.
    pub fn taylor<C: Coeff>(self, s: &C, order: usize) -> Result<Vec<C>> {
        let branch = || Error::Branch(self.name());
        match self {
            Analytic::Exp => {
                let e = s.exp().ok_or(Error::Inexact("exp of a non-zero scalar"))?;
                Ok((0..=order).map(|k| e.clone() * inv_factorial::<C>(k)).collect())
            }
            Analytic::Log => {
                let inv = s.inv().ok_or_else(branch)?;
                let l0 = s.ln().ok_or(Error::Inexact("log of a scalar other than 1"))?;
                let mut out = vec![l0];
                let mut p = C::one();
                for k in 1..=order as i64 {
                    p = p * inv.clone();
                    let sign = if k % 2 == 1 { 1 } else { -1 };
                    out.push(p.clone() * C::from_ratio(sign, k));
                }
                Ok(out)
            }
            Analytic::Inverse => {
                let inv = s.inv().ok_or_else(branch)?;
                let mut out = Vec::with_capacity(order + 1);
                let mut p = inv.clone();
                for k in 0..=order {
                    out.push(if k % 2 == 0 { p.clone() } else { -p.clone() });
                    p = p * inv.clone();
                }
                Ok(out)
            }
            Analytic::Sqrt => Analytic::Power(1, 2).taylor(s, order),
            Analytic::Power(p, q) => {
                if q <= 0 {
                    return Err(Error::Invalid("power denominator must be positive".into()));
                }
                let inv = s.inv().ok_or_else(branch)?;
                if q > 1 && s.real_sign() == Some(core::cmp::Ordering::Less) {
                    return Err(branch());
                }
                let base = pow_ratio(s, p, q).ok_or(Error::Inexact("fractional power"))?;
                let mut out = Vec::with_capacity(order + 1);
                let mut sp = base;
                for k in 0..=order {
                    out.push(sp.clone() * binom_ratio::<C>(p, q, k));
                    sp = sp * inv.clone();
                }
                Ok(out)
            }
        }
    }
}

/// Σ_k c_k N^k for nilpotent `N` (no scalar part); stops once N^k vanishes.
pub fn nilpotent_series<C: Coeff>(coeffs: &[C], nil: &Ext<C>) -> Ext<C> {
    debug_assert!(nil.scalar_part().is_zero());
    let n = nil.dim();
    let mut out = Ext::zero(n);
    let mut p = Ext::one(n);
    for c in coeffs {
        if p.is_zero() {
            break;
        }
        out = &out + &p.scale(c);
        p = &p * nil;
    }
    out
}

/// f(a) for `a = s + N`, expanded around the scalar part `s`.
pub fn analytic_series<C: Coeff>(f: Analytic, a: &Ext<C>) -> Result<Ext<C>> {
    let s = a.scalar_part();
    let nil = a.nilpotent_part();
    let coeffs = f.taylor(&s, a.dim())?;
    Ok(nilpotent_series(&coeffs, &nil))
}

/// Truncated univariate power series with coefficients in `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<C> {
    pub coeffs: Vec<C>,
}

impl<C: Coeff> PowerSeries<C> {
    pub fn new(coeffs: Vec<C>) -> Self {
        PowerSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.order().min(other.order());
        let mut out = vec![C::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        PowerSeries::new(out)
    }

    /// Multiplicative inverse; requires an invertible constant term.
    pub fn inverse(&self) -> Option<Self> {
        let a0inv = self.coeffs.first()?.inv()?;
        let mut out: Vec<C> = vec![a0inv.clone()];
        for m in 1..self.order() {
            let mut acc = C::zero();
            for i in 1..=m {
                acc = acc + self.coeffs[i].clone() * out[m - i].clone();
            }
            out.push(-(acc * a0inv.clone()));
        }
        Some(PowerSeries::new(out))
    }

    /// Series of `x ↦ f(λx)`.
    pub fn rescale(&self, lambda: &C) -> Self {
        let mut p = C::one();
        let mut out = Vec::with_capacity(self.order());
        for c in &self.coeffs {
            out.push(c.clone() * p.clone());
            p = p * lambda.clone();
        }
        PowerSeries::new(out)
    }

    pub fn exp_series(order: usize) -> Self {
        PowerSeries::new((0..order).map(inv_factorial::<C>).collect())
    }

    pub fn sinh_over_x(order: usize) -> Self {
        PowerSeries::new(
            (0..order)
                .map(|k| if k % 2 == 0 { inv_factorial::<C>(k + 1) } else { C::zero() })
                .collect(),
        )
    }

    pub fn cosh(order: usize) -> Self {
        PowerSeries::new(
            (0..order)
                .map(|k| if k % 2 == 0 { inv_factorial::<C>(k) } else { C::zero() })
                .collect(),
        )
    }

    /// `x / sinh x`.
    pub fn x_over_sinh(order: usize) -> Self {
        Self::sinh_over_x(order).inverse().expect("constant term 1")
    }

    /// `x / tanh x`.
    pub fn x_over_tanh(order: usize) -> Self {
        Self::cosh(order).mul(&Self::x_over_sinh(order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qc, QC};

    #[test]
    fn exp_of_zero_is_one() {
        let z = Ext::<QC>::zero(3);
        assert_eq!(analytic_series(Analytic::Exp, &z).unwrap(), Ext::one(3));
    }

    #[test]
    fn inverse_of_one_plus_top() {
        let mut a = Ext::<QC>::one(2);
        a.add_term(0b11, qc(1, 1));
        let inv = analytic_series(Analytic::Inverse, &a).unwrap();
        let mut expect = Ext::one(2);
        expect.add_term(0b11, qc(-1, 1));
        assert_eq!(inv, expect);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut a = Ext::<QC>::scalar(4, qc(9, 4));
        a.add_term(0b11, qc(1, 3));
        a.add_term(0b1100, qc(-2, 5));
        let r = analytic_series(Analytic::Sqrt, &a).unwrap();
        assert_eq!(&r * &r, a);
    }

    #[test]
    fn branch_errors() {
        let z = Ext::<QC>::zero(2);
        assert_eq!(
            analytic_series(Analytic::Inverse, &z),
            Err(Error::Branch("inverse"))
        );
        assert!(analytic_series(Analytic::Sqrt, &Ext::scalar(2, qc(-1, 1))).is_err());
    }

    #[test]
    fn x_over_sinh_coefficients() {
        // x/sinh x = 1 − x²/6 + 7x⁴/360 − …
        let s = PowerSeries::<QC>::x_over_sinh(6);
        assert_eq!(s.coeffs[0], qc(1, 1));
        assert_eq!(s.coeffs[2], qc(-1, 6));
        assert_eq!(s.coeffs[4], qc(7, 360));
        // x coth x = 1 + x²/3 − x⁴/45 + …
        let t = PowerSeries::<QC>::x_over_tanh(6);
        assert_eq!(t.coeffs[2], qc(1, 3));
        assert_eq!(t.coeffs[4], qc(-1, 45));
    }
}
