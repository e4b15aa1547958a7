//! Exterior algebra Λ(n)⊗ℂ with its Clifford product, Berezin integrals and the
//! spinor supertrace.
//!
//! Basis monomials `dx^{i1}∧…∧dx^{ik}` (i1 < … < ik) are stored as bitmasks with
//! 0-based indices. The Clifford action on Λ(n) is `c(v) = v∧ − ι_v`, so
//! `c(v)² = −|v|²`. The symbol map σ sends `c(dx^I)` to `dx^I`; the Clifford product
//! of two forms is `σ[c(a)c(b)]`.

mod matrix;
mod series;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::Coeff;

pub use matrix::{scalar_det, scalar_inverse, FormMatrix};
pub use series::{analytic_series, nilpotent_series, Analytic, PowerSeries};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 24;

/// Element of Λ(n)⊗ℂ.
#[derive(Clone, PartialEq)]
pub struct Ext<C> {
    n: usize,
    terms: BTreeMap<u32, C>,
}

#[inline]
fn bit(i: usize) -> u32 {
    1u32 << i
}

#[inline]
fn below(mask: u32, i: usize) -> u32 {
    (mask & (bit(i) - 1)).count_ones()
}

/// Sign and mask of `e_a ∧ e_b`; `None` when the monomials overlap.
pub fn wedge_mono(a: u32, b: u32) -> Option<(bool, u32)> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    Some((swaps % 2 == 1, a | b))
}

/// `σ[c(e_a) c(e_b)] = ±e_{a Δ b}`, returned as (negative?, mask).
pub fn clifford_mono(a: u32, b: u32) -> (bool, u32) {
    let mut neg = false;
    let mut m = b;
    let mut rest = a;
    // apply c(e_i) for i in a, last index first
    while rest != 0 {
        let i = 31 - rest.leading_zeros() as usize;
        rest &= !bit(i);
        let odd = below(m, i) % 2 == 1;
        if m & bit(i) == 0 {
            neg ^= odd;
            m |= bit(i);
        } else {
            neg ^= !odd;
            m &= !bit(i);
        }
    }
    (neg, m)
}

/// Number of horizontal (index < a) and normal factors of a monomial.
pub fn bidegree(mask: u32, a: usize) -> (usize, usize) {
    let h = (mask & (bit(a) - 1)).count_ones() as usize;
    (h, mask.count_ones() as usize - h)
}

impl<C: Coeff> Ext<C> {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_DIM, "ambient dimension {n} exceeds {MAX_DIM}");
        Ext {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(n: usize, c: C) -> Self {
        Self::monomial(n, 0, c)
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, C::one())
    }

    pub fn monomial(n: usize, mask: u32, c: C) -> Self {
        let mut out = Self::zero(n);
        assert!(n == 32 || mask >> n == 0, "monomial outside Λ({n})");
        out.add_term(mask, c);
        out
    }

    /// `dx^i` with a 0-based index.
    pub fn dx(n: usize, i: usize) -> Self {
        assert!(i < n, "dx index {i} out of range for n = {n}");
        Self::monomial(n, bit(i), C::one())
    }

    /// `c · dx^{i1}∧…∧dx^{ik}` for indices in any order.
    pub fn from_indices(n: usize, idx: &[usize], c: C) -> Result<Self> {
        if n > MAX_DIM {
            return Err(Error::DimensionTooLarge(n));
        }
        let mut acc = Self::scalar(n, c);
        for &i in idx {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, dim: n });
            }
            acc = acc.wedge(&Self::dx(n, i))?;
        }
        Ok(acc)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &C)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mask: u32) -> C {
        self.terms.get(&mask).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mask: u32, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mask) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&mask);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(mask, c);
            }
        }
    }

    pub fn scalar_part(&self) -> C {
        self.coeff(0)
    }

    pub fn nilpotent_part(&self) -> Self {
        let mut out = self.clone();
        out.terms.remove(&0);
        out
    }

    pub fn degree_part(&self, d: usize) -> Self {
        self.filter(|m| m.count_ones() as usize == d)
    }

    /// Component in Λ^{k,l}: k horizontal factors (index < a) and l normal ones.
    pub fn bidegree_part(&self, a: usize, k: usize, l: usize) -> Self {
        self.filter(|m| bidegree(m, a) == (k, l))
    }

    pub fn filter(&self, keep: impl Fn(u32) -> bool) -> Self {
        Ext {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(**m))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.count_ones() as usize).max()
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 1)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.n);
        for (m, v) in &self.terms {
            out.add_term(*m, v.clone() * c.clone());
        }
        out
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(self.n, other.n))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((neg, m)) = wedge_mono(*ma, *mb) {
                    let c = ca.clone() * cb.clone();
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// `σ[c(self) c(other)]`.
    pub fn clifford(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let (neg, m) = clifford_mono(*ma, *mb);
                let c = ca.clone() * cb.clone();
                out.add_term(m, if neg { -c } else { c });
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::one(self.n);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Coefficient of `dx^1∧…∧dx^n`.
    pub fn berezin_top(&self) -> C {
        self.coeff(((1u64 << self.n) - 1) as u32)
    }

    /// Coefficient of `dx^1∧…∧dx^a` among terms with no normal factor.
    pub fn berezin_horizontal(&self, a: usize) -> Result<C> {
        if a > self.n || a % 2 == 1 {
            return Err(Error::InvalidStratumDim { a, n: self.n });
        }
        Ok(self.coeff(bit(a) - 1))
    }

    /// `(−2i)^{n/2}` times the top coefficient: the supertrace of the spinor
    /// endomorphism with symbol `self`.
    pub fn supertrace_sigma(&self) -> Result<C> {
        if self.n % 2 == 1 {
            return Err(Error::OddDimension(self.n));
        }
        let factor = (-C::imag_unit() * C::from_i64(2))
            .powi((self.n / 2) as i64)
            .expect("non-negative power");
        Ok(factor * self.berezin_top())
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Ext<D> {
        let mut out = Ext::zero(self.n);
        for (m, c) in &self.terms {
            out.add_term(*m, f(c));
        }
        out
    }

    pub fn to_c64(&self) -> Ext<Complex64> {
        self.map(|c| c.to_c64())
    }

    /// Re-embed into Λ(m), m ≥ n, keeping indices.
    pub fn embed(&self, m: usize) -> Self {
        assert!(m >= self.n);
        Ext {
            n: m,
            terms: self.terms.clone(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let diff = self - other;
        diff.terms.values().map(|c| c.to_c64().norm()).fold(0.0, f64::max)
    }
}

pub fn wedge<C: Coeff>(a: &Ext<C>, b: &Ext<C>) -> Result<Ext<C>> {
    a.wedge(b)
}

pub fn clifford_product<C: Coeff>(a: &Ext<C>, b: &Ext<C>) -> Result<Ext<C>> {
    a.clifford(b)
}

pub fn berezin_top<C: Coeff>(a: &Ext<C>) -> C {
    a.berezin_top()
}

pub fn berezin_horizontal<C: Coeff>(a: &Ext<C>, a_dim: usize) -> Result<C> {
    a.berezin_horizontal(a_dim)
}

pub fn supertrace_sigma<C: Coeff>(a: &Ext<C>) -> Result<C> {
    a.supertrace_sigma()
}

/// σ[φ^S] = ∏_j (cos(θ_j/2) + sin(θ_j/2) c(dx^{a+2j−1}) c(dx^{a+2j})).
///
/// `half` holds `(cos(θ_j/2), sin(θ_j/2))` for each normal rotation plane.
pub fn phi_spinor_symbol<C: Coeff>(half: &[(C, C)], a_dim: usize, n: usize) -> Result<Ext<C>> {
    if a_dim + 2 * half.len() != n {
        return Err(Error::InvalidStratumDim { a: a_dim, n });
    }
    let mut acc = Ext::one(n);
    for (j, (ch, sh)) in half.iter().enumerate() {
        let p = a_dim + 2 * j;
        let mut factor = Ext::scalar(n, ch.clone());
        factor.add_term(bit(p) | bit(p + 1), sh.clone());
        acc = acc.clifford(&factor)?;
    }
    Ok(acc)
}

impl<C: fmt::Debug> fmt::Debug for Ext<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<_> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if *m == 0 {
                    format!("{c:?}")
                } else {
                    let idx: Vec<_> = (0..self.n)
                        .filter(|i| m & bit(*i) != 0)
                        .map(|i| format!("{}", i + 1))
                        .collect();
                    format!("{c:?}·e{}", idx.join(""))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<C: Coeff> Add for &Ext<C> {
    type Output = Ext<C>;
    fn add(self, rhs: Self) -> Ext<C> {
        self.try_add(rhs).expect("form dimensions agree")
    }
}

impl<C: Coeff> Sub for &Ext<C> {
    type Output = Ext<C>;
    fn sub(self, rhs: Self) -> Ext<C> {
        self.try_add(&-rhs).expect("form dimensions agree")
    }
}

impl<C: Coeff> Neg for &Ext<C> {
    type Output = Ext<C>;
    fn neg(self) -> Ext<C> {
        self.map(|c| -c.clone())
    }
}

/// Wedge product.
impl<C: Coeff> Mul for &Ext<C> {
    type Output = Ext<C>;
    fn mul(self, rhs: Self) -> Ext<C> {
        self.wedge(rhs).expect("form dimensions agree")
    }
}

impl<C: Coeff> Add for Ext<C> {
    type Output = Ext<C>;
    fn add(self, rhs: Self) -> Ext<C> {
        &self + &rhs
    }
}

impl<C: Coeff> Sub for Ext<C> {
    type Output = Ext<C>;
    fn sub(self, rhs: Self) -> Ext<C> {
        &self - &rhs
    }
}

impl<C: Coeff> Neg for Ext<C> {
    type Output = Ext<C>;
    fn neg(self) -> Ext<C> {
        -&self
    }
}

impl<C: Coeff> Mul for Ext<C> {
    type Output = Ext<C>;
    fn mul(self, rhs: Self) -> Ext<C> {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qc, QC};

    fn dx(n: usize, i: usize) -> Ext<QC> {
        Ext::dx(n, i)
    }

    #[test]
    fn wedge_basics() {
        let e12 = &dx(2, 0) * &dx(2, 1);
        assert_eq!(e12, Ext::monomial(2, 0b11, qc(1, 1)));
        assert!((&dx(2, 0) * &dx(2, 0)).is_zero());
        assert_eq!(&dx(2, 1) * &dx(2, 0), -&e12);
    }

    #[test]
    fn wedge_dimension_mismatch() {
        assert_eq!(
            dx(2, 0).wedge(&dx(3, 0)),
            Err(Error::DimensionMismatch(2, 3))
        );
    }

    #[test]
    fn clifford_examples() {
        assert_eq!(dx(2, 0).clifford(&dx(2, 0)).unwrap(), Ext::scalar(2, qc(-1, 1)));
        assert_eq!(
            dx(2, 0).clifford(&dx(2, 1)).unwrap(),
            &dx(2, 0) * &dx(2, 1)
        );
        let e12 = &dx(2, 0) * &dx(2, 1);
        assert_eq!(e12.clifford(&e12).unwrap(), Ext::scalar(2, qc(-1, 1)));
    }

    #[test]
    fn berezin_and_supertrace() {
        let a = Ext::monomial(2, 0b11, qc(5, 1));
        assert_eq!(a.berezin_top(), qc(5, 1));
        assert_eq!(Ext::<QC>::one(2).berezin_top(), qc(0, 1));
        assert_eq!(dx(2, 0).berezin_top(), qc(0, 1));

        let h = &dx(4, 0) * &dx(4, 1);
        assert_eq!(h.berezin_horizontal(2).unwrap(), qc(1, 1));
        let mixed = &dx(4, 0) * &dx(4, 2);
        assert_eq!(mixed.berezin_horizontal(2).unwrap(), qc(0, 1));
        assert_eq!(Ext::scalar(4, qc(3, 1)).berezin_horizontal(0).unwrap(), qc(3, 1));
        assert!(h.berezin_horizontal(3).is_err());

        assert_eq!(Ext::<QC>::one(2).supertrace_sigma().unwrap(), qc(0, 1));
        let e12 = Ext::<QC>::monomial(2, 0b11, qc(1, 1));
        assert_eq!(e12.supertrace_sigma().unwrap(), QC::imag_unit() * qc(-2, 1));
        let top4 = Ext::<QC>::monomial(4, 0b1111, qc(1, 1));
        assert_eq!(top4.supertrace_sigma().unwrap(), qc(-4, 1));
        assert_eq!(dx(3, 0).supertrace_sigma(), Err(Error::OddDimension(3)));
    }

    #[test]
    fn spinor_symbol_examples() {
        // θ = π: cos(θ/2) = 0, sin(θ/2) = 1
        let s = phi_spinor_symbol(&[(qc(0, 1), qc(1, 1)), (qc(0, 1), qc(1, 1))], 0, 4).unwrap();
        assert_eq!(s, Ext::monomial(4, 0b1111, qc(1, 1)));
        // Pythagorean half angle
        let s = phi_spinor_symbol(&[(qc(4, 5), qc(3, 5))], 0, 2).unwrap();
        assert_eq!(s.scalar_part(), qc(4, 5));
        assert_eq!(s.berezin_top(), qc(3, 5));
        assert!(phi_spinor_symbol(&[(qc(1, 1), qc(0, 1))], 0, 4).is_err());
    }

    #[test]
    fn degree_filtration() {
        let mut a = Ext::<QC>::one(4);
        a.add_term(0b11, qc(2, 1));
        a.add_term(0b1, qc(-1, 3));
        let sum = (0..=4).fold(Ext::zero(4), |acc, d| &acc + &a.degree_part(d));
        assert_eq!(sum, a);
        assert_eq!(a.degree_part(2).degree_part(2), a.degree_part(2));
    }
}
