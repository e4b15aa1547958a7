//! Polynomial differential operators with Clifford coefficients, their Getzler
//! order, and model operators with form coefficients.
//!
//! Terms are normal-ordered: `coeff · x^α · c(dx^I) · ∂^β · ∂_t^s`. Getzler degrees
//! are `deg ∂_j = deg c(dx^j) = 1`, `deg ∂_t = 2`, `deg x^j = −1`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::kernel::GaussianKernel;
use super::multi::{self, MultiIndex};
use crate::error::{Error, Result};
use crate::graded_algebra::{clifford_mono, Ext};
use crate::scalar::Coeff;

/// Monomial `x^α ∂^β ∂_t^s`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpKey {
    pub x: MultiIndex,
    pub d: MultiIndex,
    pub t: u32,
}

impl OpKey {
    pub fn new(x: MultiIndex, d: MultiIndex, t: u32) -> Self {
        OpKey { x, d, t }
    }

    fn weight(&self) -> i32 {
        multi::order(&self.d) as i32 - multi::order(&self.x) as i32 + 2 * self.t as i32
    }
}

/// `∂^β ∂_t^s · x^α' ∂^β' ∂_t^s'` in normal order.
fn compose_keys(k1: &OpKey, k2: &OpKey) -> Vec<(i64, OpKey)> {
    multi::leibniz(&k1.d, &k2.x)
        .into_iter()
        .map(|(c, xr, dr)| {
            (
                c,
                OpKey {
                    x: multi::add(&k1.x, &xr),
                    d: multi::add(&dr, &k2.d),
                    t: k1.t + k2.t,
                },
            )
        })
        .collect()
}

fn check_index(n: usize, j: usize) -> Result<()> {
    if j >= n {
        Err(Error::IndexOutOfRange { index: j, dim: n })
    } else {
        Ok(())
    }
}

/// Differential operator on ℝⁿ×ℝ with polynomial coefficients in Cl(n)⊗ℂ.
#[derive(Debug, Clone, PartialEq)]
pub struct GetzlerOperator<C> {
    n: usize,
    terms: BTreeMap<(OpKey, u32), C>,
}

impl<C: Coeff> GetzlerOperator<C> {
    pub fn zero(n: usize) -> Self {
        GetzlerOperator {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(n: usize, c: C) -> Self {
        let mut op = Self::zero(n);
        op.add_term(OpKey::new(multi::zero(n), multi::zero(n), 0), 0, c);
        op
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, C::one())
    }

    /// Multiplication by x^j.
    pub fn x(n: usize, j: usize) -> Result<Self> {
        check_index(n, j)?;
        let mut op = Self::zero(n);
        op.add_term(OpKey::new(multi::unit(n, j), multi::zero(n), 0), 0, C::one());
        Ok(op)
    }

    /// ∂_j.
    pub fn d(n: usize, j: usize) -> Result<Self> {
        check_index(n, j)?;
        let mut op = Self::zero(n);
        op.add_term(OpKey::new(multi::zero(n), multi::unit(n, j), 0), 0, C::one());
        Ok(op)
    }

    pub fn dt(n: usize) -> Self {
        let mut op = Self::zero(n);
        op.add_term(OpKey::new(multi::zero(n), multi::zero(n), 1), 0, C::one());
        op
    }

    /// c(dx^j).
    pub fn clifford(n: usize, j: usize) -> Result<Self> {
        check_index(n, j)?;
        let mut op = Self::zero(n);
        op.add_term(OpKey::new(multi::zero(n), multi::zero(n), 0), 1 << j, C::one());
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OpKey, u32, &C)> {
        self.terms.iter().map(|((k, m), c)| (k, *m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c · x^α c(I) ∂^β ∂_t^s` with `I` given as a bitmask (ordered product).
    pub fn add_term(&mut self, key: OpKey, cliff: u32, c: C) {
        debug_assert!(key.x.len() == self.n && key.d.len() == self.n);
        let slot = (key, cliff);
        let v = match self.terms.remove(&slot) {
            Some(old) => old + c,
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(slot, v);
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.n);
        for ((k, m), v) in &self.terms {
            out.add_term(k.clone(), *m, v.clone() * c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        for ((k, m), v) in &other.terms {
            out.add_term(k.clone(), *m, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-C::one()))
    }

    /// Operator composition `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut out = Self::zero(self.n);
        for ((k1, m1), c1) in &self.terms {
            for ((k2, m2), c2) in &other.terms {
                let (neg, m) = clifford_mono(*m1, *m2);
                let base = c1.clone() * c2.clone();
                let base = if neg { -base } else { base };
                for (c, k) in compose_keys(k1, k2) {
                    out.add_term(k, m, base.clone() * C::from_i64(c));
                }
            }
        }
        Ok(out)
    }

    /// Getzler order; `None` for the zero operator.
    pub fn order(&self) -> Option<i32> {
        self.terms
            .keys()
            .map(|(k, m)| k.weight() + m.count_ones() as i32)
            .max()
    }

    /// Getzler-degree-`d` terms with each `c(dx^I)` replaced by `dx^I`.
    pub fn symbol_part(&self, d: i32) -> ModelOperator<C> {
        let mut out = ModelOperator::zero(self.n);
        for ((k, m), c) in &self.terms {
            if k.weight() + m.count_ones() as i32 == d {
                out.add_term(k.clone(), Ext::monomial(self.n, *m, c.clone()));
            }
        }
        out
    }

    /// Highest differential order in ∂ (∂_t counted twice).
    pub fn differential_order(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|(k, _)| multi::order(&k.d) + 2 * k.t)
            .max()
    }
}

/// Getzler order and model operator; `None` for the zero operator.
pub fn getzler_order_and_model<C: Coeff>(p: &GetzlerOperator<C>) -> Option<(i32, ModelOperator<C>)> {
    let d = p.order()?;
    Some((d, p.symbol_part(d)))
}

/// Whether the model of `p1 p2` in degree m1+m2 equals the product of the models.
pub fn model_product_check<C: Coeff>(p1: &GetzlerOperator<C>, p2: &GetzlerOperator<C>) -> bool {
    let (Some((m1, q1)), Some((m2, q2))) = (getzler_order_and_model(p1), getzler_order_and_model(p2))
    else {
        return true;
    };
    let Ok(prod) = p1.compose(p2) else {
        return false;
    };
    match q1.compose(&q2) {
        Ok(models) => prod.symbol_part(m1 + m2) == models,
        Err(_) => false,
    }
}

/// Differential operator with polynomial coefficients in Λ(n)⊗ℂ:
/// terms `ω · x^α ∂^β ∂_t^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOperator<C> {
    n: usize,
    terms: BTreeMap<OpKey, Ext<C>>,
}

impl<C: Coeff> ModelOperator<C> {
    pub fn zero(n: usize) -> Self {
        ModelOperator {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Multiplication by a constant form.
    pub fn form(w: Ext<C>) -> Self {
        let n = w.dim();
        let mut op = Self::zero(n);
        op.add_term(OpKey::new(multi::zero(n), multi::zero(n), 0), w);
        op
    }

    pub fn scalar(n: usize, c: C) -> Self {
        Self::form(Ext::scalar(n, c))
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, C::one())
    }

    pub fn x(n: usize, j: usize) -> Result<Self> {
        check_index(n, j)?;
        let mut op = Self::zero(n);
        op.add_term(OpKey::new(multi::unit(n, j), multi::zero(n), 0), Ext::one(n));
        Ok(op)
    }

    pub fn d(n: usize, j: usize) -> Result<Self> {
        check_index(n, j)?;
        let mut op = Self::zero(n);
        op.add_term(OpKey::new(multi::zero(n), multi::unit(n, j), 0), Ext::one(n));
        Ok(op)
    }

    pub fn dt(n: usize) -> Self {
        let mut op = Self::zero(n);
        op.add_term(OpKey::new(multi::zero(n), multi::zero(n), 1), Ext::one(n));
        op
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OpKey, &Ext<C>)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: OpKey, w: Ext<C>) {
        debug_assert!(key.x.len() == self.n && key.d.len() == self.n && w.dim() == self.n);
        let v = match self.terms.remove(&key) {
            Some(old) => &old + &w,
            None => w,
        };
        if !v.is_zero() {
            self.terms.insert(key, v);
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.n);
        for (k, w) in &self.terms {
            out.add_term(k.clone(), w.scale(c));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        for (k, w) in &other.terms {
            out.add_term(k.clone(), w.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-C::one()))
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut out = Self::zero(self.n);
        for (k1, w1) in &self.terms {
            for (k2, w2) in &other.terms {
                let w = w1.wedge(w2)?;
                if w.is_zero() {
                    continue;
                }
                for (c, k) in compose_keys(k1, k2) {
                    out.add_term(k, w.scale(&C::from_i64(c)));
                }
            }
        }
        Ok(out)
    }

    /// Getzler order, counting the form degree of the coefficients.
    pub fn order(&self) -> Option<i32> {
        self.terms
            .iter()
            .filter_map(|(k, w)| w.max_degree().map(|d| k.weight() + d as i32))
            .max()
    }

    /// Terms of Getzler degree exactly `d`.
    pub fn degree_part(&self, d: i32) -> Self {
        let mut out = Self::zero(self.n);
        for (k, w) in &self.terms {
            let target = d - k.weight();
            if target >= 0 {
                out.add_term(k.clone(), w.degree_part(target as usize));
            }
        }
        out
    }

    pub fn is_homogeneous(&self, d: i32) -> bool {
        self.degree_part(d) == *self
    }

    /// Kernel of `P ∘ Q` from the kernel of `Q`, with `y` held fixed.
    pub fn apply_to_kernel(&self, k: &GaussianKernel<C>) -> Result<GaussianKernel<C>> {
        if self.n != k.dim() {
            return Err(Error::DimensionMismatch(self.n, k.dim()));
        }
        let mut out = GaussianKernel::zero(self.n);
        for (key, w) in &self.terms {
            let mut cur = k.clone();
            for _ in 0..key.t {
                cur = cur.d_t();
            }
            for (j, &b) in key.d.iter().enumerate() {
                for _ in 0..b {
                    cur = cur.d_x_total(j);
                }
            }
            out = out.add(&cur.mul_x(&key.x).wedge_left(w)?)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qc, QC};

    #[test]
    fn clifford_order_one() {
        let c = GetzlerOperator::<QC>::clifford(2, 0).unwrap();
        let (d, m) = getzler_order_and_model(&c).unwrap();
        assert_eq!(d, 1);
        assert_eq!(m, ModelOperator::form(Ext::dx(2, 0)));
    }

    #[test]
    fn clifford_square() {
        let c = GetzlerOperator::<QC>::clifford(2, 0).unwrap();
        let sq = c.compose(&c).unwrap();
        assert_eq!(sq, GetzlerOperator::scalar(2, qc(-1, 1)));
        assert!(model_product_check(&c, &c));
    }

    #[test]
    fn commutator_d_x() {
        let d = GetzlerOperator::<QC>::d(1, 0).unwrap();
        let x = GetzlerOperator::<QC>::x(1, 0).unwrap();
        let comm = d.compose(&x).unwrap().sub(&x.compose(&d).unwrap()).unwrap();
        assert_eq!(comm, GetzlerOperator::one(1));
    }

    #[test]
    fn empty_operator_has_no_order() {
        assert!(getzler_order_and_model(&GetzlerOperator::<QC>::zero(2)).is_none());
    }
}
