//! Volterra symbols `Σ ω · x^α ξ^β H^{−k}` with `H = |ξ|² + iτ`.
//!
//! Negative `k` stands for positive powers of `H`; together with ξ-monomials
//! this makes the representation unique, so `iτ = H − |ξ|²`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::getzler::ModelOperator;
use super::kernel::{fiber_integral, GaussianKernel, HeatSeries, KernelKey};
use super::multi::{self, MultiIndex};
use crate::char_forms::NormalAction;
use crate::error::{Error, Result};
use crate::graded_algebra::Ext;
use crate::scalar::{inv_factorial, minus_i_pow, Coeff};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolKey {
    pub x: MultiIndex,
    pub xi: MultiIndex,
    /// Exponent `k` in `H^{−k}`.
    pub heat: i32,
}

impl SymbolKey {
    pub fn degree(&self) -> i32 {
        multi::order(&self.xi) as i32 - 2 * self.heat
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSymbol<C> {
    n: usize,
    terms: BTreeMap<SymbolKey, Ext<C>>,
}

impl<C: Coeff> VolterraSymbol<C> {
    pub fn zero(n: usize) -> Self {
        VolterraSymbol {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(w: Ext<C>, x: MultiIndex, xi: MultiIndex, heat: i32) -> Result<Self> {
        let n = w.dim();
        if x.len() != n || xi.len() != n {
            return Err(Error::SizeMismatch(format!(
                "multi-index lengths {} / {} for dimension {n}",
                x.len(),
                xi.len()
            )));
        }
        let mut s = Self::zero(n);
        s.add_term(SymbolKey { x, xi, heat }, w);
        Ok(s)
    }

    pub fn scalar(n: usize, c: C) -> Self {
        Self::form(Ext::scalar(n, c))
    }

    pub fn form(w: Ext<C>) -> Self {
        let n = w.dim();
        Self::monomial(w, multi::zero(n), multi::zero(n), 0).expect("consistent lengths")
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, C::one())
    }

    /// `H^{−k}`.
    pub fn heat_power(n: usize, k: i32) -> Self {
        Self::monomial(Ext::one(n), multi::zero(n), multi::zero(n), k).expect("consistent lengths")
    }

    pub fn xi(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, dim: n });
        }
        Self::monomial(Ext::one(n), multi::zero(n), multi::unit(n, j), 0)
    }

    pub fn x(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, dim: n });
        }
        Self::monomial(Ext::one(n), multi::unit(n, j), multi::zero(n), 0)
    }

    /// `|ξ|²`.
    pub fn xi_norm2(n: usize) -> Self {
        let mut s = Self::zero(n);
        for j in 0..n {
            let mut b = multi::zero(n);
            b[j] = 2;
            s.add_term(
                SymbolKey {
                    x: multi::zero(n),
                    xi: b,
                    heat: 0,
                },
                Ext::one(n),
            );
        }
        s
    }

    /// `iτ = H − |ξ|²`.
    pub fn i_tau(n: usize) -> Self {
        Self::heat_power(n, -1).sub(&Self::xi_norm2(n)).expect("same dimension")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SymbolKey, &Ext<C>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: SymbolKey, w: Ext<C>) {
        debug_assert!(key.x.len() == self.n && key.xi.len() == self.n && w.dim() == self.n);
        let v = match self.terms.remove(&key) {
            Some(old) => &old + &w,
            None => w,
        };
        if !v.is_zero() {
            self.terms.insert(key, v);
        }
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

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.n);
        for (k, w) in &self.terms {
            out.add_term(k.clone(), w.scale(c));
        }
        out
    }

    /// Pointwise product; form coefficients multiply as `self ∧ other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
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
                out.add_term(
                    SymbolKey {
                        x: multi::add(&k1.x, &k2.x),
                        xi: multi::add(&k1.xi, &k2.xi),
                        heat: k1.heat + k2.heat,
                    },
                    w,
                );
            }
        }
        Ok(out)
    }

    /// Multiplies every term by `H^{−k}`.
    pub fn mul_heat(&self, k: i32) -> Self {
        let mut out = Self::zero(self.n);
        for (key, w) in &self.terms {
            let mut key = key.clone();
            key.heat += k;
            out.add_term(key, w.clone());
        }
        out
    }

    /// ∂/∂ξ_j.
    pub fn d_xi(&self, j: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (k, w) in &self.terms {
            let b = k.xi[j];
            if b > 0 {
                let mut k1 = k.clone();
                k1.xi[j] -= 1;
                out.add_term(k1, w.scale(&C::from_i64(b as i64)));
            }
            if k.heat != 0 {
                let mut k2 = k.clone();
                k2.xi[j] += 1;
                k2.heat += 1;
                out.add_term(k2, w.scale(&C::from_i64(-2 * k.heat as i64)));
            }
        }
        out
    }

    /// ∂/∂x_j.
    pub fn d_x(&self, j: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (k, w) in &self.terms {
            let a = k.x[j];
            if a > 0 {
                let mut k1 = k.clone();
                k1.x[j] -= 1;
                out.add_term(k1, w.scale(&C::from_i64(a as i64)));
            }
        }
        out
    }

    /// Componentwise maximal x-exponent.
    pub fn x_degree_bound(&self) -> MultiIndex {
        let mut b = multi::zero(self.n);
        for k in self.terms.keys() {
            for j in 0..self.n {
                b[j] = b[j].max(k.x[j]);
            }
        }
        b
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.terms.keys().map(SymbolKey::degree).max()
    }

    /// Terms of parabolic degree `d`.
    pub fn degree_part(&self, d: i32) -> Self {
        let mut out = Self::zero(self.n);
        for (k, w) in &self.terms {
            if k.degree() == d {
                out.add_term(k.clone(), w.clone());
            }
        }
        out
    }

    pub fn is_homogeneous(&self, d: i32) -> bool {
        self.terms.keys().all(|k| k.degree() == d)
    }

    /// `q1 # q2 = Σ_α (1/α!) ∂_ξ^α q1 · D_x^α q2`, exact since q2 is polynomial in x.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut out = Self::zero(self.n);
        for alpha in multi::below(&other.x_degree_bound()) {
            let mut d1 = self.clone();
            let mut d2 = other.clone();
            for (j, &a) in alpha.iter().enumerate() {
                for _ in 0..a {
                    d1 = d1.d_xi(j);
                    d2 = d2.d_x(j);
                }
            }
            if d1.is_zero() || d2.is_zero() {
                continue;
            }
            let c = multi::inv_factorial_multi::<C>(&alpha) * minus_i_pow::<C>(multi::order(&alpha) as usize);
            out = out.add(&d1.mul(&d2)?.scale(&c))?;
        }
        Ok(out)
    }

    /// Full symbol of a differential operator: `∂_j ↦ iξ_j`, `∂_t ↦ iτ`.
    pub fn from_differential(op: &ModelOperator<C>) -> Result<Self> {
        let n = op.dim();
        let i = C::imag_unit();
        let tau = Self::i_tau(n);
        let mut out = Self::zero(n);
        for (k, w) in op.terms() {
            let beta = multi::order(&k.d) as usize;
            let c = i.powi(beta as i64).expect("nonzero");
            let mut s = Self::monomial(w.scale(&c), k.x.clone(), k.d.clone(), 0)?;
            for _ in 0..k.t {
                s = s.mul(&tau)?;
            }
            out = out.add(&s)?;
        }
        Ok(out)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> VolterraSymbol<D> {
        VolterraSymbol {
            n: self.n,
            terms: self.terms.iter().map(|(k, w)| (k.clone(), w.map(f))).collect(),
        }
    }
}

/// Free function form of [`VolterraSymbol::compose`].
pub fn symbol_compose<C: Coeff>(q1: &VolterraSymbol<C>, q2: &VolterraSymbol<C>) -> Result<VolterraSymbol<C>> {
    q1.compose(q2)
}

/// Homogeneous layers `q_{−2−j}` of a parametrix of `L + ∂_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Parametrix<C> {
    pub layers: Vec<VolterraSymbol<C>>,
}

impl<C: Coeff> Parametrix<C> {
    pub fn sum(&self) -> VolterraSymbol<C> {
        let n = self.layers[0].dim();
        self.layers
            .iter()
            .fold(VolterraSymbol::zero(n), |acc, l| acc.add(l).expect("same dimension"))
    }
}

/// Splits σ(L) into the flat principal part check and the layers of ξ-degree 1 and 0.
fn split_laplace_type<C: Coeff>(l: &ModelOperator<C>) -> Result<[VolterraSymbol<C>; 3]> {
    let n = l.dim();
    if l.terms().any(|(k, _)| k.t > 0) {
        return Err(Error::Invalid("operator must not contain ∂_t".into()));
    }
    let p = VolterraSymbol::from_differential(l)?;
    if p.terms().any(|(k, _)| k.degree() > 2) {
        return Err(Error::NonFlatLeading);
    }
    if p.degree_part(2) != VolterraSymbol::xi_norm2(n) {
        return Err(Error::NonFlatLeading);
    }
    Ok([
        VolterraSymbol::heat_power(n, -1),
        p.degree_part(1),
        p.degree_part(0),
    ])
}

/// Parametrix layers `q_{−2}, …, q_{−2−J}` of `L + ∂_t` for `L = −Δ + lower order`.
pub fn heat_parametrix<C: Coeff>(l: &ModelOperator<C>, j_max: usize) -> Result<Parametrix<C>> {
    let n = l.dim();
    let p = split_laplace_type(l)?;
    let mut q: Vec<VolterraSymbol<C>> = Vec::with_capacity(j_max + 1);
    q.push(VolterraSymbol::heat_power(n, 1));
    for j in 1..=j_max {
        let mut acc = VolterraSymbol::zero(n);
        for (li, pl) in p.iter().enumerate() {
            if pl.is_zero() {
                continue;
            }
            for (i, qi) in q.iter().enumerate() {
                if li + i > j {
                    continue;
                }
                let order = (j - li - i) as u32;
                for alpha in multi::with_order(n, order) {
                    let mut d1 = pl.clone();
                    let mut d2 = qi.clone();
                    for (c, &a) in alpha.iter().enumerate() {
                        for _ in 0..a {
                            d1 = d1.d_xi(c);
                            d2 = d2.d_x(c);
                        }
                    }
                    if d1.is_zero() || d2.is_zero() {
                        continue;
                    }
                    let c = multi::inv_factorial_multi::<C>(&alpha) * minus_i_pow::<C>(order as usize);
                    acc = acc.add(&d1.mul(&d2)?.scale(&c))?;
                }
            }
        }
        q.push(acc.mul_heat(1).scale(&-C::one()));
    }
    Ok(Parametrix { layers: q })
}

/// `σ(L + ∂_t) # q − 1`.
pub fn parametrix_defect<C: Coeff>(l: &ModelOperator<C>, q: &VolterraSymbol<C>) -> Result<VolterraSymbol<C>> {
    let n = l.dim();
    let [h, p1, p0] = split_laplace_type(l)?;
    let full = h.add(&p1)?.add(&p0)?;
    full.compose(q)?.sub(&VolterraSymbol::one(n))
}

/// Inverse Fourier transform: `ξ^β H^{−k} ↦ D_z^β [t^{k−1}/(k−1)! G_t(z)]`.
pub fn symbol_to_kernel<C: Coeff>(q: &VolterraSymbol<C>) -> Result<GaussianKernel<C>> {
    let n = q.dim();
    let mut out = GaussianKernel::zero(n);
    for (key, w) in q.terms() {
        if key.heat < 1 {
            return Err(Error::NonIntegrable(format!(
                "x^{:?} xi^{:?} H^{}",
                key.x, key.xi, -key.heat
            )));
        }
        let mut k = GaussianKernel::zero(n);
        k.add_term(
            KernelKey {
                x: key.x.clone(),
                z: multi::zero(n),
                two_t: 2 * (key.heat - 1),
            },
            w.scale(&inv_factorial::<C>((key.heat - 1) as usize)),
        );
        for (j, &b) in key.xi.iter().enumerate() {
            for _ in 0..b {
                k = k.d_z(j);
            }
        }
        let c = minus_i_pow::<C>(multi::order(&key.xi) as usize);
        out = out.add(&k.scale(&c))?;
    }
    Ok(out)
}

/// Coefficients `I^{(j)}` of `t^{−(a/2+⌊m/2⌋+1)+j}`, stored without the
/// `(4π)^{−a/2}` prefactor.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticCoefficients<C> {
    pub a_dim: usize,
    /// Twice the exponent of the `j = 0` slot.
    pub leading_two_exp: i32,
    pub coefficients: Vec<Ext<C>>,
    /// Coefficients of the half-integer slots `t^{e_j − 1/2}`.
    pub half_slots: Vec<Ext<C>>,
}

/// Layers `q_{m−l}` (homogeneous of degree m−l) to the coefficients `I^{(j)}`, j ≤ j_max.
pub fn asymptotic_coefficients<C: Coeff>(
    layers: &[VolterraSymbol<C>],
    m: i32,
    normal: &NormalAction<C>,
    a_dim: usize,
    j_max: usize,
) -> Result<AsymptoticCoefficients<C>> {
    let need = 2 * j_max + m.rem_euclid(2) as usize + 1;
    if layers.len() < need {
        return Err(Error::InsufficientLayers {
            need,
            have: layers.len(),
        });
    }
    let n = layers[0].dim();
    let mut sum = VolterraSymbol::zero(n);
    for (l, q) in layers.iter().take(need).enumerate() {
        if !q.is_homogeneous(m - l as i32) {
            return Err(Error::Invalid(format!("layer {l} is not homogeneous of degree {}", m - l as i32)));
        }
        sum = sum.add(q)?;
    }
    let series: HeatSeries<C> = fiber_integral(&symbol_to_kernel(&sum)?, normal, a_dim)?;
    let e0 = -(a_dim as i32 + 2 * m.div_euclid(2) + 2);
    Ok(AsymptoticCoefficients {
        a_dim,
        leading_two_exp: e0,
        coefficients: (0..=j_max as i32).map(|j| series.coeff(e0 + 2 * j)).collect(),
        half_slots: (0..=j_max as i32).map(|j| series.coeff(e0 + 2 * j - 1)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qc, QC};

    #[test]
    fn composition_examples() {
        let xi = VolterraSymbol::<QC>::xi(1, 0).unwrap();
        let x = VolterraSymbol::<QC>::x(1, 0).unwrap();
        let xxi = x.mul(&xi).unwrap();
        let xxi2 = xxi.mul(&xi).unwrap();
        assert_eq!(xxi.compose(&xi).unwrap(), xxi2);
        let expect = xxi2.sub(&xi.scale(&QC::imag_unit())).unwrap();
        assert_eq!(xi.compose(&xxi).unwrap(), expect);
    }

    #[test]
    fn heat_times_inverse() {
        let h = VolterraSymbol::<QC>::heat_power(2, -1);
        let hinv = VolterraSymbol::<QC>::heat_power(2, 1);
        assert_eq!(h.compose(&hinv).unwrap(), VolterraSymbol::one(2));
    }

    #[test]
    fn d_xi_of_inverse_heat() {
        // ∂_ξ H^{-1} = −2ξ H^{-2}
        let hinv = VolterraSymbol::<QC>::heat_power(1, 1);
        let expect = VolterraSymbol::monomial(Ext::scalar(1, qc(-2, 1)), alloc::vec![0], alloc::vec![1], 2).unwrap();
        assert_eq!(hinv.d_xi(0), expect);
    }

    #[test]
    fn flat_laplacian_parametrix() {
        let mut l = ModelOperator::<QC>::zero(2);
        for j in 0..2 {
            let d = ModelOperator::d(2, j).unwrap();
            l = l.sub(&d.compose(&d).unwrap()).unwrap();
        }
        let p = heat_parametrix(&l, 3).unwrap();
        assert_eq!(p.layers[0], VolterraSymbol::heat_power(2, 1));
        assert!(p.layers[1..].iter().all(|q| q.is_zero()));
    }

    #[test]
    fn rejects_non_integrable() {
        assert!(matches!(
            symbol_to_kernel(&VolterraSymbol::<QC>::one(2)),
            Err(Error::NonIntegrable(_))
        ));
    }
}
