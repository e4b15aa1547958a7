//! Causal Gaussian kernels `Σ ω · x^α z^γ t^s G_t(z)` with
//! `G_t(z) = (4πt)^{−n/2} e^{−|z|²/4t}`, `z = x − y`, and their equivariant fiber
//! integrals.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::multi::{self, MultiIndex};
use crate::char_forms::NormalAction;
use crate::error::{Error, Result};
use crate::graded_algebra::{scalar_inverse, Ext};
use crate::scalar::{Coeff, PiScaled};

/// Monomial `x^α z^γ t^{two_t/2}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KernelKey {
    pub x: MultiIndex,
    pub z: MultiIndex,
    pub two_t: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel<C> {
    n: usize,
    terms: BTreeMap<KernelKey, Ext<C>>,
}

impl<C: Coeff> GaussianKernel<C> {
    pub fn zero(n: usize) -> Self {
        GaussianKernel {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// The free heat kernel `G_t(z)`.
    pub fn heat(n: usize) -> Self {
        let mut k = Self::zero(n);
        k.add_term(
            KernelKey {
                x: multi::zero(n),
                z: multi::zero(n),
                two_t: 0,
            },
            Ext::one(n),
        );
        k
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&KernelKey, &Ext<C>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: KernelKey, w: Ext<C>) {
        debug_assert!(key.x.len() == self.n && key.z.len() == self.n);
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

    pub fn scale(&self, c: &C) -> Self {
        self.map_terms(|k, w| Some((k.clone(), w.scale(c))))
    }

    fn map_terms(&self, f: impl Fn(&KernelKey, &Ext<C>) -> Option<(KernelKey, Ext<C>)>) -> Self {
        let mut out = Self::zero(self.n);
        for (k, w) in &self.terms {
            if let Some((k2, w2)) = f(k, w) {
                out.add_term(k2, w2);
            }
        }
        out
    }

    /// Multiplies by `t^{two_s/2}`.
    pub fn mul_t(&self, two_s: i32) -> Self {
        self.map_terms(|k, w| {
            let mut k = k.clone();
            k.two_t += two_s;
            Some((k, w.clone()))
        })
    }

    pub fn mul_x(&self, alpha: &[u32]) -> Self {
        self.map_terms(|k, w| {
            let mut k = k.clone();
            k.x = multi::add(&k.x, alpha);
            Some((k, w.clone()))
        })
    }

    pub fn mul_z(&self, gamma: &[u32]) -> Self {
        self.map_terms(|k, w| {
            let mut k = k.clone();
            k.z = multi::add(&k.z, gamma);
            Some((k, w.clone()))
        })
    }

    /// `ω ∧ K`.
    pub fn wedge_left(&self, w: &Ext<C>) -> Result<Self> {
        let mut out = Self::zero(self.n);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), w.wedge(v)?);
        }
        Ok(out)
    }

    /// Product of the polynomial prefactors; the Gaussian factor is kept once.
    pub fn mul_poly(&self, other: &Self) -> Result<Self> {
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
                    KernelKey {
                        x: multi::add(&k1.x, &k2.x),
                        z: multi::add(&k1.z, &k2.z),
                        two_t: k1.two_t + k2.two_t,
                    },
                    w,
                );
            }
        }
        Ok(out)
    }

    /// ∂/∂z_j at fixed x.
    pub fn d_z(&self, j: usize) -> Self {
        let half = C::from_ratio(-1, 2);
        let mut out = Self::zero(self.n);
        for (k, w) in &self.terms {
            let g = k.z[j];
            if g > 0 {
                let mut k1 = k.clone();
                k1.z[j] -= 1;
                out.add_term(k1, w.scale(&C::from_i64(g as i64)));
            }
            let mut k2 = k.clone();
            k2.z[j] += 1;
            k2.two_t -= 2;
            out.add_term(k2, w.scale(&half));
        }
        out
    }

    /// ∂/∂x_j at fixed x only (polynomial prefactor).
    pub fn d_x_partial(&self, j: usize) -> Self {
        self.map_terms(|k, w| {
            let a = k.x[j];
            (a > 0).then(|| {
                let mut k = k.clone();
                k.x[j] -= 1;
                (k, w.scale(&C::from_i64(a as i64)))
            })
        })
    }

    /// ∂/∂x_j at fixed y: `∂_{x_j} + ∂_{z_j}`.
    pub fn d_x_total(&self, j: usize) -> Self {
        self.d_x_partial(j)
            .add(&self.d_z(j))
            .expect("same dimension")
    }

    /// ∂/∂t.
    pub fn d_t(&self) -> Self {
        let n = self.n as i64;
        let mut out = Self::zero(self.n);
        for (k, w) in &self.terms {
            let c = k.two_t as i64 - n;
            if c != 0 {
                let mut k1 = k.clone();
                k1.two_t -= 2;
                out.add_term(k1, w.scale(&C::from_ratio(c, 2)));
            }
            for j in 0..self.n {
                let mut k2 = k.clone();
                k2.z[j] += 2;
                k2.two_t -= 4;
                out.add_term(k2, w.scale(&C::from_ratio(1, 4)));
            }
        }
        out
    }

    /// Value at `(x, y, t)`; zero for `t ≤ 0`.
    pub fn eval(&self, x: &[f64], y: &[f64], t: f64) -> Result<Ext<Complex64>> {
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::SizeMismatch(format!(
                "point of length {} / {} for dimension {}",
                x.len(),
                y.len(),
                self.n
            )));
        }
        let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        Ok(self.eval_xz(x, &z, t))
    }

    /// Value in `(x, z = x − y)` coordinates.
    pub fn eval_xz(&self, x: &[f64], z: &[f64], t: f64) -> Ext<Complex64> {
        let mut out = Ext::zero(self.n);
        if t <= 0.0 {
            return out;
        }
        let z2: f64 = z.iter().map(|v| v * v).sum();
        let g = libm::pow(4.0 * core::f64::consts::PI * t, -(self.n as f64) / 2.0)
            * libm::exp(-z2 / (4.0 * t));
        for (k, w) in &self.terms {
            let mut s = g * libm::pow(t, k.two_t as f64 / 2.0);
            for j in 0..self.n {
                s *= powu(x[j], k.x[j]) * powu(z[j], k.z[j]);
            }
            out = &out + &w.to_c64().scale(&Complex64::new(s, 0.0));
        }
        out
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> GaussianKernel<D> {
        GaussianKernel {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(k, w)| (k.clone(), w.map(f)))
                .collect(),
        }
    }
}

fn powu(v: f64, k: u32) -> f64 {
    libm::pow(v, k as f64)
}

/// `(4π)^{−a/2} Σ_e c_e t^{e/2}` with exact form coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatSeries<C> {
    pub a_dim: usize,
    n: usize,
    terms: BTreeMap<i32, Ext<C>>,
}

impl<C: Coeff> HeatSeries<C> {
    pub fn zero(n: usize, a_dim: usize) -> Self {
        HeatSeries {
            a_dim,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, two_exp: i32, w: Ext<C>) {
        let v = match self.terms.remove(&two_exp) {
            Some(old) => &old + &w,
            None => w,
        };
        if !v.is_zero() {
            self.terms.insert(two_exp, v);
        }
    }

    /// Coefficient of `t^{two_exp/2}` (without the `(4π)^{−a/2}` prefactor).
    pub fn coeff(&self, two_exp: i32) -> Ext<C> {
        self.terms
            .get(&two_exp)
            .cloned()
            .unwrap_or_else(|| Ext::zero(self.n))
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Ext<C>)> {
        self.terms.iter().map(|(e, w)| (*e, w))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.a_dim != other.a_dim {
            return Err(Error::DimensionMismatch(self.a_dim, other.a_dim));
        }
        let mut out = self.clone();
        for (e, w) in &other.terms {
            out.add_term(*e, w.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.n, self.a_dim);
        for (e, w) in &self.terms {
            out.add_term(*e, w.scale(c));
        }
        out
    }

    pub fn mul_t(&self, two_s: i32) -> Self {
        let mut out = Self::zero(self.n, self.a_dim);
        for (e, w) in &self.terms {
            out.add_term(e + two_s, w.clone());
        }
        out
    }

    pub fn wedge_left(&self, w: &Ext<C>) -> Result<Self> {
        let mut out = Self::zero(self.n, self.a_dim);
        for (e, v) in &self.terms {
            out.add_term(*e, w.wedge(v)?);
        }
        Ok(out)
    }

    /// Numeric value at `t > 0`, including the `(4π)^{−a/2}` prefactor.
    pub fn eval(&self, t: f64) -> Result<Ext<Complex64>> {
        if t <= 0.0 {
            return Err(Error::NonPositiveTime(t));
        }
        let pre = libm::pow(4.0 * core::f64::consts::PI, -(self.a_dim as f64) / 2.0);
        let mut out = Ext::zero(self.n);
        for (e, w) in &self.terms {
            let s = pre * libm::pow(t, *e as f64 / 2.0);
            out = &out + &w.to_c64().scale(&Complex64::new(s, 0.0));
        }
        Ok(out)
    }

    /// Value at `t = 1` with the π-power kept symbolic.
    pub fn at_one(&self) -> PiScaled<Ext<C>> {
        let mut sum = Ext::zero(self.n);
        for w in self.terms.values() {
            sum = &sum + w;
        }
        // (4π)^{−a/2} = π^{−a/2} 2^{−a}
        let two = C::from_ratio(1, 2).powi(self.a_dim as i64).expect("nonzero");
        PiScaled::new(-(self.a_dim as i32), sum.scale(&two))
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> HeatSeries<D> {
        HeatSeries {
            a_dim: self.a_dim,
            n: self.n,
            terms: self.terms.iter().map(|(e, w)| (*e, w.map(f))).collect(),
        }
    }
}

type Poly<C> = BTreeMap<MultiIndex, C>;

fn poly_mul<C: Coeff>(a: &Poly<C>, b: &Poly<C>) -> Poly<C> {
    let mut out: Poly<C> = BTreeMap::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            let k = multi::add(ka, kb);
            let v = ca.clone() * cb.clone();
            let e = out.entry(k).or_insert_with(C::zero);
            *e = e.clone() + v;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Gaussian moments `E[v^μ] / t^{|μ|/2}` for covariance `t·S`.
struct Moments<C> {
    s: Vec<C>,
    m: usize,
    memo: BTreeMap<MultiIndex, C>,
}

impl<C: Coeff> Moments<C> {
    fn get(&mut self, mu: &MultiIndex) -> C {
        if let Some(v) = self.memo.get(mu) {
            return v.clone();
        }
        let total = multi::order(mu);
        let v = if total == 0 {
            C::one()
        } else if total % 2 == 1 {
            C::zero()
        } else {
            let i = mu.iter().position(|&k| k > 0).unwrap();
            let mut nu = mu.clone();
            nu[i] -= 1;
            let mut acc = C::zero();
            for j in 0..self.m {
                if nu[j] == 0 || self.s[i * self.m + j].is_zero() {
                    continue;
                }
                let mut rest = nu.clone();
                rest[j] -= 1;
                let sub = self.get(&rest);
                acc = acc + self.s[i * self.m + j].clone() * C::from_i64(nu[j] as i64) * sub;
            }
            acc
        };
        self.memo.insert(mu.clone(), v.clone());
        v
    }
}

/// `I_Q(0, t) = ∫ K_Q(x = (0, v), z = (0, (1−φ^N)v); t) dv` as an exact series in t.
pub fn fiber_integral<C: Coeff>(
    k: &GaussianKernel<C>,
    normal: &NormalAction<C>,
    a_dim: usize,
) -> Result<HeatSeries<C>> {
    let n = k.dim();
    if a_dim > n || a_dim + normal.codim() != n {
        return Err(Error::InvalidStratumDim { a: a_dim, n });
    }
    let m = n - a_dim;
    let b = normal.one_minus();
    let mut btb = alloc::vec![C::zero(); m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = C::zero();
            for r in 0..m {
                s = s + b[r * m + i].clone() * b[r * m + j].clone();
            }
            btb[i * m + j] = s;
        }
    }
    let inv = scalar_inverse(&btb, m).ok_or(Error::SingularNormal)?;
    let det_inv = normal.det_one_minus().inv().ok_or(Error::SingularNormal)?;
    let mut moments = Moments {
        s: inv.into_iter().map(|v| v * C::from_i64(2)).collect(),
        m,
        memo: BTreeMap::new(),
    };
    // (Bv)_j as polynomials in v
    let rows: Vec<Poly<C>> = (0..m)
        .map(|j| {
            (0..m)
                .filter(|&c| !b[j * m + c].is_zero())
                .map(|c| (multi::unit(m, c), b[j * m + c].clone()))
                .collect()
        })
        .collect();
    let mut pow_cache: BTreeMap<(usize, u32), Poly<C>> = BTreeMap::new();
    let mut out = HeatSeries::zero(n, a_dim);
    for (key, w) in k.terms() {
        if key.x[..a_dim].iter().any(|&e| e > 0) || key.z[..a_dim].iter().any(|&e| e > 0) {
            continue;
        }
        let mut poly: Poly<C> = BTreeMap::new();
        poly.insert(key.x[a_dim..].to_vec(), C::one());
        for j in 0..m {
            let p = key.z[a_dim + j];
            if p == 0 {
                continue;
            }
            let rp = pow_cache
                .entry((j, p))
                .or_insert_with(|| {
                    let mut acc: Poly<C> = BTreeMap::new();
                    acc.insert(multi::zero(m), C::one());
                    for _ in 0..p {
                        acc = poly_mul(&acc, &rows[j]);
                    }
                    acc
                })
                .clone();
            poly = poly_mul(&poly, &rp);
        }
        for (mu, c) in poly {
            let deg = multi::order(&mu);
            if deg % 2 == 1 {
                continue;
            }
            let mom = moments.get(&mu);
            if mom.is_zero() {
                continue;
            }
            let s = c * mom * det_inv.clone();
            out.add_term(key.two_t + deg as i32 - a_dim as i32, w.scale(&s));
        }
    }
    Ok(out)
}

/// Numeric fiber integral at a given `t > 0`.
pub fn fiber_integral_iq<C: Coeff>(
    k: &GaussianKernel<C>,
    normal: &NormalAction<C>,
    a_dim: usize,
    t: f64,
) -> Result<Ext<Complex64>> {
    fiber_integral(k, normal, a_dim)?.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qc, QC};

    fn rot_pi() -> NormalAction<QC> {
        NormalAction::from_half_angles(alloc::vec![(qc(0, 1), qc(1, 1))]).unwrap()
    }

    #[test]
    fn free_kernel_fiber_integral() {
        let s = fiber_integral(&GaussianKernel::<QC>::heat(2), &rot_pi(), 0).unwrap();
        assert_eq!(s.coeff(0), Ext::scalar(2, qc(1, 4)));
        assert_eq!(s.terms().count(), 1);
    }

    #[test]
    fn odd_moment_vanishes() {
        let k = GaussianKernel::<QC>::heat(2).mul_x(&[1, 0]);
        assert!(fiber_integral(&k, &rot_pi(), 0).unwrap().is_zero());
    }

    #[test]
    fn second_moment() {
        // θ = π: B = 2, z = 2v, E[v1²] = 2t / 4
        let k = GaussianKernel::<QC>::heat(2).mul_x(&[2, 0]);
        let s = fiber_integral(&k, &rot_pi(), 0).unwrap();
        assert_eq!(s.coeff(2), Ext::scalar(2, qc(1, 8)));
    }

    #[test]
    fn causal() {
        let k = GaussianKernel::<QC>::heat(2);
        assert!(k.eval(&[0.1, 0.2], &[0.0, 0.0], -1.0).unwrap().is_zero());
    }

    #[test]
    fn heat_equation() {
        // (∂_t − Δ) G = 0
        let g = GaussianKernel::<QC>::heat(3);
        let mut lap = GaussianKernel::zero(3);
        for j in 0..3 {
            lap = lap.add(&g.d_z(j).d_z(j)).unwrap();
        }
        assert_eq!(g.d_t(), lap);
    }
}
