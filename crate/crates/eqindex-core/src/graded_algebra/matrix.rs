//! Square matrices over the commutative ring of even forms.

use alloc::format;
use alloc::vec::Vec;

use super::{Ext, PowerSeries};
use crate::error::{Error, Result};
use crate::scalar::Coeff;

#[derive(Clone, PartialEq, Debug)]
pub struct FormMatrix<C> {
    n: usize,
    size: usize,
    entries: Vec<Ext<C>>,
}

impl<C: Coeff> FormMatrix<C> {
    /// Row-major entries; every entry must be an even form in Λ(n).
    pub fn new(n: usize, size: usize, entries: Vec<Ext<C>>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::SizeMismatch(format!(
                "{} entries for a {size}x{size} matrix",
                entries.len()
            )));
        }
        for e in &entries {
            if e.dim() != n {
                return Err(Error::DimensionMismatch(n, e.dim()));
            }
            if !e.is_even() {
                return Err(Error::OddEntry);
            }
        }
        Ok(FormMatrix { n, size, entries })
    }

    pub fn zeros(n: usize, size: usize) -> Self {
        FormMatrix {
            n,
            size,
            entries: (0..size * size).map(|_| Ext::zero(n)).collect(),
        }
    }

    pub fn identity(n: usize, size: usize) -> Self {
        let mut m = Self::zeros(n, size);
        for i in 0..size {
            m.entries[i * size + i] = Ext::one(n);
        }
        m
    }

    pub fn from_scalars(n: usize, size: usize, vals: &[C]) -> Self {
        assert_eq!(vals.len(), size * size);
        FormMatrix {
            n,
            size,
            entries: vals.iter().map(|v| Ext::scalar(n, v.clone())).collect(),
        }
    }

    /// Antisymmetric matrix from upper-triangle entries `(i, j, form)` with i < j.
    pub fn antisymmetric(n: usize, size: usize, upper: &[(usize, usize, Ext<C>)]) -> Result<Self> {
        let mut m = Self::zeros(n, size);
        for (i, j, f) in upper {
            if *i >= size || *j >= size || i == j {
                return Err(Error::SizeMismatch(format!("entry ({i},{j}) in size {size}")));
            }
            if !f.is_even() {
                return Err(Error::OddEntry);
            }
            m.entries[i * size + j] = &m.entries[i * size + j] + f;
            m.entries[j * size + i] = &m.entries[j * size + i] - f;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &Ext<C> {
        &self.entries[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Ext<C>) {
        self.entries[i * self.size + j] = v;
    }

    pub fn entries(&self) -> &[Ext<C>] {
        &self.entries
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        if self.size != other.size {
            return Err(Error::SizeMismatch(format!("{} vs {}", self.size, other.size)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(FormMatrix {
            n: self.n,
            size: self.size,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(FormMatrix {
            n: self.n,
            size: self.size,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let s = self.size;
        let mut out = Self::zeros(self.n, s);
        for i in 0..s {
            for k in 0..s {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..s {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * s + j] = &out.entries[i * s + j] + &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        FormMatrix {
            n: self.n,
            size: self.size,
            entries: self.entries.iter().map(|e| e.scale(c)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-C::one())
    }

    pub fn transpose(&self) -> Self {
        let s = self.size;
        let mut out = Self::zeros(self.n, s);
        for i in 0..s {
            for j in 0..s {
                out.entries[j * s + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn trace(&self) -> Ext<C> {
        (0..self.size).fold(Ext::zero(self.n), |acc, i| &acc + self.get(i, i))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Ext::is_zero)
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.add(&self.transpose()).map(|m| m.is_zero()).unwrap_or(false)
    }

    pub fn scalar_matrix(&self) -> Vec<C> {
        self.entries.iter().map(Ext::scalar_part).collect()
    }

    pub fn nilpotent_part(&self) -> Self {
        FormMatrix {
            n: self.n,
            size: self.size,
            entries: self.entries.iter().map(Ext::nilpotent_part).collect(),
        }
    }

    pub fn has_nilpotent_entries(&self) -> bool {
        self.entries.iter().all(|e| e.scalar_part().is_zero())
    }

    /// Block-diagonal sum.
    pub fn block_diag(a: &Self, b: &Self) -> Result<Self> {
        if a.n != b.n {
            return Err(Error::DimensionMismatch(a.n, b.n));
        }
        let s = a.size + b.size;
        let mut out = Self::zeros(a.n, s);
        for i in 0..a.size {
            for j in 0..a.size {
                out.entries[i * s + j] = a.get(i, j).clone();
            }
        }
        for i in 0..b.size {
            for j in 0..b.size {
                out.entries[(a.size + i) * s + a.size + j] = b.get(i, j).clone();
            }
        }
        Ok(out)
    }

    /// Principal block of rows/columns `start..start+len`.
    pub fn sub_block(&self, start: usize, len: usize) -> Self {
        let mut out = Self::zeros(self.n, len);
        for i in 0..len {
            for j in 0..len {
                out.entries[i * len + j] = self.get(start + i, start + j).clone();
            }
        }
        out
    }

    /// Σ_k c_k M^k for a matrix with nilpotent entries.
    pub fn series(&self, coeffs: &[C]) -> Result<Self> {
        if !self.has_nilpotent_entries() {
            return Err(Error::Branch("matrix series (scalar part present)"));
        }
        let mut out = Self::zeros(self.n, self.size);
        let mut p = Self::identity(self.n, self.size);
        for c in coeffs {
            if p.is_zero() {
                break;
            }
            out = out.add(&p.scale(c))?;
            p = p.mul(self)?;
        }
        Ok(out)
    }

    /// Σ_k c_k M^k with coefficients from a univariate series.
    pub fn apply_series(&self, s: &PowerSeries<C>) -> Result<Self> {
        let needed = self.n / 2 + 1;
        if s.order() < needed {
            return Err(Error::InsufficientLayers {
                need: needed,
                have: s.order(),
            });
        }
        self.series(&s.coeffs)
    }

    /// tr log(1 + M) for nilpotent M.
    pub fn trace_log_one_plus(&self) -> Result<Ext<C>> {
        if !self.has_nilpotent_entries() {
            return Err(Error::Branch("log"));
        }
        let mut acc = Ext::zero(self.n);
        let mut p = self.clone();
        let mut k = 1i64;
        while !p.is_zero() {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = &acc + &p.trace().scale(&C::from_ratio(sign, k));
            p = p.mul(self)?;
            k += 1;
        }
        Ok(acc)
    }

    /// det(1 + M)^(p/q) = exp((p/q) tr log(1 + M)) for nilpotent M.
    pub fn det_pow_one_plus(&self, p: i64, q: i64) -> Result<Ext<C>> {
        let tl = self.trace_log_one_plus()?.scale(&C::from_ratio(p, q));
        super::analytic_series(super::Analytic::Exp, &tl)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> FormMatrix<D> {
        FormMatrix {
            n: self.n,
            size: self.size,
            entries: self.entries.iter().map(|e| e.map(f)).collect(),
        }
    }
}

/// Determinant of a scalar matrix by Gaussian elimination.
pub fn scalar_det<C: Coeff>(m: &[C], size: usize) -> C {
    let mut a = m.to_vec();
    let mut det = C::one();
    for col in 0..size {
        let Some(piv) = (col..size).find(|r| !a[r * size + col].is_zero()) else {
            return C::zero();
        };
        if piv != col {
            for j in 0..size {
                a.swap(piv * size + j, col * size + j);
            }
            det = -det;
        }
        let p = a[col * size + col].clone();
        det = det * p.clone();
        let pinv = p.inv().expect("non-zero pivot");
        for r in col + 1..size {
            let f = a[r * size + col].clone() * pinv.clone();
            if f.is_zero() {
                continue;
            }
            for j in col..size {
                let v = a[r * size + j].clone() - f.clone() * a[col * size + j].clone();
                a[r * size + j] = v;
            }
        }
    }
    det
}

/// Inverse of a scalar matrix; `None` when singular.
pub fn scalar_inverse<C: Coeff>(m: &[C], size: usize) -> Option<Vec<C>> {
    let w = 2 * size;
    let mut a: Vec<C> = Vec::with_capacity(size * w);
    for i in 0..size {
        for j in 0..size {
            a.push(m[i * size + j].clone());
        }
        for j in 0..size {
            a.push(if i == j { C::one() } else { C::zero() });
        }
    }
    for col in 0..size {
        let piv = (col..size).find(|r| !a[r * w + col].is_zero())?;
        if piv != col {
            for j in 0..w {
                a.swap(piv * w + j, col * w + j);
            }
        }
        let pinv = a[col * w + col].inv()?;
        for j in 0..w {
            a[col * w + j] = a[col * w + j].clone() * pinv.clone();
        }
        for r in 0..size {
            if r == col {
                continue;
            }
            let f = a[r * w + col].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..w {
                let v = a[r * w + j].clone() - f.clone() * a[col * w + j].clone();
                a[r * w + j] = v;
            }
        }
    }
    Some(
        (0..size)
            .flat_map(|i| (0..size).map(move |j| (i, j)))
            .map(|(i, j)| a[i * w + size + j].clone())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qc, QC};

    #[test]
    fn rejects_odd_entries() {
        let m = FormMatrix::new(2, 1, alloc::vec![Ext::<QC>::dx(2, 0)]);
        assert_eq!(m, Err(Error::OddEntry));
    }

    #[test]
    fn nilpotency_bound() {
        // entries of degree 2 in Λ(4): third power vanishes
        let w = Ext::<QC>::monomial(4, 0b11, qc(1, 1)) + Ext::monomial(4, 0b1100, qc(2, 1));
        let m = FormMatrix::antisymmetric(4, 2, &[(0, 1, w)]).unwrap();
        let m3 = m.mul(&m).unwrap().mul(&m).unwrap();
        assert!(m3.is_zero());
        assert!(m.is_antisymmetric());
    }

    #[test]
    fn scalar_linear_algebra() {
        let m = [qc(2, 1), qc(1, 1), qc(1, 1), qc(3, 1)];
        assert_eq!(scalar_det(&m, 2), qc(5, 1));
        let inv = scalar_inverse(&m, 2).unwrap();
        assert_eq!(inv, alloc::vec![qc(3, 5), qc(-1, 5), qc(-1, 5), qc(2, 5)]);
        assert!(scalar_inverse(&[qc(1, 1), qc(2, 1), qc(2, 1), qc(4, 1)], 2).is_none());
    }
}
