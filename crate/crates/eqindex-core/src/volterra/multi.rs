//! Multi-index helpers.

use alloc::vec;
use alloc::vec::Vec;

use crate::scalar::{inv_factorial, Coeff};

pub type MultiIndex = Vec<u32>;

pub fn zero(n: usize) -> MultiIndex {
    vec![0; n]
}

pub fn unit(n: usize, j: usize) -> MultiIndex {
    let mut e = zero(n);
    e[j] = 1;
    e
}

pub fn order(a: &[u32]) -> u32 {
    a.iter().sum()
}

pub fn add(a: &[u32], b: &[u32]) -> MultiIndex {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `a − b`, or `None` if some component would go negative.
pub fn sub(a: &[u32], b: &[u32]) -> Option<MultiIndex> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.checked_sub(*y))
        .collect()
}

/// 1/α!
pub fn inv_factorial_multi<C: Coeff>(a: &[u32]) -> C {
    a.iter()
        .fold(C::one(), |acc, &k| acc * inv_factorial::<C>(k as usize))
}

pub fn binom(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    let mut r: i64 = 1;
    for i in 0..k as i64 {
        r = r * (n as i64 - i) / (i + 1);
    }
    r
}

/// n (n−1) ⋯ (n−k+1)
pub fn falling(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    (0..k as i64).fold(1, |acc, i| acc * (n as i64 - i))
}

/// All α with α ≤ bound componentwise.
pub fn below(bound: &[u32]) -> Vec<MultiIndex> {
    let mut out = vec![zero(bound.len())];
    for (j, &b) in bound.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * (b as usize + 1));
        for a in &out {
            for v in 0..=b {
                let mut c = a.clone();
                c[j] = v;
                next.push(c);
            }
        }
        out = next;
    }
    out
}

/// All α of length n with |α| = d.
pub fn with_order(n: usize, d: u32) -> Vec<MultiIndex> {
    if n == 0 {
        return if d == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=d {
        for mut rest in with_order(n - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Normal-ordering of `∂^β x^α = Σ_γ c_γ x^{α−γ} ∂^{β−γ}`.
pub fn leibniz(beta: &[u32], alpha: &[u32]) -> Vec<(i64, MultiIndex, MultiIndex)> {
    let bound: MultiIndex = beta.iter().zip(alpha).map(|(b, a)| *b.min(a)).collect();
    below(&bound)
        .into_iter()
        .map(|g| {
            let c = g
                .iter()
                .enumerate()
                .fold(1i64, |acc, (j, &gj)| acc * binom(beta[j], gj) * falling(alpha[j], gj));
            (c, sub(alpha, &g).unwrap(), sub(beta, &g).unwrap())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(with_order(3, 2).len(), 6);
        assert_eq!(below(&[1, 2]).len(), 6);
        assert_eq!(binom(5, 2), 10);
        assert_eq!(falling(5, 2), 20);
    }

    #[test]
    fn leibniz_d_x() {
        // ∂ x = x ∂ + 1
        let l = leibniz(&[1], &[1]);
        assert_eq!(l.len(), 2);
        assert!(l.contains(&(1, alloc::vec![1], alloc::vec![1])));
        assert!(l.contains(&(1, alloc::vec![0], alloc::vec![0])));
    }
}
