use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use std::num::NonZeroUsize;

use crate::error::{ModelError, Result};

/// Quadrature on the standard simplex `Δ_m = {s ∈ ℝ^{m+1}_{≥0} : Σ s_j = 1}`;
/// points are barycentric and the weights sum to `1/m!`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexRule {
    pub points: Vec<(Vec<f64>, f64)>,
}

/// Conical product rule: Gauss–Legendre in each collapsed coordinate, with
/// `round(nodes^{1/m})` points per coordinate and the Jacobian in the weights.
pub fn simplex_rule(m: usize, nodes: usize) -> SimplexRule {
    if m == 0 {
        return SimplexRule {
            points: vec![(vec![1.0], 1.0)],
        };
    }
    let g = ((nodes.max(1) as f64).powf(1.0 / m as f64).round() as usize).max(1);
    let legendre = GaussLegendre::new(NonZeroUsize::new(g).expect("g ≥ 1"));
    // Coordinate i (0-based) carries the Jacobian factor (1−u_i)^{m−1−i}.
    let rules: Vec<Vec<(f64, f64)>> = (0..m)
        .map(|i| {
            legendre
                .as_node_weight_pairs()
                .iter()
                .map(|&(x, w)| {
                    let u = 0.5 * (1.0 + x);
                    (u, 0.5 * w * (1.0 - u).powi((m - 1 - i) as i32))
                })
                .collect()
        })
        .collect();
    let mut points = Vec::with_capacity(g.pow(m as u32));
    let mut idx = vec![0usize; m];
    loop {
        let mut bary = Vec::with_capacity(m + 1);
        let mut rest = 1.0;
        let mut w = 1.0;
        for (i, &k) in idx.iter().enumerate() {
            let (u, wu) = rules[i][k];
            bary.push(rest * u);
            rest *= 1.0 - u;
            w *= wu;
        }
        bary.push(rest);
        points.push((bary, w));
        let mut i = 0;
        loop {
            if i == m {
                return SimplexRule { points };
            }
            idx[i] += 1;
            if idx[i] < g {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Polynomial extrapolation to `t = 0` (Neville). Returns the limit and the
/// difference to the extrapolant that drops the largest `t`.
pub fn richardson_limit(ts: &[f64], values: &[Complex64]) -> Result<(Complex64, f64)> {
    if ts.len() != values.len() || ts.len() < 2 {
        return Err(ModelError::DegenerateGrid(format!(
            "{} times for {} values",
            ts.len(),
            values.len()
        )));
    }
    let n = ts.len();
    for i in 0..n {
        for j in 0..i {
            if ts[i] == ts[j] {
                return Err(ModelError::DegenerateGrid(format!("repeated time {}", ts[i])));
            }
        }
    }
    let neville = |lo: usize, hi: usize| {
        let mut p: Vec<Complex64> = values[lo..hi].to_vec();
        let t = &ts[lo..hi];
        for k in 1..p.len() {
            for i in 0..p.len() - k {
                p[i] = (p[i] * (-t[i + k]) + p[i + 1] * t[i]) / (t[i] - t[i + k]);
            }
        }
        p[0]
    };
    let full = neville(0, n);
    let lo = if ts[0] > ts[n - 1] { 1 } else { 0 };
    let reduced = neville(lo, lo + n - 1);
    Ok((full, (full - reduced).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_volumes() {
        for m in 1..=4 {
            let r = simplex_rule(m, 50);
            let vol: f64 = r.points.iter().map(|(_, w)| w).sum();
            let fact: f64 = (1..=m).map(|k| k as f64).product();
            assert!((vol - 1.0 / fact).abs() < 1e-13, "m = {m}");
            assert!(r.points.iter().all(|(s, _)| (s.iter().sum::<f64>() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn dirichlet_moment() {
        // ∫_{Δ_2} s0 s1² ds = 1! 2! 0! / 5!
        let r = simplex_rule(2, 25);
        let v: f64 = r.points.iter().map(|(s, w)| w * s[0] * s[1] * s[1]).sum();
        assert!((v - 2.0 / 120.0).abs() < 1e-15, "{v}");
    }

    #[test]
    fn richardson_is_exact_on_cubics() {
        let ts = [0.4, 0.2, 0.1, 0.05];
        let f = |t: f64| Complex64::new(1.0 - 2.0 * t + 3.0 * t * t, t * t * t);
        let vals: Vec<_> = ts.iter().map(|&t| f(t)).collect();
        let (l, _) = richardson_limit(&ts, &vals).unwrap();
        assert!((l - Complex64::new(1.0, 0.0)).norm() < 1e-13);
    }
}
