use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Log-log slope of |value| against t; `None` when a sample vanishes.
    pub exponent: Option<f64>,
    pub exponent_residual: f64,
    /// `(e, c_e)` of the least-squares fit `Σ c_e t^e` over the half-integer
    /// ladder starting at the expected leading power.
    pub terms: Vec<(f64, Complex64)>,
    pub residual: f64,
}

impl FitReport {
    /// Largest |c_e| over e < 0; zero when the ladder has no negative power.
    pub fn max_negative_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(e, _)| *e < 0.0)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }
}

fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    // Column scaling keeps t^{−k} columns comparable.
    let scales: Vec<f64> = (0..a.ncols()).map(|j| a.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    let mut s = a.clone();
    for (j, sc) in scales.iter().enumerate() {
        s.column_mut(j).unscale_mut(*sc);
    }
    let x = s
        .svd(true, true)
        .solve(b, 1e-14)
        .map_err(|e| ModelError::DegenerateGrid(e.to_string()))?;
    Ok(DVector::from_iterator(x.len(), x.iter().zip(&scales).map(|(v, sc)| v / sc)))
}

/// Fits short-time samples on a geometric grid. At most `samples − 1` ladder
/// terms `e₀, e₀ + ½, …` with `e ≤ 0` are used.
pub fn fit_asymptotic_orders(samples: &[(f64, Complex64)], expected_leading: f64) -> Result<FitReport> {
    if samples.len() < 4 {
        return Err(ModelError::DegenerateGrid(format!("{} samples, need at least 4", samples.len())));
    }
    if (2.0 * expected_leading).fract() != 0.0 {
        return Err(ModelError::DegenerateGrid(format!(
            "expected leading power {expected_leading} is not a half-integer"
        )));
    }
    if samples.iter().any(|(t, _)| !(*t > 0.0 && t.is_finite())) {
        return Err(ModelError::DegenerateGrid("times must be positive".into()));
    }
    let ratio = samples[1].0 / samples[0].0;
    let geometric = (ratio - 1.0).abs() > 1e-9
        && samples
            .windows(2)
            .all(|w| ((w[1].0 / w[0].0) / ratio - 1.0).abs() < 1e-9);
    if !geometric {
        return Err(ModelError::DegenerateGrid("times are not a geometric sequence".into()));
    }

    let n = samples.len();
    let logs: Option<Vec<(f64, f64)>> = samples
        .iter()
        .map(|(t, v)| (v.norm() > 0.0).then(|| (t.ln(), v.norm().ln())))
        .collect();
    let (exponent, exponent_residual) = match logs {
        Some(pts) => {
            let a = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { pts[i].0 });
            let b = DVector::from_iterator(n, pts.iter().map(|p| p.1));
            let x = least_squares(&a, &b)?;
            let r = (&a * &x - &b).norm() / (n as f64).sqrt();
            (Some(x[1]), r)
        }
        None => (None, f64::NAN),
    };

    let ladder: Vec<f64> = (0..n - 1)
        .map(|j| expected_leading + 0.5 * j as f64)
        .take_while(|e| *e <= 0.0)
        .collect();
    let a = DMatrix::from_fn(n, ladder.len(), |i, j| samples[i].0.powf(ladder[j]));
    let re = least_squares(&a, &DVector::from_iterator(n, samples.iter().map(|s| s.1.re)))?;
    let im = least_squares(&a, &DVector::from_iterator(n, samples.iter().map(|s| s.1.im)))?;
    let fitted = |i: usize| -> Complex64 {
        (0..ladder.len())
            .map(|j| Complex64::new(re[j], im[j]) * a[(i, j)])
            .sum()
    };
    let residual = ((0..n).map(|i| (fitted(i) - samples[i].1).norm_sqr()).sum::<f64>() / n as f64).sqrt();
    Ok(FitReport {
        exponent,
        exponent_residual,
        terms: ladder
            .iter()
            .enumerate()
            .map(|(j, e)| (*e, Complex64::new(re[j], im[j])))
            .collect(),
        residual,
    })
}
