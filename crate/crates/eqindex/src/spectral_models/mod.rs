//! Truncated Dirac spectra with group characters: heat (super)traces, JLO
//! simplex quadrature and power-law fits of short-time samples.

mod fit;
mod quadrature;
mod sphere;
mod torus;

use std::collections::BTreeMap;

use eqindex_core::equivariant_index::GroupWord;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

pub use fit::{fit_asymptotic_orders, FitReport};
pub use quadrature::{richardson_limit, simplex_rule, SimplexRule};
pub use sphere::{build_sphere_model, build_sphere_model_graded, sphere_rotation_strata, SphereGrading};
pub use torus::{build_torus_model, torus_identity_stratum, SpinStructure, TorusConfig, TrigPoly};

/// Group element id of the identity; always present in the character tables.
pub const IDENTITY: &str = "id";

const ZERO_TOL: f64 = 1e-9;

/// A spectral sum with its truncation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JloEstimate {
    pub value: Complex64,
    /// |Q(n) − Q(2n)| for the simplex rule.
    pub quadrature_error: f64,
    pub truncation_bound: f64,
}

impl JloEstimate {
    pub fn error(&self) -> f64 {
        self.quadrature_error + self.truncation_bound
    }
}

/// Eigenvalue λ of D. For λ ≠ 0 the grading data describe the ± halves of
/// `E_λ ⊕ E_{−λ}`, so the levels λ and −λ carry the same data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub lambda: f64,
    pub dim_plus: usize,
    pub dim_minus: usize,
    /// `id ↦ [re χ⁺, im χ⁺, re χ⁻, im χ⁻]`.
    pub characters: BTreeMap<String, [f64; 4]>,
}

impl Level {
    pub fn character(&self, g: &str) -> Option<(Complex64, Complex64)> {
        self.characters
            .get(g)
            .map(|c| (Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3])))
    }

    fn weight(&self) -> f64 {
        if self.lambda.abs() < ZERO_TOL {
            1.0
        } else {
            0.5
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelMeta {
    Sphere {
        monopole_k: i32,
        /// Twice the largest j kept.
        jmax_twice: u32,
        grading: SphereGrading,
    },
    Torus {
        kmax: u32,
        spin: [f64; 2],
        period: f64,
    },
}

/// Sparse matrix stored by rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseOp {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseOp {
    pub fn zeros(n: usize) -> Self {
        SparseOp {
            rows: vec![Vec::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn add_entry(&mut self, r: usize, c: usize, v: Complex64) {
        let row = &mut self.rows[r];
        match row.iter_mut().find(|(j, _)| *j == c) {
            Some((_, x)) => *x += v,
            None => row.push((c, v)),
        }
    }

    pub fn row(&self, r: usize) -> &[(usize, Complex64)] {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.rows[r]
            .iter()
            .find(|(j, _)| *j == c)
            .map(|(_, v)| *v)
            .unwrap_or_default()
    }

    /// `self · diag(d)`.
    pub fn mul_diag(&self, d: &[Complex64]) -> SparseOp {
        SparseOp {
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|&(c, v)| (c, v * d[c])).collect())
                .collect(),
        }
    }

    /// Schur bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        let mut cols = vec![0.0; self.dim()];
        let mut row_max: f64 = 0.0;
        for row in &self.rows {
            let mut s = 0.0;
            for &(c, v) in row {
                s += v.norm();
                cols[c] += v.norm();
            }
            row_max = row_max.max(s);
        }
        let col_max = cols.into_iter().fold(0.0, f64::max);
        (row_max * col_max).sqrt()
    }
}

/// Operators in a basis that diagonalizes D² and the grading.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatrixElements {
    /// Eigenvalues of D² on the basis vectors.
    pub energies: Vec<f64>,
    /// ±1.
    pub grading: Vec<f64>,
    /// Functions `f` and Clifford differentials `d:f`.
    pub ops: BTreeMap<String, SparseOp>,
    /// Diagonal group actions; the identity is implicit.
    pub group: BTreeMap<String, Vec<Complex64>>,
}

impl MatrixElements {
    pub fn op(&self, name: &str) -> Result<&SparseOp> {
        self.ops
            .get(name)
            .ok_or_else(|| ModelError::MissingMatrixElements(name.to_string()))
    }

    /// `op · U_g`.
    pub fn with_group(&self, name: &str, g: &str) -> Result<SparseOp> {
        let op = self.op(name)?;
        if g == IDENTITY {
            return Ok(op.clone());
        }
        let u = self
            .group
            .get(g)
            .ok_or_else(|| ModelError::UnknownElement(g.to_string()))?;
        Ok(op.mul_diag(u))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub levels: Vec<Level>,
    pub lmax: usize,
    pub meta: ModelMeta,
    #[serde(skip)]
    pub matrix_elements: Option<MatrixElements>,
}

impl SpectralModel {
    /// Sorts the levels and checks the ±λ pairing.
    pub(crate) fn new(mut levels: Vec<Level>, lmax: usize, meta: ModelMeta) -> Result<Self> {
        levels.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        let model = SpectralModel {
            levels,
            lmax,
            meta,
            matrix_elements: None,
        };
        model.check_spectral_symmetry()?;
        Ok(model)
    }

    pub fn check_spectral_symmetry(&self) -> Result<()> {
        for l in self.levels.iter().filter(|l| l.lambda.abs() >= ZERO_TOL) {
            let tol = ZERO_TOL * l.lambda.abs().max(1.0);
            let partner = self
                .levels
                .iter()
                .find(|m| (m.lambda + l.lambda).abs() < tol)
                .ok_or_else(|| ModelError::Invalid(format!("level {} has no partner", l.lambda)))?;
            let same = partner.dim_plus == l.dim_minus
                && partner.dim_minus == l.dim_plus
                && l.characters.keys().eq(partner.characters.keys())
                && l.characters.iter().all(|(g, c)| {
                    let p = &partner.characters[g];
                    (0..4).all(|i| (c[i] - p[(i + 2) % 4]).abs() < 1e-8 * (1.0 + c[i].abs()))
                });
            if !same {
                return Err(ModelError::Invalid(format!(
                    "levels ±{} carry different grading data",
                    l.lambda.abs()
                )));
            }
        }
        Ok(())
    }

    pub fn elements(&self) -> Vec<String> {
        self.levels
            .first()
            .map(|l| l.characters.keys().cloned().collect())
            .unwrap_or_default()
    }

    /// Bound on `Σ e^{−tλ²}` over the discarded part of the spectrum, counting
    /// both spinor components.
    pub fn truncation_bound(&self, t: f64) -> f64 {
        match &self.meta {
            ModelMeta::Sphere {
                monopole_k,
                jmax_twice,
                ..
            } => sphere::tail_bound(*monopole_k, *jmax_twice, t),
            ModelMeta::Torus { kmax, spin, period } => torus::tail_bound(*kmax, *spin, *period, t),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: SpectralModel = serde_json::from_str(s).map_err(|e| ModelError::Invalid(e.to_string()))?;
        m.check_spectral_symmetry()?;
        Ok(m)
    }

    fn level_sum(&self, g: &str, t: f64, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for l in &self.levels {
            let (p, m) = l
                .character(g)
                .ok_or_else(|| ModelError::UnknownElement(g.to_string()))?;
            s += f(p, m) * (l.weight() * (-t * l.lambda * l.lambda).exp());
        }
        Ok(s)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonPositiveTime(t))
    }
}

/// `Str[P e^{−tD²} U_g]` for an operator already multiplied by `U_g`.
fn supertrace_op(me: &MatrixElements, op: &SparseOp, t: f64) -> Complex64 {
    (0..op.dim())
        .map(|i| op.get(i, i) * (me.grading[i] * (-t * me.energies[i]).exp()))
        .sum()
}

/// `Str[P e^{−tD²} U_φ]`; `p` names a function in the model's matrix elements.
pub fn heat_supertrace(model: &SpectralModel, g: &str, t: f64, p: Option<&str>) -> Result<Estimate> {
    check_time(t)?;
    match p {
        None => Ok(Estimate {
            value: model.level_sum(g, t, |a, b| a - b)?,
            bound: model.truncation_bound(t),
        }),
        Some(name) => {
            let me = model
                .matrix_elements
                .as_ref()
                .ok_or_else(|| ModelError::MissingMatrixElements(name.to_string()))?;
            let op = me.with_group(name, g)?;
            Ok(Estimate {
                value: supertrace_op(me, &op, t),
                bound: op.norm_bound() * model.truncation_bound(t),
            })
        }
    }
}

/// `Tr[e^{−tD²} U_φ]`.
pub fn heat_trace(model: &SpectralModel, g: &str, t: f64) -> Result<Estimate> {
    check_time(t)?;
    Ok(Estimate {
        value: model.level_sum(g, t, |a, b| a + b)?,
        bound: model.truncation_bound(t),
    })
}

/// Index chains `i₀ → i₁ → ⋯ → i_m → i₀` through the factors, aggregated by
/// the energies `(μ_{i₁}, …, μ_{i_m}, μ_{i₀})` met by `s₀, …, s_m`.
fn chains(me: &MatrixElements, factors: &[SparseOp]) -> Vec<(Vec<f64>, Complex64)> {
    fn walk(
        me: &MatrixElements,
        factors: &[SparseOp],
        start: usize,
        cur: usize,
        depth: usize,
        w: Complex64,
        path: &mut Vec<f64>,
        out: &mut BTreeMap<Vec<u64>, Complex64>,
    ) {
        for &(c, v) in factors[depth].row(cur) {
            let last = depth + 1 == factors.len();
            if last && c != start {
                continue;
            }
            path.push(me.energies[c]);
            if last {
                let key = path.iter().map(|e| e.to_bits()).collect();
                *out.entry(key).or_default() += w * v;
            } else {
                walk(me, factors, start, c, depth + 1, w * v, path, out);
            }
            path.pop();
        }
    }
    let n = me.energies.len();
    let parts: Vec<BTreeMap<Vec<u64>, Complex64>> = (0..n)
        .into_par_iter()
        .map(|i0| {
            let mut out = BTreeMap::new();
            walk(me, factors, i0, i0, 0, Complex64::new(me.grading[i0], 0.0), &mut Vec::new(), &mut out);
            out
        })
        .collect();
    let mut merged: BTreeMap<Vec<u64>, Complex64> = BTreeMap::new();
    for p in parts {
        for (k, v) in p {
            *merged.entry(k).or_default() += v;
        }
    }
    merged
        .into_iter()
        .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
        .map(|(k, v)| (k.into_iter().map(f64::from_bits).collect(), v))
        .collect()
}

fn simplex_sum(chains: &[(Vec<f64>, Complex64)], rule: &SimplexRule, t: f64) -> Complex64 {
    let per_chain: Vec<Complex64> = chains
        .par_iter()
        .map(|(energies, w)| {
            let s: f64 = rule
                .points
                .iter()
                .map(|(bary, omega)| {
                    let e: f64 = bary.iter().zip(energies).map(|(s, mu)| s * mu).sum();
                    omega * (-t * e).exp()
                })
                .sum();
            w * s
        })
        .collect();
    per_chain.into_iter().sum()
}

/// `t^q Str[∫_{Δ_{2q}} a⁰e^{−s₀tD²}[D,a¹]e^{−s₁tD²}⋯[D,a^{2q}]e^{−s_{2q}tD²} ds]`
/// with `a^j = f^j U_{φ_j}` taken from the word.
pub fn jlo_numeric(
    model: &SpectralModel,
    word: &GroupWord,
    q: usize,
    t: f64,
    simplex_nodes: usize,
) -> Result<JloEstimate> {
    check_time(t)?;
    if word.factors.len() != 2 * q + 1 {
        return Err(ModelError::Invalid(format!(
            "word of length {} for q = {q}",
            word.factors.len()
        )));
    }
    let me = model
        .matrix_elements
        .as_ref()
        .ok_or_else(|| ModelError::MissingMatrixElements(word.factors[0].0.clone()))?;
    let mut factors = Vec::with_capacity(2 * q + 1);
    for (j, (f, g)) in word.factors.iter().enumerate() {
        let name = if j == 0 { f.clone() } else { format!("d:{f}") };
        factors.push(me.with_group(&name, g)?);
    }
    if q == 0 {
        let e = heat_supertrace(model, &word.factors[0].1, t, Some(&word.factors[0].0))?;
        return Ok(JloEstimate {
            value: e.value,
            quadrature_error: 0.0,
            truncation_bound: e.bound,
        });
    }
    let b = jlo_bracket(model, &factors, t, simplex_nodes)?;
    let tq = t.powi(q as i32);
    Ok(JloEstimate {
        value: b.value * tq,
        quadrature_error: b.quadrature_error * tq,
        truncation_bound: b.truncation_bound * tq,
    })
}

/// `⟨X⁰, …, X^m⟩_t = ∫_{Δ_m} Str[X⁰e^{−s₀tD²} ⋯ X^m e^{−s_m tD²}] ds` for
/// operators given in the model's basis.
pub fn jlo_bracket(model: &SpectralModel, factors: &[SparseOp], t: f64, simplex_nodes: usize) -> Result<JloEstimate> {
    check_time(t)?;
    let me = model
        .matrix_elements
        .as_ref()
        .ok_or_else(|| ModelError::MissingMatrixElements("bracket".into()))?;
    if factors.is_empty() || factors.iter().any(|f| f.dim() != me.energies.len()) {
        return Err(ModelError::Invalid("factors must match the model basis".into()));
    }
    let m = factors.len() - 1;
    let ch = chains(me, factors);
    let v1 = simplex_sum(&ch, &simplex_rule(m, simplex_nodes), t);
    let v2 = simplex_sum(&ch, &simplex_rule(m, 2 * simplex_nodes), t);
    let norms: f64 = factors.iter().map(SparseOp::norm_bound).product();
    let m_fact: f64 = (1..=m).map(|k| k as f64).product();
    Ok(JloEstimate {
        value: v1,
        quadrature_error: (v1 - v2).norm(),
        truncation_bound: norms / m_fact * model.truncation_bound(t / (m + 1) as f64),
    })
}
