//! Flat torus `ℝ²/(LZ)²` with `D = c₁∂₁ + c₂∂₂`, `c₁ = [[0,−1],[1,0]]`,
//! `c₂ = [[0,i],[i,0]]`, grading `diag(1,−1)`. Plane waves `e^{2πi p·x/L}` with
//! `p = k + ε` give `D_p = (2πi/L)(c₁p₁ + c₂p₂)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use eqindex_core::char_forms::NormalAction;
use eqindex_core::equivariant_index::{FixedPointNode, FixedPointStratum, Jet};
use eqindex_core::mehler::ModelCurvature;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Level, MatrixElements, ModelMeta, SparseOp, SpectralModel, IDENTITY};
use crate::error::{ModelError, Result};

/// `ε_j = ½` where `antiperiodic[j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpinStructure {
    pub antiperiodic: [bool; 2],
}

impl SpinStructure {
    pub const ALL: [SpinStructure; 4] = [
        SpinStructure { antiperiodic: [false, false] },
        SpinStructure { antiperiodic: [false, true] },
        SpinStructure { antiperiodic: [true, false] },
        SpinStructure { antiperiodic: [true, true] },
    ];

    pub fn eps(&self) -> [f64; 2] {
        self.antiperiodic.map(|a| if a { 0.5 } else { 0.0 })
    }

    fn twice(&self) -> [i64; 2] {
        self.antiperiodic.map(|a| a as i64)
    }
}

/// `Σ c e^{2πi m·x/L}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    pub terms: Vec<(Complex64, [i32; 2])>,
}

impl TrigPoly {
    pub fn exp(m: [i32; 2]) -> Self {
        TrigPoly {
            terms: vec![(Complex64::new(1.0, 0.0), m)],
        }
    }

    pub fn cos(m: [i32; 2]) -> Self {
        TrigPoly {
            terms: vec![(Complex64::new(0.5, 0.0), m), (Complex64::new(0.5, 0.0), m.map(|v| -v))],
        }
    }

    pub fn sin(m: [i32; 2]) -> Self {
        TrigPoly {
            terms: vec![(Complex64::new(0.0, -0.5), m), (Complex64::new(0.0, 0.5), m.map(|v| -v))],
        }
    }

    pub fn value(&self, x: [f64; 2], period: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, m)| c * Complex64::from_polar(1.0, 2.0 * PI * (m[0] as f64 * x[0] + m[1] as f64 * x[1]) / period))
            .sum()
    }

    pub fn grad(&self, x: [f64; 2], period: f64) -> [Complex64; 2] {
        let mut g = [Complex64::new(0.0, 0.0); 2];
        for (c, m) in &self.terms {
            let e = c * Complex64::from_polar(1.0, 2.0 * PI * (m[0] as f64 * x[0] + m[1] as f64 * x[1]) / period);
            for j in 0..2 {
                g[j] += e * Complex64::new(0.0, 2.0 * PI * m[j] as f64 / period);
            }
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusConfig {
    pub kmax: usize,
    pub spin: SpinStructure,
    pub period: f64,
    /// Translations by `s·L`, `s` in lattice coordinates.
    pub translations: Vec<(String, [f64; 2])>,
    pub functions: Vec<(String, TrigPoly)>,
}

impl TorusConfig {
    pub fn new(kmax: usize, spin: SpinStructure) -> Self {
        TorusConfig {
            kmax,
            spin,
            period: 1.0,
            translations: Vec::new(),
            functions: Vec::new(),
        }
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = period;
        self
    }

    pub fn with_translation(mut self, id: &str, s: [f64; 2]) -> Self {
        self.translations.push((id.to_string(), s));
        self
    }

    pub fn with_function(mut self, id: &str, f: TrigPoly) -> Self {
        self.functions.push((id.to_string(), f));
        self
    }
}

const C1: [[Complex64; 2]; 2] = [
    [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
];
const C2: [[Complex64; 2]; 2] = [
    [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
    [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
];

/// Plane-wave spectrum, translation characters `e^{2πik·s}` and, for the
/// listed functions, the shift matrices of `f` and of `c(df) = [D, f]`.
pub fn build_torus_model(cfg: &TorusConfig) -> Result<SpectralModel> {
    if cfg.kmax < 1 {
        return Err(ModelError::Invalid("kmax must be at least 1".into()));
    }
    if !(cfg.period > 0.0 && cfg.period.is_finite()) {
        return Err(ModelError::Invalid(format!("period must be positive, got {}", cfg.period)));
    }
    if cfg.translations.iter().any(|(id, _)| id == IDENTITY) {
        return Err(ModelError::Invalid(format!("`{IDENTITY}` is reserved for the identity")));
    }
    let kmax = cfg.kmax as i64;
    let e2 = cfg.spin.twice();
    let mut elements: Vec<(String, [f64; 2])> = vec![(IDENTITY.to_string(), [0.0, 0.0])];
    elements.extend(cfg.translations.iter().cloned());
    let character = |k: [i64; 2], s: [f64; 2]| Complex64::from_polar(1.0, 2.0 * PI * (k[0] as f64 * s[0] + k[1] as f64 * s[1]));

    // 4|p|² ↦ characters summed over the shell
    let mut shells: BTreeMap<i64, (usize, Vec<Complex64>)> = BTreeMap::new();
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            let n4 = (2 * k1 + e2[0]).pow(2) + (2 * k2 + e2[1]).pow(2);
            let e = shells.entry(n4).or_insert_with(|| (0, vec![Complex64::new(0.0, 0.0); elements.len()]));
            e.0 += 1;
            for (i, (_, s)) in elements.iter().enumerate() {
                e.1[i] += character([k1, k2], *s);
            }
        }
    }
    let mut levels = Vec::new();
    for (n4, (count, chars)) in &shells {
        let characters: BTreeMap<String, [f64; 4]> = elements
            .iter()
            .zip(chars)
            .map(|((id, _), c)| (id.clone(), [c.re, c.im, c.re, c.im]))
            .collect();
        if *n4 == 0 {
            levels.push(Level {
                lambda: 0.0,
                dim_plus: *count,
                dim_minus: *count,
                characters,
            });
        } else {
            let lam = PI * (*n4 as f64).sqrt() / cfg.period;
            for sign in [-1.0, 1.0] {
                levels.push(Level {
                    lambda: sign * lam,
                    dim_plus: *count,
                    dim_minus: *count,
                    characters: characters.clone(),
                });
            }
        }
    }
    let mut model = SpectralModel::new(
        levels,
        cfg.kmax,
        ModelMeta::Torus {
            kmax: cfg.kmax as u32,
            spin: cfg.spin.eps(),
            period: cfg.period,
        },
    )?;
    model.matrix_elements = Some(matrix_elements(cfg, &elements));
    Ok(model)
}

fn matrix_elements(cfg: &TorusConfig, elements: &[(String, [f64; 2])]) -> MatrixElements {
    let kmax = cfg.kmax as i64;
    let side = 2 * kmax + 1;
    let eps = cfg.spin.eps();
    let index = |k: [i64; 2], c: usize| -> Option<usize> {
        if k[0].abs() > kmax || k[1].abs() > kmax {
            return None;
        }
        Some((((k[0] + kmax) * side + (k[1] + kmax)) * 2) as usize + c)
    };
    let n = (side * side * 2) as usize;
    let mut energies = vec![0.0; n];
    let mut grading = vec![0.0; n];
    let mut modes = Vec::with_capacity((side * side) as usize);
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            let p = [k1 as f64 + eps[0], k2 as f64 + eps[1]];
            let mu = 4.0 * PI * PI * (p[0] * p[0] + p[1] * p[1]) / (cfg.period * cfg.period);
            for c in 0..2 {
                let i = index([k1, k2], c).expect("inside box");
                energies[i] = mu;
                grading[i] = if c == 0 { 1.0 } else { -1.0 };
            }
            modes.push([k1, k2]);
        }
    }
    let mut group = BTreeMap::new();
    for (id, s) in elements.iter().filter(|(id, _)| id != IDENTITY) {
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        for k in &modes {
            let u = Complex64::from_polar(1.0, 2.0 * PI * (k[0] as f64 * s[0] + k[1] as f64 * s[1]));
            for c in 0..2 {
                d[index(*k, c).expect("inside box")] = u;
            }
        }
        group.insert(id.clone(), d);
    }
    let mut ops = BTreeMap::new();
    for (id, f) in &cfg.functions {
        let mut mult = SparseOp::zeros(n);
        let mut diff = SparseOp::zeros(n);
        for k in &modes {
            for (coef, m) in &f.terms {
                let target = [k[0] + m[0] as i64, k[1] + m[1] as i64];
                let scale = Complex64::new(0.0, 2.0 * PI / cfg.period) * coef;
                for b in 0..2 {
                    let (Some(col), Some(row)) = (index(*k, b), index(target, b)) else {
                        continue;
                    };
                    mult.add_entry(row, col, *coef);
                    for a in 0..2 {
                        let cl = C1[a][b] * m[0] as f64 + C2[a][b] * m[1] as f64;
                        if cl != Complex64::new(0.0, 0.0) {
                            diff.add_entry(index(target, a).expect("inside box"), col, scale * cl);
                        }
                    }
                }
            }
        }
        ops.insert(id.clone(), mult);
        ops.insert(format!("d:{id}"), diff);
    }
    MatrixElements {
        energies,
        grading,
        ops,
        group,
    }
}

/// Two spinor components times `Σ e^{−tλ²}` over plane waves outside the box.
pub(super) fn tail_bound(kmax: u32, spin: [f64; 2], period: f64, t: f64) -> f64 {
    let c = 4.0 * PI * PI * t / (period * period);
    let a = kmax as f64 + 0.5;
    let tail1 = 2.0 * (-c * a * a).exp() / (1.0 - (-2.0 * c * a).exp());
    let mut total = 1.0;
    let mut inside = 1.0;
    for eps in spin {
        let s: f64 = (-(kmax as i64)..=kmax as i64)
            .map(|k| (-c * (k as f64 + eps).powi(2)).exp())
            .sum();
        total *= s + tail1;
        inside *= s;
    }
    2.0 * (total - inside).max(0.0)
}

/// Uniform grid of `grid²` nodes on the whole torus (the fixed set of the
/// identity), with jets of the listed functions.
pub fn torus_identity_stratum(
    period: f64,
    grid: usize,
    functions: &[(String, TrigPoly)],
) -> Result<FixedPointStratum<Complex64>> {
    let mc = ModelCurvature::flat(2, NormalAction::trivial())?;
    let h = period / grid as f64;
    let mut nodes = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            let x = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
            let mut node = FixedPointNode::new(h * h, mc.clone());
            for (id, f) in functions {
                node = node.with_jet(
                    id,
                    Jet {
                        value: f.value(x, period),
                        grad: f.grad(x, period).to_vec(),
                    },
                );
            }
            nodes.push(node);
        }
    }
    Ok(FixedPointStratum::new(2, nodes)?)
}
