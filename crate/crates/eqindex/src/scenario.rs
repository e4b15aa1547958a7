//! Scenario files: one TOML document per computation. Numbers written as
//! strings (`"3/5"`, `"0.25"`, `"-2"`) are exact rationals; bare TOML floats
//! are floats and enter exact mode through their binary value.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use eqindex_core::char_forms::{NormalAction, TwistData};
use eqindex_core::equivariant_index::{
    cm_cocycle, equivariant_index, equivariant_index_exact, jlo_limit, node_index_density, FixedPointNode,
    FixedPointStratum, GroupTable, GroupWord, Jet, PiSum,
};
use eqindex_core::graded_algebra::{Ext, FormMatrix};
use eqindex_core::mehler::ModelCurvature;
use eqindex_core::scalar::{inv_factorial, Coeff, QC};
use eqindex_core::volterra::{asymptotic_coefficients, heat_parametrix, ModelOperator};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::ModelError;
use crate::report::{fraction, number, pi_sum_string, Check, Row, ScenarioReport, SCHEMA_VERSION};
use crate::spectral_models::*;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<eqindex_core::Error> for ScenarioError {
    fn from(e: eqindex_core::Error) -> Self {
        ScenarioError::Model(e.into())
    }
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

fn field_err<T>(field: impl Into<String>, message: impl Into<String>) -> Result<T> {
    Err(ScenarioError::Field {
        field: field.into(),
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    FixedPointIndex,
    CmCocycle,
    JloLimit,
    HeatTrace,
    JloNumeric,
    VolterraCheck,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::FixedPointIndex => "fixed_point_index",
            Kind::CmCocycle => "cm_cocycle",
            Kind::JloLimit => "jlo_limit",
            Kind::HeatTrace => "heat_trace",
            Kind::JloNumeric => "jlo_numeric",
            Kind::VolterraCheck => "volterra_check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    Exact,
    #[default]
    F64,
}

impl Precision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Precision::Exact => "exact",
            Precision::F64 => "f64",
        }
    }
}

/// Integer, float, or a string holding an exact rational.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

fn parse_ratio(s: &str) -> Option<(i64, i64)> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let (p, q) = (p.trim().parse::<i64>().ok()?, q.trim().parse::<i64>().ok()?);
        return (q != 0).then_some((p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 15 {
            return None;
        }
        let den = 10i64.pow(frac.len() as u32);
        let neg = int.starts_with('-');
        let whole: i64 = if int == "-" || int.is_empty() { 0 } else { int.parse().ok()? };
        let f: i64 = frac.parse().ok()?;
        let num = whole.checked_mul(den)?.checked_add(if neg { -f } else { f })?;
        return Some((num, den));
    }
    s.parse::<i64>().ok().map(|p| (p, 1))
}

impl Num {
    pub fn to_f64(&self, field: &str) -> Result<f64> {
        match self {
            Num::Int(v) => Ok(*v as f64),
            Num::Float(v) => Ok(*v),
            Num::Text(s) => match parse_ratio(s) {
                Some((p, q)) => Ok(p as f64 / q as f64),
                None => field_err(field, format!("`{s}` is not a number")),
            },
        }
    }

    pub fn to_coeff<C: Coeff>(&self, field: &str) -> Result<C> {
        match self {
            Num::Int(v) => Ok(C::from_i64(*v)),
            Num::Float(v) => Ok(C::from_f64(*v)),
            Num::Text(s) => match parse_ratio(s) {
                Some((p, q)) => Ok(C::from_ratio(p, q)),
                None => field_err(field, format!("`{s}` is not a number")),
            },
        }
    }
}

/// Real number or `[re, im]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexNum {
    Real(Num),
    Pair([Num; 2]),
}

impl ComplexNum {
    pub fn to_coeff<C: Coeff>(&self, field: &str) -> Result<C> {
        match self {
            ComplexNum::Real(r) => r.to_coeff(field),
            ComplexNum::Pair([re, im]) => Ok(re.to_coeff::<C>(field)? + C::imag_unit() * im.to_coeff::<C>(field)?),
        }
    }

    pub fn to_c64(&self, field: &str) -> Result<Complex64> {
        match self {
            ComplexNum::Real(r) => Ok(Complex64::new(r.to_f64(field)?, 0.0)),
            ComplexNum::Pair([re, im]) => Ok(Complex64::new(re.to_f64(field)?, im.to_f64(field)?)),
        }
    }
}

/// Differential form as `{"0,1" = c, "" = scalar}`.
pub type FormSpec = BTreeMap<String, Num>;

fn build_form<C: Coeff>(spec: &FormSpec, n: usize, field: &str) -> Result<Ext<C>> {
    let mut w = Ext::zero(n);
    for (key, c) in spec {
        let idx: Vec<usize> = if key.trim().is_empty() {
            Vec::new()
        } else {
            key.split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .or_else(|_| field_err(field, format!("form key `{key}` is not a list of indices")))?
        };
        let term = Ext::from_indices(n, &idx, c.to_coeff::<C>(field)?)
            .or_else(|e| field_err(field, format!("form key `{key}`: {e}")))?;
        w = &w + &term;
    }
    Ok(w)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub i: usize,
    pub j: usize,
    pub form: FormSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetSpec {
    pub value: ComplexNum,
    #[serde(default)]
    pub grad: Vec<ComplexNum>,
}

fn one() -> f64 {
    1.0
}

fn plus() -> i8 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    #[serde(default = "one")]
    pub weight: f64,
    #[serde(default = "plus")]
    pub orientation: i8,
    /// Rotation angles in radians (f64 precision only).
    #[serde(default)]
    pub angles: Vec<f64>,
    /// `[cos θ/2, sin θ/2]` pairs.
    #[serde(default)]
    pub half_angles: Vec<[Num; 2]>,
    #[serde(default)]
    pub rp: Vec<EntrySpec>,
    #[serde(default)]
    pub rpp: Vec<EntrySpec>,
    #[serde(default)]
    pub twist_curvature: FormSpec,
    pub twist_phase: Option<ComplexNum>,
    #[serde(default)]
    pub jets: BTreeMap<String, JetSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratumSpec {
    pub a: usize,
    pub nodes: Vec<NodeSpec>,
}

fn build_normal<C: Coeff>(node: &NodeSpec, field: &str) -> Result<NormalAction<C>> {
    if !node.angles.is_empty() && !node.half_angles.is_empty() {
        return field_err(field, "give either `angles` or `half_angles`");
    }
    let half: Vec<(C, C)> = if !node.angles.is_empty() {
        if C::EXACT {
            return field_err(
                format!("{field}.angles"),
                "angles in radians need f64 precision; use `half_angles` for exact runs",
            );
        }
        node.angles
            .iter()
            .map(|&t| {
                if !(t > 0.0 && t <= std::f64::consts::PI) {
                    return field_err(format!("{field}.angles"), format!("angle {t} outside (0, pi]"));
                }
                Ok((C::from_f64((t / 2.0).cos()), C::from_f64((t / 2.0).sin())))
            })
            .collect::<Result<_>>()?
    } else {
        node.half_angles
            .iter()
            .map(|[c, s]| Ok((c.to_coeff(field)?, s.to_coeff(field)?)))
            .collect::<Result<_>>()?
    };
    NormalAction::from_half_angles(half).or_else(|e| field_err(format!("{field}.half_angles"), e.to_string()))
}

fn build_matrix<C: Coeff>(entries: &[EntrySpec], n: usize, size: usize, field: &str) -> Result<FormMatrix<C>> {
    let upper: Vec<(usize, usize, Ext<C>)> = entries
        .iter()
        .map(|e| Ok((e.i, e.j, build_form(&e.form, n, field)?)))
        .collect::<Result<_>>()?;
    FormMatrix::antisymmetric(n, size, &upper).or_else(|e| field_err(field, e.to_string()))
}

fn build_node<C: Coeff>(spec: &NodeSpec, a: usize, n: usize, field: &str) -> Result<FixedPointNode<C>> {
    let normal = build_normal::<C>(spec, field)?;
    let rp = build_matrix(&spec.rp, n, a, &format!("{field}.rp"))?;
    let rpp = build_matrix(&spec.rpp, n, n.saturating_sub(a), &format!("{field}.rpp"))?;
    let phase = match &spec.twist_phase {
        Some(p) => p.to_coeff(&format!("{field}.twist_phase"))?,
        None => C::one(),
    };
    let twist = TwistData::line(build_form(&spec.twist_curvature, n, &format!("{field}.twist_curvature"))?, phase)?;
    let mc = ModelCurvature::new(rp, rpp, normal, twist).or_else(|e| field_err(field, e.to_string()))?;
    let mut node = FixedPointNode::new(spec.weight, mc).with_orientation(spec.orientation);
    for (id, jet) in &spec.jets {
        let f = format!("{field}.jets.{id}");
        node = node.with_jet(
            id,
            Jet {
                value: jet.value.to_coeff(&f)?,
                grad: jet.grad.iter().map(|g| g.to_coeff(&f)).collect::<Result<_>>()?,
            },
        );
    }
    Ok(node)
}

fn build_strata<C: Coeff>(specs: &[StratumSpec], n: usize) -> Result<Vec<FixedPointStratum<C>>> {
    specs
        .iter()
        .enumerate()
        .map(|(si, s)| {
            let nodes = s
                .nodes
                .iter()
                .enumerate()
                .map(|(ni, node)| build_node(node, s.a, n, &format!("strata[{si}].nodes[{ni}]")))
                .collect::<Result<_>>()?;
            FixedPointStratum::new(s.a, nodes).or_else(|e| field_err(format!("strata[{si}]"), e.to_string()))
        })
        .collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub c: ComplexNum,
    pub m: [i32; 2],
}

/// `"cos(1,0)"`, `"sin(0,1)"`, `"exp(1,1)"`, or explicit Fourier terms.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Named(String),
    Terms(Vec<TermSpec>),
}

impl FunctionSpec {
    fn build(&self, field: &str) -> Result<TrigPoly> {
        match self {
            FunctionSpec::Terms(ts) => Ok(TrigPoly {
                terms: ts.iter().map(|t| Ok((t.c.to_c64(field)?, t.m))).collect::<Result<_>>()?,
            }),
            FunctionSpec::Named(s) => {
                let bad = || field_err(field, format!("`{s}` is not of the form cos(m1,m2), sin(m1,m2) or exp(m1,m2)"));
                let Some((head, rest)) = s.trim().split_once('(') else {
                    return bad();
                };
                let Some(args) = rest.strip_suffix(')') else {
                    return bad();
                };
                let m: Vec<i32> = match args.split(',').map(|v| v.trim().parse()).collect() {
                    Ok(m) => m,
                    Err(_) => return bad(),
                };
                let [m1, m2] = m[..] else {
                    return bad();
                };
                match head.trim() {
                    "cos" => Ok(TrigPoly::cos([m1, m2])),
                    "sin" => Ok(TrigPoly::sin([m1, m2])),
                    "exp" => Ok(TrigPoly::exp([m1, m2])),
                    _ => bad(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    Sphere {
        lmax: usize,
        #[serde(default)]
        monopole_k: i32,
        #[serde(default)]
        rotations: BTreeMap<String, f64>,
        #[serde(default)]
        grading: SphereGrading,
    },
    Torus {
        kmax: usize,
        #[serde(default)]
        antiperiodic: [bool; 2],
        #[serde(default = "one")]
        period: f64,
        #[serde(default)]
        translations: BTreeMap<String, [f64; 2]>,
        #[serde(default)]
        functions: BTreeMap<String, FunctionSpec>,
    },
}

impl ModelSpec {
    fn build(&self) -> Result<SpectralModel> {
        match self {
            ModelSpec::Sphere {
                lmax,
                monopole_k,
                rotations,
                grading,
            } => {
                let rot: Vec<(String, f64)> = rotations.iter().map(|(k, v)| (k.clone(), *v)).collect();
                Ok(build_sphere_model_graded(*lmax, *monopole_k, &rot, *grading)?)
            }
            ModelSpec::Torus { .. } => Ok(build_torus_model(&self.torus_config()?.expect("torus"))?),
        }
    }

    fn torus_config(&self) -> Result<Option<TorusConfig>> {
        let ModelSpec::Torus {
            kmax,
            antiperiodic,
            period,
            translations,
            functions,
        } = self
        else {
            return Ok(None);
        };
        if !(*period > 0.0) {
            return field_err("model.period", "must be positive");
        }
        let mut cfg = TorusConfig::new(*kmax, SpinStructure { antiperiodic: *antiperiodic }).with_period(*period);
        for (id, s) in translations {
            cfg = cfg.with_translation(id, *s);
        }
        for (id, f) in functions {
            cfg = cfg.with_function(id, f.build(&format!("model.functions.{id}"))?);
        }
        Ok(Some(cfg))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub monopole_k: i32,
    pub angles: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    #[serde(default = "identity")]
    pub identity: String,
    /// `[g, h, gh]`.
    #[serde(default)]
    pub products: Vec<[String; 3]>,
    /// `[f, g, f∘g]`.
    #[serde(default)]
    pub pullbacks: Vec<[String; 3]>,
}

fn identity() -> String {
    IDENTITY.to_string()
}

impl GroupSpec {
    fn build(&self) -> Result<GroupTable> {
        let mut t = GroupTable::trivial(&self.identity);
        for [g, h, gh] in &self.products {
            t.products.insert((g.clone(), h.clone()), gh.clone());
        }
        for [f, g, fg] in &self.pullbacks {
            t.pullbacks.insert((f.clone(), g.clone()), fg.clone());
        }
        t.validate().or_else(|e| field_err("group", e.to_string()))?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub name: String,
    /// Rows with this label; every row when absent.
    pub label: Option<String>,
    pub expect: ComplexNum,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    #[default]
    Supertrace,
    Trace,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: Option<String>,
    pub kind: Option<Kind>,
    pub dimension: Option<usize>,
    #[serde(default)]
    pub strata: Vec<StratumSpec>,
    pub sweep: Option<SweepSpec>,
    pub model: Option<ModelSpec>,
    /// Spectral model JSON (levels only), relative to the scenario file.
    pub model_file: Option<PathBuf>,
    pub elements: Option<Vec<String>>,
    #[serde(default)]
    pub t: Vec<f64>,
    pub q: Option<usize>,
    /// `[[function, group element], …]`.
    pub word: Option<Vec<[String; 2]>>,
    pub group: Option<GroupSpec>,
    /// Grid size of the torus identity stratum.
    pub identity_grid: Option<usize>,
    pub simplex_nodes: Option<usize>,
    #[serde(default)]
    pub trace: TraceKind,
    /// Function multiplying the heat operator inside the supertrace.
    pub multiply: Option<String>,
    /// Expected leading power for the short-time fit of heat traces.
    pub fit_leading: Option<Num>,
    pub potential: Option<Num>,
    pub layers: Option<usize>,
    pub j_max: Option<usize>,
    #[serde(default)]
    pub compare_limit: bool,
    pub limit_tol: Option<f64>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub name: String,
    pub kind: Kind,
    pub spec: Scenario,
    pub base_dir: PathBuf,
}

pub fn parse(text: &str, path: &Path, kind_hint: Option<Kind>) -> Result<LoadedScenario> {
    let spec: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse {
        path: path.display().to_string(),
        message: e.to_string().trim_end().to_string(),
    })?;
    let kind = match (spec.kind, kind_hint) {
        (Some(k), Some(h)) if k != h => {
            return field_err("kind", format!("file declares {} but {} was requested", k.as_str(), h.as_str()))
        }
        (Some(k), _) | (None, Some(k)) => k,
        (None, None) => return field_err("kind", "missing; set it in the file or use a kind subcommand"),
    };
    let name = match &spec.name {
        Some(n) => n.clone(),
        None => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into()),
    };
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
        return field_err("name", format!("`{name}` must be non-empty and use only letters, digits, '-', '_' or '.'"));
    }
    let loaded = LoadedScenario {
        name,
        kind,
        spec,
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    loaded.validate()?;
    Ok(loaded)
}

pub fn load(path: &Path, kind_hint: Option<Kind>) -> Result<LoadedScenario> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text, path, kind_hint)
}

fn validate_times(t: &[f64]) -> Result<()> {
    if t.is_empty() {
        return field_err("t", "time grid is empty");
    }
    for (i, v) in t.iter().enumerate() {
        if !(*v > 0.0 && v.is_finite()) {
            return field_err(format!("t[{i}]"), format!("times must be strictly positive, got {v}"));
        }
    }
    let increasing = t.windows(2).all(|w| w[0] < w[1]);
    let decreasing = t.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return field_err("t", "times must be strictly sorted");
    }
    Ok(())
}

impl LoadedScenario {
    fn require<'a, T>(&self, v: &'a Option<T>, field: &str) -> Result<&'a T> {
        match v {
            Some(x) => Ok(x),
            None => field_err(field, format!("required for {}", self.kind.as_str())),
        }
    }

    fn validate(&self) -> Result<()> {
        let s = &self.spec;
        if let Some(f) = &s.model_file {
            let p = self.base_dir.join(f);
            if !p.is_file() {
                return field_err("model_file", format!("{} does not exist", p.display()));
            }
        }
        match self.kind {
            Kind::FixedPointIndex => {
                if s.sweep.is_none() {
                    self.require(&s.dimension, "dimension")?;
                }
            }
            Kind::CmCocycle | Kind::JloLimit => {
                self.require(&s.q, "q")?;
                self.require(&s.word, "word")?;
                if s.strata.is_empty() && !matches!(s.model, Some(ModelSpec::Torus { .. })) {
                    return field_err("strata", "give inline strata or a torus model");
                }
            }
            Kind::HeatTrace => {
                validate_times(&s.t)?;
                if s.model.is_none() && s.model_file.is_none() {
                    return field_err("model", "give a model or a model_file");
                }
            }
            Kind::JloNumeric => {
                validate_times(&s.t)?;
                self.require(&s.q, "q")?;
                self.require(&s.word, "word")?;
                self.require(&s.model, "model")?;
            }
            Kind::VolterraCheck => {
                self.require(&s.dimension, "dimension")?;
                self.require(&s.potential, "potential")?;
            }
        }
        if let Some(ModelSpec::Torus { kmax, period, .. }) = &s.model {
            if *kmax == 0 || !(*period > 0.0) {
                return field_err("model", "torus needs kmax ≥ 1 and a positive period");
            }
        }
        Ok(())
    }

    fn word(&self) -> Result<GroupWord> {
        let w = self.require(&self.spec.word, "word")?;
        Ok(GroupWord {
            factors: w.iter().map(|[f, g]| (f.clone(), g.clone())).collect(),
        })
    }

    fn table(&self) -> Result<GroupTable> {
        match &self.spec.group {
            Some(g) => g.build(),
            None => Ok(GroupTable::trivial(IDENTITY)),
        }
    }

    fn spectral_model(&self) -> Result<SpectralModel> {
        if let Some(m) = &self.spec.model {
            return m.build();
        }
        let f = self.require(&self.spec.model_file, "model_file")?;
        let path = self.base_dir.join(f);
        let text = fs::read_to_string(&path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(SpectralModel::from_json(&text)?)
    }

    /// Strata of the composite: inline, or on the torus model the identity
    /// stratum (identity composite) or nothing (free translation).
    fn cocycle_strata<C: Coeff>(&self, composite: &str) -> Result<(Vec<FixedPointStratum<C>>, usize)> {
        if !self.spec.strata.is_empty() {
            let n = *self.require(&self.spec.dimension, "dimension")?;
            return Ok((build_strata(&self.spec.strata, n)?, n));
        }
        let model = self.spec.model.as_ref().expect("validated");
        let cfg = model.torus_config()?.expect("validated torus");
        if C::EXACT {
            return field_err("model", "torus jets are floating point; run with f64 precision");
        }
        if composite == self.table()?.identity {
            let grid = self.spec.identity_grid.unwrap_or(64);
            let s = torus_identity_stratum(cfg.period, grid, &cfg.functions)?;
            // the stratum is Complex64; re-enter through the generic coefficient type
            let nodes = s
                .nodes
                .into_iter()
                .map(|node| {
                    let mut out = FixedPointNode::new(node.weight, ModelCurvature::flat(2, NormalAction::trivial())?);
                    for (id, jet) in node.jets {
                        out = out.with_jet(
                            &id,
                            Jet {
                                value: C::from_c64(jet.value),
                                grad: jet.grad.into_iter().map(C::from_c64).collect(),
                            },
                        );
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            return Ok((vec![FixedPointStratum::new(2, nodes)?], 2));
        }
        match cfg.translations.iter().find(|(id, _)| id == composite) {
            Some((_, s)) if s.iter().any(|v| (v - v.round()).abs() > 1e-12) => Ok((Vec::new(), 2)),
            Some(_) => field_err("word", format!("composite `{composite}` is an integral translation")),
            None => field_err("word", format!("composite `{composite}` is not a torus translation")),
        }
    }
}

fn apply_checks(rows: &[Row], specs: &[CheckSpec]) -> Result<Vec<Check>> {
    specs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let expect = c.expect.to_c64(&format!("checks[{i}].expect"))?;
            let selected: Vec<&Row> = rows
                .iter()
                .filter(|r| c.label.as_ref().is_none_or(|l| &r.label == l))
                .collect();
            let worst = selected
                .iter()
                .map(|r| (r.value - expect).norm() - r.error_bound)
                .fold(f64::NEG_INFINITY, f64::max);
            let pass = !selected.is_empty() && worst <= c.tol;
            let detail = if selected.is_empty() {
                "no matching rows".to_string()
            } else {
                format!(
                    "{} rows, max |value - expect| - bound = {} (tol {})",
                    selected.len(),
                    number(worst.max(0.0)),
                    number(c.tol)
                )
            };
            Ok(Check {
                name: c.name.clone(),
                pass,
                detail,
            })
        })
        .collect()
}

fn exact_row(label: &str, parameter: String, v: &PiSum<QC>) -> Row {
    Row::new(label, parameter, v.to_c64(), 0.0).with_exact(pi_sum_string(v))
}

/// Rounding allowance for a floating-point sum of node densities.
fn rounding_bound(strata: &[FixedPointStratum<Complex64>], n: usize) -> Result<f64> {
    let mut s = 0.0;
    for st in strata {
        for node in &st.nodes {
            s += node_index_density(node, st.a, n)?.to_c64().norm() * node.weight;
        }
    }
    Ok(64.0 * f64::EPSILON * s)
}

fn run_fixed_point(s: &LoadedScenario, precision: Precision) -> Result<Vec<Row>> {
    if let Some(sweep) = &s.spec.sweep {
        if precision == Precision::Exact {
            return field_err("sweep", "angle sweeps use f64 precision");
        }
        return sweep
            .angles
            .iter()
            .enumerate()
            .map(|(i, &theta)| {
                let strata = sphere_rotation_strata(sweep.monopole_k, theta)
                    .or_else(|e| field_err(format!("sweep.angles[{i}]"), e.to_string()))?;
                Ok(Row::new("theta", number(theta), equivariant_index(&strata, 2)?, rounding_bound(&strata, 2)?))
            })
            .collect();
    }
    let n = *s.require(&s.spec.dimension, "dimension")?;
    Ok(match precision {
        Precision::Exact => {
            let v = equivariant_index_exact(&build_strata::<QC>(&s.spec.strata, n)?, n)?;
            vec![exact_row("index", "-".into(), &v)]
        }
        Precision::F64 => {
            let strata = build_strata::<Complex64>(&s.spec.strata, n)?;
            vec![Row::new("index", "-", equivariant_index(&strata, n)?, rounding_bound(&strata, n)?)]
        }
    })
}

fn run_cocycle(s: &LoadedScenario, precision: Precision) -> Result<Vec<Row>> {
    let q = *s.require(&s.spec.q, "q")?;
    let word = s.word()?;
    let table = s.table()?;
    let composite = word.resolve(&table).or_else(|e| field_err("word", e.to_string()))?.composite;
    let label = s.kind.as_str();
    Ok(match precision {
        Precision::Exact => {
            let (strata, n) = s.cocycle_strata::<QC>(&composite)?;
            let f = if s.kind == Kind::CmCocycle { cm_cocycle::<QC> } else { jlo_limit::<QC> };
            vec![exact_row(label, q.to_string(), &f(q, &word, &table, &strata, n)?)]
        }
        Precision::F64 => {
            let (strata, n) = s.cocycle_strata::<Complex64>(&composite)?;
            let f = if s.kind == Kind::CmCocycle { cm_cocycle::<Complex64> } else { jlo_limit::<Complex64> };
            let v = f(q, &word, &table, &strata, n)?.to_c64();
            vec![Row::new(label, q.to_string(), v, 64.0 * f64::EPSILON * v.norm())]
        }
    })
}

fn half_integer(e: f64) -> String {
    fraction((2.0 * e).round() as i64, 2)
}

fn run_heat(s: &LoadedScenario) -> Result<Vec<Row>> {
    let model = s.spectral_model()?;
    let elements = s.spec.elements.clone().unwrap_or_else(|| model.elements());
    let mut rows = Vec::new();
    for g in &elements {
        let mut samples = Vec::new();
        for &t in &s.spec.t {
            let e = match s.spec.trace {
                TraceKind::Supertrace => heat_supertrace(&model, g, t, s.spec.multiply.as_deref())?,
                TraceKind::Trace => heat_trace(&model, g, t)?,
            };
            samples.push((t, e.value));
            rows.push(Row::new(g.clone(), number(t), e.value, e.bound));
        }
        if let Some(lead) = &s.spec.fit_leading {
            let fit = fit_asymptotic_orders(&samples, lead.to_f64("fit_leading")?)?;
            for (e, c) in &fit.terms {
                rows.push(Row::new(format!("{g}:fit"), half_integer(*e), *c, fit.residual));
            }
        }
    }
    Ok(rows)
}

fn run_jlo_numeric(s: &LoadedScenario) -> Result<(Vec<Row>, Vec<Check>)> {
    let model_spec = s.require(&s.spec.model, "model")?;
    let model = model_spec.build()?;
    let q = *s.require(&s.spec.q, "q")?;
    let word = s.word()?;
    let nodes = s.spec.simplex_nodes.unwrap_or(200);
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for &t in &s.spec.t {
        let e = jlo_numeric(&model, &word, q, t, nodes)?;
        values.push(e.value);
        rows.push(Row::new("jlo", number(t), e.value, e.error()));
    }
    let mut checks = Vec::new();
    if s.spec.t.len() >= 2 {
        let (limit, spread) = richardson_limit(&s.spec.t, &values)?;
        rows.push(Row::new("richardson", "0", limit, spread));
        if s.spec.compare_limit {
            let table = s.table()?;
            let composite = word.resolve(&table).or_else(|e| field_err("word", e.to_string()))?.composite;
            let (strata, n) = s.cocycle_strata::<Complex64>(&composite)?;
            let exact = jlo_limit(q, &word, &table, &strata, n)?.to_c64();
            rows.push(Row::new("jlo_limit", "0", exact, 64.0 * f64::EPSILON * exact.norm()));
            let tol = s.spec.limit_tol.unwrap_or(1e-4);
            let err = (limit - exact).norm();
            checks.push(Check {
                name: "jlo-limit".into(),
                pass: err <= tol,
                detail: format!("|richardson - jlo_limit| = {} (tol {})", number(err), number(tol)),
            });
        }
    } else if s.spec.compare_limit {
        return field_err("t", "compare_limit needs at least two times");
    }
    Ok((rows, checks))
}

/// Heat coefficients of `−Δ + V` on ℝⁿ from the parametrix, against `(−V)^j/j!`.
fn volterra_rows<C: Coeff>(s: &LoadedScenario) -> Result<(Vec<Row>, bool)> {
    let n = *s.require(&s.spec.dimension, "dimension")?;
    let v: C = s.require(&s.spec.potential, "potential")?.to_coeff("potential")?;
    let j_max = s.spec.j_max.unwrap_or(3);
    let layers = s.spec.layers.unwrap_or(2 * j_max + 2);
    let mut l = ModelOperator::<C>::scalar(n, v.clone());
    for j in 0..n {
        let d = ModelOperator::d(n, j)?;
        l = l.sub(&d.compose(&d)?)?;
    }
    let p = heat_parametrix(&l, layers)?;
    let coeffs = asymptotic_coefficients(&p.layers, -2, &NormalAction::trivial(), n, j_max)?;
    let mut rows = Vec::new();
    let mut all_match = true;
    let mut power = C::one();
    for (j, c) in coeffs.coefficients.iter().enumerate() {
        let expect = power.clone() * inv_factorial::<C>(j);
        let matches = if C::EXACT {
            *c == Ext::scalar(n, expect)
        } else {
            c.max_abs_diff(&Ext::scalar(n, expect)) <= 1e-12
        };
        all_match &= matches;
        let row = Row::new("coefficient", j.to_string(), c.scalar_part().to_c64(), 0.0);
        rows.push(if C::EXACT {
            row.with_exact(format!("{:?}", c.scalar_part()))
        } else {
            row
        });
        power = power * (-v.clone());
    }
    Ok((rows, all_match))
}

/// Runs a validated scenario; check outcomes are in the report.
pub fn run(s: &LoadedScenario, precision: Precision) -> Result<ScenarioReport> {
    let mut builtin = Vec::new();
    let rows = match s.kind {
        Kind::FixedPointIndex => run_fixed_point(s, precision)?,
        Kind::CmCocycle | Kind::JloLimit => run_cocycle(s, precision)?,
        Kind::HeatTrace | Kind::JloNumeric if precision == Precision::Exact => {
            return field_err("precision", "spectral computations are floating point; use f64");
        }
        Kind::HeatTrace => run_heat(s)?,
        Kind::JloNumeric => {
            let (rows, checks) = run_jlo_numeric(s)?;
            builtin = checks;
            rows
        }
        Kind::VolterraCheck => {
            let (rows, ok) = match precision {
                Precision::Exact => volterra_rows::<QC>(s)?,
                Precision::F64 => volterra_rows::<Complex64>(s)?,
            };
            builtin.push(Check {
                name: "exact-kernel".into(),
                pass: ok,
                detail: "heat coefficients against (-V)^j/j!".into(),
            });
            rows
        }
    };
    let mut checks = builtin;
    checks.extend(apply_checks(&rows, &s.spec.checks)?);
    Ok(ScenarioReport {
        schema_version: SCHEMA_VERSION,
        scenario: s.name.clone(),
        kind: s.kind.as_str().to_string(),
        precision: precision.as_str().to_string(),
        results: rows,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_str(text: &str) -> Result<LoadedScenario> {
        parse(text, Path::new("inline.toml"), None)
    }

    #[test]
    fn ratios() {
        assert_eq!(parse_ratio("3/5"), Some((3, 5)));
        assert_eq!(parse_ratio("-0.25"), Some((-25, 100)));
        assert_eq!(parse_ratio(" 7 "), Some((7, 1)));
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(parse_ratio("x"), None);
        let c: QC = Num::Text("-0.5".into()).to_coeff("f").unwrap();
        assert_eq!(c, eqindex_core::scalar::qc(-1, 2));
    }

    #[test]
    fn negative_time_names_the_field() {
        let err = parse_str(
            r#"
kind = "heat_trace"
t = [0.1, -0.2]
[model]
type = "sphere"
lmax = 2
"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("t[1]"), "{err}");
    }

    #[test]
    fn unsorted_time_grid() {
        let err = parse_str("kind = \"heat_trace\"\nt = [0.1, 0.3, 0.2]\n[model]\ntype = \"sphere\"\nlmax = 2\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Field { ref field, .. } if field == "t"));
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_str("kind = \"heat_trace\"\nt = [0.1,\n").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, ScenarioError::Parse { .. }));
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn exact_volterra_check() {
        let s = parse_str("kind = \"volterra_check\"\ndimension = 2\npotential = \"3\"\n").unwrap();
        let r = run(&s, Precision::Exact).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.results.len(), 4);
        assert_eq!(r.results[2].value, Complex64::new(4.5, 0.0));
    }

    #[test]
    fn exact_inline_stratum() {
        // half-turn of S², untwisted: the two poles cancel
        let s = parse_str(
            r#"
kind = "fixed_point_index"
dimension = 2
[[strata]]
a = 0
[[strata.nodes]]
half_angles = [["0", "1"]]
orientation = -1
[[strata.nodes]]
half_angles = [["0", "1"]]
"#,
        )
        .unwrap();
        let r = run(&s, Precision::Exact).unwrap();
        assert_eq!(r.results[0].exact.as_deref(), Some("0"));
    }

    #[test]
    fn named_functions() {
        let p = FunctionSpec::Named("sin(0, 1)".into()).build("f").unwrap();
        assert_eq!(p, TrigPoly::sin([0, 1]));
        assert!(FunctionSpec::Named("tan(1,1)".into()).build("f").is_err());
    }
}
