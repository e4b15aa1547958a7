//! Acceptance criteria with their oracles. Each criterion runs independently and
//! reports its worst measured deviation against a fixed tolerance.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use eqindex_core::char_forms::{NormalAction, TwistData};
use eqindex_core::equivariant_index::{
    cm_constants, cm_cocycle, equivariant_index, jlo_limit, FixedPointNode, FixedPointStratum, GroupTable,
    GroupWord, Jet,
};
use eqindex_core::graded_algebra::{Ext, FormMatrix};
use eqindex_core::mehler::{
    harmonic_oscillator, mehler_fiber_by_integration, mehler_fiber_series, mehler_kernel_real,
    mehler_kernel_symbolic, ModelCurvature,
};
use eqindex_core::scalar::{inv_factorial, minus_i_pow, qc, Coeff, QC};
use eqindex_core::volterra::{
    asymptotic_coefficients, fiber_integral, getzler_order_and_model, heat_parametrix, GetzlerOperator,
    ModelOperator, OpKey,
};
use gauss_quad::GaussLegendre;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ModelError, Result};
use crate::spectral_models::*;

/// Deliberate defects used to confirm that the criteria notice them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fixture {
    #[default]
    None,
    /// Flips the sign of one Clifford generator on S², which swaps the half-spinor bundles.
    FlippedCliffordSign,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub fixture: Fixture,
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            fixture: Fixture::None,
            seed: 0x5eed_2024,
        }
    }
}

impl RunOptions {
    fn sphere_grading(&self) -> SphereGrading {
        match self.fixture {
            Fixture::None => SphereGrading::Standard,
            Fixture::FlippedCliffordSign => SphereGrading::Reversed,
        }
    }

    fn rng(&self, id: u8) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ (id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

struct Outcome {
    pass: bool,
    measured: f64,
    tolerance: f64,
    detail: String,
}

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub tags: &'static [&'static str],
    pub time_limit: Option<Duration>,
    run: fn(&RunOptions) -> Result<Outcome>,
}

impl Criterion {
    pub fn matches(&self, filter: &str) -> bool {
        let f = filter.trim().to_lowercase();
        f.is_empty() || self.id.to_string() == f || self.name.contains(&f) || self.tags.iter().any(|t| *t == f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    pub elapsed: Duration,
    pub time_limit: Option<Duration>,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let limit = self
            .time_limit
            .map(|l| format!(" (limit {:.0} s)", l.as_secs_f64()))
            .unwrap_or_default();
        write!(
            f,
            "{} {:>2} {:<28} measured={:.3e} tol={:.1e} time={:.2}s{} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance,
            self.elapsed.as_secs_f64(),
            limit,
            self.detail
        )
    }
}

pub fn criteria() -> Vec<Criterion> {
    let secs = |s: u64| Some(Duration::from_secs(s));
    vec![
        Criterion { id: 1, name: "atiyah-bott-cancellation", tags: &["index", "sphere", "heat"], time_limit: secs(5), run: c1_cancellation },
        Criterion { id: 2, name: "twisted-equivariant-index", tags: &["index", "sphere"], time_limit: secs(30), run: c2_twisted_index },
        Criterion { id: 3, name: "parametrix-exact-kernel", tags: &["volterra", "exact"], time_limit: None, run: c3_parametrix },
        Criterion { id: 4, name: "mehler-oracle", tags: &["mehler"], time_limit: secs(5), run: c4_mehler_oracle },
        Criterion { id: 5, name: "fiber-integral-identity", tags: &["mehler", "volterra", "exact"], time_limit: None, run: c5_fiber_identity },
        Criterion { id: 6, name: "getzler-model-lichnerowicz", tags: &["getzler", "volterra", "exact"], time_limit: None, run: c6_lichnerowicz },
        Criterion { id: 7, name: "odd-order-vanishing", tags: &["getzler", "mehler", "parity", "exact"], time_limit: None, run: c7_odd_vanishing },
        Criterion { id: 8, name: "mckean-singer-constancy", tags: &["heat", "sphere", "torus"], time_limit: None, run: c8_mckean_singer },
        Criterion { id: 9, name: "jlo-limit", tags: &["jlo", "torus"], time_limit: secs(60), run: c9_jlo_limit },
        Criterion { id: 10, name: "cm-transverse-class", tags: &["cm", "exact"], time_limit: None, run: c10_cm_transverse },
        Criterion { id: 11, name: "cm-constant-identity", tags: &["cm", "exact"], time_limit: None, run: c11_constants },
        Criterion { id: 12, name: "heat-localization", tags: &["heat", "torus", "localization"], time_limit: None, run: c12_localization },
    ]
}

pub fn run_criterion(c: &Criterion, opts: &RunOptions) -> CriterionReport {
    let start = Instant::now();
    let outcome = (c.run)(opts);
    let elapsed = start.elapsed();
    let (mut pass, measured, tolerance, mut detail) = match outcome {
        Ok(o) => (o.pass, o.measured, o.tolerance, o.detail),
        Err(e) => (false, f64::NAN, f64::NAN, format!("error: {e}")),
    };
    if let Some(limit) = c.time_limit {
        if elapsed > limit {
            pass = false;
            detail = format!("{detail}; exceeded time limit");
        }
    }
    CriterionReport {
        id: c.id,
        name: c.name.to_string(),
        pass,
        measured,
        tolerance,
        detail,
        elapsed,
        time_limit: c.time_limit,
    }
}

/// Runs every criterion matching `filter` (id, tag or name substring).
pub fn run_all(filter: Option<&str>, opts: &RunOptions) -> Vec<CriterionReport> {
    criteria()
        .iter()
        .filter(|c| filter.is_none_or(|f| c.matches(f)))
        .map(|c| run_criterion(c, opts))
        .collect()
}

fn outcome(measured: f64, tolerance: f64, detail: String) -> Outcome {
    Outcome {
        pass: measured <= tolerance,
        measured,
        tolerance,
        detail,
    }
}

/// Exact checks: `failures` mismatches out of `total`.
fn exact_outcome(failures: usize, total: usize, what: &str) -> Outcome {
    Outcome {
        pass: failures == 0 && total > 0,
        measured: failures as f64,
        tolerance: 0.0,
        detail: format!("{failures}/{total} {what} differ"),
    }
}

const SPHERE_ANGLES: [f64; 5] = [PI / 6.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, PI];

fn named_rotations(angles: &[f64]) -> Vec<(String, f64)> {
    angles.iter().enumerate().map(|(i, &a)| (format!("r{i}"), a)).collect()
}

fn c1_cancellation(opts: &RunOptions) -> Result<Outcome> {
    let rotations = named_rotations(&SPHERE_ANGLES);
    let mut index_worst: f64 = 0.0;
    for &theta in &SPHERE_ANGLES {
        index_worst = index_worst.max(equivariant_index(&sphere_rotation_strata(0, theta)?, 2)?.norm());
    }
    let model = build_sphere_model_graded(16, 0, &rotations, opts.sphere_grading())?;
    let mut heat_excess: f64 = 0.0;
    let mut heat_worst: f64 = 0.0;
    for (id, _) in &rotations {
        for t in [0.1, 1.0] {
            let h = heat_supertrace(&model, id, t, None)?;
            heat_worst = heat_worst.max(h.value.norm());
            heat_excess = heat_excess.max(h.value.norm() - h.bound);
        }
    }
    let tol = 1e-10;
    Ok(Outcome {
        pass: index_worst < tol && heat_excess <= 0.0,
        measured: index_worst,
        tolerance: tol,
        detail: format!("max |index| {index_worst:.1e}, max |heat supertrace| {heat_worst:.1e} within truncation bounds: {}", heat_excess <= 0.0),
    })
}

fn c2_twisted_index(opts: &RunOptions) -> Result<Outcome> {
    let angles = [PI / 3.0, PI / 2.0];
    let rotations = named_rotations(&angles);
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        let model = build_sphere_model_graded(12, k, &rotations, opts.sphere_grading())?;
        let kernel = model
            .levels
            .iter()
            .find(|l| l.lambda == 0.0)
            .ok_or_else(|| ModelError::Invalid(format!("no harmonic spinors for k = {k}")))?;
        for ((id, _), &theta) in rotations.iter().zip(&angles) {
            let (plus, minus) = kernel.character(id).ok_or_else(|| ModelError::UnknownElement(id.clone()))?;
            let index = equivariant_index(&sphere_rotation_strata(k, theta)?, 2)?;
            worst = worst.max((index - (plus - minus)).norm());
        }
    }
    Ok(outcome(worst, 1e-8, "fixed-point index vs kernel character, k = 1..3".into()))
}

fn c3_parametrix(_: &RunOptions) -> Result<Outcome> {
    let n = 2;
    let (mut failures, mut total) = (0, 0);
    for v in [0, 1, 3] {
        let mut l = ModelOperator::<QC>::scalar(n, qc(v, 1));
        for j in 0..n {
            let d = ModelOperator::d(n, j)?;
            l = l.sub(&d.compose(&d)?)?;
        }
        let p = heat_parametrix(&l, 8)?;
        let coeffs = asymptotic_coefficients(&p.layers, -2, &NormalAction::trivial(), n, 3)?;
        // the (4π)^{−1} prefactor is carried separately; the leading power is t^{−1}
        if coeffs.leading_two_exp != -2 {
            failures += 1;
        }
        for (j, c) in coeffs.coefficients.iter().enumerate() {
            let expect = qc(-v, 1).powi(j as i32) * inv_factorial::<QC>(j);
            total += 1;
            if *c != Ext::scalar(n, expect) {
                failures += 1;
            }
        }
    }
    Ok(exact_outcome(failures, total, "heat coefficients"))
}

/// Normalized Hermite functions `ψ_k(x)` of `−d² + ω²x²` (eigenvalue `ω(2k+1)`).
fn hermite_functions(omega: f64, x: f64, count: usize) -> Vec<f64> {
    let xi = omega.sqrt() * x;
    let mut out = Vec::with_capacity(count);
    out.push((omega / PI).powf(0.25) * (-0.5 * xi * xi).exp());
    if count > 1 {
        out.push(2f64.sqrt() * xi * out[0]);
    }
    for k in 1..count.saturating_sub(1) {
        let next = (2.0 / (k + 1) as f64).sqrt() * xi * out[k] - (k as f64 / (k + 1) as f64).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

fn c4_mehler_oracle(opts: &RunOptions) -> Result<Outcome> {
    let mut rng = opts.rng(4);
    let modes = 60;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (omega, x, y, t) = (
            rng.gen_range(0.5..2.0),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(0.3..2.0),
        );
        let (px, py) = (hermite_functions(omega, x, modes), hermite_functions(omega, y, modes));
        let series: f64 = (0..modes)
            .map(|k| (-t * omega * (2 * k + 1) as f64).exp() * px[k] * py[k])
            .sum();
        worst = worst.max((mehler_kernel_real(&[omega], &[x], &[y], t)? - series).abs());
    }
    // ∫ K_s(x,z) K_u(z,y) dz = K_{s+u}(x,y), trapezoid on [−12, 12]
    let mut semigroup: f64 = 0.0;
    for _ in 0..5 {
        let (omega, x, y, s, u) = (
            rng.gen_range(0.5..2.0),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(0.1..1.0),
            rng.gen_range(0.1..1.0),
        );
        let (lo, hi, steps) = (-12.0, 12.0, 2400);
        let h = (hi - lo) / steps as f64;
        let mut acc = 0.0;
        for i in 0..=steps {
            let z = lo + i as f64 * h;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            acc += w * mehler_kernel_real(&[omega], &[x], &[z], s)? * mehler_kernel_real(&[omega], &[z], &[y], u)?;
        }
        semigroup = semigroup.max((acc * h - mehler_kernel_real(&[omega], &[x], &[y], s + u)?).abs());
    }
    Ok(Outcome {
        pass: worst < 1e-8 && semigroup < 1e-6,
        measured: worst,
        tolerance: 1e-8,
        detail: format!("Hermite expansion {worst:.1e}, semigroup {semigroup:.1e} (tol 1e-6)"),
    })
}

fn random_rational(rng: &mut ChaCha8Rng) -> QC {
    qc(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

fn random_form(rng: &mut ChaCha8Rng, n: usize, degree: usize) -> Ext<QC> {
    let mut w = Ext::zero(n);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == degree && rng.gen_bool(0.7) {
            w.add_term(mask, random_rational(rng));
        }
    }
    w
}

/// `(cos θ/2, sin θ/2)` pairs with rational entries.
const RATIONAL_HALF_ANGLES: [((i64, i64), (i64, i64)); 5] =
    [((0, 1), (1, 1)), ((3, 5), (4, 5)), ((4, 5), (3, 5)), ((5, 13), (12, 13)), ((12, 13), (5, 13))];

fn random_normal(rng: &mut ChaCha8Rng, planes: usize) -> Result<NormalAction<QC>> {
    let half = (0..planes)
        .map(|_| {
            let ((cn, cd), (sn, sd)) = RATIONAL_HALF_ANGLES[rng.gen_range(0..RATIONAL_HALF_ANGLES.len())];
            (qc(cn, cd), qc(sn, sd))
        })
        .collect();
    Ok(NormalAction::from_half_angles(half)?)
}

/// Random nilpotent curvature data; R″ is block diagonal so it commutes with φ^N.
fn random_model_curvature(rng: &mut ChaCha8Rng, n: usize, a: usize) -> Result<ModelCurvature<QC>> {
    let planes = (n - a) / 2;
    let normal = random_normal(rng, planes)?;
    let mut upper = Vec::new();
    for i in 0..a {
        for j in i + 1..a {
            upper.push((i, j, random_form(rng, n, 2)));
        }
    }
    let rp = FormMatrix::antisymmetric(n, a, &upper)?;
    let blocks: Vec<_> = (0..planes).map(|p| (2 * p, 2 * p + 1, random_form(rng, n, 2))).collect();
    let rpp = FormMatrix::antisymmetric(n, n - a, &blocks)?;
    Ok(ModelCurvature::new(rp, rpp, normal, TwistData::trivial(n))?)
}

fn c5_fiber_identity(opts: &RunOptions) -> Result<Outcome> {
    let mut rng = opts.rng(5);
    let mut failures = 0;
    let cases = [(2, 0), (2, 2), (4, 0), (4, 2), (4, 4), (6, 0), (6, 2), (6, 4), (4, 2), (6, 6)];
    for &(n, a) in &cases {
        let mc = random_model_curvature(&mut rng, n, a)?;
        if mehler_fiber_series(&mc)? != mehler_fiber_by_integration(&mc)? {
            failures += 1;
        }
    }
    Ok(exact_outcome(failures, cases.len(), "closed-form fiber integrals"))
}

fn c6_lichnerowicz(opts: &RunOptions) -> Result<Outcome> {
    let mut rng = opts.rng(6);
    let mut failures = 0;
    let cases = 5;
    for case in 0..cases {
        let n = if case % 2 == 0 { 2 } else { 4 };
        let mut upper = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                upper.push((i, j, random_form(&mut rng, n, 2)));
            }
        }
        let r = FormMatrix::antisymmetric(n, n, &upper)?;
        let f = random_form(&mut rng, n, 2);
        let cc = |k: usize, l: usize| -> Result<GetzlerOperator<QC>> {
            Ok(GetzlerOperator::clifford(n, k)?.compose(&GetzlerOperator::clifford(n, l)?)?)
        };

        // ∇_i = ∂_i − ¼ Σ_j Σ_{k<l} R_ijkl x^j c(e_k) c(e_l)
        let mut l_op = GetzlerOperator::<QC>::zero(n);
        for i in 0..n {
            let mut nabla = GetzlerOperator::d(n, i)?;
            for j in 0..n {
                for (mask, c) in r.get(i, j).terms() {
                    let (k, l) = (mask.trailing_zeros() as usize, 31 - mask.leading_zeros() as usize);
                    let term = GetzlerOperator::x(n, j)?.compose(&cc(k, l)?)?.scale(&(c.clone() * qc(-1, 4)));
                    nabla = nabla.add(&term)?;
                }
            }
            l_op = l_op.sub(&nabla.compose(&nabla)?)?;
        }
        let kappa = random_rational(&mut rng);
        l_op = l_op.add(&GetzlerOperator::scalar(n, kappa * qc(1, 4)))?;
        for (mask, c) in f.terms() {
            let (k, l) = (mask.trailing_zeros() as usize, 31 - mask.leading_zeros() as usize);
            l_op = l_op.add(&cc(k, l)?.scale(c))?;
        }
        // lower Getzler order terms
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let junk = GetzlerOperator::x(n, j)?
            .compose(&GetzlerOperator::d(n, i)?)?
            .add(&GetzlerOperator::clifford(n, i)?.scale(&random_rational(&mut rng)))?
            .add(&GetzlerOperator::x(n, i)?.compose(&GetzlerOperator::x(n, j)?)?.compose(&cc(0, 1)?)?)?
            .add(&GetzlerOperator::x(n, j)?.scale(&random_rational(&mut rng)))?;
        l_op = l_op.add(&junk)?;

        let expect = harmonic_oscillator(&r)?.add(&ModelOperator::form(f))?;
        match getzler_order_and_model(&l_op) {
            Some((2, model)) if model == expect => {}
            _ => failures += 1,
        }
    }
    Ok(exact_outcome(failures, cases, "model operators"))
}

fn random_multi_index(rng: &mut ChaCha8Rng, n: usize, max_order: usize) -> Vec<u32> {
    let mut m = vec![0u32; n];
    for _ in 0..rng.gen_range(0..=max_order) {
        m[rng.gen_range(0..n)] += 1;
    }
    m
}

/// Random homogeneous model operator of Getzler order `m`.
fn random_model_operator(rng: &mut ChaCha8Rng, n: usize, m: i32) -> ModelOperator<QC> {
    let mut op = ModelOperator::zero(n);
    while op.is_zero() {
        for _ in 0..4 {
            let alpha = random_multi_index(rng, n, 2);
            let beta = random_multi_index(rng, n, 2);
            let s = rng.gen_range(0..=1u32);
            let degree = m - beta.iter().sum::<u32>() as i32 + alpha.iter().sum::<u32>() as i32 - 2 * s as i32;
            if degree < 0 || degree > n as i32 {
                continue;
            }
            op.add_term(OpKey::new(alpha, beta, s), random_form(rng, n, degree as usize));
        }
    }
    op
}

fn c7_odd_vanishing(opts: &RunOptions) -> Result<Outcome> {
    let mut rng = opts.rng(7);
    let target = 20;
    let (mut accepted, mut failures, mut attempts) = (0, 0, 0);
    while accepted < target {
        attempts += 1;
        if attempts > 50 * target {
            return Err(ModelError::Invalid("could not draw operators with a non-vanishing fiber integral".into()));
        }
        let n = if rng.gen_bool(0.5) { 2 } else { 4 };
        let a = 2 * rng.gen_range(0..=n / 2);
        let m = [-1, 1, 3][rng.gen_range(0..3)];
        let mc = random_model_curvature(&mut rng, n, a)?;
        let p = random_model_operator(&mut rng, n, m);
        if p.order() != Some(m) {
            failures += 1;
            accepted += 1;
            continue;
        }
        let series = fiber_integral(&p.apply_to_kernel(&mehler_kernel_symbolic(&mc.full())?)?, &mc.normal, a)?;
        if series.is_zero() {
            continue;
        }
        accepted += 1;
        // str[φ^S I] at t^{−(m_Q/2)−1}, m_Q = m − 2
        let slot = series.coeff(-m);
        let supertrace = minus_i_pow::<QC>(n / 2)
            * QC::from_i64(1 << (a / 2))
            * mc.normal.det_sqrt_one_minus()
            * slot.berezin_horizontal(a)?;
        if !supertrace.is_zero() || !slot.bidegree_part(a, a, 0).is_zero() {
            failures += 1;
        }
    }
    Ok(exact_outcome(failures, target, "odd-order slot coefficients"))
}

fn c8_mckean_singer(opts: &RunOptions) -> Result<Outcome> {
    let times = [0.05, 0.5, 5.0];
    let mut models = Vec::new();
    let rotations = named_rotations(&SPHERE_ANGLES);
    for k in 0..=3 {
        models.push((format!("sphere k={k}"), build_sphere_model_graded(20, k, &rotations, opts.sphere_grading())?));
    }
    for spin in SpinStructure::ALL {
        let cfg = TorusConfig::new(20, spin)
            .with_translation("half1", [0.5, 0.0])
            .with_translation("half2", [0.0, 0.5])
            .with_translation("half12", [0.5, 0.5])
            .with_translation("generic", [1.0 / 3.0, 0.25]);
        models.push((format!("torus eps={:?}", spin.eps()), build_torus_model(&cfg)?));
    }
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_spread: f64 = 0.0;
    let mut checked = 0;
    for (_, model) in &models {
        for g in model.elements() {
            let est: Vec<Estimate> = times
                .iter()
                .map(|&t| heat_supertrace(model, &g, t, None))
                .collect::<Result<_>>()?;
            let mut spread: f64 = 0.0;
            for a in &est {
                for b in &est {
                    spread = spread.max((a.value - b.value).norm());
                }
            }
            let allowed = 1e-10 + est.iter().map(|e| e.bound).sum::<f64>();
            worst_spread = worst_spread.max(spread);
            worst_excess = worst_excess.max(spread - allowed);
            checked += 1;
        }
    }
    Ok(Outcome {
        pass: worst_excess <= 0.0,
        measured: worst_spread,
        tolerance: 1e-10,
        detail: format!("{checked} (model, element) pairs; tolerance adds the truncation bounds"),
    })
}

/// `f⁰ = cos 2π(x₁+x₂)/L`, `f¹ = sin 2πx₁/L`, `f² = sin 2πx₂/L`.
pub fn torus_trig_functions() -> Vec<(String, TrigPoly)> {
    vec![
        ("f0".into(), TrigPoly::cos([1, 1])),
        ("f1".into(), TrigPoly::sin([1, 0])),
        ("f2".into(), TrigPoly::sin([0, 1])),
    ]
}

pub const JLO_TIMES: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

fn c9_jlo_limit(_: &RunOptions) -> Result<Outcome> {
    let period = 4.0;
    let functions = torus_trig_functions();
    let mut cfg = TorusConfig::new(20, SpinStructure::default()).with_period(period);
    for (id, f) in &functions {
        cfg = cfg.with_function(id, f.clone());
    }
    let model = build_torus_model(&cfg)?;
    let word = GroupWord::new(&[("f0", IDENTITY), ("f1", IDENTITY), ("f2", IDENTITY)]);
    let mut values = Vec::new();
    let mut quad: f64 = 0.0;
    for &t in &JLO_TIMES {
        let e = jlo_numeric(&model, &word, 1, t, 200)?;
        quad = quad.max(e.quadrature_error);
        values.push(e.value);
    }
    let (limit, extrap) = richardson_limit(&JLO_TIMES, &values)?;
    let stratum = torus_identity_stratum(period, 64, &functions)?;
    let exact = jlo_limit(1, &word, &GroupTable::trivial(IDENTITY), &[stratum], 2)?.to_c64();
    let err = (limit - exact).norm();
    Ok(outcome(
        err,
        1e-4,
        format!("extrapolated {limit:.8} vs limit {exact:.8}; Richardson spread {extrap:.1e}, quadrature {quad:.1e}"),
    ))
}

/// Group `{id, g}` of order two acting on the listed functions.
fn order_two_table(g: &str, functions: &[&str]) -> GroupTable {
    let mut table = GroupTable::trivial(IDENTITY);
    for (a, b, c) in [(IDENTITY, g, g), (g, IDENTITY, g), (g, g, IDENTITY)] {
        table.products.insert((a.into(), b.into()), c.into());
    }
    for f in functions {
        table.pullbacks.insert((f.to_string(), g.into()), format!("{f}@{g}"));
    }
    table
}

/// Exact strata of the half-turn of S² with the k = 1 monopole and random jets.
fn half_turn_strata(rng: &mut ChaCha8Rng, functions: &[&str]) -> Result<Vec<FixedPointStratum<QC>>> {
    let n = 2;
    let normal = NormalAction::from_half_angles(vec![(qc(0, 1), qc(1, 1))])?;
    let mut nodes = Vec::new();
    for orientation in [-1i8, 1] {
        let phase = QC::imag_unit() * qc(orientation as i64, 1);
        let rpp = FormMatrix::antisymmetric(n, 2, &[(0, 1, random_form(rng, n, 2))])?;
        let twist = TwistData::line(random_form(rng, n, 2), phase)?;
        let mc = ModelCurvature::new(FormMatrix::zeros(n, 0), rpp, normal.clone(), twist)?;
        let mut node = FixedPointNode::new(1.0, mc).with_orientation(orientation);
        for f in functions {
            let jet = Jet {
                value: random_rational(rng),
                grad: vec![random_rational(rng), random_rational(rng)],
            };
            // the half-turn acts by −1 on the tangent plane at the pole
            let turned = Jet {
                value: jet.value.clone(),
                grad: jet.grad.iter().map(|c| -c.clone()).collect(),
            };
            node = node.with_jet(f, jet).with_jet(&format!("{f}@r"), turned);
        }
        nodes.push(node);
    }
    Ok(vec![FixedPointStratum::new(0, nodes)?])
}

/// `(2iπ)^{−1}/2! ∫_{[0,1]²} f⁰ (∂₁f¹∂₂f² − ∂₂f¹∂₁f²)` by tensor Gauss–Legendre.
fn torus_cm_quadrature() -> Complex64 {
    let tau = 2.0 * PI;
    let f0 = |x: f64, y: f64| (tau * (x + y)).cos() + 0.3 * (tau * y).sin();
    let df1 = |x: f64, y: f64| [tau * (tau * x).cos() - 0.5 * tau * (tau * (x - y)).sin(), 0.5 * tau * (tau * (x - y)).sin()];
    let df2 = |x: f64, y: f64| [-0.7 * 2.0 * tau * (2.0 * tau * x).sin(), tau * (tau * y).cos()];
    let rule = GaussLegendre::new(std::num::NonZeroUsize::new(40).expect("nonzero"));
    let pairs: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    let mut acc = 0.0;
    for &(x, wx) in &pairs {
        for &(y, wy) in &pairs {
            let (a, b) = (df1(x, y), df2(x, y));
            acc += wx * wy * f0(x, y) * (a[0] * b[1] - a[1] * b[0]);
        }
    }
    Complex64::new(acc, 0.0) / Complex64::new(0.0, 2.0 * PI) / 2.0
}

fn c10_cm_transverse(opts: &RunOptions) -> Result<Outcome> {
    let mut rng = opts.rng(10);
    let names = ["f0", "f1", "f2"];
    let table = order_two_table("r", &names);
    let words = [
        [("f0", "r"), ("f1", IDENTITY), ("f2", IDENTITY)],
        [("f0", IDENTITY), ("f1", "r"), ("f2", IDENTITY)],
        [("f0", IDENTITY), ("f1", IDENTITY), ("f2", "r")],
        [("f0", "r"), ("f1", "r"), ("f2", "r")],
    ];
    let mut failures = 0;
    let mut total = 0;
    for _ in 0..5 {
        let strata = half_turn_strata(&mut rng, &names)?;
        for w in &words {
            let word = GroupWord::new(w);
            debug_assert_eq!(word.resolve(&table)?.composite, "r");
            total += 1;
            if !cm_cocycle(1, &word, &table, &strata, 2)?.is_zero() {
                failures += 1;
            }
        }
    }
    // fixed-point-free torus translation: empty fixed set
    let shift = order_two_table("s", &names);
    for w in &words {
        let w: Vec<(&str, &str)> = w.iter().map(|&(f, g)| (f, if g == "r" { "s" } else { g })).collect();
        total += 1;
        if !cm_cocycle::<Complex64>(1, &GroupWord::new(&w), &shift, &[], 2)?.is_zero() {
            failures += 1;
        }
    }

    let functions = vec![
        ("f0".to_string(), TrigPoly { terms: [TrigPoly::cos([1, 1]).terms, scaled(TrigPoly::sin([0, 1]), 0.3).terms].concat() }),
        ("f1".to_string(), TrigPoly { terms: [TrigPoly::sin([1, 0]).terms, scaled(TrigPoly::cos([1, -1]), 0.5).terms].concat() }),
        ("f2".to_string(), TrigPoly { terms: [scaled(TrigPoly::cos([2, 0]), 0.7).terms, TrigPoly::sin([0, 1]).terms].concat() }),
    ];
    let stratum = torus_identity_stratum(1.0, 64, &functions)?;
    let word = GroupWord::new(&[("f0", IDENTITY), ("f1", IDENTITY), ("f2", IDENTITY)]);
    let value = cm_cocycle(1, &word, &GroupTable::trivial(IDENTITY), &[stratum], 2)?.to_c64();
    let oracle = torus_cm_quadrature();
    let err = (value - oracle).norm();
    let tol = 1e-8;
    Ok(Outcome {
        pass: failures == 0 && err < tol,
        measured: err,
        tolerance: tol,
        detail: format!("{failures}/{total} non-identity composites nonzero; identity composite {value:.10} vs quadrature {oracle:.10}"),
    })
}

fn scaled(mut p: TrigPoly, c: f64) -> TrigPoly {
    for (a, _) in &mut p.terms {
        *a *= c;
    }
    p
}

fn c11_constants(_: &RunOptions) -> Result<Outcome> {
    let mut failures = 0;
    for q in 1..=6usize {
        let gamma_q: BigInt = (1..q as u64).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i));
        let fact_2q: BigInt = (1..=2 * q as u64).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i));
        let lhs = cm_constants(q, &vec![0; 2 * q])? / BigRational::from_integer(gamma_q);
        if lhs != BigRational::new(BigInt::from(1), fact_2q) {
            failures += 1;
        }
    }
    Ok(exact_outcome(failures, 6, "constants c_{q,0}/Γ(q)"))
}

pub const LOCALIZATION_TIMES: [f64; 4] = [0.0005, 0.001, 0.002, 0.004];

fn c12_localization(_: &RunOptions) -> Result<Outcome> {
    let model = build_torus_model(&TorusConfig::new(64, SpinStructure::default()).with_translation("s", [0.5, 0.5]))?;
    let mut samples = Vec::new();
    let mut supertrace: f64 = 0.0;
    for &t in &LOCALIZATION_TIMES {
        samples.push((t, heat_trace(&model, "s", t)?.value));
        supertrace = supertrace.max(heat_supertrace(&model, "s", t, None)?.value.norm());
    }
    let fit = fit_asymptotic_orders(&samples, -1.0)?;
    let worst = fit.max_negative_coefficient();
    let powers: BTreeMap<String, f64> = fit.terms.iter().map(|(e, c)| (format!("{e}"), c.norm())).collect();
    Ok(outcome(
        worst,
        1e-8,
        format!("fitted |c_e| {powers:?}; max |supertrace| {supertrace:.1e}"),
    ))
}
