use std::f64::consts::PI;

use eqindex::spectral_models::*;
use eqindex_core::equivariant_index::GroupWord;
use num_complex::Complex64;
use proptest::prelude::*;

/// Divided difference `e^{−x}[x₀,…,x_k]`, confluent points via the Taylor limit.
fn exp_divided_difference(x: &[f64]) -> f64 {
    if x.len() == 1 {
        return (-x[0]).exp();
    }
    let (lo, hi) = (x[0], x[x.len() - 1]);
    if (hi - lo).abs() < 1e-7 {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let k = x.len() - 1;
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        return (-1f64).powi(k as i32) * (-mean).exp() / fact;
    }
    (exp_divided_difference(&x[1..]) - exp_divided_difference(&x[..x.len() - 1])) / (hi - lo)
}

/// `t Str[∫ f⁰ e^{−s₀tD²} c(df¹) e^{−s₁tD²} c(df²) e^{−s₂tD²}]` for
/// `f⁰ = cos 2π(x₁+x₂)/L`, `f¹ = sin 2πx₁/L`, `f² = sin 2πx₂/L`, summed over the two
/// closed shift chains at each plane wave.
fn torus_jlo_oracle(t: f64, kmax: i64, eps: [f64; 2], period: f64) -> Complex64 {
    let energy = |p: [f64; 2]| 4.0 * PI * PI * t * (p[0] * p[0] + p[1] * p[1]) / (period * period);
    let mut total = 0.0;
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            for sgn in [1.0, -1.0] {
                let a = [k1 as f64 + eps[0], k2 as f64 + eps[1]];
                let b = [a[0], a[1] + sgn];
                let c = [a[0] + sgn, a[1] + sgn];
                if [b, c].iter().any(|p| (p[0] - eps[0]).abs() > kmax as f64 || (p[1] - eps[1]).abs() > kmax as f64) {
                    continue;
                }
                let mut xs = [energy(a), energy(b), energy(c)];
                xs.sort_by(f64::total_cmp);
                total += exp_divided_difference(&xs);
            }
        }
    }
    // ½ (π/L)² from the Fourier coefficients, str(c₁c₂) = −2i
    Complex64::new(0.0, -2.0) * (0.5 * (PI / period).powi(2) * t * total)
}

fn trig_torus(kmax: usize, spin: SpinStructure, period: f64) -> SpectralModel {
    let cfg = TorusConfig::new(kmax, spin)
        .with_period(period)
        .with_translation("half", [0.5, 0.5])
        .with_function("f0", TrigPoly::cos([1, 1]))
        .with_function("f1", TrigPoly::sin([1, 0]))
        .with_function("f2", TrigPoly::sin([0, 1]));
    build_torus_model(&cfg).unwrap()
}

fn trig_word() -> GroupWord {
    GroupWord::new(&[("f0", IDENTITY), ("f1", IDENTITY), ("f2", IDENTITY)])
}

#[test]
fn torus_jlo_matches_divided_differences() {
    for (spin, period, t) in [
        (SpinStructure::default(), 1.0, 0.1),
        (SpinStructure { antiperiodic: [true, true] }, 1.0, 0.05),
        (SpinStructure::default(), 4.0, 0.4),
    ] {
        let model = trig_torus(12, spin, period);
        let v = jlo_numeric(&model, &trig_word(), 1, t, 200).unwrap();
        let oracle = torus_jlo_oracle(t, 12, spin.eps(), period);
        assert!((v.value - oracle).norm() < 1e-10, "{:?} vs {oracle:?}", v.value);
        assert!(v.quadrature_error < 1e-9);
    }
}

#[test]
fn jlo_degree_zero_is_heat_supertrace() {
    let model = trig_torus(6, SpinStructure::default(), 1.0);
    let w = GroupWord::new(&[("f0", "half")]);
    let j = jlo_numeric(&model, &w, 0, 0.2, 10).unwrap();
    let h = heat_supertrace(&model, "half", 0.2, Some("f0")).unwrap();
    assert_eq!(j.value, h.value);
}

#[test]
fn torus_supertrace_of_multiplication_vanishes() {
    // flat torus: index density is zero, matching the degree-0 CM value
    let model = trig_torus(8, SpinStructure::default(), 1.0);
    for t in [0.01, 0.1, 1.0] {
        let h = heat_supertrace(&model, IDENTITY, t, Some("f0")).unwrap();
        assert!(h.value.norm() <= h.bound + 1e-14);
    }
}

#[test]
fn bracket_cyclicity() {
    // ⟨X⁰, X¹, X²⟩ = (−1)^{|X²|(|X⁰|+|X¹|)} ⟨X², X⁰, X¹⟩ with X⁰ even, X¹, X² odd
    let model = trig_torus(10, SpinStructure { antiperiodic: [false, true] }, 1.0);
    let me = model.matrix_elements.as_ref().unwrap();
    let x0 = me.op("f0").unwrap().clone();
    let x1 = me.op("d:f1").unwrap().clone();
    let x2 = me.op("d:f2").unwrap().clone();
    let a = jlo_bracket(&model, &[x0.clone(), x1.clone(), x2.clone()], 0.1, 400).unwrap();
    let b = jlo_bracket(&model, &[x2, x0, x1], 0.1, 400).unwrap();
    assert!((a.value + b.value).norm() < 1e-8, "{:?} {:?}", a.value, b.value);
}

#[test]
fn sphere_kernel_dimensions() {
    for lmax in [1, 3, 6] {
        let m = build_sphere_model(lmax, 0, &[]).unwrap();
        assert!(m.levels.iter().all(|l| l.lambda != 0.0));
    }
    for k in [-3, -1, 1, 2, 3] {
        let m = build_sphere_model(4, k, &[]).unwrap();
        let z = m.levels.iter().find(|l| l.lambda == 0.0).unwrap();
        let index = z.dim_plus as i32 - z.dim_minus as i32;
        assert_eq!(index, k);
    }
}

#[test]
fn sphere_spectrum_closed_form() {
    // λ² = (j+½)² − k²/4 with multiplicity 2j+1
    let k = 3;
    let m = build_sphere_model(5, k, &[]).unwrap();
    for l in m.levels.iter().filter(|l| l.lambda > 0.0) {
        let j = (l.lambda * l.lambda + (k * k) as f64 / 4.0).sqrt() - 0.5;
        assert!((j - j.round()).abs() < 1e-9);
        assert_eq!(l.dim_plus, 2 * j.round() as usize + 1);
    }
}

#[test]
fn untwisted_sphere_supertrace_vanishes() {
    let rot: Vec<(String, f64)> = [PI / 6.0, PI / 2.0, PI].iter().enumerate().map(|(i, &t)| (format!("r{i}"), t)).collect();
    let m = build_sphere_model(10, 0, &rot).unwrap();
    for (id, _) in &rot {
        for t in [0.1, 1.0] {
            let h = heat_supertrace(&m, id, t, None).unwrap();
            assert!(h.value.norm() <= h.bound + 1e-12, "{id} t={t}: {:?}", h.value);
        }
    }
}

#[test]
fn monopole_mckean_singer() {
    let theta = 1.1;
    let m = build_sphere_model(20, 2, &[("r".into(), theta)]).unwrap();
    let vals: Vec<_> = [0.05, 0.5, 5.0].iter().map(|&t| heat_supertrace(&m, "r", t, None).unwrap()).collect();
    let expect = (theta).sin() / (theta / 2.0).sin();
    for v in &vals {
        assert!((v.value - Complex64::new(expect, 0.0)).norm() < 1e-10 + v.bound);
    }
}

#[test]
fn fixed_point_strata_match_kernel_character() {
    for k in 1..=3 {
        for theta in [PI / 3.0, 2.0] {
            let strata = sphere_rotation_strata(k, theta).unwrap();
            let v = eqindex_core::equivariant_index::equivariant_index(&strata, 2).unwrap();
            let expect = (k as f64 * theta / 2.0).sin() / (theta / 2.0).sin();
            assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn torus_localization_of_translation() {
    let model = build_torus_model(&TorusConfig::new(64, SpinStructure::default()).with_translation("s", [0.5, 0.5])).unwrap();
    for t in [0.001, 0.002, 0.004] {
        let h = heat_trace(&model, "s", t).unwrap();
        let poisson = (-1.0 / (8.0 * t)).exp() * 8.0 / (4.0 * PI * t);
        assert!(h.value.norm() <= poisson + h.bound + 1e-12, "t={t}: {:?}", h.value);
        let s = heat_supertrace(&model, "s", t, None).unwrap();
        assert!(s.value.norm() < 1e-12);
    }
}

#[test]
fn torus_weyl_exponent() {
    let model = build_torus_model(&TorusConfig::new(80, SpinStructure::default())).unwrap();
    let samples: Vec<_> = (0..5)
        .map(|i| {
            let t = 0.004 * 0.5f64.powi(i);
            (t, heat_trace(&model, IDENTITY, t).unwrap().value)
        })
        .collect();
    let fit = fit_asymptotic_orders(&samples, -1.0).unwrap();
    assert!((fit.exponent.unwrap() + 1.0).abs() < 1e-6);
    // 2 × (4πt)^{−1}
    assert!((fit.terms[0].1.re - 2.0 / (4.0 * PI)).abs() < 1e-8, "{fit:?}");
}

#[test]
fn json_round_trip() {
    let m = build_sphere_model(3, 1, &[("r".into(), 0.7)]).unwrap();
    let s = m.to_json();
    let back = SpectralModel::from_json(&s).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.to_json(), s);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sphere_spectral_symmetry(k in -4i32..=4, lmax in 1usize..6, theta in 0.1f64..3.1) {
        let m = build_sphere_model(lmax, k, &[("r".into(), theta)]).unwrap();
        prop_assert!(m.check_spectral_symmetry().is_ok());
        for l in m.levels.iter().filter(|l| l.lambda != 0.0) {
            let (p, q) = l.character("r").unwrap();
            prop_assert!((p - q).norm() < 1e-9);
        }
    }

    #[test]
    fn torus_mckean_singer(spin in 0usize..4, s1 in 0.0f64..1.0, s2 in 0.0f64..1.0, t in 0.01f64..2.0) {
        let model = build_torus_model(&TorusConfig::new(6, SpinStructure::ALL[spin]).with_translation("s", [s1, s2])).unwrap();
        let h = heat_supertrace(&model, "s", t, None).unwrap();
        prop_assert!(h.value.norm() < 1e-10);
    }
}
