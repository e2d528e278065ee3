use std::f64::consts::PI;
use std::time::Instant;

use kaon_sn::flavor::{csl_damping_rate, sn_shifted_parameters};
use kaon_sn::gravity::{
    critical_width, delta_sn, energy_shift, expectation_f, expectation_f_deltam, mass_difference_shift,
    potential_f_closed, potential_f_mass_expansion, potential_f_quadrature, potential_f_time_expansion,
    potential_f_width_expansion, GaussianState, Scenario, SelfGravityInputs,
};
use kaon_sn::units::{
    csl_gamma_from_natural, HBARC_MEV_M, HBAR_MEV_S, C_SI, G_NATURAL, G_SI, MEV_IN_KG,
};
use kaon_sn::KaonParameters;

const R_OVER_A: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 10.0];
const SPREADING: [f64; 5] = [0.0, 0.1, 1.0, 5.0, 50.0];
const WIDTHS: [f64; 3] = [0.1, 1.0, 100.0];

#[test]
fn closed_form_matches_quadrature_on_verification_grid() {
    let start = Instant::now();
    let mut count = 0;
    for &a in &WIDTHS {
        for &s in &SPREADING {
            let m = 2.0;
            let state = GaussianState::new(a, m, s * m * a * a).unwrap();
            for &x in &R_OVER_A {
                let r = x * a;
                let closed = potential_f_closed(&state, r).unwrap().value;
                let quad = potential_f_quadrature(&state, r, 1e-11).unwrap();
                let rel = quad.relative_error_to(closed);
                assert!(rel < 1e-8, "a={a} s={s} r/a={x}: {rel:e}");
                count += 1;
            }
        }
    }
    assert_eq!(count, 75);
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

fn residual(f: impl Fn(&GaussianState, f64) -> f64, state: &GaussianState, r: f64) -> f64 {
    (f(state, r) - potential_f_closed(state, r).unwrap().value).abs()
}

#[test]
fn mass_expansion_residual_is_cubic_in_mass() {
    let mass = |s: &GaussianState, r: f64| potential_f_mass_expansion(s, r).unwrap().value;
    for r in [0.0, 0.5] {
        let heavy = GaussianState::new(1.0, 0.01, 1.0).unwrap();
        let light = heavy.with_mass(0.005).unwrap();
        let ratio = residual(mass, &heavy, r) / residual(mass, &light, r);
        assert!((ratio / 8.0 - 1.0).abs() < 0.2, "r={r}: ratio {ratio}");
    }
}

#[test]
fn time_expansion_residual_is_quartic_in_time() {
    let time = |s: &GaussianState, r: f64| potential_f_time_expansion(s, r).unwrap().value;
    for r in [0.0, 0.5, 1.0] {
        let late = GaussianState::new(1.0, 1.0, 0.05).unwrap();
        let early = late.at_time(0.025).unwrap();
        let ratio = residual(time, &late, r) / residual(time, &early, r);
        assert!((ratio / 16.0 - 1.0).abs() < 0.2, "r={r}: ratio {ratio}");
    }
}

#[test]
fn width_expansion_residual_scales_as_inverse_seventh_power() {
    let width = |s: &GaussianState, r: f64| potential_f_width_expansion(s, r).unwrap().value;
    let narrow = GaussianState::new(20.0, 1.0, 1.0).unwrap();
    let wide = GaussianState::new(40.0, 1.0, 1.0).unwrap();
    let ratio = residual(width, &narrow, 1.0) / residual(width, &wide, 1.0);
    assert!((ratio / 128.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn expansion_error_estimates_bound_the_residual() {
    let state = GaussianState::new(1.0, 1.0, 0.05).unwrap();
    let e = potential_f_time_expansion(&state, 0.5).unwrap();
    let closed = potential_f_closed(&state, 0.5).unwrap().value;
    assert!((e.value - closed).abs() <= 2.0 * e.estimated_error);
}

#[test]
fn expectation_deltam_coefficient_is_the_mass_derivative() {
    for &(a, m, t) in &[(1.0, 1.0, 1.0), (0.5, 2.0, 0.3), (3.0, 0.7, 10.0)] {
        let state = GaussianState::new(a, m, t).unwrap();
        let delta = 1e-3 * m;
        let coefficient = (expectation_f_deltam(&state, delta) - expectation_f(&state)) / delta;
        for step in [1e-6, 1e-7] {
            let h = step * m;
            let up = expectation_f(&state.with_mass(m + h).unwrap());
            let down = expectation_f(&state.with_mass(m - h).unwrap());
            let fd = (up - down) / (2.0 * h);
            assert!(((coefficient - fd) / fd).abs() < 1e-4, "a={a} m={m} t={t} step={step}");
        }
    }
}

#[test]
fn expectation_matches_numerical_average() {
    // ⟨f⟩ = ∫ 4πr² ρ f dr with ρ the normalized Gaussian density of width a_eff
    let state = GaussianState::new(1.3, 1.0, 1.7).unwrap();
    let w = state.effective_width();
    let n = 20000;
    let h = 12.0 * w / n as f64;
    let mut sum = 0.0;
    for j in 1..n {
        let r = j as f64 * h;
        let rho = (PI * w * w).powf(-1.5) * (-(r * r) / (w * w)).exp();
        sum += 4.0 * PI * r * r * rho * potential_f_closed(&state, r).unwrap().value;
    }
    let numeric = sum * h;
    assert!(((numeric - expectation_f(&state)) / numeric).abs() < 1e-10);
}

#[test]
fn delta_sn_agrees_between_unit_systems() {
    let m_k = KaonParameters::default().m_k;
    let width_m = 1.0;
    let m_kg = m_k * MEV_IN_KG;
    let si = (2.0 / PI).sqrt() * G_SI * m_kg / (C_SI * C_SI * width_m);
    let natural = delta_sn(G_NATURAL, m_k, width_m / HBARC_MEV_M).unwrap();
    assert!(((si - natural) / si).abs() < 1e-12);
    assert!((natural / 5.256e-55 - 1.0).abs() < 1e-3, "{natural:e}");
}

#[test]
fn critical_width_is_far_below_planck_length() {
    let m_k = KaonParameters::default().m_k;
    let meters = critical_width(G_NATURAL, m_k).unwrap() * HBARC_MEV_M;
    assert!((1e-55..=1e-54).contains(&meters));
    // hand value: √(2/π) · 6.67430e-11 · 8.87080e-28 kg / c² = 5.2561e-55 m
    assert!((meters / 5.2561e-55 - 1.0).abs() < 1e-4, "{meters:e}");
}

#[test]
fn scenario_two_shift_is_exactly_twice_scenario_one() {
    for width in [1e-3, 1.0, 1e5] {
        let one = mass_difference_shift(Scenario::UniqueWaveFunction, G_NATURAL, 497.614, width).unwrap();
        let two = mass_difference_shift(Scenario::DistinctWaveFunctions, G_NATURAL, 497.614, width).unwrap();
        assert_eq!(two, 2.0 * one);
    }
    // at a width where the shift is representable
    let p = KaonParameters::default();
    let a = 10.0 * critical_width(G_NATURAL, p.m_k).unwrap();
    let s1 = sn_shifted_parameters(&p, Scenario::UniqueWaveFunction, a).unwrap();
    let s2 = sn_shifted_parameters(&p, Scenario::DistinctWaveFunctions, a).unwrap();
    let d1 = p.delta_m - s1.delta_m;
    let d2 = p.delta_m - s2.delta_m;
    assert!((d2 / d1 - 2.0).abs() < 1e-12);
}

#[test]
fn energy_shift_difference_gives_the_mass_shift() {
    let inputs = SelfGravityInputs {
        newton_g: 3.0,
        width: 2.0,
        m_k: 1.0,
        m: 1.0,
        delta_m: 0.01,
        beta_sq: 0.3,
    };
    let two = energy_shift(Scenario::DistinctWaveFunctions, &inputs).unwrap();
    let expected = -delta_sn(3.0, 1.0, 2.0).unwrap() * inputs.delta_m;
    assert!(((two.delta_e_l - two.delta_e_s) / expected - 1.0).abs() < 1e-12);
    let one = energy_shift(Scenario::UniqueWaveFunction, &inputs).unwrap();
    assert_eq!(one.delta_e_l, one.delta_e_s);
}

#[test]
fn csl_rate_agrees_between_unit_systems() {
    let p = KaonParameters::default();
    let gamma_si = csl_gamma_from_natural(p.csl_gamma);
    let r_c_si = p.csl_r_c * HBARC_MEV_M;
    // Δm/m₀ is dimensionless in either system
    let ratio = p.delta_m / p.csl_m0;
    let rate_si = gamma_si * ratio * ratio / (16.0 * PI.powf(1.5) * r_c_si.powi(3));
    let rate_natural_per_s = csl_damping_rate(&p).unwrap() / HBAR_MEV_S;
    assert!(((rate_si - rate_natural_per_s) / rate_si).abs() < 1e-8);
    // λ (Δm/m₀)²/2 with λ = 1e-16 s⁻¹
    let lambda_form = 1e-16 * ratio * ratio / 2.0;
    assert!(((rate_si - lambda_form) / lambda_form).abs() < 1e-8);
}
