//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to
//! see the lines; the test fails if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kaon_sn::flavor::{
    asymmetry, csl_damping_rate, csl_survival_probability, survival_probability, transition_probability,
};
use kaon_sn::gravity::{
    critical_width, mass_difference_shift, potential_f_closed, potential_f_mass_expansion, potential_f_quadrature,
    potential_f_time_expansion, potential_f_width_expansion, GaussianState, Scenario,
};
use kaon_sn::solver::{
    doublet_residuals, evolve, evolve_with_state, gaussian_at, init_gaussian, measured_mass_difference_shift,
    Corrector, DoubletMatrices, RadialGrid, ScenarioConfig,
};
use kaon_sn::units::{csl_gamma_from_natural, G_NATURAL, HBARC_MEV_M, HBAR_MEV_S};
use kaon_sn::KaonParameters;
use kaon_sn_cli::strip_generated;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn closed_form_equivalence() -> Outcome {
    let start = Instant::now();
    let (mut worst, mut count) = (0.0f64, 0);
    for a in [0.1, 1.0, 100.0] {
        for s in [0.0, 0.1, 1.0, 5.0, 50.0] {
            let m = 2.0;
            let state = GaussianState::new(a, m, s * m * a * a).unwrap();
            for x in [0.0, 0.5, 1.0, 2.0, 10.0] {
                let closed = potential_f_closed(&state, x * a).unwrap().value;
                let quad = potential_f_quadrature(&state, x * a, 1e-11).unwrap();
                worst = worst.max(quad.relative_error_to(closed));
                count += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        count == 75 && worst < 1e-8 && secs < 10.0,
        format!("{count} points, worst rel {worst:.2e} < 1e-8, {secs:.2}s < 10s"),
    )
}

fn residual(value: f64, state: &GaussianState, r: f64) -> f64 {
    (value - potential_f_closed(state, r).unwrap().value).abs()
}

fn expansion_orders() -> Outcome {
    let heavy = GaussianState::new(1.0, 0.01, 1.0).unwrap();
    let light = heavy.with_mass(0.005).unwrap();
    let mass = |s: &GaussianState| residual(potential_f_mass_expansion(s, 0.5).unwrap().value, s, 0.5);
    let mass_ratio = mass(&heavy) / mass(&light);

    let late = GaussianState::new(1.0, 1.0, 0.05).unwrap();
    let early = late.at_time(0.025).unwrap();
    let time = |s: &GaussianState| residual(potential_f_time_expansion(s, 0.5).unwrap().value, s, 0.5);
    let time_ratio = time(&late) / time(&early);

    let narrow = GaussianState::new(20.0, 1.0, 1.0).unwrap();
    let wide = GaussianState::new(40.0, 1.0, 1.0).unwrap();
    let width = |s: &GaussianState| residual(potential_f_width_expansion(s, 1.0).unwrap().value, s, 1.0);
    let width_ratio = width(&narrow) / width(&wide);

    let ok = |r: f64, ideal: f64| (r / ideal - 1.0).abs() < 0.2;
    outcome(
        ok(mass_ratio, 8.0) && ok(time_ratio, 16.0) && ok(width_ratio, 128.0),
        format!("ratios {mass_ratio:.3}/8, {time_ratio:.3}/16, {width_ratio:.2}/128 within 20%"),
    )
}

/// ⟨K⁰|K⁰(t)⟩ and ⟨K̄⁰|K⁰(t)⟩ from the K_S, K_L basis expansion.
fn amplitude_oracle(t: f64, p: &KaonParameters) -> (Complex64, Complex64) {
    let eps = p.epsilon;
    let n = (2.0 * (1.0 + eps.norm_sqr())).sqrt();
    let basis = Matrix2::new((1.0 + eps) / n, (1.0 + eps) / n, -(1.0 - eps) / n, (1.0 - eps) / n);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let coeffs = basis.try_inverse().unwrap() * Vector2::new(one, zero);
    let phase = |m: f64, g: f64| (Complex64::new(-0.5 * g * t, -m * t)).exp();
    let evolved = Vector2::new(
        coeffs[0] * phase(-0.5 * p.delta_m, p.gamma_s),
        coeffs[1] * phase(0.5 * p.delta_m, p.gamma_l),
    );
    let flavor = basis * evolved;
    (flavor[0], flavor[1])
}

fn oscillation_formulas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let gamma_s = rng.gen_range(0.05..5.0);
        let p = KaonParameters {
            delta_m: gamma_s * rng.gen_range(0.05..2.0),
            gamma_s,
            gamma_l: rng.gen_range(0.0..gamma_s),
            epsilon: Complex64::from_polar(rng.gen_range(0.0..0.1), rng.gen_range(0.0..2.0 * PI)),
            ..KaonParameters::default()
        };
        let t = rng.gen_range(0.0..20.0 / gamma_s);
        let (k0, k0bar) = amplitude_oracle(t, &p);
        worst = worst
            .max((survival_probability(t, &p).unwrap() - k0.norm_sqr()).abs())
            .max((transition_probability(t, &p).unwrap() - k0bar.norm_sqr()).abs());
    }
    let p = KaonParameters::default();
    let limit = 2.0 * p.epsilon.re / (1.0 + p.epsilon.norm_sqr());
    let a = asymmetry(30.0 * p.tau_s(), &p).unwrap();
    let rel = ((a - limit) / limit).abs();
    outcome(
        worst < 1e-10 && rel < 0.01,
        format!("1000 draws worst {worst:.2e} < 1e-10; A(30 tauS) = {a:.4e} vs {limit:.4e}, rel {rel:.2e} < 1%"),
    )
}

fn critical_width_range() -> Outcome {
    let meters = critical_width(G_NATURAL, KaonParameters::default().m_k).unwrap() * HBARC_MEV_M;
    // √(2/π) · 6.67430e-11 · 8.87080e-28 kg / c²
    let hand = 5.2561e-55;
    outcome(
        (1e-55..=1e-54).contains(&meters) && (meters / hand - 1.0).abs() < 1e-4,
        format!("{meters:.5e} m in [1e-55, 1e-54], pinned {hand:e}"),
    )
}

fn phase_config(scenario: Scenario) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(scenario, RadialGrid::new(16.0, 1024).unwrap(), 1.0, 1.0);
    c.newton_g = 12.5;
    c.m_l = 1.05;
    c.dt = 1e-3;
    c.corrector = Corrector { passes: 2, tolerance: None };
    c
}

fn scenario_ratio() -> Outcome {
    let mut formula_exact = true;
    for width in [1e-3, 1.0, 1e5] {
        let one = mass_difference_shift(Scenario::UniqueWaveFunction, G_NATURAL, 497.614, width).unwrap();
        let two = mass_difference_shift(Scenario::DistinctWaveFunctions, G_NATURAL, 497.614, width).unwrap();
        formula_exact &= two == 2.0 * one;
    }
    let one = measured_mass_difference_shift(&phase_config(Scenario::UniqueWaveFunction), 0.05).unwrap();
    let two = measured_mass_difference_shift(&phase_config(Scenario::DistinctWaveFunctions), 0.05).unwrap();
    let ratio = two / one;
    outcome(
        formula_exact && (ratio / 2.0 - 1.0).abs() < 0.1,
        format!("formula ratio exactly 2: {formula_exact}; solver ratio {ratio:.4} within 2 +- 10%"),
    )
}

fn free_evolution() -> Outcome {
    let start = Instant::now();
    let mut config = ScenarioConfig::new(Scenario::UniqueWaveFunction, RadialGrid::new(20.0, 2048).unwrap(), 1.0, 1.0);
    config.gravity_on = false;
    config.dt = 1e-3;
    let (_, state) = evolve_with_state(&config, 1.0, usize::MAX).unwrap();
    let exact = gaussian_at(config.grid, &GaussianState::new(1.0, 1.0, 1.0).unwrap()).unwrap();
    let err = state.channels[0].l2_distance(&exact).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(err < 1e-4 && secs < 60.0, format!("L2 error {err:.2e} < 1e-4 at n = 2048, {secs:.2}s < 60s"))
}

fn localization_config(dt: f64) -> ScenarioConfig {
    // G m² a/ħ² = 1
    let mut c = ScenarioConfig::new(Scenario::UniqueWaveFunction, RadialGrid::new(16.0, 1024).unwrap(), 1.0, 1.0);
    c.newton_g = 1.0;
    c.dt = dt;
    c.corrector = Corrector { passes: 2, tolerance: None };
    c
}

fn localization() -> Outcome {
    let last = |c: &ScenarioConfig| {
        let r = evolve(c, 2.0, usize::MAX).unwrap();
        let ch = &r.channels[0];
        (*ch.mean_square_radius.last().unwrap(), *ch.kinetic_energy.last().unwrap())
    };
    let (w_on, k_on) = last(&localization_config(1e-3));
    let (w_off, _) = last(&ScenarioConfig { gravity_on: false, ..localization_config(1e-3) });
    let (w_half, k_half) = last(&localization_config(5e-4));
    let dw = (w_on / w_half - 1.0).abs();
    let dk = (k_on / k_half - 1.0).abs();
    outcome(
        w_on < w_off && dw < 1e-6 && dk < 1e-6,
        format!("<r2> on {w_on:.6} < off {w_off:.6}; dt halving changes {dw:.1e}, {dk:.1e} < 1e-6"),
    )
}

fn csl_limit() -> Outcome {
    let p = KaonParameters { csl_gamma: 0.0, ..KaonParameters::default() };
    let bitwise = (0..=300).all(|i| {
        let t = 0.1 * i as f64 * p.tau_s();
        csl_survival_probability(t, &p).unwrap().to_bits() == survival_probability(t, &p).unwrap().to_bits()
    });
    let d = KaonParameters::default();
    let ratio = d.delta_m / d.csl_m0;
    let gamma_si = csl_gamma_from_natural(d.csl_gamma);
    let r_c_si = d.csl_r_c * HBARC_MEV_M;
    let si = gamma_si * ratio * ratio / (16.0 * PI.powf(1.5) * r_c_si.powi(3));
    let natural = csl_damping_rate(&d).unwrap() / HBAR_MEV_S;
    let rel = ((si - natural) / si).abs();
    outcome(
        bitwise && rel < 1e-8,
        format!("gamma = 0 bitwise equal on 301 times: {bitwise}; SI vs natural rate rel {rel:.1e} < 1e-8"),
    )
}

fn doublet_checker() -> Outcome {
    let grid = RadialGrid::new(16.0, 512).unwrap();
    let mut a = init_gaussian(grid, 1.0, 1.0).unwrap();
    let mut b = init_gaussian(grid, 1.3, 1.05).unwrap();
    a.scale(0.5f64.sqrt());
    b.scale(0.5f64.sqrt());
    let base = DoubletMatrices::diagonal(1.0, 1.05);
    let diag = doublet_residuals(&base, 2.0, &a, &b, 1e-3).unwrap();
    let diag_max = diag.constraint_21.max(diag.constraint_12);
    let sizes: Vec<f64> = (1..=8).map(|k| 0.02 * k as f64).collect();
    let res: Vec<f64> = sizes
        .iter()
        .map(|&m| {
            let dm = base.with_off_diagonal_mass(Complex64::from_polar(m, 0.4));
            doublet_residuals(&dm, 2.0, &a, &b, 1e-3).unwrap().constraint_21
        })
        .collect();
    let n = sizes.len() as f64;
    let (mx, my) = (sizes.iter().sum::<f64>() / n, res.iter().sum::<f64>() / n);
    let sxy: f64 = sizes.iter().zip(&res).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = sizes.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = res.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    outcome(
        diag_max < 1e-8 && r2 > 0.999,
        format!("diagonal residual {diag_max:.1e} < 1e-8; off-diagonal linear fit R2 {r2:.6} > 0.999"),
    )
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 3] = [
        &["oscillate", "--t-max", "12tauS"],
        &["shift", "--scenario", "2", "--width", "1.0"],
        &["solve", "--grid-n", "128", "--t-final", "0.02", "--stride", "4", "--g-multiplier", "1e26"],
    ];
    let body = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_kaon-sn")).args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}");
        strip_generated(&String::from_utf8(out.stdout).unwrap())
    };
    let same = runs.iter().all(|args| body(args) == body(args));
    outcome(same, format!("{} commands run twice, bodies byte-identical: {same}", runs.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("closed form vs quadrature", closed_form_equivalence),
        ("expansion orders", expansion_orders),
        ("oscillation formulas", oscillation_formulas),
        ("critical width", critical_width_range),
        ("scenario ratio", scenario_ratio),
        ("free evolution", free_evolution),
        ("self-gravity localization", localization),
        ("CSL limit", csl_limit),
        ("doublet checker", doublet_checker),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
