use kaon_sn::flavor::{
    csl_survival_probability, eigensystem, survival_probability, sn_shifted_parameters, transition_probability,
    xy_decomposition, MixingHamiltonian, XYDecomposition,
};
use kaon_sn::gravity::{potential_f_closed, GaussianState, Scenario};
use kaon_sn::solver::{init_gaussian, self_potential, RadialGrid, Source};
use kaon_sn::units::{from_natural, to_natural, Dimension, G_NATURAL};
use kaon_sn::KaonParameters;
use num_complex::Complex64;
use proptest::prelude::*;

fn dimension() -> impl Strategy<Value = Dimension> {
    prop::sample::select(Dimension::ALL.to_vec())
}

fn physical_parameters() -> impl Strategy<Value = KaonParameters> {
    (0.05f64..5.0, 0.05f64..2.0, 0.0f64..1.0, 0.0f64..0.1, 0.0f64..std::f64::consts::TAU).prop_map(
        |(gamma_s, dm_ratio, gl_ratio, eps_mod, eps_arg)| KaonParameters {
            gamma_s,
            gamma_l: gl_ratio * gamma_s,
            delta_m: dm_ratio * gamma_s,
            epsilon: Complex64::from_polar(eps_mod, eps_arg),
            ..KaonParameters::default()
        },
    )
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #[test]
    fn unit_round_trip(mantissa in 1.0f64..10.0, exponent in -60i32..60, dim in dimension()) {
        let x = mantissa * 10f64.powi(exponent);
        let back = from_natural(to_natural(x, dim), dim);
        prop_assert!(((back - x) / x).abs() < 1e-14);
    }

    #[test]
    fn probabilities_are_probabilities(p in physical_parameters(), t_scale in 0.0f64..30.0) {
        let t = t_scale / p.gamma_s;
        let ps = survival_probability(t, &p).unwrap();
        let pt = transition_probability(t, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&ps));
        prop_assert!((0.0..=1.0).contains(&pt));
    }

    #[test]
    fn csl_only_damps(p in physical_parameters(), t_scale in 0.0f64..30.0, rate in 0.0f64..2.0) {
        let t = t_scale / p.gamma_s;
        let plain = survival_probability(t, &p).unwrap();
        let zero = KaonParameters { csl_gamma: 0.0, ..p };
        prop_assert_eq!(csl_survival_probability(t, &zero).unwrap().to_bits(), plain.to_bits());
        // choose γ so the damping rate is `rate`·Γ_S
        let unit = KaonParameters { csl_gamma: 1.0, ..p };
        let per_gamma = kaon_sn::flavor::csl_damping_rate(&unit).unwrap();
        let damped = KaonParameters { csl_gamma: rate * p.gamma_s / per_gamma, ..p };
        let value = csl_survival_probability(t, &damped).unwrap();
        if (p.delta_m * t).cos() > 0.0 {
            prop_assert!(value <= plain);
        } else {
            prop_assert!(value >= plain);
        }
    }

    #[test]
    fn sn_shift_touches_only_delta_m(a_exp in -56.0f64..-40.0) {
        let p = KaonParameters::default();
        let a = to_natural(10f64.powf(a_exp), Dimension::Length);
        let q = sn_shifted_parameters(&p, Scenario::DistinctWaveFunctions, a).unwrap();
        prop_assert_eq!(KaonParameters { delta_m: p.delta_m, ..q }, p);
        let wider = sn_shifted_parameters(&p, Scenario::DistinctWaveFunctions, 2.0 * a).unwrap();
        // a larger width shifts less
        prop_assert!(p.delta_m - wider.delta_m <= p.delta_m - q.delta_m);
    }

    #[test]
    fn mixing_parameters_do_not_depend_on_x(y in complex(), x1 in complex(), x2 in complex()) {
        prop_assume!(x1.norm() > 0.1 && x2.norm() > 0.1 && y.norm() > 0.1);
        let y = if y.re < 0.0 { -y } else { y };
        let h1 = MixingHamiltonian::from_xy(1.0, 1.0, XYDecomposition { x: x1, y });
        let h2 = MixingHamiltonian::from_xy(1.0, 1.0, XYDecomposition { x: x2, y });
        let (e1, e2) = (eigensystem(&h1).unwrap(), eigensystem(&h2).unwrap());
        prop_assert!((e1.delta_m - e2.delta_m).abs() < 1e-10);
        prop_assert!((e1.delta_gamma - e2.delta_gamma).abs() < 1e-10);
        let xy = xy_decomposition(&h1).unwrap();
        prop_assert!((xy.x * xy.y - h1.h21()).norm() < 1e-10 * h1.h21().norm().max(1.0));
        prop_assert!((xy.y / xy.x - h1.h12()).norm() < 1e-10 * h1.h12().norm().max(1.0));
    }

    #[test]
    fn kernel_is_monotone_and_bounded(a in 0.01f64..100.0, s in 0.0f64..50.0, x in 0.0f64..20.0) {
        let state = GaussianState::new(a, 1.0, s * a * a).unwrap();
        let f0 = potential_f_closed(&state, 0.0).unwrap().value;
        let f = potential_f_closed(&state, x * a).unwrap().value;
        let g = potential_f_closed(&state, (x + 0.1) * a).unwrap().value;
        prop_assert!(f <= f0 * (1.0 + 1e-15));
        prop_assert!(g <= f * (1.0 + 1e-15));
        prop_assert!(f * x * a <= 1.0 + 1e-15);
    }

    #[test]
    fn potential_is_linear_in_weights(w1 in 0.0f64..1.0, w2 in 0.0f64..1.0, width in 0.5f64..2.0) {
        let grid = RadialGrid::new(16.0, 256).unwrap();
        let a = init_gaussian(grid, width, 1.0).unwrap();
        let both = self_potential(G_NATURAL, &[
            Source { weight: w1, mass: 1.0, wave_function: &a },
            Source { weight: w2, mass: 1.0, wave_function: &a },
        ]).unwrap();
        let single = self_potential(G_NATURAL, &[Source { weight: w1 + w2, mass: 1.0, wave_function: &a }]).unwrap();
        for (x, y) in both.iter().zip(&single) {
            prop_assert!((x - y).abs() <= 1e-14 * y.abs());
            prop_assert!(*x <= 0.0);
        }
    }
}
