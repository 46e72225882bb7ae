use proptest::prelude::*;
use zeno_dephase::fock::{exact_survival_discrete, thermal_state, unitarity_defect, TruncatedBath};
use zeno_dephase::single_spin::survival_one_interval;
use zeno_dephase::{coherent_weights, BathMode, InverseTemperature, KernelSet, PreparedState, SpinLength};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn one_mode_single_interval_matches_formula(
        strength in 1e-3f64..0.05,
        freq in 2.0f64..6.0,
        tau in 0.05f64..3.0,
        theta in 0.2f64..2.9,
    ) {
        let bath = TruncatedBath::new(
            vec![BathMode::with_strength(strength, freq)],
            16,
            InverseTemperature::Finite(1.5),
        ).unwrap();
        let w = coherent_weights(SpinLength::HALF, theta, 0.3).unwrap();
        let exact = exact_survival_discrete(&bath, &w, 0.4, tau, 1, true).unwrap();
        let k = KernelSet::new(bath.spec().unwrap()).unwrap();
        let formula = survival_one_interval(tau, &PreparedState::new(theta, 0.3).unwrap(), &k).unwrap();
        prop_assert!((exact - formula).abs() < 1e-8);
    }

    #[test]
    fn propagators_are_unitary(strength in 0.0f64..0.1, t in 0.0f64..4.0) {
        let bath = TruncatedBath::new(
            vec![BathMode::with_strength(strength, 3.0)],
            10,
            InverseTemperature::Infinite,
        ).unwrap();
        let u = bath.propagator(SpinLength::new(1.0).unwrap(), 0.2, t).unwrap();
        prop_assert!(unitarity_defect(&u) < 1e-10);
    }

    #[test]
    fn thermal_states_have_unit_trace(freq in 1.0f64..10.0, beta in 2.0f64..20.0) {
        let p = thermal_state(freq, InverseTemperature::Finite(beta), 14).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        prop_assert!(p.windows(2).all(|w| w[1] <= w[0]));
    }
}
