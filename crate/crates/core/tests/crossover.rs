use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use zeno_dephase::collective::gamma_rate_collective;
use zeno_dephase::crossover::{bracket_extrema, find_crossovers, ExtremumKind};
use zeno_dephase::single_spin::gamma_rate;
use zeno_dephase::{coherent_weights, BathSpec, KernelSet, PreparedState, SpinLength};

#[test]
fn doubling_samples_keeps_extrema_count() {
    let k1 = KernelSet::new(BathSpec::ohmic(0.01, 15.0, 1.0).unwrap()).unwrap();
    let st = PreparedState::equator();
    let single = |n| find_crossovers(|t| gamma_rate(t, &st, &k1), 1e-3, 5.0, n).unwrap().extrema.len();
    assert_eq!(single(240), single(480));
    let k2 = KernelSet::new(BathSpec::ohmic(0.01, 50.0, 1.0).unwrap()).unwrap();
    for j in [1.0, 2.0] {
        let w = coherent_weights(SpinLength::new(j).unwrap(), FRAC_PI_2, 0.0).unwrap();
        let count = |n| {
            find_crossovers(|t| gamma_rate_collective(t, &w, &k2), 2e-3, 2.0, n)
                .unwrap()
                .extrema
                .len()
        };
        assert_eq!(count(300), count(600), "J={j}");
    }
}

#[test]
fn plateau_counts_once() {
    let rates = [1.0, 2.0, 3.0, 3.0, 3.0, 2.0, 1.0];
    let found = bracket_extrema(&rates);
    assert_eq!(found, vec![(1, 2, 5, ExtremumKind::Max)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refined_extrema_stay_in_brackets_and_alternate(
        a in 0.5f64..4.0,
        b in -1.0f64..1.0,
        c in 0.1f64..3.0,
    ) {
        let f = |t: f64| Ok((a * t + b).sin() + 0.1 * c * t);
        let report = find_crossovers(f, 0.1, 10.0, 128).unwrap();
        for pair in report.extrema.windows(2) {
            prop_assert!(pair[1].tau > pair[0].tau);
            prop_assert!(pair[1].kind != pair[0].kind);
        }
        let brackets = bracket_extrema(&report.rates);
        prop_assert_eq!(brackets.len(), report.extrema.len());
        for (e, (lo, _, hi, kind)) in report.extrema.iter().zip(brackets) {
            prop_assert!(e.tau >= report.grid[lo] && e.tau <= report.grid[hi]);
            prop_assert_eq!(e.kind, kind);
        }
    }
}
