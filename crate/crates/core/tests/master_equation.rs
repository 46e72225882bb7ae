use std::f64::consts::FRAC_PI_2;

use zeno_dephase::collective::gamma_rate_collective;
use zeno_dephase::master::{gamma_rate_dissipative, integrate_trajectory, survival_curve};
use zeno_dephase::{coherent_weights, BathSpec, KernelSet, MasterOptions, ReducedState, SpinLength, SystemOperators};

fn fig2b() -> KernelSet<f64> {
    KernelSet::new(BathSpec::ohmic(0.01, 50.0, 1.0).unwrap()).unwrap()
}

#[test]
fn trace_and_hermiticity_are_preserved() {
    let k = fig2b();
    let spin = SpinLength::new(2.0).unwrap();
    let ops = SystemOperators::new(spin, 0.1, 1.0).unwrap();
    let w = coherent_weights(spin, FRAC_PI_2, 0.0).unwrap();
    let traj = integrate_trajectory(&ops, &k, 1.0, None, &ReducedState::coherent(&w)).unwrap();
    for i in (0..traj.len()).step_by(50) {
        let s = traj.state(&ops, i);
        assert!(s.trace_defect() < 1e-10 && s.hermiticity_defect() < 1e-10);
    }
}

#[test]
fn halving_the_step_changes_survival_below_1e6() {
    let k = fig2b();
    let spin = SpinLength::new(2.0).unwrap();
    let w = coherent_weights(spin, FRAC_PI_2, 0.0).unwrap();
    for delta in [0.0, 0.1, 1.0] {
        let ops = SystemOperators::new(spin, 0.1, delta).unwrap();
        let coarse = survival_curve(&ops, &k, &w, 1.0, &MasterOptions::default()).unwrap();
        let fine = survival_curve(
            &ops,
            &k,
            &w,
            1.0,
            &MasterOptions {
                step: Some(1.0 / 4000.0),
                ..Default::default()
            },
        )
        .unwrap();
        for (i, s) in coarse.survivals.iter().enumerate() {
            assert!((s - fine.survivals[2 * i]).abs() < 1e-6, "delta={delta} step {i}");
        }
    }
}

#[test]
fn rotation_removal_makes_rate_independent_of_level_splitting() {
    let k = fig2b();
    let spin = SpinLength::new(1.5).unwrap();
    let w = coherent_weights(spin, FRAC_PI_2, 0.0).unwrap();
    let opts = MasterOptions::default();
    for tau in [0.1, 0.6] {
        let a = gamma_rate_dissipative(tau, &SystemOperators::new(spin, 0.0, 0.0).unwrap(), &k, &w, &opts).unwrap();
        let b = gamma_rate_dissipative(tau, &SystemOperators::new(spin, 0.1, 0.0).unwrap(), &k, &w, &opts).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} {b}");
    }
}

#[test]
fn pure_dephasing_rate_matches_collective_formula() {
    let k = fig2b();
    let spin = SpinLength::new(2.0).unwrap();
    let w = coherent_weights(spin, FRAC_PI_2, 0.0).unwrap();
    let ops = SystemOperators::new(spin, 0.1, 0.0).unwrap();
    let curve = survival_curve(&ops, &k, &w, 1.0, &MasterOptions::default()).unwrap();
    for i in 1..=40 {
        let tau = 0.025 * i as f64;
        let me = curve.rate_at(tau).unwrap();
        let exact = gamma_rate_collective(tau, &w, &k).unwrap();
        assert!((me - exact).abs() <= 0.02 * exact, "tau={tau}: {me} vs {exact}");
    }
}

#[test]
fn rate_vanishes_linearly_at_short_intervals() {
    let k = fig2b();
    let spin = SpinLength::new(1.0).unwrap();
    let w = coherent_weights(spin, FRAC_PI_2, 0.0).unwrap();
    let ops = SystemOperators::new(spin, 0.1, 1.0).unwrap();
    let curve = survival_curve(&ops, &k, &w, 0.02, &MasterOptions::default()).unwrap();
    let (r1, r2) = (curve.rate_at(0.002).unwrap(), curve.rate_at(0.004).unwrap());
    assert!(r1 > 0.0 && (r2 / r1 - 2.0).abs() < 0.1, "{r1} {r2}");
}
