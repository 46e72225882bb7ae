//! Configurations that regenerate each published curve, one config per curve.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde_json::{json, Value};

pub const NAMES: [&str; 11] = [
    "fig1", "fig2a", "fig2b", "fig3a", "fig3b", "supp1", "supp2", "supp3", "supp4", "supp5", "supp6",
];

fn ohmic(coupling: f64, cutoff: f64, beta: f64) -> Value {
    let beta = if beta.is_infinite() { json!("inf") } else { json!(beta) };
    json!({"kind": "ohmic", "coupling": coupling, "cutoff": cutoff, "beta": beta})
}

fn grid(start: f64, end: f64, points: usize) -> Value {
    json!({"kind": "linear", "start": start, "end": end, "points": points})
}

fn curve(label: &str, mode: &str, bath: Value, system: Value, grid: Value, measurements: usize) -> Value {
    json!({
        "label": label,
        "mode": mode,
        "bath": bath,
        "system": system,
        "schedule": {"grid": grid, "measurements": measurements},
    })
}

fn spin(j: f64) -> Value {
    json!({"j": j, "theta": FRAC_PI_2, "phi": 0.0})
}

fn fig1() -> Vec<Value> {
    let g = || grid(0.01, 5.0, 500);
    vec![
        curve("fig1-solid", "single", ohmic(0.01, 15.0, 1.0), spin(0.5), g(), 1),
        curve("fig1-dashed-cutoff10", "single", ohmic(0.01, 10.0, 1.0), spin(0.5), g(), 1),
        curve("fig1-dotdashed-beta0.25", "single", ohmic(0.01, 15.0, 0.25), spin(0.5), g(), 1),
        curve("fig1-longdashed-coupling0.005", "single", ohmic(0.005, 15.0, 1.0), spin(0.5), g(), 1),
    ]
}

fn fig2a() -> Vec<Value> {
    [1.0, 2.0, 50.0]
        .iter()
        .map(|&j| {
            curve(
                &format!("fig2a-j{j}"),
                "collective",
                ohmic(0.01, 50.0, 1.0),
                spin(j),
                grid(0.005, 2.0, 400),
                1,
            )
        })
        .collect()
}

fn fig2b() -> Vec<Value> {
    [0.0, 0.1, 1.0]
        .iter()
        .map(|&delta| {
            curve(
                &format!("fig2b-delta{delta}"),
                "master",
                ohmic(0.01, 50.0, 1.0),
                json!({"j": 2.0, "theta": FRAC_PI_2, "phi": 0.0, "omega0": 0.1, "delta": delta}),
                grid(0.005, 1.0, 200),
                1,
            )
        })
        .collect()
}

fn correlation_panel(prefix: &str, coupling: f64, j: f64, counts: &[usize], g: impl Fn() -> Value) -> Vec<Value> {
    let mut out = vec![curve(
        &format!("{prefix}-uncorrelated"),
        "collective",
        ohmic(coupling, 15.0, 1.0),
        spin(j),
        g(),
        1,
    )];
    for &n in counts {
        out.push(curve(
            &format!("{prefix}-n{n}"),
            "correlated",
            ohmic(coupling, 15.0, 1.0),
            spin(j),
            g(),
            n,
        ));
    }
    out
}

fn fig3a() -> Vec<Value> {
    let g = || grid(0.005, 0.5, 100);
    let mut out = correlation_panel("fig3a", 0.5, 0.5, &[3, 5], g);
    out.extend(correlation_panel("fig3a-inset", 0.05, 0.5, &[3, 5], g));
    out
}

fn fig3b() -> Vec<Value> {
    correlation_panel("fig3b", 0.05, 5.0, &[3], || grid(0.01, 1.5, 150))
}

/// Decay-model rate against the dephasing rate for one parameter set.
fn rwa_pair(name: &str, bath: Value, system: Value, dephasing_mode: &str, measurements: usize) -> Vec<Value> {
    let g = || grid(0.01, 10.0, 200);
    vec![
        curve(&format!("{name}-rwa"), "rwa", bath.clone(), system.clone(), g(), 1),
        curve(&format!("{name}-dephasing"), dephasing_mode, bath, system, g(), measurements),
    ]
}

fn supp_system(theta: f64, omega0: f64) -> Value {
    json!({"j": 0.5, "theta": theta, "phi": 0.0, "omega0": omega0})
}

/// Configs for the named figure, or the list of valid names.
pub fn recipe(name: &str) -> Result<Vec<Value>, String> {
    let inf = f64::INFINITY;
    Ok(match name {
        "fig1" => fig1(),
        "fig2a" => fig2a(),
        "fig2b" => fig2b(),
        "fig3a" => fig3a(),
        "fig3b" => fig3b(),
        "supp1" => rwa_pair("supp1", ohmic(0.2, 1.0, inf), supp_system(FRAC_PI_2, 0.0), "single", 1),
        "supp2" => rwa_pair("supp2", ohmic(0.2, 1.0, 1.0), supp_system(FRAC_PI_2, 0.0), "single", 1),
        "supp3" => rwa_pair("supp3", ohmic(0.5, 1.0, inf), supp_system(FRAC_PI_2, 0.0), "correlated", 3),
        "supp4" => rwa_pair("supp4", ohmic(0.2, 1.0, inf), supp_system(FRAC_PI_2, 1.0), "single", 1),
        "supp5" => rwa_pair("supp5", ohmic(0.2, 1.0, inf), supp_system(FRAC_PI_4, 0.0), "single", 1),
        "supp6" => [1.0, 2.0]
            .iter()
            .map(|&j| {
                curve(
                    &format!("supp6-j{j}"),
                    "interaction",
                    ohmic(0.0, 1.0, inf),
                    json!({"j": j, "theta": FRAC_PI_2, "phi": 0.0, "chi": 1.0}),
                    grid(0.01, 10.0, 500),
                    1,
                )
            })
            .collect(),
        other => {
            return Err(format!(
                "unknown recipe {other:?}; valid names: {}",
                NAMES.join(", ")
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{BathConfig, Mode, RunConfig};

    #[test]
    fn every_recipe_validates() {
        for name in NAMES {
            for c in recipe(name).unwrap() {
                RunConfig::from_value(&c).unwrap_or_else(|e| panic!("{name}: {e}"));
            }
        }
    }

    #[test]
    fn fig1_varies_one_parameter_per_curve() {
        let configs: Vec<RunConfig> = recipe("fig1")
            .unwrap()
            .iter()
            .map(|c| RunConfig::from_value(c).unwrap())
            .collect();
        assert_eq!(configs.len(), 4);
        let baths: Vec<_> = configs.iter().map(|c| c.bath.clone()).collect();
        assert_eq!(baths[0], BathConfig::Ohmic { coupling: 0.01, cutoff: 15.0, beta: 1.0 });
        assert_eq!(baths[1], BathConfig::Ohmic { coupling: 0.01, cutoff: 10.0, beta: 1.0 });
        assert_eq!(baths[2], BathConfig::Ohmic { coupling: 0.01, cutoff: 15.0, beta: 0.25 });
        assert_eq!(baths[3], BathConfig::Ohmic { coupling: 0.005, cutoff: 15.0, beta: 1.0 });
    }

    #[test]
    fn fig3a_has_main_panel_and_inset() {
        let configs: Vec<RunConfig> = recipe("fig3a")
            .unwrap()
            .iter()
            .map(|c| RunConfig::from_value(c).unwrap())
            .collect();
        let summary: Vec<_> = configs
            .iter()
            .map(|c| match c.bath {
                BathConfig::Ohmic { coupling, .. } => (coupling, c.mode, c.schedule.measurements),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(
            summary,
            vec![
                (0.5, Mode::Collective, 1),
                (0.5, Mode::Correlated, 3),
                (0.5, Mode::Correlated, 5),
                (0.05, Mode::Collective, 1),
                (0.05, Mode::Correlated, 3),
                (0.05, Mode::Correlated, 5),
            ]
        );
    }

    #[test]
    fn fig2b_sweeps_the_tilt() {
        let deltas: Vec<f64> = recipe("fig2b")
            .unwrap()
            .iter()
            .map(|c| RunConfig::from_value(c).unwrap())
            .inspect(|c| assert_eq!(c.system.omega0, 0.1))
            .map(|c| c.system.delta)
            .collect();
        assert_eq!(deltas, vec![0.0, 0.1, 1.0]);
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let err = recipe("fig9").unwrap_err();
        assert!(err.contains("fig1") && err.contains("supp6"));
    }
}
