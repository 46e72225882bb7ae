//! Executes a validated configuration into an output table.

use rayon::prelude::*;
use serde_json::{json, Value};
use zeno_dephase::collective::{gamma_rate_collective, survival_chi_interaction};
use zeno_dephase::correlated::survival_with_backaction;
use zeno_dephase::crossover::find_crossovers_on_grid;
use zeno_dephase::fock::fixture_checks;
use zeno_dephase::master::{survival_curve, SurvivalCurve, DEFAULT_STEPS};
use zeno_dephase::single_spin::{decay_rate_rwa, gamma_rate};
use zeno_dephase::{
    coherent_weights, BathMode, BathSpec, CoherentWeights, Error, GridSpec, KernelSet, MasterOptions, PreparedState,
    ProtocolOptions, QuadratureOptions, SpinLength, SystemOperators,
};

use crate::config::{BathConfig, ConfigError, GridKind, Mode, RateKind, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u128),
    Bool(bool),
    Text(String),
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// A finished run: the table plus anything that went wrong along the way.
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub metadata: Value,
    /// Row-level failures; the table still holds every row.
    pub failures: Vec<Error>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numerical(#[from] Error),
}

/// Exit status for a numerical failure: 3 for budgets, 2 otherwise.
pub fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Budget { .. } => 3,
        _ => 2,
    }
}

struct Context {
    kernels: KernelSet<f64>,
    weights: CoherentWeights<f64>,
    taus: Vec<f64>,
    protocol: ProtocolOptions,
}

fn build(config: &RunConfig) -> Result<Context, ConfigError> {
    let bad = |key: &str, e: Error| ConfigError(format!("invalid value for {key}: {e}"));
    let spec = match &config.bath {
        BathConfig::Ohmic { coupling, cutoff, beta } => BathSpec::ohmic(*coupling, *cutoff, *beta),
        BathConfig::Discrete { modes, beta } => BathSpec::discrete(
            modes.iter().map(|&(s, f)| BathMode::with_strength(s, f)).collect(),
            *beta,
        ),
    }
    .map_err(|e| bad("bath", e))?;
    let n = &config.numerics;
    let options = QuadratureOptions {
        abs_tol: n.abs_tol,
        rel_tol: n.rel_tol,
        order: n.quadrature_order,
        max_panels: n.max_panels,
    };
    let kernels = KernelSet::with_options(spec, options).map_err(|e| bad("numerics", e))?;
    let spin = SpinLength::new(config.system.j).map_err(|e| bad("system.j", e))?;
    let weights = coherent_weights(spin, config.system.theta, config.system.phi).map_err(|e| bad("system.theta", e))?;
    let s = &config.schedule;
    let grid = match s.grid_kind {
        GridKind::Linear => GridSpec::Linear {
            start: s.start,
            end: s.end,
            points: s.points,
        },
        GridKind::Geometric => GridSpec::Geometric {
            start: s.start,
            end: s.end,
            points: s.points,
        },
    };
    let taus = grid.points().map_err(|e| bad("schedule.grid", e))?;
    Ok(Context {
        kernels,
        weights,
        taus,
        protocol: ProtocolOptions {
            term_budget: n.term_budget,
            ..Default::default()
        },
    })
}

fn term_count(spin: SpinLength, n: usize) -> u128 {
    (spin.dim() as u128).checked_pow(2 * n as u32).unwrap_or(u128::MAX)
}

fn check_budget(ctx: &Context, n: usize) -> Result<(), Error> {
    let required = term_count(ctx.weights.spin(), n);
    if required > ctx.protocol.term_budget {
        return Err(Error::Budget {
            what: "survival sum terms",
            required,
            budget: ctx.protocol.term_budget,
        });
    }
    Ok(())
}

fn master_curve(config: &RunConfig, ctx: &Context, end: f64) -> Result<SurvivalCurve<f64>, Error> {
    let ops = SystemOperators::new(ctx.weights.spin(), config.system.omega0, config.system.delta)?;
    let options = MasterOptions {
        step: config.numerics.me_step,
        rotation: config.schedule.rotation,
    };
    survival_curve(&ops, &ctx.kernels, &ctx.weights, end, &options)
}

fn num(x: f64) -> Cell {
    Cell::Num(x)
}

/// Rows of `tau, gamma_rate, survival, N, J, <extras>, error`.
fn sweep_rows<F>(ctx: &Context, config: &RunConfig, extras: &[&'static str], f: F) -> (Table, Vec<Error>)
where
    F: Fn(f64) -> Result<(f64, f64, Vec<Cell>), Error> + Sync,
{
    let n = config.schedule.measurements;
    let j = config.system.j;
    let results: Vec<_> = ctx.taus.par_iter().map(|&t| (t, f(t))).collect();
    let mut columns = vec!["tau", "gamma_rate", "survival", "N", "J"];
    columns.extend_from_slice(extras);
    columns.push("error");
    let mut rows = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (tau, r) in results {
        let mut row = vec![num(tau)];
        match r {
            Ok((rate, survival, extra)) => {
                row.extend([num(rate), num(survival), Cell::Int(n as u128), num(j)]);
                row.extend(extra);
                row.push(Cell::Empty);
            }
            Err(e) => {
                row.extend([Cell::Empty, Cell::Empty, Cell::Int(n as u128), num(j)]);
                row.extend(extras.iter().map(|_| Cell::Empty));
                row.push(Cell::Text(e.to_string()));
                failures.push(Error::Evaluation {
                    tau,
                    source: Box::new(e),
                });
            }
        }
        rows.push(row);
    }
    (Table { columns, rows }, failures)
}

/// Survival after `n` measurements with the bath reset in between.
fn reset_survival(rate: f64, tau: f64, n: usize) -> f64 {
    (-rate * tau * n as f64).exp()
}

fn rate_function<'a>(
    kind: RateKind,
    config: &'a RunConfig,
    ctx: &'a Context,
    curve: Option<&'a SurvivalCurve<f64>>,
) -> Box<dyn Fn(f64) -> Result<f64, Error> + Sync + 'a> {
    let state = PreparedState::new(config.system.theta, config.system.phi);
    let n = config.schedule.measurements;
    match kind {
        RateKind::Single => Box::new(move |t| gamma_rate(t, state.as_ref().map_err(Clone::clone)?, &ctx.kernels)),
        RateKind::Collective => Box::new(move |t| gamma_rate_collective(t, &ctx.weights, &ctx.kernels)),
        RateKind::Correlated => Box::new(move |t| {
            survival_with_backaction(t, n, &ctx.weights, &ctx.kernels, &ctx.protocol).map(|r| r.rate)
        }),
        RateKind::Master => Box::new(move |t| curve.expect("master curve is integrated up front").rate_at(t)),
        RateKind::Rwa => Box::new(move |t| decay_rate_rwa(t, config.system.omega0, &ctx.kernels)),
    }
}

fn oracle_table() -> Result<(Table, Vec<Error>), Error> {
    let checks = fixture_checks()?;
    let mut failures = Vec::new();
    let rows = checks
        .iter()
        .map(|c| {
            if !c.passed() {
                failures.push(Error::Consistency(format!(
                    "oracle fixture {:?}: error {:e} above tolerance {:e}",
                    c.name, c.error, c.tolerance
                )));
            }
            vec![
                Cell::Text(c.name.clone()),
                num(c.reference),
                num(c.value),
                num(c.error),
                num(c.tolerance),
                Cell::Bool(c.passed()),
            ]
        })
        .collect();
    Ok((
        Table {
            columns: vec!["check", "reference", "value", "error", "tolerance", "passed"],
            rows,
        },
        failures,
    ))
}

/// Runs the oracle fixtures on their own.
pub fn oracle_check() -> Result<Outcome, RunError> {
    let (table, failures) = oracle_table()?;
    Ok(Outcome {
        metadata: json!({
            "version": env!("CARGO_PKG_VERSION"),
            "mode": "oracle-check",
            "columns": table.columns,
        }),
        table,
        failures,
    })
}

fn metadata(config: &RunConfig, table: &Table) -> Value {
    let step = config
        .numerics
        .me_step
        .unwrap_or(config.schedule.end / DEFAULT_STEPS as f64);
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": config.to_value(),
        "kernel_tolerances": {
            "abs_tol": config.numerics.abs_tol,
            "rel_tol": config.numerics.rel_tol,
            "quadrature_order": config.numerics.quadrature_order,
            "max_panels": config.numerics.max_panels,
            "master_equation_step": step,
        },
        "columns": table.columns,
    })
}

/// Runs one configuration.
pub fn execute(config: &RunConfig) -> Result<Outcome, RunError> {
    if config.mode == Mode::OracleCheck {
        let (table, failures) = oracle_table()?;
        return Ok(Outcome {
            metadata: metadata(config, &table),
            table,
            failures,
        });
    }
    let ctx = build(config)?;
    let n = config.schedule.measurements;
    let (table, failures) = match config.mode {
        Mode::Single => {
            let rate = rate_function(RateKind::Single, config, &ctx, None);
            sweep_rows(&ctx, config, &[], |t| {
                let r = rate(t)?;
                Ok((r, reset_survival(r, t, n), vec![]))
            })
        }
        Mode::Collective => {
            let rate = rate_function(RateKind::Collective, config, &ctx, None);
            sweep_rows(&ctx, config, &[], |t| {
                let r = rate(t)?;
                Ok((r, reset_survival(r, t, n), vec![]))
            })
        }
        Mode::Rwa => {
            let rate = rate_function(RateKind::Rwa, config, &ctx, None);
            sweep_rows(&ctx, config, &["omega0"], |t| {
                let r = rate(t)?;
                Ok((r, reset_survival(r, t, n), vec![num(config.system.omega0)]))
            })
        }
        Mode::Correlated => {
            check_budget(&ctx, n)?;
            sweep_rows(&ctx, config, &["term_count", "imaginary_residue"], |t| {
                let r = survival_with_backaction(t, n, &ctx.weights, &ctx.kernels, &ctx.protocol)?;
                Ok((r.rate, r.survival, vec![Cell::Int(r.term_count), num(r.imaginary_residue)]))
            })
        }
        Mode::Master => {
            let curve = master_curve(config, &ctx, config.schedule.end)?;
            sweep_rows(&ctx, config, &["delta"], |t| {
                let r = curve.rate_at(t)?;
                Ok((r, reset_survival(r, t, n), vec![num(config.system.delta)]))
            })
        }
        Mode::Interaction => sweep_rows(&ctx, config, &["chi"], |t| {
            let s = survival_chi_interaction(t, &ctx.weights, config.system.chi)?;
            let rate = if s > 0.0 { -s.ln() / t } else { f64::INFINITY };
            Ok((rate, s.powi(n as i32), vec![num(config.system.chi)]))
        }),
        Mode::Crossover => {
            if config.crossover_rate == RateKind::Correlated {
                check_budget(&ctx, n)?;
            }
            let curve = match config.crossover_rate {
                RateKind::Master => Some(master_curve(config, &ctx, config.schedule.end)?),
                _ => None,
            };
            let rate = rate_function(config.crossover_rate, config, &ctx, curve.as_ref());
            let report = find_crossovers_on_grid(rate, &ctx.taus)?;
            let rows = report
                .extrema
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    vec![
                        num(e.tau),
                        num(e.rate),
                        Cell::Text(e.kind.as_str().into()),
                        Cell::Int(i as u128 + 1),
                        Cell::Int(n as u128),
                        num(config.system.j),
                        Cell::Bool(report.refined),
                    ]
                })
                .collect();
            (
                Table {
                    columns: vec!["tau", "gamma_rate", "kind", "index", "N", "J", "refined"],
                    rows,
                },
                Vec::new(),
            )
        }
        Mode::OracleCheck => unreachable!("handled above"),
    };
    Ok(Outcome {
        metadata: metadata(config, &table),
        table,
        failures,
    })
}
