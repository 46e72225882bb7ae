//! Local extrema of rate curves `τ ↦ Γ(τ)` and plain sweeps over τ grids.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative bracket width at which golden-section refinement stops.
pub const REFINE_RELATIVE_WIDTH: f64 = 1e-4;

/// Samples closer than this are one plateau point.
const PLATEAU_TOLERANCE: f64 = 1e-13;

const MAX_REFINE_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Max,
    Min,
}

impl ExtremumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtremumKind::Max => "max",
            ExtremumKind::Min => "min",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum<T> {
    pub tau: T,
    pub rate: T,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverReport<T> {
    /// Strictly increasing in τ, alternating kinds.
    pub extrema: Vec<Extremum<T>>,
    pub grid: Vec<T>,
    pub rates: Vec<T>,
    /// Every refinement reached the target width.
    pub refined: bool,
}

impl<T: Real> CrossoverReport<T> {
    pub fn maxima(&self) -> impl Iterator<Item = &Extremum<T>> {
        self.extrema.iter().filter(|e| e.kind == ExtremumKind::Max)
    }

    pub fn minima(&self) -> impl Iterator<Item = &Extremum<T>> {
        self.extrema.iter().filter(|e| e.kind == ExtremumKind::Min)
    }

    /// The largest-rate maximum.
    pub fn global_max(&self) -> Option<&Extremum<T>> {
        self.maxima()
            .max_by(|a, b| a.rate.partial_cmp(&b.rate).unwrap_or(std::cmp::Ordering::Equal))
    }
}

/// τ sample layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec<T> {
    Linear { start: T, end: T, points: usize },
    Geometric { start: T, end: T, points: usize },
}

impl<T: Real> GridSpec<T> {
    pub fn points(&self) -> Result<Vec<T>> {
        match *self {
            GridSpec::Linear { start, end, points } => {
                check_bounds(start, end, points, false)?;
                if points == 1 {
                    return Ok(vec![start]);
                }
                let step = (end - start) / T::of_usize(points - 1);
                Ok((0..points)
                    .map(|i| if i + 1 == points { end } else { start + step * T::of_usize(i) })
                    .collect())
            }
            GridSpec::Geometric { start, end, points } => {
                check_bounds(start, end, points, true)?;
                if points == 1 {
                    return Ok(vec![start]);
                }
                let ratio = (end / start).ln() / T::of_usize(points - 1);
                Ok((0..points)
                    .map(|i| if i + 1 == points { end } else { start * (ratio * T::of_usize(i)).exp() })
                    .collect())
            }
        }
    }
}

fn check_bounds<T: Real>(start: T, end: T, points: usize, positive: bool) -> Result<()> {
    if points == 0 {
        return Err(Error::domain("grid needs at least one point", 0.0));
    }
    if !start.is_finite() || !end.is_finite() {
        return Err(Error::domain("grid bounds must be finite", start.as_f64()));
    }
    if positive && !(start > T::zero()) {
        return Err(Error::domain("geometric grid needs a positive start", start.as_f64()));
    }
    if points > 1 && !(end > start) {
        return Err(Error::domain("grid end must exceed its start", end.as_f64()));
    }
    Ok(())
}

/// One row of a sweep; failures are kept per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub tau: T,
    pub rate: Result<T>,
}

/// Evaluates `rate` at every grid point in parallel, in grid order.
pub fn sweep<T, F>(rate: F, grid: &GridSpec<T>) -> Result<Vec<SweepRow<T>>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
{
    let taus = grid.points()?;
    Ok(sweep_points(&rate, &taus))
}

pub fn sweep_points<T, F>(rate: &F, taus: &[T]) -> Vec<SweepRow<T>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
{
    taus.par_iter().map(|&tau| SweepRow { tau, rate: rate(tau) }).collect()
}

/// Extrema of `rate` on `[tau_min, tau_max]` from a geometric grid of `samples` points.
pub fn find_crossovers<T, F>(rate: F, tau_min: T, tau_max: T, samples: usize) -> Result<CrossoverReport<T>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
{
    if !(tau_min > T::zero() && tau_max > tau_min) {
        return Err(Error::domain("need 0 < tau_min < tau_max", tau_min.as_f64()));
    }
    if samples < 16 {
        return Err(Error::domain("need at least 16 samples", samples as f64));
    }
    let grid = GridSpec::Geometric {
        start: tau_min,
        end: tau_max,
        points: samples,
    }
    .points()?;
    find_crossovers_on_grid(rate, &grid)
}

/// Extrema of `rate` bracketed on an increasing grid and refined by golden section.
pub fn find_crossovers_on_grid<T, F>(rate: F, grid: &[T]) -> Result<CrossoverReport<T>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
{
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("grid must be strictly increasing", 0.0));
    }
    let rates = grid
        .par_iter()
        .map(|&t| rate(t).map_err(|e| Error::at_tau(t.as_f64(), e)))
        .collect::<Result<Vec<T>>>()?;
    let (extrema, refined) = locate(&rate, grid, &rates)?;
    Ok(CrossoverReport {
        extrema,
        grid: grid.to_vec(),
        rates,
        refined,
    })
}

/// `(left, centre, right, kind)` sample indices of every bracketed extremum.
pub fn bracket_extrema<T: Real>(rates: &[T]) -> Vec<(usize, usize, usize, ExtremumKind)> {
    let tol = T::of(PLATEAU_TOLERANCE);
    // Indices of distinct points; a plateau keeps its first sample.
    let mut keep: Vec<usize> = Vec::with_capacity(rates.len());
    for (i, r) in rates.iter().enumerate() {
        match keep.last() {
            Some(&j) if (*r - rates[j]).abs() <= tol * T::one().max(r.abs()) => {}
            _ => keep.push(i),
        }
    }
    let mut out = Vec::new();
    for w in keep.windows(3) {
        let (a, b, c) = (rates[w[0]], rates[w[1]], rates[w[2]]);
        if b > a && b > c {
            out.push((w[0], w[1], w[2], ExtremumKind::Max));
        } else if b < a && b < c {
            out.push((w[0], w[1], w[2], ExtremumKind::Min));
        }
    }
    out
}

fn locate<T, F>(rate: &F, grid: &[T], rates: &[T]) -> Result<(Vec<Extremum<T>>, bool)>
where
    T: Real,
    F: Fn(T) -> Result<T>,
{
    let mut all_refined = true;
    let mut extrema = Vec::new();
    for (lo, mid, hi, kind) in bracket_extrema(rates) {
        let sign = match kind {
            ExtremumKind::Max => T::one(),
            ExtremumKind::Min => -T::one(),
        };
        let objective = |t: T| rate(t).map(|r| sign * r).map_err(|e| Error::at_tau(t.as_f64(), e));
        let (tau, value, converged) = golden_section(objective, grid[lo], grid[hi])?;
        all_refined &= converged;
        let sampled = sign * rates[mid];
        let best = if value >= sampled {
            Extremum {
                tau,
                rate: sign * value,
                kind,
            }
        } else {
            Extremum {
                tau: grid[mid],
                rate: rates[mid],
                kind,
            }
        };
        extrema.push(best);
    }
    // Overlapping brackets could in principle reorder neighbours.
    for i in 1..extrema.len() {
        if !(extrema[i].tau > extrema[i - 1].tau) {
            all_refined = false;
            extrema[i].tau = extrema[i - 1].tau.max(extrema[i].tau);
        }
    }
    extrema.dedup_by(|b, a| !(b.tau > a.tau));
    Ok((extrema, all_refined))
}

/// Maximizes `f` on `[a, b]`; returns `(argmax, max, converged)`.
pub fn golden_section<T, F>(f: F, mut a: T, mut b: T) -> Result<(T, T, bool)>
where
    T: Real,
    F: Fn(T) -> Result<T>,
{
    let inv_phi = T::of((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let target = T::of(REFINE_RELATIVE_WIDTH);
    for _ in 0..MAX_REFINE_ITERATIONS {
        if b - a <= target * ((a + b) * T::of(0.5)).abs() {
            let (t, v) = if fc >= fd { (c, fc) } else { (d, fd) };
            return Ok((t, v, true));
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d)?;
        }
    }
    let (t, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok((t, v, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid_values() {
        let g = GridSpec::Geometric {
            start: 0.01,
            end: 1.0,
            points: 9,
        }
        .points()
        .unwrap();
        for (k, t) in g.iter().enumerate() {
            assert!((t - 0.01 * 10f64.powf(k as f64 / 4.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_sweep_of_cubic() {
        let rows = sweep(
            |t: f64| Ok(t * t * t - t),
            &GridSpec::Linear {
                start: 0.0,
                end: 2.0,
                points: 3,
            },
        )
        .unwrap();
        let got: Vec<f64> = rows.iter().map(|r| *r.rate.as_ref().unwrap()).collect();
        assert_eq!(got, vec![0.0, 0.0, 6.0]);
    }

    #[test]
    fn sweep_keeps_failures_per_row() {
        let rows = sweep(
            |t: f64| if t > 0.5 { Err(Error::Consistency("boom".into())) } else { Ok(t) },
            &GridSpec::Linear {
                start: 0.0,
                end: 1.0,
                points: 5,
            },
        )
        .unwrap();
        assert_eq!(rows.iter().filter(|r| r.rate.is_err()).count(), 2);
    }

    #[test]
    fn constant_curve_has_no_extrema() {
        let r = find_crossovers(|_t: f64| Ok(3.0), 0.1, 1.0, 32).unwrap();
        assert!(r.extrema.is_empty());
    }

    #[test]
    fn sine_extrema_alternate_and_refine() {
        let r = find_crossovers(|t: f64| Ok(t.sin()), 0.5, 12.0, 64).unwrap();
        let kinds: Vec<_> = r.extrema.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![ExtremumKind::Max, ExtremumKind::Min, ExtremumKind::Max, ExtremumKind::Min]
        );
        for (e, k) in r.extrema.iter().zip([0.5, 1.5, 2.5, 3.5]) {
            assert!((e.tau / (k * std::f64::consts::PI) - 1.0).abs() < 1e-4);
        }
        assert!(r.refined);
    }

    #[test]
    fn failures_name_the_interval() {
        let err = find_crossovers(
            |t: f64| if t > 0.9 { Err(Error::Consistency("x".into())) } else { Ok(t) },
            0.1,
            1.0,
            16,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Evaluation { tau, .. } if tau > 0.9));
    }
}
