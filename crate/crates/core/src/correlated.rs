//! Survival under repeated measurements when the bath keeps its
//! measurement-conditioned state between measurements.
//!
//! Each term of the survival sum is labelled by two sequences `l_1..l_N` and
//! `l'_1..l'_N` of `J_z` eigenvalues. A term is the product of
//!
//! * the indirect-interaction phase `e^{−iΔ(τ)(Σ l_j² − Σ l'_j²)}`,
//! * the populations `Π_j w_{l_j} w_{l'_j}`,
//! * diagonal damping `Π_j e^{−(l_j − l'_j)² γ(τ)}`,
//! * pair damping `Π_{j>k} e^{−2(l_k − l'_k)(l_j − l'_j) γ_cross(τ, j−k)}`,
//! * pair phases `Π_{j>k} e^{2iμ(τ, j−k)(l_k l_j + l'_k l_j − l_k l'_j − l'_k l'_j)}`.
//!
//! Grouping `(l_j, l'_j)` into one site state turns the sum into a fully
//! connected pairwise contraction, evaluated here as a streaming depth-first
//! fold with per-depth accumulators.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use num_complex::Complex;
use rayon::prelude::*;

use crate::bath::{KernelSet, KernelSlice};
use crate::collective::CoherentWeights;
use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

/// Default ceiling on `(2J+1)^{2N}`.
pub const DEFAULT_TERM_BUDGET: u128 = 100_000_000;

/// Largest tolerated `|Im S|`.
const IMAGINARY_TOLERANCE: f64 = 1e-6;

/// Whether to exploit the `l ↔ l'` conjugation symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumStrategy {
    /// Every tuple; the imaginary part of the total is the residue.
    Full,
    /// Only tuples with `l_1 ≤ l'_1`, doubling the real part of the strict half.
    #[default]
    Halved,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolOptions {
    pub term_budget: u128,
    pub strategy: SumStrategy,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            term_budget: DEFAULT_TERM_BUDGET,
            strategy: SumStrategy::Halved,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult<T> {
    pub tau: T,
    pub measurements: usize,
    /// Probability that all measurements succeed.
    pub survival: T,
    /// `−ln(survival)/(Nτ)`.
    pub rate: T,
    /// `|Im S|` left over by the sum.
    pub imaginary_residue: T,
    /// `(2J+1)^{2N}`.
    pub term_count: u128,
    pub elapsed: Duration,
}

/// Label sequences `(l_1..l_N; l'_1..l'_N)`, stored as basis indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexTuple {
    pub unprimed: Vec<usize>,
    pub primed: Vec<usize>,
}

impl IndexTuple {
    /// Every tuple, as an odometer over `l` (fastest digit `l_N`) then `l'`.
    pub fn odometer(dim: usize, n: usize) -> impl Iterator<Item = IndexTuple> {
        let total = (dim as u128).pow(2 * n as u32);
        (0..total).map(move |mut code| {
            let mut digits = vec![0usize; 2 * n];
            for d in digits.iter_mut().rev() {
                *d = (code % dim as u128) as usize;
                code /= dim as u128;
            }
            let primed = digits.split_off(n);
            IndexTuple {
                unprimed: digits,
                primed,
            }
        })
    }
}

fn term_count(dim: usize, n: usize) -> u128 {
    (dim as u128).checked_pow(2 * n as u32).unwrap_or(u128::MAX)
}

fn check_budget(dim: usize, n: usize, budget: u128) -> Result<u128> {
    let count = term_count(dim, n);
    if count > budget {
        return Err(Error::Budget {
            what: "survival sum terms",
            required: count,
            budget,
        });
    }
    Ok(count)
}

/// One term of the survival sum, built literally from the recipe.
pub fn recipe_term<T: Real>(tuple: &IndexTuple, slice: &KernelSlice<T>, w: &CoherentWeights<T>) -> Complex<T> {
    let spin = w.spin();
    let l: Vec<T> = tuple.unprimed.iter().map(|&i| spin.m(i)).collect();
    let lp: Vec<T> = tuple.primed.iter().map(|&i| spin.m(i)).collect();
    let n = l.len();
    let mut phase = T::zero();
    let mut log_mag = T::zero();
    let mut weight = T::one();
    for j in 0..n {
        phase -= slice.delta * (l[j] * l[j] - lp[j] * lp[j]);
        weight *= w.weights()[tuple.unprimed[j]] * w.weights()[tuple.primed[j]];
        let c = l[j] - lp[j];
        log_mag -= c * c * slice.gamma;
    }
    for j in 0..n {
        for k in 0..j {
            let lag = (j - k) as i64;
            log_mag -= T::of(2.0) * (l[k] - lp[k]) * (l[j] - lp[j]) * slice.gamma_cross_at(lag);
            phase += T::of(2.0)
                * slice.mu_at(lag)
                * (l[k] * l[j] + lp[k] * l[j] - l[k] * lp[j] - lp[k] * lp[j]);
        }
    }
    cis(phase) * (weight * log_mag.exp())
}

/// Survival by literal enumeration of every tuple; the slow reference path.
pub fn survival_by_enumeration<T: Real>(
    slice: &KernelSlice<T>,
    n: usize,
    w: &CoherentWeights<T>,
    budget: u128,
) -> Result<Complex<T>> {
    check_measurements(n, slice)?;
    check_budget(w.spin().dim(), n, budget)?;
    Ok(IndexTuple::odometer(w.spin().dim(), n)
        .map(|t| recipe_term(&t, slice, w))
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b))
}

/// Two-measurement survival, transcribed term by term.
pub fn survival_two_measurements<T: Real>(slice: &KernelSlice<T>, w: &CoherentWeights<T>) -> Complex<T> {
    let ms = w.spin().ms::<T>();
    let wt = w.weights();
    let (g, d, g21, mu21) = (slice.gamma, slice.delta, slice.gamma_cross_at(1), slice.mu_at(1));
    let two = T::of(2.0);
    let mut s = Complex::new(T::zero(), T::zero());
    for (a1, l1) in ms.iter().enumerate() {
        for (a2, l2) in ms.iter().enumerate() {
            for (b1, q1) in ms.iter().enumerate() {
                for (b2, q2) in ms.iter().enumerate() {
                    let weight = wt[a1] * wt[a2] * wt[b1] * wt[b2];
                    if weight == T::zero() {
                        continue;
                    }
                    let ph = -d * (*l1 * *l1 + *l2 * *l2 - *q1 * *q1 - *q2 * *q2)
                        + two * mu21 * (*l1 * *l2 + *q1 * *l2 - *l1 * *q2 - *q1 * *q2);
                    let damp = -(*l1 - *q1) * (*l1 - *q1) * g - (*l2 - *q2) * (*l2 - *q2) * g
                        - two * (*l1 - *q1) * (*l2 - *q2) * g21;
                    s += cis(ph) * (weight * damp.exp());
                }
            }
        }
    }
    s
}

/// Three-measurement survival, transcribed term by term.
pub fn survival_three_measurements<T: Real>(slice: &KernelSlice<T>, w: &CoherentWeights<T>) -> Complex<T> {
    let ms = w.spin().ms::<T>();
    let wt = w.weights();
    let (g, d) = (slice.gamma, slice.delta);
    let (g21, g31, g32) = (slice.gamma_cross_at(1), slice.gamma_cross_at(2), slice.gamma_cross_at(1));
    let (m21, m31, m32) = (slice.mu_at(1), slice.mu_at(2), slice.mu_at(1));
    let two = T::of(2.0);
    let dim = ms.len();
    let mut s = Complex::new(T::zero(), T::zero());
    for a1 in 0..dim {
        for a2 in 0..dim {
            for a3 in 0..dim {
                for b1 in 0..dim {
                    for b2 in 0..dim {
                        for b3 in 0..dim {
                            let weight = wt[a1] * wt[a2] * wt[a3] * wt[b1] * wt[b2] * wt[b3];
                            if weight == T::zero() {
                                continue;
                            }
                            let (l1, l2, l3) = (ms[a1], ms[a2], ms[a3]);
                            let (q1, q2, q3) = (ms[b1], ms[b2], ms[b3]);
                            let ph = -d * (l1 * l1 + l2 * l2 + l3 * l3 - q1 * q1 - q2 * q2 - q3 * q3)
                                + two * m21 * (l1 * l2 + q1 * l2 - l1 * q2 - q1 * q2)
                                + two * m31 * (l1 * l3 + q1 * l3 - l1 * q3 - q1 * q3)
                                + two * m32 * (l2 * l3 + q2 * l3 - l2 * q3 - q2 * q3);
                            let damp = -(l1 - q1) * (l1 - q1) * g
                                - (l2 - q2) * (l2 - q2) * g
                                - (l3 - q3) * (l3 - q3) * g
                                - two * (l1 - q1) * (l2 - q2) * g21
                                - two * (l1 - q1) * (l3 - q3) * g31
                                - two * (l2 - q2) * (l3 - q3) * g32;
                            s += cis(ph) * (weight * damp.exp());
                        }
                    }
                }
            }
        }
    }
    s
}

fn check_measurements<T: Real>(n: usize, slice: &KernelSlice<T>) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("measurement count N must be at least 1", 0.0));
    }
    if slice.max_lag() + 1 < n {
        return Err(Error::domain(
            "kernel slice has too few lags for the measurement count",
            slice.max_lag() as f64,
        ));
    }
    Ok(())
}

/// Site states `(l, l')` with non-zero weight, their single-site factors and pair tables.
struct Contraction<T> {
    n: usize,
    /// `(index of l, index of l')` per state.
    labels: Vec<(usize, usize)>,
    site: Vec<Complex<T>>,
    /// `pair[d - 1][a * M + b]`: earlier state `a`, later state `b`, lag `d`.
    pair: Vec<Vec<Complex<T>>>,
}

impl<T: Real> Contraction<T> {
    fn new(slice: &KernelSlice<T>, n: usize, w: &CoherentWeights<T>) -> Self {
        let spin = w.spin();
        let wt = w.weights();
        let mut labels = Vec::new();
        let mut site = Vec::new();
        for i in 0..spin.dim() {
            for ip in 0..spin.dim() {
                let weight = wt[i] * wt[ip];
                if weight == T::zero() {
                    continue;
                }
                let (l, lp): (T, T) = (spin.m(i), spin.m(ip));
                let c = l - lp;
                labels.push((i, ip));
                site.push(cis(-slice.delta * (l * l - lp * lp)) * (weight * (-c * c * slice.gamma).exp()));
            }
        }
        let states = labels.len();
        let two = T::of(2.0);
        let pair = (1..n)
            .map(|d| {
                let (gc, mu) = (slice.gamma_cross_at(d as i64), slice.mu_at(d as i64));
                let mut table = Vec::with_capacity(states * states);
                for &(ak, akp) in &labels {
                    let (lk, lkp): (T, T) = (spin.m(ak), spin.m(akp));
                    for &(aj, ajp) in &labels {
                        let (lj, ljp): (T, T) = (spin.m(aj), spin.m(ajp));
                        let damp = -two * (lk - lkp) * (lj - ljp) * gc;
                        let ph = two * mu * (lk * lj + lkp * lj - lk * ljp - lkp * ljp);
                        table.push(cis(ph) * damp.exp());
                    }
                }
                table
            })
            .collect();
        Self { n, labels, site, pair }
    }

    fn states(&self) -> usize {
        self.site.len()
    }

    /// Sum over all tuples whose first site is `first`.
    fn sum_from(&self, first: usize) -> Complex<T> {
        let m = self.states();
        let n = self.n;
        // acc[depth][j] holds, for future depth j, site factor times pair factors with all chosen sites.
        let mut acc: Vec<Vec<Vec<Complex<T>>>> = (0..n).map(|_| vec![self.site.clone(); n]).collect();
        let partial = self.site[first];
        if n == 1 {
            return partial;
        }
        for (j, future) in acc[1].iter_mut().enumerate().skip(1) {
            let row = &self.pair[j - 1][first * m..(first + 1) * m];
            for (a, t) in future.iter_mut().zip(row) {
                *a *= *t;
            }
        }
        self.descend(1, partial, &mut acc)
    }

    fn descend(&self, depth: usize, partial: Complex<T>, acc: &mut [Vec<Vec<Complex<T>>>]) -> Complex<T> {
        let n = self.n;
        let m = self.states();
        if depth == n - 1 {
            let s = acc[depth][depth]
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |a, b| a + *b);
            return partial * s;
        }
        let mut total = Complex::new(T::zero(), T::zero());
        for a in 0..m {
            let p = partial * acc[depth][depth][a];
            let (lower, upper) = acc.split_at_mut(depth + 1);
            let current = &lower[depth];
            let next = &mut upper[0];
            for j in depth + 1..n {
                let row = &self.pair[j - depth - 1][a * m..(a + 1) * m];
                for ((dst, src), t) in next[j].iter_mut().zip(&current[j]).zip(row) {
                    *dst = *src * *t;
                }
            }
            total += self.descend(depth + 1, p, acc);
        }
        total
    }
}

/// Survival after `n` measurements from precomputed kernels.
pub fn survival_from_slice<T: Real>(
    slice: &KernelSlice<T>,
    n: usize,
    w: &CoherentWeights<T>,
    options: &ProtocolOptions,
) -> Result<ProtocolResult<T>> {
    let start = Instant::now();
    check_measurements(n, slice)?;
    let count = check_budget(w.spin().dim(), n, options.term_budget)?;
    let contraction = Contraction::new(slice, n, w);
    let zero = Complex::new(T::zero(), T::zero());
    // Partial sums are collected in order and added sequentially so the result
    // does not depend on how the work was split across threads.
    let states = contraction.states();
    let done = AtomicUsize::new(0);
    let partial: Vec<Complex<T>> = (0..states)
        .into_par_iter()
        .map(|a| {
            let v = match options.strategy {
                SumStrategy::Halved if contraction.labels[a].0 > contraction.labels[a].1 => zero,
                _ => contraction.sum_from(a),
            };
            let k = done.fetch_add(1, Ordering::Relaxed) + 1;
            log::debug!("survival sum: {k}/{states} leading states done");
            v
        })
        .collect();
    let (survival, residue) = match options.strategy {
        SumStrategy::Full => {
            let s = partial.iter().fold(zero, |a, b| a + *b);
            (s.re, s.im.abs())
        }
        SumStrategy::Halved => {
            let (mut strict, mut diagonal) = (zero, zero);
            for (v, &(l, lp)) in partial.iter().zip(&contraction.labels) {
                if l < lp {
                    strict += *v;
                } else if l == lp {
                    diagonal += *v;
                }
            }
            (T::of(2.0) * strict.re + diagonal.re, diagonal.im.abs())
        }
    };
    if residue > T::of(IMAGINARY_TOLERANCE) {
        return Err(Error::Consistency(format!(
            "survival has imaginary part {:e} at tau = {}",
            residue.as_f64(),
            slice.tau
        )));
    }
    if !(survival > T::zero()) {
        return Err(Error::Consistency(format!(
            "survival {:e} is not positive at tau = {}",
            survival.as_f64(),
            slice.tau
        )));
    }
    let survival = survival.min(T::one());
    let rate = if slice.tau > T::zero() {
        -survival.ln() / (T::of_usize(n) * slice.tau)
    } else {
        T::zero()
    };
    Ok(ProtocolResult {
        tau: slice.tau,
        measurements: n,
        survival,
        rate,
        imaginary_residue: residue,
        term_count: count,
        elapsed: start.elapsed(),
    })
}

/// Survival `S(t = Nτ)` including the bath's measurement back-action.
pub fn survival_with_backaction<T: Real>(
    tau: T,
    n: usize,
    w: &CoherentWeights<T>,
    kernels: &KernelSet<T>,
    options: &ProtocolOptions,
) -> Result<ProtocolResult<T>> {
    if n == 0 {
        return Err(Error::domain("measurement count N must be at least 1", 0.0));
    }
    // Fail on the budget before paying for quadrature.
    check_budget(w.spin().dim(), n, options.term_budget)?;
    let slice = kernels.slice(tau, n - 1)?;
    survival_from_slice(&slice, n, w, options)
}

/// `Γ(τ, N) = −ln S(Nτ) / (Nτ)`.
pub fn gamma_rate_n<T: Real>(
    tau: T,
    n: usize,
    w: &CoherentWeights<T>,
    kernels: &KernelSet<T>,
    options: &ProtocolOptions,
) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(Error::domain("rate needs a positive interval tau", tau.as_f64()));
    }
    survival_with_backaction(tau, n, w, kernels, options).map(|r| r.rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathSpec;
    use crate::collective::{coherent_weights, collective_survival};
    use crate::spin::SpinLength;
    use std::f64::consts::FRAC_PI_2;

    fn slice(tau: f64, lags: usize) -> KernelSlice<f64> {
        KernelSet::new(BathSpec::ohmic(0.5, 15.0, 1.0).unwrap())
            .unwrap()
            .slice(tau, lags)
            .unwrap()
    }

    #[test]
    fn odometer_order_and_count() {
        let all: Vec<_> = IndexTuple::odometer(2, 1).collect();
        assert_eq!(all.len(), 4);
        assert_eq!(all[1], IndexTuple { unprimed: vec![0], primed: vec![1] });
        assert_eq!(IndexTuple::odometer(3, 2).count(), 81);
    }

    #[test]
    fn single_measurement_has_no_pair_factors() {
        let w = coherent_weights(SpinLength::new(1.5).unwrap(), 1.2, 0.0).unwrap();
        let s = slice(0.2, 0);
        let r = survival_from_slice(&s, 1, &w, &ProtocolOptions::default()).unwrap();
        let direct = collective_survival(s.gamma, s.delta, &w);
        assert!((r.survival - direct.re).abs() < 1e-13);
    }

    #[test]
    fn fast_fold_matches_literal_enumeration() {
        let w = coherent_weights(SpinLength::new(1.0).unwrap(), 1.0, 0.0).unwrap();
        let s = slice(0.3, 3);
        for n in 1..=4 {
            let slow = survival_by_enumeration(&s, n, &w, u128::MAX).unwrap();
            let opts = ProtocolOptions {
                strategy: SumStrategy::Full,
                ..Default::default()
            };
            let fast = survival_from_slice(&s, n, &w, &opts).unwrap();
            assert!((fast.survival - slow.re).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn budget_is_enforced_before_quadrature() {
        let k = KernelSet::new(BathSpec::ohmic(0.05, 15.0, 1.0).unwrap()).unwrap();
        let w = coherent_weights(SpinLength::new(5.0).unwrap(), FRAC_PI_2, 0.0).unwrap();
        let err = survival_with_backaction(0.1, 5, &w, &k, &ProtocolOptions::default()).unwrap_err();
        match err {
            Error::Budget { required, .. } => assert_eq!(required, 11u128.pow(10)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_measurements_rejected() {
        let w = coherent_weights(SpinLength::HALF, FRAC_PI_2, 0.0).unwrap();
        assert!(survival_from_slice(&slice(0.1, 0), 0, &w, &ProtocolOptions::default()).is_err());
        assert!(survival_from_slice(&slice(0.1, 0), 2, &w, &ProtocolOptions::default()).is_err());
    }
}
