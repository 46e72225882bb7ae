//! Collective dephasing of `2J` two-level systems sharing one bath.
//!
//! The initial state is the SU(2) coherent state `|ς, J⟩` with
//! `ς = e^{iφ} tan(θ/2)`. Its `J_z` populations are binomial with success
//! probability `sin²(θ/2)`, which is how they are computed here.

use num_complex::Complex;

use crate::bath::{KernelSet, KernelSlice};
use crate::error::{Error, Result};
use crate::scalar::{cis, Real};
use crate::spin::SpinLength;

/// Above this `2J` the binomial weights are evaluated in log space.
const LOG_SPACE_THRESHOLD: u32 = 60;

/// `J_z` populations `|⟨J,m|ς,J⟩|²` of a spin coherent state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentWeights<T> {
    spin: SpinLength,
    theta: T,
    phi: T,
    weights: Vec<T>,
}

impl<T: Real> CoherentWeights<T> {
    pub fn spin(&self) -> SpinLength {
        self.spin
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    /// Weights indexed by `m = −J..=J`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `ς = e^{iφ} tan(θ/2)`; `None` at the pole θ = π.
    pub fn varsigma(&self) -> Option<Complex<T>> {
        (self.theta < T::PI()).then(|| cis(self.phi) * (self.theta * T::of(0.5)).tan())
    }

    /// State amplitudes `⟨J,m|ς,J⟩ = sqrt(w_m) e^{i(J+m)φ}`.
    pub fn amplitudes(&self) -> Vec<Complex<T>> {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| cis(self.phi * T::of_usize(i)) * w.sqrt())
            .collect()
    }
}

/// Coherent-state weights for spin `spin` at Bloch angles `(theta, phi)`.
pub fn coherent_weights<T: Real>(spin: SpinLength, theta: T, phi: T) -> Result<CoherentWeights<T>> {
    if !(theta >= T::zero() && theta <= T::PI()) {
        return Err(Error::domain("polar angle theta must lie in [0, pi]", theta.as_f64()));
    }
    if !phi.is_finite() {
        return Err(Error::domain("azimuthal angle phi must be finite", phi.as_f64()));
    }
    let n = spin.twice();
    let dim = spin.dim();
    let mut weights = vec![T::zero(); dim];
    if theta == T::zero() {
        weights[0] = T::one();
    } else if theta == T::PI() {
        weights[dim - 1] = T::one();
    } else {
        let s = (theta * T::of(0.5)).sin();
        let c = (theta * T::of(0.5)).cos();
        let (p, q) = (s * s, c * c);
        if n > LOG_SPACE_THRESHOLD {
            let (lp, lq) = (p.ln(), q.ln());
            let mut log_binom = T::zero();
            for k in 0..=n {
                if k > 0 {
                    log_binom += (T::of((n - k + 1) as f64) / T::of(k as f64)).ln();
                }
                let lw = log_binom + T::of(k as f64) * lp + T::of((n - k) as f64) * lq;
                weights[k as usize] = lw.exp();
            }
        } else {
            let mut binom = T::one();
            for k in 0..=n {
                if k > 0 {
                    binom = binom * T::of((n - k + 1) as f64) / T::of(k as f64);
                }
                weights[k as usize] = binom * p.powi(k as i32) * q.powi((n - k) as i32);
            }
        }
    }
    Ok(CoherentWeights {
        spin,
        theta,
        phi,
        weights,
    })
}

/// One-interval survival `Σ_{m,n} w_m w_n e^{−iΔ(m²−n²)} e^{−γ(m−n)²}`,
/// returned complex so the (vanishing) imaginary part can be inspected.
pub fn collective_survival<T: Real>(gamma: T, delta: T, w: &CoherentWeights<T>) -> Complex<T> {
    let ms = w.spin.ms::<T>();
    let mut total = Complex::new(T::zero(), T::zero());
    for (m, wm) in ms.iter().zip(&w.weights) {
        if *wm == T::zero() {
            continue;
        }
        let mut row = Complex::new(T::zero(), T::zero());
        for (n, wn) in ms.iter().zip(&w.weights) {
            let d = *m - *n;
            row += cis(-delta * (*m * *m - *n * *n)) * (*wn * (-gamma * d * d).exp());
        }
        total += row * *wm;
    }
    total
}

/// Collective inverse lifetime from precomputed (possibly substituted) kernels.
pub fn gamma_rate_collective_from_slice<T: Real>(slice: &KernelSlice<T>, w: &CoherentWeights<T>) -> Result<T> {
    if !(slice.tau > T::zero()) {
        return Err(Error::domain("rate needs a positive interval tau", slice.tau.as_f64()));
    }
    let s = collective_survival(slice.gamma, slice.delta, w);
    if !(s.re > T::zero()) {
        return Err(Error::Consistency(format!(
            "collective survival {:e} is not positive at tau = {}",
            s.re.as_f64(),
            slice.tau
        )));
    }
    Ok(-s.re.min(T::one()).ln() / slice.tau)
}

/// Collective inverse lifetime `Γ(τ) = −(1/τ) ln Σ_{m,n} w_m w_n e^{−iΔ(m²−n²)} e^{−γ(m−n)²}`.
pub fn gamma_rate_collective<T: Real>(tau: T, w: &CoherentWeights<T>, kernels: &KernelSet<T>) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(Error::domain("rate needs a positive interval tau", tau.as_f64()));
    }
    let slice = KernelSlice::local(tau, kernels.gamma(tau)?, kernels.delta(tau)?);
    gamma_rate_collective_from_slice(&slice, w)
}

/// Survival under a constant one-axis twisting `χ J_z²` with no bath,
/// `Σ_{m,n} w_m w_n e^{−iχτ(m²−n²)}`.
pub fn survival_chi_interaction<T: Real>(tau: T, w: &CoherentWeights<T>, chi: T) -> Result<T> {
    if !(tau >= T::zero()) {
        return Err(Error::domain("interval tau must be non-negative", tau.as_f64()));
    }
    let ms = w.spin.ms::<T>();
    let mut total = T::zero();
    for (m, wm) in ms.iter().zip(&w.weights) {
        for (n, wn) in ms.iter().zip(&w.weights) {
            total += *wm * *wn * (chi * tau * (*m * *m - *n * *n)).cos();
        }
    }
    Ok(total.max(T::zero()).min(T::one()))
}

/// Same quantity as [`survival_chi_interaction`] written as `|Σ_m w_m e^{−iχτm²}|²`.
pub fn survival_chi_modulus<T: Real>(tau: T, w: &CoherentWeights<T>, chi: T) -> T {
    let ms = w.spin.ms::<T>();
    ms.iter()
        .zip(&w.weights)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (m, wm)| acc + cis(-chi * tau * *m * *m) * *wm)
        .norm_sqr()
}
