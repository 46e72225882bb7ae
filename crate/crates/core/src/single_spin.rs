//! Single two-level system under repeated projective measurements.
//!
//! The rotation `U_R(τ) = e^{iH_Sτ}` is always applied before each measurement,
//! so the system frequency never enters the dephasing rate. The population-decay
//! comparator [`decay_rate_rwa`] keeps its `ω₀` dependence because projecting
//! onto an eigenstate of `H_S` makes the rotation irrelevant there.

use crate::bath::KernelSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bloch angles of the repeatedly prepared state
/// `cos(θ/2)|e⟩ + e^{iφ} sin(θ/2)|g⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparedState<T> {
    theta: T,
    phi: T,
}

impl<T: Real> PreparedState<T> {
    /// `theta ∈ [0, π]`; `phi` is reduced into `[0, 2π)`.
    pub fn new(theta: T, phi: T) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::PI()) {
            return Err(Error::domain("polar angle theta must lie in [0, pi]", theta.as_f64()));
        }
        if !phi.is_finite() {
            return Err(Error::domain("azimuthal angle phi must be finite", phi.as_f64()));
        }
        let two_pi = T::PI() + T::PI();
        let mut phi = phi % two_pi;
        if phi < T::zero() {
            phi += two_pi;
        }
        Ok(Self { theta, phi })
    }

    /// The equal superposition θ = π/2, φ = 0.
    pub fn equator() -> Self {
        Self {
            theta: T::FRAC_PI_2(),
            phi: T::zero(),
        }
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    fn visibility(&self) -> T {
        let s = self.theta.sin();
        T::of(0.5) * s * s
    }
}

/// One-interval survival `1 − ½ sin²θ (1 − e^{−γ})` for a given dephasing `γ`.
pub fn survival_from_gamma<T: Real>(gamma: T, state: &PreparedState<T>) -> T {
    T::one() + state.visibility() * (-gamma).exp_m1()
}

/// Rate `−ln(s)/τ` for a given dephasing `γ`; `tau` must be positive.
pub fn rate_from_gamma<T: Real>(tau: T, gamma: T, state: &PreparedState<T>) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(Error::domain("rate needs a positive interval tau", tau.as_f64()));
    }
    let x = state.visibility() * (-gamma).exp_m1();
    Ok(-x.ln_1p() / tau)
}

/// Survival probability of one measurement after an interval `tau`.
pub fn survival_one_interval<T: Real>(tau: T, state: &PreparedState<T>, kernels: &KernelSet<T>) -> Result<T> {
    Ok(survival_from_gamma(kernels.gamma(tau)?, state))
}

/// Effective inverse lifetime `Γ(τ) = −(1/τ) ln{1 − ½ sin²θ [1 − e^{−γ(τ)}]}`.
pub fn gamma_rate<T: Real>(tau: T, state: &PreparedState<T>, kernels: &KernelSet<T>) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(Error::domain("rate needs a positive interval tau", tau.as_f64()));
    }
    rate_from_gamma(tau, kernels.gamma(tau)?, state)
}

/// Coefficients `(a, b)` of `Γ(τ) ≈ aτ + bτ³` for the equal superposition:
/// `a = y`, `b = −y²/2 − z/12`.
pub fn expansion_coefficients<T: Real>(kernels: &KernelSet<T>) -> (T, T) {
    let (y, z) = kernels.moments();
    (y, -(y * y * T::of(0.5) + z / T::of(12.0)))
}

/// Cubic small-interval approximation of [`gamma_rate`] at θ = π/2.
pub fn gamma_rate_expansion<T: Real>(tau: T, kernels: &KernelSet<T>) -> Result<T> {
    if !(tau >= T::zero()) {
        return Err(Error::domain("interval tau must be non-negative", tau.as_f64()));
    }
    let (a, b) = expansion_coefficients(kernels);
    Ok(a * tau + b * tau * tau * tau)
}

/// Maximum of the cubic `aτ + bτ³`, at `sqrt(a / (−3b))`.
pub fn expansion_peak<T: Real>(kernels: &KernelSet<T>) -> Option<T> {
    let (a, b) = expansion_coefficients(kernels);
    (a > T::zero() && b < T::zero()).then(|| (a / (-T::of(3.0) * b)).sqrt())
}

/// Population-decay rate under the rotating-wave approximation,
/// `Γ̃(τ) = τ Σ_k |g_k|² sinc²[(ω_k − ω₀)τ/2]`.
///
/// This is a zero-temperature result; a finite β on the bath is ignored.
pub fn decay_rate_rwa<T: Real>(tau: T, omega0: T, kernels: &KernelSet<T>) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(Error::domain("rate needs a positive interval tau", tau.as_f64()));
    }
    if !kernels.bath().beta().is_zero_temperature() {
        log::warn!("decay_rate_rwa is a zero-temperature formula; ignoring finite beta");
    }
    let half = T::of(0.5);
    let v = kernels.spectral_integral(
        |w| {
            let s = ((w - omega0) * tau * half).sinc();
            s * s
        },
        tau,
        "rwa decay rate",
    )?;
    Ok(tau * v)
}

/// Coefficients `(ã, b̃)` of `Γ̃(τ) ≈ ãτ + b̃τ³`:
/// `ã = Σ|g_k|²`, `b̃ = −Σ|g_k|² (ω_k − ω₀)²/12`.
pub fn rwa_expansion_coefficients<T: Real>(omega0: T, kernels: &KernelSet<T>) -> Result<(T, T)> {
    let a = kernels.spectral_integral(|_| T::one(), T::zero(), "rwa coefficient a")?;
    let b = kernels.spectral_integral(
        |w| -(w - omega0) * (w - omega0) / T::of(12.0),
        T::zero(),
        "rwa coefficient b",
    )?;
    Ok((a, b))
}
