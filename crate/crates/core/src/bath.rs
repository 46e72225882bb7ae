//! Bath description and every bath-derived kernel.
//!
//! A bath is either a continuum spectral density, integrated by composite
//! Gauss–Legendre quadrature on `[0, 50 ω_c]`, or an explicit list of modes,
//! summed directly. All kernels share the form `Σ_k |g_k|² f(ω_k)`, which in
//! the continuum becomes `∫ J(ω) f(ω) dω`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::{GaussLegendre, QuadratureOptions};
use crate::scalar::Real;

/// Inverse temperature β of the bath; `Infinite` is the zero-temperature limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseTemperature<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> InverseTemperature<T> {
    /// Accepts any positive β; `+∞` maps onto [`InverseTemperature::Infinite`].
    pub fn new(beta: T) -> Result<Self> {
        if beta.is_infinite() && beta > T::zero() {
            Ok(Self::Infinite)
        } else if beta.is_finite() && beta > T::zero() {
            Ok(Self::Finite(beta))
        } else {
            Err(Error::domain("inverse temperature must be positive", beta.as_f64()))
        }
    }

    /// `coth(βω/2)`, replaced by exactly 1 at zero temperature.
    #[inline]
    pub fn coth_half(&self, omega: T) -> T {
        match *self {
            Self::Infinite => T::one(),
            Self::Finite(beta) => T::one() / (beta * omega * T::of(0.5)).tanh(),
        }
    }

    pub fn value(&self) -> T {
        match *self {
            Self::Infinite => T::infinity(),
            Self::Finite(b) => b,
        }
    }

    pub fn is_zero_temperature(&self) -> bool {
        matches!(self, Self::Infinite)
    }
}

/// Continuum spectral density `J(ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralDensity<T> {
    /// `J(ω) = G ω e^{-ω/ω_c}`.
    Ohmic { coupling: T, cutoff: T },
}

impl<T: Real> SpectralDensity<T> {
    #[inline]
    pub fn eval(&self, omega: T) -> T {
        match *self {
            Self::Ohmic { coupling, cutoff } => coupling * omega * (-omega / cutoff).exp(),
        }
    }

    /// Frequency scale beyond which the density is exponentially small.
    pub fn cutoff(&self) -> T {
        match *self {
            Self::Ohmic { cutoff, .. } => cutoff,
        }
    }

    pub fn coupling(&self) -> T {
        match *self {
            Self::Ohmic { coupling, .. } => coupling,
        }
    }
}

/// One discrete bath oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMode<T> {
    pub coupling: Complex<T>,
    pub frequency: T,
}

impl<T: Real> BathMode<T> {
    pub fn new(coupling: Complex<T>, frequency: T) -> Self {
        Self { coupling, frequency }
    }

    /// Mode with real coupling `sqrt(strength)`, i.e. `|g|² = strength`.
    pub fn with_strength(strength: T, frequency: T) -> Self {
        Self::new(Complex::new(strength.sqrt(), T::zero()), frequency)
    }

    #[inline]
    pub fn strength(&self) -> T {
        self.coupling.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BathKind<T> {
    Continuum(SpectralDensity<T>),
    Discrete(Vec<BathMode<T>>),
}

/// A validated bath: spectral content plus temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec<T> {
    kind: BathKind<T>,
    beta: InverseTemperature<T>,
}

impl<T: Real> BathSpec<T> {
    /// Ohmic continuum with coupling `G ≥ 0`, cutoff `ω_c > 0` and inverse temperature β.
    pub fn ohmic(coupling: T, cutoff: T, beta: T) -> Result<Self> {
        if !(coupling >= T::zero()) || !coupling.is_finite() {
            return Err(Error::domain("coupling G must be non-negative", coupling.as_f64()));
        }
        if !(cutoff > T::zero()) || !cutoff.is_finite() {
            return Err(Error::domain("cutoff omega_c must be positive", cutoff.as_f64()));
        }
        Ok(Self {
            kind: BathKind::Continuum(SpectralDensity::Ohmic { coupling, cutoff }),
            beta: InverseTemperature::new(beta)?,
        })
    }

    pub fn discrete(modes: Vec<BathMode<T>>, beta: T) -> Result<Self> {
        for m in &modes {
            if !(m.frequency > T::zero()) || !m.frequency.is_finite() {
                return Err(Error::domain("mode frequency must be positive", m.frequency.as_f64()));
            }
            if !m.coupling.re.is_finite() || !m.coupling.im.is_finite() {
                return Err(Error::domain("mode coupling must be finite", m.coupling.norm().as_f64()));
            }
        }
        Ok(Self {
            kind: BathKind::Discrete(modes),
            beta: InverseTemperature::new(beta)?,
        })
    }

    pub fn kind(&self) -> &BathKind<T> {
        &self.kind
    }

    pub fn beta(&self) -> InverseTemperature<T> {
        self.beta
    }

    pub fn modes(&self) -> Option<&[BathMode<T>]> {
        match &self.kind {
            BathKind::Discrete(m) => Some(m),
            BathKind::Continuum(_) => None,
        }
    }

    /// Same spectral content at a different temperature.
    pub fn with_beta(&self, beta: T) -> Result<Self> {
        Ok(Self {
            kind: self.kind.clone(),
            beta: InverseTemperature::new(beta)?,
        })
    }

    /// Replaces a continuum by `count` trapezoid-rule modes on `(0, omega_max]`.
    ///
    /// The ω = 0 end node is shifted to a frequency `1e-9 Δω`; the pure-dephasing
    /// kernels have finite limits there so the shifted node carries the endpoint
    /// weight of the rule. Discrete baths are returned unchanged.
    pub fn discretize_trapezoid(&self, count: usize, omega_max: T) -> Result<Self> {
        let density = match &self.kind {
            BathKind::Discrete(_) => return Ok(self.clone()),
            BathKind::Continuum(d) => *d,
        };
        if count < 2 {
            return Err(Error::domain("trapezoid discretization needs at least 2 modes", count as f64));
        }
        let step = omega_max / T::of_usize(count - 1);
        let half = T::of(0.5);
        let modes = (0..count)
            .map(|k| {
                let (omega, weight) = match k {
                    0 => (step * T::of(1e-9), half),
                    k if k == count - 1 => (step * T::of_usize(k), half),
                    k => (step * T::of_usize(k), T::one()),
                };
                BathMode::with_strength(weight * step * density.eval(omega), omega)
            })
            .collect();
        Self::discrete(modes, self.beta.value())
    }
}

/// Kernel values at one interval τ, for lags `0..=max_lag`.
///
/// Fields are public so callers can substitute kernels, e.g. switch the
/// indirect interaction off.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSlice<T> {
    pub tau: T,
    pub gamma: T,
    pub delta: T,
    /// `mu[d]` for lag `d ≥ 0`; `mu[0] = 0`.
    pub mu: Vec<T>,
    /// `gamma_cross[d]` for lag `d ≥ 0`; `gamma_cross[0] = gamma`.
    pub gamma_cross: Vec<T>,
}

impl<T: Real> KernelSlice<T> {
    /// Slice holding only γ and Δ.
    pub fn local(tau: T, gamma: T, delta: T) -> Self {
        Self {
            tau,
            gamma,
            delta,
            mu: vec![T::zero()],
            gamma_cross: vec![gamma],
        }
    }

    pub fn max_lag(&self) -> usize {
        self.mu.len() - 1
    }

    /// μ at signed lag, odd in the lag.
    pub fn mu_at(&self, lag: i64) -> T {
        let v = self.mu[lag.unsigned_abs() as usize];
        if lag < 0 {
            -v
        } else {
            v
        }
    }

    /// γ_cross at signed lag, even in the lag.
    pub fn gamma_cross_at(&self, lag: i64) -> T {
        self.gamma_cross[lag.unsigned_abs() as usize]
    }
}

/// Immutable kernel evaluator for one bath; safe to share across threads.
#[derive(Debug, Clone)]
pub struct KernelSet<T> {
    bath: BathSpec<T>,
    options: QuadratureOptions<T>,
    rule: GaussLegendre<T>,
    moment_y: T,
    moment_z: T,
}

const UPPER_LIMIT_CUTOFFS: f64 = 50.0;
const SMALL_OMEGA_FRACTION: f64 = 1e-8;
const OSCILLATION_GUARD: f64 = 200.0;

impl<T: Real> KernelSet<T> {
    pub fn new(bath: BathSpec<T>) -> Result<Self> {
        Self::with_options(bath, QuadratureOptions::default())
    }

    pub fn with_options(bath: BathSpec<T>, options: QuadratureOptions<T>) -> Result<Self> {
        let rule = GaussLegendre::new(options.order);
        let mut set = Self {
            bath,
            options,
            rule,
            moment_y: T::zero(),
            moment_z: T::zero(),
        };
        let beta = set.bath.beta;
        set.moment_y = set.spectral_integral(|w| beta.coth_half(w), T::zero(), "moment y")?;
        set.moment_z = set.spectral_integral(|w| w * w * beta.coth_half(w), T::zero(), "moment z")?;
        Ok(set)
    }

    pub fn bath(&self) -> &BathSpec<T> {
        &self.bath
    }

    pub fn options(&self) -> &QuadratureOptions<T> {
        &self.options
    }

    /// `y = Σ|g_k|² coth(βω_k/2)` and `z = Σ|g_k|² ω_k² coth(βω_k/2)`.
    pub fn moments(&self) -> (T, T) {
        (self.moment_y, self.moment_z)
    }

    /// `Σ_k |g_k|² f(ω_k)` or `∫ J(ω) f(ω) dω`.
    ///
    /// `oscillation` is the largest time scale `t` for which `f` contains a
    /// factor like `cos(ω t)`; it sets the initial panel resolution.
    pub fn spectral_integral<F>(&self, f: F, oscillation: T, quantity: &str) -> Result<T>
    where
        F: Fn(T) -> T,
    {
        self.spectral_integral_complex(|w| Complex::new(f(w), T::zero()), oscillation, quantity)
            .map(|c| c.re)
    }

    pub fn spectral_integral_complex<F>(&self, f: F, oscillation: T, quantity: &str) -> Result<Complex<T>>
    where
        F: Fn(T) -> Complex<T>,
    {
        match &self.bath.kind {
            BathKind::Discrete(modes) => Ok(modes
                .iter()
                .map(|m| f(m.frequency) * m.strength())
                .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)),
            BathKind::Continuum(density) => {
                let cutoff = density.cutoff();
                let upper = cutoff * T::of(UPPER_LIMIT_CUTOFFS);
                let floor = cutoff * T::of(SMALL_OMEGA_FRACTION);
                let panels = initial_panels(upper, cutoff, oscillation.abs(), self.options.max_panels);
                self.rule.integrate_complex(
                    |w| {
                        // Below the floor the integrand is replaced by its ω → 0 limit.
                        let w = if w < floor { floor } else { w };
                        f(w) * density.eval(w)
                    },
                    T::zero(),
                    upper,
                    panels,
                    &self.options,
                    quantity,
                )
            }
        }
    }

    /// Environment-induced dephasing `γ(τ) = 4 Σ |g|²/ω² (1 − cos ωτ) coth(βω/2)`.
    pub fn gamma(&self, tau: T) -> Result<T> {
        check_interval(tau)?;
        if tau == T::zero() {
            return Ok(T::zero());
        }
        let beta = self.bath.beta;
        let v = self.spectral_integral(
            |w| T::of(4.0) * (w * tau).one_minus_cos() / (w * w) * beta.coth_half(w),
            tau,
            "gamma",
        )?;
        Ok(v.max(T::zero()))
    }

    /// Indirect interaction `Δ(τ) = 4 Σ |g|²/ω² (sin ωτ − ωτ)`; never positive.
    pub fn delta(&self, tau: T) -> Result<T> {
        check_interval(tau)?;
        if tau == T::zero() {
            return Ok(T::zero());
        }
        let v = self.spectral_integral(
            |w| T::of(4.0) * (w * tau).sin_minus_arg() / (w * w),
            tau,
            "delta",
        )?;
        Ok(v.min(T::zero()))
    }

    /// Commutator phase `μ(τ, d) = Σ 4|g|²/ω² (1 − cos ωτ) sin(d ωτ)`, odd in `d`.
    pub fn mu(&self, tau: T, lag: i64) -> Result<T> {
        check_interval(tau)?;
        if lag == 0 || tau == T::zero() {
            return Ok(T::zero());
        }
        let d = T::of(lag.unsigned_abs() as f64);
        let v = self.spectral_integral(
            |w| T::of(4.0) * (w * tau).one_minus_cos() / (w * w) * (d * w * tau).sin(),
            (d + T::one()) * tau,
            "mu",
        )?;
        Ok(if lag < 0 { -v } else { v })
    }

    /// Cross-interval damping
    /// `γ_cross(τ, d) = Σ 4|g|²/ω² (1 − cos ωτ) cos(d ωτ) coth(βω/2)`,
    /// even in `d` and equal to `γ(τ)` at `d = 0`.
    pub fn gamma_cross(&self, tau: T, lag: i64) -> Result<T> {
        if lag == 0 {
            return self.gamma(tau);
        }
        check_interval(tau)?;
        if tau == T::zero() {
            return Ok(T::zero());
        }
        let d = T::of(lag.unsigned_abs() as f64);
        let beta = self.bath.beta;
        self.spectral_integral(
            |w| {
                T::of(4.0) * (w * tau).one_minus_cos() / (w * w) * (d * w * tau).cos() * beta.coth_half(w)
            },
            (d + T::one()) * tau,
            "gamma_cross",
        )
    }

    /// Bath correlation `C(t) = Σ |g|² [coth(βω/2) cos ωt − i sin ωt]`.
    pub fn correlation(&self, t: T) -> Result<Complex<T>> {
        if !(t >= T::zero()) {
            return Err(Error::domain("time must be non-negative", t.as_f64()));
        }
        let beta = self.bath.beta;
        self.spectral_integral_complex(
            |w| {
                let phase = w * t;
                Complex::new(beta.coth_half(w) * phase.cos(), -phase.sin())
            },
            t,
            "correlation",
        )
    }

    /// Every kernel the protocols need at interval `tau`, for lags up to `max_lag`.
    pub fn slice(&self, tau: T, max_lag: usize) -> Result<KernelSlice<T>> {
        let gamma = self.gamma(tau)?;
        let delta = self.delta(tau)?;
        let mut mu = vec![T::zero()];
        let mut gamma_cross = vec![gamma];
        for d in 1..=max_lag as i64 {
            mu.push(self.mu(tau, d)?);
            gamma_cross.push(self.gamma_cross(tau, d)?);
        }
        Ok(KernelSlice {
            tau,
            gamma,
            delta,
            mu,
            gamma_cross,
        })
    }
}

fn check_interval<T: Real>(tau: T) -> Result<()> {
    if tau >= T::zero() && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("interval tau must be non-negative", tau.as_f64()))
    }
}

fn initial_panels<T: Real>(upper: T, cutoff: T, oscillation: T, max_panels: usize) -> usize {
    let two_pi = T::PI() + T::PI();
    // One oscillation period per panel to start, half a period once τ ω_c is large.
    let per_period = if oscillation * cutoff > T::of(OSCILLATION_GUARD) {
        upper * oscillation / T::PI()
    } else {
        upper * oscillation / two_pi
    };
    let n = per_period.ceil().to_usize().unwrap_or(max_panels);
    n.clamp(16, (max_panels / 2).max(16))
}

/// `γ(τ)` with default quadrature options.
pub fn gamma_kernel<T: Real>(tau: T, bath: &BathSpec<T>) -> Result<T> {
    KernelSet::new(bath.clone())?.gamma(tau)
}

/// `Δ(τ)` with default quadrature options.
pub fn delta_kernel<T: Real>(tau: T, bath: &BathSpec<T>) -> Result<T> {
    KernelSet::new(bath.clone())?.delta(tau)
}

/// `(y, z)` with default quadrature options.
pub fn moments<T: Real>(bath: &BathSpec<T>) -> Result<(T, T)> {
    Ok(KernelSet::new(bath.clone())?.moments())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn one_mode(strength: f64, omega: f64, beta: f64) -> KernelSet<f64> {
        KernelSet::new(BathSpec::discrete(vec![BathMode::with_strength(strength, omega)], beta).unwrap()).unwrap()
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(BathSpec::ohmic(-0.1, 1.0, 1.0).is_err());
        assert!(BathSpec::ohmic(0.1, 0.0, 1.0).is_err());
        assert!(BathSpec::ohmic(0.1, 1.0, 0.0).is_err());
        assert!(BathSpec::ohmic(0.1, 1.0, f64::NAN).is_err());
        assert!(BathSpec::discrete(vec![BathMode::with_strength(1.0, 0.0)], 1.0).is_err());
        let zero_t = BathSpec::ohmic(0.1, 1.0, f64::INFINITY).unwrap();
        assert!(zero_t.beta().is_zero_temperature());
        assert_eq!(zero_t.beta().coth_half(1e-300), 1.0);
    }

    #[test]
    fn kernels_vanish_at_zero_interval() {
        let k = KernelSet::new(BathSpec::ohmic(0.01, 15.0, 1.0).unwrap()).unwrap();
        assert_eq!(k.gamma(0.0).unwrap(), 0.0);
        assert_eq!(k.delta(0.0).unwrap(), 0.0);
        assert_eq!(k.mu(0.3, 0).unwrap(), 0.0);
    }

    #[test]
    fn negative_interval_is_a_domain_error() {
        let k = one_mode(1.0, 1.0, 1.0);
        assert!(matches!(k.gamma(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(k.delta(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(k.mu(-1.0, 1), Err(Error::Domain { .. })));
        assert!(matches!(k.correlation(-1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn single_mode_sums() {
        let k = one_mode(0.25, 2.0, f64::INFINITY);
        assert!((k.delta(PI).unwrap() - (-PI / 2.0)).abs() < 1e-12);
        assert!((k.mu(PI / 4.0, 1).unwrap() - 0.25).abs() < 1e-12);
        assert!((k.gamma_cross(PI / 2.0, 1).unwrap() - (-0.5)).abs() < 1e-12);
        let k = one_mode(1.0, 3.0, f64::INFINITY);
        let (y, z) = k.moments();
        assert_eq!((y, z), (1.0, 9.0));
        let c = one_mode(1.0, 2.0, f64::INFINITY).correlation(PI / 4.0).unwrap();
        assert!((c.im + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ohmic_zero_temperature_moments() {
        let (g, wc) = (0.01, 15.0);
        let k = KernelSet::new(BathSpec::ohmic(g, wc, f64::INFINITY).unwrap()).unwrap();
        let (y, z) = k.moments();
        assert!((y / (g * wc * wc) - 1.0).abs() < 1e-9);
        assert!((z / (6.0 * g * wc.powi(4)) - 1.0).abs() < 1e-9);
        let c0 = k.correlation(0.0).unwrap();
        assert!((c0.re / (g * wc * wc) - 1.0).abs() < 1e-9);
        assert_eq!(c0.im, 0.0);
    }

    #[test]
    fn slice_matches_individual_kernels() {
        let k = KernelSet::new(BathSpec::ohmic(0.5, 15.0, 1.0).unwrap()).unwrap();
        let s = k.slice(0.3, 3).unwrap();
        assert_eq!(s.gamma, k.gamma(0.3).unwrap());
        assert_eq!(s.gamma_cross_at(-2), k.gamma_cross(0.3, 2).unwrap());
        assert_eq!(s.mu_at(-3), -k.mu(0.3, 3).unwrap());
        assert_eq!(s.max_lag(), 3);
    }

    #[test]
    fn works_in_single_precision() {
        let k = KernelSet::<f32>::with_options(
            BathSpec::ohmic(0.01, 15.0, f32::INFINITY).unwrap(),
            QuadratureOptions {
                abs_tol: 1e-6,
                rel_tol: 1e-5,
                ..Default::default()
            },
        )
        .unwrap();
        let g = k.gamma(1.0).unwrap();
        assert!((g - 0.02 * (226.0f32).ln()).abs() < 1e-4);
    }
}
