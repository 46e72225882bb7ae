//! Brute-force reference: spins plus a few bath oscillators in a truncated Fock
//! space, evolved with a dense matrix exponential of the full Hamiltonian
//!
//! `H = ω₀J_z ⊗ 1 + 1 ⊗ Σ ω_k b_k†b_k + 2J_z ⊗ Σ (g_k* b_k + g_k b_k†)`.
//!
//! Joint states are ordered system-major: index `= i_spin · D_B + i_bath`, with
//! the first mode the most significant bath digit.

use num_complex::Complex;
use rayon::prelude::*;

use crate::bath::{BathMode, BathSpec, InverseTemperature, KernelSet};
use crate::collective::{coherent_weights, CoherentWeights};
use crate::correlated::{survival_with_backaction, ProtocolOptions};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cis, Real};
use crate::single_spin::{survival_one_interval, PreparedState};
use crate::spin::{jz, SpinLength};

/// Largest joint dimension handled by the dense exponential.
pub const MAX_JOINT_DIMENSION: usize = 4096;

/// Largest tolerated thermal weight above the Fock cutoff.
pub const LEAKAGE_TOLERANCE: f64 = 1e-8;

/// Largest tolerated `‖U†U − 1‖_max`.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Discrete bath modes with a per-mode Fock cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedBath<T> {
    modes: Vec<BathMode<T>>,
    n_max: usize,
    beta: InverseTemperature<T>,
}

impl<T: Real> TruncatedBath<T> {
    pub fn new(modes: Vec<BathMode<T>>, n_max: usize, beta: InverseTemperature<T>) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::domain("Fock cutoff n_max must be at least 1", n_max as f64));
        }
        for m in &modes {
            if !(m.frequency > T::zero()) {
                return Err(Error::domain("mode frequency must be positive", m.frequency.as_f64()));
            }
            thermal_state(m.frequency, beta, n_max)?;
        }
        Ok(Self { modes, n_max, beta })
    }

    /// Truncation of a discrete bath specification.
    pub fn from_spec(bath: &BathSpec<T>, n_max: usize) -> Result<Self> {
        let modes = bath
            .modes()
            .ok_or_else(|| Error::Consistency("the Fock reference needs a discrete bath".into()))?;
        Self::new(modes.to_vec(), n_max, bath.beta())
    }

    pub fn modes(&self) -> &[BathMode<T>] {
        &self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn beta(&self) -> InverseTemperature<T> {
        self.beta
    }

    /// `(n_max + 1)^K`.
    pub fn bath_dimension(&self) -> usize {
        (self.n_max + 1).pow(self.modes.len() as u32)
    }

    /// `(2J + 1)(n_max + 1)^K`.
    pub fn joint_dimension(&self, spin: SpinLength) -> usize {
        spin.dim() * self.bath_dimension()
    }

    /// The same modes and temperature as a kernel-level bath.
    pub fn spec(&self) -> Result<BathSpec<T>> {
        BathSpec::discrete(self.modes.clone(), self.beta.value())
    }

    /// Tensor product of single-mode Gibbs states.
    pub fn thermal_state(&self) -> Result<CMatrix<T>> {
        let mut rho = CMatrix::identity(1);
        for m in &self.modes {
            let single = thermal_state(m.frequency, self.beta, self.n_max)?;
            rho = rho.kron(&CMatrix::from_real_diagonal(&single));
        }
        Ok(rho)
    }

    fn annihilation(&self, mode: usize) -> CMatrix<T> {
        let d = self.n_max + 1;
        let mut a = CMatrix::zeros(d);
        for n in 1..d {
            a[(n - 1, n)] = Complex::new(T::of_usize(n).sqrt(), T::zero());
        }
        let before = CMatrix::identity(d.pow(mode as u32));
        let after = CMatrix::identity(d.pow((self.modes.len() - mode - 1) as u32));
        before.kron(&a).kron(&after)
    }

    /// Full Hamiltonian in the system-major joint basis.
    pub fn hamiltonian(&self, spin: SpinLength, omega0: T) -> Result<CMatrix<T>> {
        let dim = self.joint_dimension(spin);
        if dim > MAX_JOINT_DIMENSION {
            return Err(Error::Budget {
                what: "joint Hilbert-space dimension",
                required: dim as u128,
                budget: MAX_JOINT_DIMENSION as u128,
            });
        }
        let db = self.bath_dimension();
        let mut h_bath = CMatrix::zeros(db);
        let mut coupling = CMatrix::zeros(db);
        for (k, m) in self.modes.iter().enumerate() {
            let b = self.annihilation(k);
            let bd = b.adjoint();
            h_bath = h_bath + (&bd * &b).scale_real(m.frequency);
            coupling = coupling + b.scale(m.coupling.conj()) + bd.scale(m.coupling);
        }
        let sz = jz::<T>(spin);
        let id_s = CMatrix::identity(spin.dim());
        let id_b = CMatrix::identity(db);
        Ok(sz.scale_real(omega0).kron(&id_b) + id_s.kron(&h_bath) + sz.scale_real(T::of(2.0)).kron(&coupling))
    }

    /// `e^{−iHt}`, with its unitarity checked.
    pub fn propagator(&self, spin: SpinLength, omega0: T, t: T) -> Result<CMatrix<T>> {
        let h = self.hamiltonian(spin, omega0)?;
        let u = h.scale(Complex::new(T::zero(), -t)).expm();
        let defect = unitarity_defect(&u);
        if defect > T::of(UNITARITY_TOLERANCE) {
            return Err(Error::Consistency(format!(
                "propagator unitarity defect {:e} exceeds {UNITARITY_TOLERANCE:e}",
                defect.as_f64()
            )));
        }
        Ok(u)
    }
}

/// `‖U†U − 1‖_max`.
pub fn unitarity_defect<T: Real>(u: &CMatrix<T>) -> T {
    u.adjoint().matmul(u).max_abs_diff(&CMatrix::identity(u.dim()))
}

/// Diagonal of the Gibbs state of one oscillator, renormalized over `0..=n_max`.
pub fn thermal_state<T: Real>(frequency: T, beta: InverseTemperature<T>, n_max: usize) -> Result<Vec<T>> {
    if n_max < 1 {
        return Err(Error::domain("Fock cutoff n_max must be at least 1", n_max as f64));
    }
    let mut p = vec![T::zero(); n_max + 1];
    match beta {
        InverseTemperature::Infinite => p[0] = T::one(),
        InverseTemperature::Finite(b) => {
            let x = b * frequency;
            // Weight above the cutoff relative to the untruncated partition function.
            let leakage = (-x * T::of_usize(n_max + 1)).exp();
            if leakage > T::of(LEAKAGE_TOLERANCE) {
                return Err(Error::Budget {
                    what: "Fock cutoff (thermal leakage above 1e-8); raise n_max",
                    required: (LEAKAGE_TOLERANCE.ln() / -x.as_f64()).ceil() as u128,
                    budget: n_max as u128 + 1,
                });
            }
            for (n, v) in p.iter_mut().enumerate() {
                *v = (-x * T::of_usize(n)).exp();
            }
            let z: T = p.iter().copied().sum();
            for v in p.iter_mut() {
                *v /= z;
            }
        }
    }
    Ok(p)
}

fn check_spin<T: Real>(bath: &TruncatedBath<T>, w: &CoherentWeights<T>) -> Result<SpinLength> {
    let spin = w.spin();
    let dim = bath.joint_dimension(spin);
    if dim > MAX_JOINT_DIMENSION {
        return Err(Error::Budget {
            what: "joint Hilbert-space dimension",
            required: dim as u128,
            budget: MAX_JOINT_DIMENSION as u128,
        });
    }
    Ok(spin)
}

/// Survival after each of `n` measurements, `S(kτ)` for `k = 1..=n`.
///
/// Applies `U(τ) = U_R(τ) e^{−iHτ}` and the projector `|ψ⟩⟨ψ| ⊗ 1` `n` times,
/// where `U_R(τ) = e^{iω₀J_zτ}` when `with_rotation` is set.
pub fn exact_survival_sequence<T: Real>(
    bath: &TruncatedBath<T>,
    w: &CoherentWeights<T>,
    omega0: T,
    tau: T,
    n: usize,
    with_rotation: bool,
) -> Result<Vec<T>> {
    let spin = check_spin(bath, w)?;
    if n == 0 {
        return Err(Error::domain("measurement count N must be at least 1", 0.0));
    }
    let mut u = bath.propagator(spin, omega0, tau)?;
    if with_rotation {
        let phases: Vec<_> = spin.ms::<T>().iter().map(|&m| cis(omega0 * m * tau)).collect();
        let rotation = CMatrix::from_diagonal(&phases).kron(&CMatrix::identity(bath.bath_dimension()));
        u = rotation.matmul(&u);
    }
    let u_dag = u.adjoint();
    let psi = w.amplitudes();
    let projector = CMatrix::outer(&psi).kron(&CMatrix::identity(bath.bath_dimension()));
    let mut rho = CMatrix::outer(&psi).kron(&bath.thermal_state()?);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let evolved = u.matmul(&rho).matmul(&u_dag);
        rho = projector.matmul(&evolved).matmul(&projector);
        out.push(rho.trace().re);
    }
    Ok(out)
}

/// Probability that all `n` measurements find the prepared state.
pub fn exact_survival_discrete<T: Real>(
    bath: &TruncatedBath<T>,
    w: &CoherentWeights<T>,
    omega0: T,
    tau: T,
    n: usize,
    with_rotation: bool,
) -> Result<T> {
    exact_survival_sequence(bath, w, omega0, tau, n, with_rotation).map(|s| s[n - 1])
}

/// Coherence factors `[ρ(t)]_mn / [ρ(0)]_mn = Tr_B[U_m ρ_B U_n†]` from exact evolution.
pub fn exact_dephasing_offdiagonal<T: Real>(
    bath: &TruncatedBath<T>,
    spin: SpinLength,
    omega0: T,
    t: T,
) -> Result<CMatrix<T>> {
    let u = bath.propagator(spin, omega0, t)?;
    let db = bath.bath_dimension();
    let rho_b = bath.thermal_state()?;
    let ds = spin.dim();
    let block = |m: usize| {
        let mut b = CMatrix::zeros(db);
        for i in 0..db {
            for j in 0..db {
                b[(i, j)] = u[(m * db + i, m * db + j)];
            }
        }
        b
    };
    let blocks: Vec<_> = (0..ds).map(block).collect();
    let mut out = CMatrix::zeros(ds);
    for m in 0..ds {
        let left = blocks[m].matmul(&rho_b);
        for n in 0..ds {
            out[(m, n)] = left.matmul(&blocks[n].adjoint()).trace();
        }
    }
    Ok(out)
}

/// One comparison between the Fock reference and a kernel-based result.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureCheck {
    pub name: String,
    pub reference: f64,
    pub value: f64,
    pub error: f64,
    pub tolerance: f64,
}

impl FixtureCheck {
    fn new(name: String, reference: f64, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            reference,
            value,
            error: (reference - value).abs(),
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

/// Fock cutoff of the built-in fixtures.
pub const FIXTURE_N_MAX: usize = 14;

/// One mode with `|g|² = 0.04`, `ω = 3`.
pub fn one_mode_fixture(beta: f64) -> Result<TruncatedBath<f64>> {
    TruncatedBath::new(
        vec![BathMode::with_strength(0.04, 3.0)],
        FIXTURE_N_MAX,
        InverseTemperature::new(beta)?,
    )
}

/// Two modes with `|g|² ∈ {0.04, 0.02}`, `ω ∈ {2, 5}`.
pub fn two_mode_fixture(beta: f64) -> Result<TruncatedBath<f64>> {
    two_mode_fixture_with_cutoff(beta, FIXTURE_N_MAX)
}

pub fn two_mode_fixture_with_cutoff(beta: f64, n_max: usize) -> Result<TruncatedBath<f64>> {
    TruncatedBath::new(
        vec![BathMode::with_strength(0.04, 2.0), BathMode::with_strength(0.02, 5.0)],
        n_max,
        InverseTemperature::new(beta)?,
    )
}

/// Fixture temperatures; `f64::INFINITY` is zero temperature.
pub const FIXTURE_BETAS: [f64; 2] = [1.0, f64::INFINITY];

fn beta_label(beta: f64) -> String {
    if beta.is_infinite() {
        "inf".into()
    } else {
        format!("{beta}")
    }
}

/// Single-interval survival against the one-mode fixture.
pub fn single_interval_checks(beta: f64) -> Result<Vec<FixtureCheck>> {
    let bath = one_mode_fixture(beta)?;
    let kernels = KernelSet::new(bath.spec()?)?;
    let w = coherent_weights(SpinLength::HALF, std::f64::consts::FRAC_PI_2, 0.0)?;
    let state = PreparedState::equator();
    let mut out = Vec::new();
    for tau in [0.3, 1.0, 2.5] {
        let exact = exact_survival_discrete(&bath, &w, 0.7, tau, 1, true)?;
        let formula = survival_one_interval(tau, &state, &kernels)?;
        out.push(FixtureCheck::new(
            format!("one-mode beta={} tau={tau} single interval", beta_label(beta)),
            exact,
            formula,
            1e-8,
        ));
    }
    Ok(out)
}

/// Back-action survival for `N = 1, 2, 3` against the two-mode fixture.
pub fn backaction_checks(beta: f64) -> Result<Vec<FixtureCheck>> {
    let bath = two_mode_fixture(beta)?;
    let kernels = KernelSet::new(bath.spec()?)?;
    let mut out = Vec::new();
    for (theta, phi) in [(std::f64::consts::FRAC_PI_2, 0.0), (1.1, 0.4)] {
        let w = coherent_weights(SpinLength::HALF, theta, phi)?;
        for tau in [0.4, 1.1] {
            let exact = exact_survival_sequence(&bath, &w, 0.3, tau, 3, true)?;
            for (k, s) in exact.iter().enumerate() {
                let n = k + 1;
                let r = survival_with_backaction(tau, n, &w, &kernels, &ProtocolOptions::default())?;
                out.push(FixtureCheck::new(
                    format!(
                        "two-mode beta={} theta={theta} tau={tau} N={n} back-action survival",
                        beta_label(beta)
                    ),
                    *s,
                    r.survival,
                    1e-8,
                ));
            }
        }
    }
    Ok(out)
}

/// Coherence factors against `e^{−iΔ(m²−n²)} e^{−γ(m−n)²}`.
pub fn coherence_checks(beta: f64) -> Result<Vec<FixtureCheck>> {
    let mut out = Vec::new();
    let bath = one_mode_fixture(beta)?;
    let kernels = KernelSet::new(bath.spec()?)?;
    for t in [0.5, 1.7] {
        let ratio = exact_dephasing_offdiagonal(&bath, SpinLength::HALF, 0.0, t)?;
        out.push(FixtureCheck::new(
            format!("one-mode beta={} t={t} qubit coherence modulus", beta_label(beta)),
            ratio[(0, 1)].norm(),
            (-kernels.gamma(t)?).exp(),
            1e-10,
        ));
    }
    let bath = two_mode_fixture(beta)?;
    let kernels = KernelSet::new(bath.spec()?)?;
    let spin = SpinLength::new(1.0)?;
    let ms = spin.ms::<f64>();
    for t in [0.6, 1.3] {
        let omega0 = 0.25;
        let ratio = exact_dephasing_offdiagonal(&bath, spin, omega0, t)?;
        let (gamma, delta) = (kernels.gamma(t)?, kernels.delta(t)?);
        let mut worst = 0.0f64;
        for (i, m) in ms.iter().enumerate() {
            for (j, n) in ms.iter().enumerate() {
                let formula = cis(-omega0 * (m - n) * t - delta * (m * m - n * n)) * (-gamma * (m - n) * (m - n)).exp();
                worst = worst.max((ratio[(i, j)] - formula).norm());
            }
        }
        out.push(FixtureCheck::new(
            format!("two-mode beta={} t={t} spin-1 coherence factors", beta_label(beta)),
            0.0,
            worst,
            1e-8,
        ));
    }
    Ok(out)
}

/// Survival change when the Fock cutoff is raised by 2.
pub fn truncation_checks(beta: f64) -> Result<Vec<FixtureCheck>> {
    let w = coherent_weights(SpinLength::HALF, std::f64::consts::FRAC_PI_2, 0.0)?;
    let base = exact_survival_sequence(&two_mode_fixture(beta)?, &w, 0.0, 1.1, 3, true)?;
    let raised = exact_survival_sequence(&two_mode_fixture_with_cutoff(beta, FIXTURE_N_MAX + 2)?, &w, 0.0, 1.1, 3, true)?;
    Ok(base
        .iter()
        .zip(&raised)
        .enumerate()
        .map(|(k, (a, b))| {
            FixtureCheck::new(
                format!("two-mode beta={} N={} truncation stability", beta_label(beta), k + 1),
                *b,
                *a,
                1e-9,
            )
        })
        .collect())
}

/// Unitarity of the dense propagator.
pub fn unitarity_checks(beta: f64) -> Result<Vec<FixtureCheck>> {
    let bath = two_mode_fixture(beta)?;
    let h = bath.hamiltonian(SpinLength::HALF, 0.3)?;
    let u = h.scale(Complex::new(0.0, -2.0)).expm();
    Ok(vec![FixtureCheck::new(
        format!("two-mode beta={} propagator unitarity", beta_label(beta)),
        0.0,
        unitarity_defect(&u),
        UNITARITY_TOLERANCE,
    )])
}

/// Every built-in comparison against the Fock reference.
pub fn fixture_checks() -> Result<Vec<FixtureCheck>> {
    type Check = fn(f64) -> Result<Vec<FixtureCheck>>;
    let groups: [Check; 5] = [
        single_interval_checks,
        backaction_checks,
        coherence_checks,
        truncation_checks,
        unitarity_checks,
    ];
    let jobs: Vec<(Check, f64)> = groups
        .iter()
        .flat_map(|g| FIXTURE_BETAS.iter().map(move |&b| (*g, b)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|(g, b)| g(*b))
        .collect::<Result<Vec<_>>>()?;
    Ok(results.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_at_zero_temperature() {
        let p = thermal_state(2.0, InverseTemperature::<f64>::Infinite, 5).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn geometric_occupations() {
        let p = thermal_state(2f64.ln(), InverseTemperature::Finite(1.0), 40).unwrap();
        let z: f64 = (0..=40).map(|n| 0.5f64.powi(n)).sum();
        for (n, v) in p.iter().take(5).enumerate() {
            assert!((v - 0.5f64.powi(n as i32) / z).abs() < 1e-15);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn leakage_is_rejected() {
        assert!(matches!(
            thermal_state(0.1, InverseTemperature::Finite(1.0), 5),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn dimension_budget() {
        let bath = TruncatedBath::new(
            vec![BathMode::with_strength(0.01, 5.0); 3],
            15,
            InverseTemperature::Infinite,
        )
        .unwrap();
        let w = coherent_weights(SpinLength::HALF, 1.0, 0.0).unwrap();
        assert!(matches!(
            exact_survival_discrete(&bath, &w, 0.0, 0.5, 1, true),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn coherence_factors_start_at_one() {
        let bath = one_mode_fixture(1.0).unwrap();
        let r = exact_dephasing_offdiagonal(&bath, SpinLength::new(1.0).unwrap(), 0.3, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((r[(i, j)] - Complex::new(1.0, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn weak_coupling_survives() {
        let bath = TruncatedBath::new(
            vec![BathMode::with_strength(1e-12, 3.0)],
            6,
            InverseTemperature::Finite(1.0),
        )
        .unwrap();
        let w = coherent_weights(SpinLength::HALF, 1.0, 0.0).unwrap();
        let s: f64 = exact_survival_discrete(&bath, &w, 0.0, 0.8, 2, true).unwrap();
        assert!((s - 1.0).abs() < 1e-10);
    }
}
