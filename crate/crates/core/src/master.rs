//! Second-order time-local master equation for `H_S = ω₀J_z + δJ_x` with
//! system-bath operator `F = 2J_z`:
//!
//! `dρ/dt = i[ρ, H_S] + [Λ(t)ρ, F] + [F, ρΛ(t)†]`, `Λ(t) = ∫₀ᵗ F̄(s) C(s) ds`,
//!
//! where `F̄(s) = e^{−iH_S s} F e^{iH_S s}`. Everything is propagated in the
//! eigenbasis of `H_S`, where `Λ` has the elementwise form
//! `Λ_ab = F_ab ∫₀ᵗ e^{−i(E_a − E_b)s} C(s) ds`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::bath::KernelSet;
use crate::collective::CoherentWeights;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, CMatrix};
use crate::scalar::{cis, Real};
use crate::spin::{jx_real, SpinLength};

/// Steps per integration when no step is given.
pub const DEFAULT_STEPS: usize = 2000;

/// Largest tolerated trace or Hermiticity drift.
const DRIFT_TOLERANCE: f64 = 1e-8;

/// Spin operators, the system Hamiltonian and its eigendecomposition.
#[derive(Debug, Clone)]
pub struct SystemOperators<T> {
    spin: SpinLength,
    omega0: T,
    delta: T,
    jz: CMatrix<T>,
    jx: CMatrix<T>,
    hamiltonian: CMatrix<T>,
    energies: Vec<T>,
    /// Eigenvectors as columns.
    basis: CMatrix<T>,
}

impl<T: Real> SystemOperators<T> {
    pub fn new(spin: SpinLength, omega0: T, delta: T) -> Result<Self> {
        if !omega0.is_finite() {
            return Err(Error::domain("omega0 must be finite", omega0.as_f64()));
        }
        if !delta.is_finite() {
            return Err(Error::domain("delta must be finite", delta.as_f64()));
        }
        let n = spin.dim();
        let ms = spin.ms::<T>();
        let jx = jx_real::<T>(spin);
        let mut h = jx.iter().map(|&x| delta * x).collect::<Vec<T>>();
        for (i, m) in ms.iter().enumerate() {
            h[i * n + i] += omega0 * *m;
        }
        let (energies, vectors) = symmetric_eigen(&h, n);
        let to_matrix = |values: &[T]| {
            let mut m = CMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = Complex::new(values[i * n + j], T::zero());
                }
            }
            m
        };
        Ok(Self {
            spin,
            omega0,
            delta,
            jz: CMatrix::from_real_diagonal(&ms),
            jx: to_matrix(&jx),
            hamiltonian: to_matrix(&h),
            energies,
            basis: to_matrix(&vectors),
        })
    }

    pub fn spin(&self) -> SpinLength {
        self.spin
    }

    pub fn omega0(&self) -> T {
        self.omega0
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn jz(&self) -> &CMatrix<T> {
        &self.jz
    }

    pub fn jx(&self) -> &CMatrix<T> {
        &self.jx
    }

    /// `F = 2J_z`.
    pub fn coupling(&self) -> CMatrix<T> {
        self.jz.scale_real(T::of(2.0))
    }

    pub fn hamiltonian(&self) -> &CMatrix<T> {
        &self.hamiltonian
    }

    /// Eigenvalues of `H_S`, ascending.
    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    fn to_eigenbasis(&self, a: &CMatrix<T>) -> CMatrix<T> {
        &(&self.basis.adjoint() * a) * &self.basis
    }

    fn out_of_eigenbasis(&self, a: &CMatrix<T>) -> CMatrix<T> {
        &(&self.basis * a) * &self.basis.adjoint()
    }

    fn vector_to_eigenbasis(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        self.basis.adjoint().apply(v)
    }

    /// `e^{−iH_S t}`.
    pub fn propagator(&self, t: T) -> CMatrix<T> {
        let phases: Vec<_> = self.energies.iter().map(|&e| cis(-e * t)).collect();
        self.out_of_eigenbasis(&CMatrix::from_diagonal(&phases))
    }
}

/// Reduced spin density matrix in the `J_z` basis at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState<T> {
    pub rho: CMatrix<T>,
    pub time: T,
}

impl<T: Real> ReducedState<T> {
    /// `|ψ⟩⟨ψ|` at time zero.
    pub fn pure(amplitudes: &[Complex<T>]) -> Self {
        Self {
            rho: CMatrix::outer(amplitudes),
            time: T::zero(),
        }
    }

    /// The coherent state with the given weights and phase.
    pub fn coherent(w: &CoherentWeights<T>) -> Self {
        Self::pure(&w.amplitudes())
    }

    pub fn trace_defect(&self) -> T {
        (self.rho.trace() - Complex::new(T::one(), T::zero())).norm()
    }

    pub fn hermiticity_defect(&self) -> T {
        self.rho.hermiticity_defect()
    }
}

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterOptions<T> {
    /// Fixed step; `None` means `t_final / 2000`.
    pub step: Option<T>,
    /// Undo the free rotation `e^{iH_S τ}` before projecting.
    pub rotation: bool,
}

impl<T: Real> Default for MasterOptions<T> {
    fn default() -> Self {
        Self {
            step: None,
            rotation: true,
        }
    }
}

/// States at every step of one integration, in the `H_S` eigenbasis.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    eigen_states: Vec<CMatrix<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The state at step `k`, in the `J_z` basis.
    pub fn state(&self, ops: &SystemOperators<T>, k: usize) -> ReducedState<T> {
        ReducedState {
            rho: ops.out_of_eigenbasis(&self.eigen_states[k]),
            time: self.times[k],
        }
    }

    /// Survival `⟨φ|ρ(t)|φ⟩` at each step, where `φ = e^{−iH_S t}ψ` with rotation removal.
    pub fn survivals(&self, ops: &SystemOperators<T>, psi: &[Complex<T>], rotation: bool) -> Vec<T> {
        let psi_e = ops.vector_to_eigenbasis(psi);
        self.times
            .iter()
            .zip(&self.eigen_states)
            .map(|(&t, rho)| {
                let phi: Vec<_> = if rotation {
                    psi_e
                        .iter()
                        .zip(ops.energies())
                        .map(|(c, &e)| *c * cis(-e * t))
                        .collect()
                } else {
                    psi_e.clone()
                };
                rho.expectation(&phi, &phi).re
            })
            .collect()
    }
}

fn resolve_step<T: Real>(t_final: T, step: Option<T>) -> Result<(usize, T)> {
    if !(t_final >= T::zero()) || !t_final.is_finite() {
        return Err(Error::domain("final time must be non-negative", t_final.as_f64()));
    }
    if t_final == T::zero() {
        return Ok((0, T::zero()));
    }
    let requested = step.unwrap_or(t_final / T::of_usize(DEFAULT_STEPS));
    if !(requested > T::zero()) {
        return Err(Error::domain("step must be positive", requested.as_f64()));
    }
    let steps = (t_final / requested).ceil().to_usize().unwrap_or(usize::MAX).max(1);
    if steps > 50_000_000 {
        return Err(Error::domain("too many integration steps", steps as f64));
    }
    Ok((steps, t_final / T::of_usize(steps)))
}

/// `Λ` in the eigenbasis at every half step `j·h/2`, `j = 0..=2·steps`.
fn memory_kernels<T: Real>(
    ops: &SystemOperators<T>,
    kernels: &KernelSet<T>,
    steps: usize,
    h: T,
) -> Result<Vec<CMatrix<T>>> {
    let half = h * T::of(0.5);
    let points = 2 * steps + 1;
    // One extra node on each side for the fourth-order cumulative rule.
    let corr: Vec<Complex<T>> = (0..points + 1)
        .into_par_iter()
        .map(|j| kernels.correlation(half * T::of_usize(j)))
        .collect::<Result<_>>()?;
    let corr_at = |j: isize| -> Complex<T> {
        if j < 0 {
            corr[(-j) as usize].conj()
        } else {
            corr[j as usize]
        }
    };
    let n = ops.spin.dim();
    let f = ops.to_eigenbasis(&ops.coupling());
    let e = &ops.energies;
    let mut out = Vec::with_capacity(points);
    let mut integral = CMatrix::zeros(n);
    out.push(CMatrix::zeros(n));
    let w = half / T::of(24.0);
    for j in 1..points {
        let k = j as isize - 1;
        for a in 0..n {
            for b in 0..n {
                if f[(a, b)].norm() == T::zero() {
                    continue;
                }
                let freq = e[a] - e[b];
                let node = |i: isize| cis(-freq * half * T::of(i as f64)) * corr_at(i);
                let inc = (node(k) + node(k + 1)) * T::of(13.0) - node(k - 1) - node(k + 2);
                integral[(a, b)] += inc * w;
            }
        }
        let mut lambda = CMatrix::zeros(n);
        for a in 0..n {
            for b in 0..n {
                lambda[(a, b)] = f[(a, b)] * integral[(a, b)];
            }
        }
        out.push(lambda);
    }
    Ok(out)
}

struct Generator<'a, T> {
    energies: &'a [T],
    f: CMatrix<T>,
}

impl<T: Real> Generator<'_, T> {
    fn apply(&self, rho: &CMatrix<T>, lambda: &CMatrix<T>) -> CMatrix<T> {
        let n = rho.dim();
        let mut out = CMatrix::zeros(n);
        let i = Complex::new(T::zero(), T::one());
        for a in 0..n {
            for b in 0..n {
                out[(a, b)] = i * rho[(a, b)] * (self.energies[b] - self.energies[a]);
            }
        }
        let lr = lambda * rho;
        let rl = &(rho * &lambda.adjoint()) * &self.f;
        let lrf = &lr * &self.f;
        let flr = &self.f * &lr;
        let frl = &self.f * &(rho * &lambda.adjoint());
        for a in 0..n {
            for b in 0..n {
                out[(a, b)] += lrf[(a, b)] - flr[(a, b)] + frl[(a, b)] - rl[(a, b)];
            }
        }
        out
    }
}

fn check_drift<T: Real>(rho: &CMatrix<T>) -> Result<()> {
    let trace = (rho.trace() - Complex::new(T::one(), T::zero())).norm();
    if trace > T::of(DRIFT_TOLERANCE) {
        return Err(Error::Integrator {
            what: "trace drift",
            value: trace.as_f64(),
        });
    }
    let herm = rho.hermiticity_defect();
    if herm > T::of(DRIFT_TOLERANCE) || !herm.is_finite() {
        return Err(Error::Integrator {
            what: "Hermiticity drift",
            value: herm.as_f64(),
        });
    }
    Ok(())
}

/// Integrates from `initial` for a duration `t_final`, keeping every step.
pub fn integrate_trajectory<T: Real>(
    ops: &SystemOperators<T>,
    kernels: &KernelSet<T>,
    t_final: T,
    step: Option<T>,
    initial: &ReducedState<T>,
) -> Result<Trajectory<T>> {
    let n = ops.spin.dim();
    if initial.rho.dim() != n {
        return Err(Error::domain("initial state has the wrong dimension", initial.rho.dim() as f64));
    }
    check_drift(&initial.rho)?;
    let (steps, h) = resolve_step(t_final, step)?;
    let lambdas = memory_kernels(ops, kernels, steps, h)?;
    let gen = Generator {
        energies: &ops.energies,
        f: ops.to_eigenbasis(&ops.coupling()),
    };
    let mut rho = ops.to_eigenbasis(&initial.rho);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(initial.time);
    states.push(rho.clone());
    let half = h * T::of(0.5);
    for k in 0..steps {
        let (l0, lm, l1) = (&lambdas[2 * k], &lambdas[2 * k + 1], &lambdas[2 * k + 2]);
        let k1 = gen.apply(&rho, l0);
        let mut y = rho.clone();
        y.add_scaled(half, &k1);
        let k2 = gen.apply(&y, lm);
        let mut y = rho.clone();
        y.add_scaled(half, &k2);
        let k3 = gen.apply(&y, lm);
        let mut y = rho.clone();
        y.add_scaled(h, &k3);
        let k4 = gen.apply(&y, l1);
        let sixth = h / T::of(6.0);
        rho.add_scaled(sixth, &k1);
        rho.add_scaled(sixth + sixth, &k2);
        rho.add_scaled(sixth + sixth, &k3);
        rho.add_scaled(sixth, &k4);
        let t = initial.time + h * T::of_usize(k + 1);
        check_drift(&rho)?;
        times.push(t);
        states.push(rho.clone());
    }
    Ok(Trajectory {
        times,
        eigen_states: states,
    })
}

/// `ρ(t_final)` starting from `initial` at its own time stamp.
pub fn evolve_reduced_state<T: Real>(
    ops: &SystemOperators<T>,
    kernels: &KernelSet<T>,
    t_final: T,
    step: Option<T>,
    initial: &ReducedState<T>,
) -> Result<ReducedState<T>> {
    let traj = integrate_trajectory(ops, kernels, t_final, step, initial)?;
    Ok(traj.state(ops, traj.len() - 1))
}

/// Survival after one interval as a function of the interval, from a single integration.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve<T> {
    pub times: Vec<T>,
    pub survivals: Vec<T>,
}

impl<T: Real> SurvivalCurve<T> {
    /// Survival at `tau` by four-point Lagrange interpolation.
    pub fn survival_at(&self, tau: T) -> Result<T> {
        let n = self.times.len();
        let (t0, t1) = (self.times[0], self.times[n - 1]);
        if n < 4 || !(tau >= t0 && tau <= t1) {
            return Err(Error::domain("interval outside the integrated range", tau.as_f64()));
        }
        let h = (t1 - t0) / T::of_usize(n - 1);
        let pos = ((tau - t0) / h).floor().to_usize().unwrap_or(0).min(n - 2);
        let start = pos.saturating_sub(1).min(n - 4);
        let mut value = T::zero();
        for i in start..start + 4 {
            let mut basis = T::one();
            for j in start..start + 4 {
                if j != i {
                    basis *= (tau - self.times[j]) / (self.times[i] - self.times[j]);
                }
            }
            value += basis * self.survivals[i];
        }
        Ok(value)
    }

    /// `Γ(τ) = −ln s(τ) / τ`.
    pub fn rate_at(&self, tau: T) -> Result<T> {
        if !(tau > T::zero()) {
            return Err(Error::domain("rate needs a positive interval tau", tau.as_f64()));
        }
        let s = self.survival_at(tau)?;
        if !(s > T::zero()) {
            return Err(Error::Integrator {
                what: "non-positive survival from the master equation",
                value: s.as_f64(),
            });
        }
        Ok(-s.ln() / tau)
    }
}

/// Survival for every interval up to `tau_max`, starting from the coherent state `w`.
pub fn survival_curve<T: Real>(
    ops: &SystemOperators<T>,
    kernels: &KernelSet<T>,
    w: &CoherentWeights<T>,
    tau_max: T,
    options: &MasterOptions<T>,
) -> Result<SurvivalCurve<T>> {
    if w.spin() != ops.spin {
        return Err(Error::domain("state and operators disagree on J", w.spin().value()));
    }
    let psi = w.amplitudes();
    let traj = integrate_trajectory(ops, kernels, tau_max, options.step, &ReducedState::pure(&psi))?;
    Ok(SurvivalCurve {
        survivals: traj.survivals(ops, &psi, options.rotation),
        times: traj.times,
    })
}

/// `Γ(τ)` for the dissipative model, integrating up to `tau`.
pub fn gamma_rate_dissipative<T: Real>(
    tau: T,
    ops: &SystemOperators<T>,
    kernels: &KernelSet<T>,
    w: &CoherentWeights<T>,
    options: &MasterOptions<T>,
) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(Error::domain("rate needs a positive interval tau", tau.as_f64()));
    }
    let curve = survival_curve(ops, kernels, w, tau, options)?;
    let s = *curve.survivals.last().expect("non-empty trajectory");
    if !(s > T::zero()) {
        return Err(Error::Integrator {
            what: "non-positive survival from the master equation",
            value: s.as_f64(),
        });
    }
    Ok(-s.ln() / tau)
}
