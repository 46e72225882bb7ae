//! Measurement-modified dephasing rates for spins coupled to a bosonic bath.
//!
//! The crate computes the effective decay rate `Γ(τ)` of a spin (or a
//! collective spin of `2J` qubits) that is repeatedly projected back onto its
//! initial state at intervals `τ`, for pure-dephasing coupling to a harmonic
//! bath. Around this sit:
//!
//! * [`bath`]: spectral densities, discrete modes and the bath kernels,
//! * [`single_spin`] and [`collective`]: rates when the bath is reset between measurements,
//! * [`correlated`]: exact survival when the bath keeps its conditioned state,
//! * [`master`]: a second-order master equation for a tilted Hamiltonian,
//! * [`crossover`]: extrema of rate curves (Zeno / anti-Zeno transitions),
//! * [`fock`]: a brute-force truncated Fock-space reference.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the scalar to `f64`.
//!
//! ```
//! use zeno_dephase::{BathSpec64, KernelSet64, PreparedState, single_spin::gamma_rate};
//!
//! let kernels = KernelSet64::new(BathSpec64::ohmic(0.01, 15.0, 1.0)?)?;
//! let rate = gamma_rate(0.2, &PreparedState::equator(), &kernels)?;
//! assert!(rate > 0.0);
//! # Ok::<(), zeno_dephase::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod collective;
pub mod correlated;
pub mod crossover;
mod error;
pub mod fock;
pub mod linalg;
pub mod master;
pub mod quadrature;
mod scalar;
pub mod single_spin;
pub mod spin;

pub use bath::{BathKind, BathMode, BathSpec, InverseTemperature, KernelSet, KernelSlice, SpectralDensity};
pub use collective::{coherent_weights, CoherentWeights};
pub use correlated::{ProtocolOptions, ProtocolResult, SumStrategy};
pub use crossover::{CrossoverReport, Extremum, ExtremumKind, GridSpec};
pub use error::{Error, Result};
pub use master::{MasterOptions, ReducedState, SystemOperators};
pub use quadrature::QuadratureOptions;
pub use scalar::{Cplx, Real};
pub use single_spin::PreparedState;
pub use spin::SpinLength;

pub type BathSpec64 = BathSpec<f64>;
pub type KernelSet64 = KernelSet<f64>;
pub type KernelSlice64 = KernelSlice<f64>;
pub type CoherentWeights64 = CoherentWeights<f64>;
pub type ProtocolResult64 = ProtocolResult<f64>;
pub type SystemOperators64 = SystemOperators<f64>;
pub type ReducedState64 = ReducedState<f64>;
pub type CrossoverReport64 = CrossoverReport<f64>;

pub type BathSpec32 = BathSpec<f32>;
pub type KernelSet32 = KernelSet<f32>;
