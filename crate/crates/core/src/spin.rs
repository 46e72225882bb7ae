//! Collective spin of `2J` two-level systems in the `J_z` eigenbasis.
//!
//! Basis index `i = 0..=2J` labels the eigenvalue `m = i − J`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::Real;

/// Spin length `J`, stored as the integer `2J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinLength {
    twice: u32,
}

impl SpinLength {
    pub const HALF: SpinLength = SpinLength { twice: 1 };

    pub fn from_twice(twice: u32) -> Self {
        Self { twice }
    }

    /// Accepts non-negative half-integers only.
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !(twice >= 0.0) || twice.fract() != 0.0 || twice > u32::MAX as f64 {
            return Err(Error::domain("spin length J must be a non-negative half-integer", j));
        }
        Ok(Self { twice: twice as u32 })
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// Hilbert-space dimension `2J + 1`.
    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// Eigenvalue `m` for basis index `i`.
    pub fn m<T: Real>(self, index: usize) -> T {
        T::of(index as f64 - self.value())
    }

    /// All eigenvalues `−J..=J` in basis order.
    pub fn ms<T: Real>(self) -> Vec<T> {
        (0..self.dim()).map(|i| self.m(i)).collect()
    }

    /// Is `2J + 1` odd, i.e. are the `m` integers?
    pub fn is_integer(self) -> bool {
        self.twice.is_multiple_of(2)
    }
}

impl std::fmt::Display for SpinLength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// `J_z` as a diagonal matrix.
pub fn jz<T: Real>(spin: SpinLength) -> CMatrix<T> {
    CMatrix::from_real_diagonal(&spin.ms::<T>())
}

/// Real symmetric `J_x = (J_+ + J_−)/2`, row-major.
pub fn jx_real<T: Real>(spin: SpinLength) -> Vec<T> {
    let n = spin.dim();
    let j = T::of(spin.value());
    let mut out = vec![T::zero(); n * n];
    for i in 0..n.saturating_sub(1) {
        let m: T = spin.m(i);
        let v = (j * (j + T::one()) - m * (m + T::one())).sqrt() * T::of(0.5);
        out[(i + 1) * n + i] = v;
        out[i * n + (i + 1)] = v;
    }
    out
}

pub fn jx<T: Real>(spin: SpinLength) -> CMatrix<T> {
    let n = spin.dim();
    let real = jx_real::<T>(spin);
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        for k in 0..n {
            m[(i, k)] = Complex::new(real[i * n + k], T::zero());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_validation() {
        assert_eq!(SpinLength::new(0.5).unwrap(), SpinLength::HALF);
        assert_eq!(SpinLength::new(50.0).unwrap().dim(), 101);
        assert!(SpinLength::new(0.3).is_err());
        assert!(SpinLength::new(-1.0).is_err());
        assert_eq!(SpinLength::new(1.5).unwrap().to_string(), "3/2");
        assert_eq!(SpinLength::new(2.0).unwrap().ms::<f64>(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn angular_momentum_algebra() {
        // J_x² summed with J_y² + J_z² gives J(J+1); check [J_x, J_z] structure via J_x² trace.
        let spin = SpinLength::new(2.0).unwrap();
        let x = jx::<f64>(spin);
        let tr = x.matmul(&x).trace().re;
        // Tr J_x² = J(J+1)(2J+1)/3
        assert!((tr - 2.0 * 3.0 * 5.0 / 3.0).abs() < 1e-12);
        let z = jz::<f64>(spin);
        assert!((z.matmul(&z).trace().re - tr).abs() < 1e-12);
    }
}
