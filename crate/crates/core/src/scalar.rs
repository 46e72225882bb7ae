//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar the kernels, rates and solvers are generic over.
///
/// Implemented for `f32` and `f64`. The numerical tolerances quoted throughout
/// the crate are tuned for `f64`; `f32` works but converges to looser limits.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts an integer count into `Self`.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `sin(x)/x` with the removable singularity filled in.
    #[inline]
    fn sinc(self) -> Self {
        if self.abs() < Self::of(1e-4) {
            let x2 = self * self;
            Self::one() - x2 / Self::of(6.0) + x2 * x2 / Self::of(120.0)
        } else {
            self.sin() / self
        }
    }

    /// `1 - cos(x)` without cancellation for small `x`.
    #[inline]
    fn one_minus_cos(self) -> Self {
        let h = (self * Self::of(0.5)).sin();
        Self::of(2.0) * h * h
    }

    /// `sin(x) - x` without cancellation for small `x`.
    #[inline]
    fn sin_minus_arg(self) -> Self {
        if self.abs() < Self::of(1e-2) {
            let x2 = self * self;
            let x3 = x2 * self;
            -x3 / Self::of(6.0) + x3 * x2 / Self::of(120.0) - x3 * x2 * x2 / Self::of(5040.0)
        } else {
            self.sin() - self
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_argument_helpers_match_direct_forms() {
        for &x in &[1e-3_f64, 5e-3, 0.02, 0.5, 2.0] {
            assert!((x.sinc() - x.sin() / x).abs() < 1e-15);
            assert!((x.one_minus_cos() - (1.0 - x.cos())).abs() < 1e-15);
            let direct = x.sin() - x;
            assert!((x.sin_minus_arg() - direct).abs() <= 1e-15 * direct.abs().max(1e-300) + 1e-17);
        }
        assert_eq!(0.0_f64.sinc(), 1.0);
        assert_eq!(0.0_f64.sin_minus_arg(), 0.0);
    }

    #[test]
    fn f32_is_a_real() {
        assert!((f32::of(0.25) - 0.25).abs() < f32::EPSILON);
        assert!((1e-3_f32.one_minus_cos() - 5e-7).abs() < 1e-10);
    }
}
