//! Composite Gauss–Legendre quadrature with panel doubling.
//!
//! The interval is split into equal panels, each integrated with a fixed-order
//! Gauss–Legendre rule. The panel count doubles until two successive estimates
//! agree to the absolute or relative tolerance.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerances and limits of the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Panel count beyond which the integrator gives up.
    pub max_panels: usize,
}

impl<T: Real> Default for QuadratureOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::of(1e-10),
            rel_tol: T::of(1e-8),
            order: 20,
            max_panels: 1 << 17,
        }
    }
}

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        // Roots are symmetric; Newton from the Chebyshev-like guess for each half.
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = T::of(-x);
            nodes[n - 1 - i] = T::of(x);
            weights[i] = T::of(w);
            weights[n - 1 - i] = T::of(w);
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrates `f` over `[a, b]` split into `panels` equal pieces.
    pub fn composite<V, F>(&self, f: &F, a: T, b: T, panels: usize) -> Complex<T>
    where
        F: Fn(T) -> V,
        V: Into<Complex<T>>,
    {
        let width = (b - a) / T::of_usize(panels);
        let half = width * T::of(0.5);
        let mut total = Complex::new(T::zero(), T::zero());
        for p in 0..panels {
            let mid = a + width * T::of_usize(p) + half;
            let mut panel = Complex::new(T::zero(), T::zero());
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let v: Complex<T> = f(mid + half * *x).into();
                panel += v * *w;
            }
            total += panel * half;
        }
        total
    }

    /// Panel-doubling integration of a complex-valued integrand.
    pub fn integrate_complex<F>(
        &self,
        f: F,
        a: T,
        b: T,
        min_panels: usize,
        opts: &QuadratureOptions<T>,
        quantity: &str,
    ) -> Result<Complex<T>>
    where
        F: Fn(T) -> Complex<T>,
    {
        if b <= a {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        let mut panels = min_panels.max(1);
        let mut previous = self.composite(&f, a, b, panels);
        loop {
            panels *= 2;
            let current = self.composite(&f, a, b, panels);
            let diff = (current - previous).norm();
            if diff <= opts.abs_tol || diff <= opts.rel_tol * current.norm() {
                return Ok(current);
            }
            if panels >= opts.max_panels {
                return Err(Error::Accuracy {
                    quantity: quantity.to_string(),
                    estimate: diff.as_f64(),
                    tolerance: opts.abs_tol.max(opts.rel_tol * current.norm()).as_f64(),
                });
            }
            previous = current;
        }
    }

    /// Panel-doubling integration of a real integrand.
    pub fn integrate<F>(
        &self,
        f: F,
        a: T,
        b: T,
        min_panels: usize,
        opts: &QuadratureOptions<T>,
        quantity: &str,
    ) -> Result<T>
    where
        F: Fn(T) -> T,
    {
        self.integrate_complex(|x| Complex::new(f(x), T::zero()), a, b, min_panels, opts, quantity)
            .map(|c| c.re)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_polynomials_are_exact() {
        let rule = GaussLegendre::<f64>::new(20);
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // Exact up to degree 39.
        let v = rule.composite(&|x: f64| x.powi(38), -1.0, 1.0, 1).re;
        assert!((v - 2.0 / 39.0).abs() < 1e-14);
        let odd = rule.composite(&|x: f64| x.powi(37), -1.0, 1.0, 1).re;
        assert!(odd.abs() < 1e-15);
    }

    #[test]
    fn low_orders_match_tables() {
        let rule = GaussLegendre::<f64>::new(2);
        assert!((rule.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let rule = GaussLegendre::<f64>::new(3);
        assert!((rule.weights[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!(rule.nodes[1].abs() < 1e-15);
    }

    #[test]
    fn oscillatory_exponential_integral() {
        let rule = GaussLegendre::<f64>::new(20);
        let opts = QuadratureOptions::default();
        let v = rule
            .integrate(|x: f64| (-x).exp() * (3.0 * x).cos(), 0.0, 50.0, 4, &opts, "test")
            .unwrap();
        assert!((v - 0.1).abs() < 1e-12);
    }

    #[test]
    fn gives_up_with_accuracy_error() {
        let rule = GaussLegendre::<f64>::new(2);
        let opts = QuadratureOptions {
            max_panels: 8,
            ..Default::default()
        };
        let err = rule
            .integrate(|x: f64| (200.0 * x).sin().abs(), 0.0, 10.0, 1, &opts, "rough")
            .unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }));
    }
}
