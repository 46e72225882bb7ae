//! Small dense complex matrices: products, exponential, symmetric eigenproblem.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;

use crate::scalar::Real;

/// Square, row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(*d, T::zero());
        }
        m
    }

    /// `|v⟩⟨v|`.
    pub fn outer(v: &[Complex<T>]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| *x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| *x * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: T, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b * s;
        }
    }

    /// Matrix product; zero entries of `self` are skipped, which makes
    /// block-sparse operands cheap.
    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.dim;
        assert_eq!(n, other.dim, "dimension mismatch");
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = Self::zeros(n);
        for i in 0..n {
            let row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == zero {
                    continue;
                }
                let orow = &other.data[k * n..(k + 1) * n];
                for (r, b) in row.iter_mut().zip(orow) {
                    *r += a * *b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    /// `⟨u| self |v⟩`.
    pub fn expectation(&self, u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
        let mv = self.apply(v);
        u.iter()
            .zip(&mv)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * *b)
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self[(i, i)])
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    /// Largest entry of `self − self†`.
    pub fn hermiticity_defect(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn one_norm(&self) -> T {
        let n = self.dim;
        (0..n)
            .map(|j| (0..n).fold(T::zero(), |s, i| s + self[(i, j)].norm()))
            .fold(T::zero(), T::max)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let mut out = Self::zeros(a * b);
        for i in 0..a {
            for j in 0..a {
                let x = self[(i, j)];
                if x.re == T::zero() && x.im == T::zero() {
                    continue;
                }
                for k in 0..b {
                    for l in 0..b {
                        out[(i * b + k, j * b + l)] = x * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Solves `self · X = rhs` by LU decomposition with partial pivoting.
    /// Returns `None` for a numerically singular matrix.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut b = rhs.data.clone();
        for col in 0..n {
            let (pivot, best) = (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .fold((col, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == T::zero() || !best.is_finite() {
                return None;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                    b.swap(col * n + k, pivot * n + k);
                }
            }
            let inv = Complex::new(T::one(), T::zero()) / a[col * n + col];
            for r in col + 1..n {
                let factor = a[r * n + col] * inv;
                if factor.re == T::zero() && factor.im == T::zero() {
                    continue;
                }
                for k in col..n {
                    let v = a[col * n + k];
                    a[r * n + k] -= factor * v;
                }
                for k in 0..n {
                    let v = b[col * n + k];
                    b[r * n + k] -= factor * v;
                }
            }
        }
        for col in (0..n).rev() {
            let inv = Complex::new(T::one(), T::zero()) / a[col * n + col];
            for k in 0..n {
                let mut v = b[col * n + k];
                for j in col + 1..n {
                    v -= a[col * n + j] * b[j * n + k];
                }
                b[col * n + k] = v * inv;
            }
        }
        Some(Self { dim: n, data: b })
    }

    /// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
    pub fn expm(&self) -> Self {
        let n = self.dim;
        if n == 0 {
            return self.clone();
        }
        const THETA_13: f64 = 5.371920351148152;
        let norm = self.one_norm().as_f64();
        let squarings = if norm > THETA_13 {
            (norm / THETA_13).log2().ceil().max(0.0) as u32
        } else {
            0
        };
        let scaled = self.scale_real(T::of(0.5f64.powi(squarings as i32)));
        let b: Vec<T> = PADE_13.iter().map(|&c| T::of(c)).collect();
        let id = Self::identity(n);
        let a2 = scaled.matmul(&scaled);
        let a4 = a2.matmul(&a2);
        let a6 = a4.matmul(&a2);

        let mut u_inner = a6.scale_real(b[13]);
        u_inner.add_scaled(b[11], &a4);
        u_inner.add_scaled(b[9], &a2);
        let mut u_tail = a6.scale_real(b[7]);
        u_tail.add_scaled(b[5], &a4);
        u_tail.add_scaled(b[3], &a2);
        u_tail.add_scaled(b[1], &id);
        let u = scaled.matmul(&(a6.matmul(&u_inner) + u_tail));

        let mut v_inner = a6.scale_real(b[12]);
        v_inner.add_scaled(b[10], &a4);
        v_inner.add_scaled(b[8], &a2);
        let mut v_tail = a6.scale_real(b[6]);
        v_tail.add_scaled(b[4], &a4);
        v_tail.add_scaled(b[2], &a2);
        v_tail.add_scaled(b[0], &id);
        let v = a6.matmul(&v_inner) + v_tail;

        let p = &v + &u;
        let q = &v - &u;
        let mut r = q.solve(&p).expect("Pade denominator is nonsingular");
        for _ in 0..squarings {
            r = r.matmul(&r);
        }
        r
    }

    /// Partial trace over the second factor of a `outer ⊗ inner` product space.
    pub fn partial_trace_inner(&self, outer: usize, inner: usize) -> Self {
        assert_eq!(outer * inner, self.dim);
        let mut out = Self::zeros(outer);
        for i in 0..outer {
            for j in 0..outer {
                let mut s = Complex::new(T::zero(), T::zero());
                for k in 0..inner {
                    s += self[(i * inner + k, j * inner + k)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }
}

const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Add for CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += *b;
        }
        self
    }
}

impl<'a, T: Real> Add<&'a CMatrix<T>> for &'a CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: Self) -> CMatrix<T> {
        self.clone() + rhs.clone()
    }
}

impl<'a, T: Real> Sub<&'a CMatrix<T>> for &'a CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: Self) -> CMatrix<T> {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a -= *b;
        }
        out
    }
}

impl<'a, T: Real> Mul<&'a CMatrix<T>> for &'a CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: Self) -> CMatrix<T> {
        self.matmul(rhs)
    }
}

/// Eigen-decomposition of a real symmetric matrix (row-major, `n × n`) by
/// cyclic Jacobi rotations. Returns eigenvalues in ascending order and the
/// matching eigenvectors as columns of a row-major matrix.
pub fn symmetric_eigen<T: Real>(matrix: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= T::epsilon() * T::epsilon() * T::of(1e-4) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (T::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new] = v[k * n + old];
        }
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn expm_of_pauli_rotation() {
        // exp(-i θ σ_x) = cos θ − i sin θ σ_x
        let theta = 7.3;
        let mut m = CMatrix::<f64>::zeros(2);
        m[(0, 1)] = c(0.0, -theta);
        m[(1, 0)] = c(0.0, -theta);
        let e = m.expm();
        assert!((e[(0, 0)] - c(theta.cos(), 0.0)).norm() < 1e-13);
        assert!((e[(0, 1)] - c(0.0, -theta.sin())).norm() < 1e-13);
    }

    #[test]
    fn expm_of_nilpotent_and_diagonal() {
        let mut m = CMatrix::<f64>::zeros(3);
        m[(0, 1)] = c(2.0, 0.0);
        m[(1, 2)] = c(3.0, 0.0);
        let e = m.expm();
        assert!((e[(0, 2)] - c(3.0, 0.0)).norm() < 1e-13);
        let d = CMatrix::from_real_diagonal(&[1.0, -20.0, 0.5]).expm();
        assert!((d[(1, 1)].re - (-20.0f64).exp()).abs() < 1e-20);
        assert!((d[(0, 0)].re - 1f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn solve_recovers_inverse() {
        let mut m = CMatrix::<f64>::zeros(3);
        let vals = [(0, 0, 2.0, 1.0), (0, 1, 1.0, 0.0), (1, 0, 0.0, -1.0), (1, 2, 3.0, 0.0), (2, 1, 1.0, 1.0), (2, 2, 1.0, 0.0)];
        for &(i, j, re, im) in &vals {
            m[(i, j)] = c(re, im);
        }
        let inv = m.solve(&CMatrix::identity(3)).unwrap();
        assert!(m.matmul(&inv).max_abs_diff(&CMatrix::identity(3)) < 1e-13);
        assert!(CMatrix::<f64>::zeros(2).solve(&CMatrix::identity(2)).is_none());
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a = [2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0];
        let (vals, vecs) = symmetric_eigen(&a, 3);
        let expected = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-13);
        }
        for k in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i * 3 + j] * vecs[j * 3 + k]).sum();
                assert!((av - vals[k] * vecs[i * 3 + k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kron_and_partial_trace() {
        let a = CMatrix::<f64>::from_real_diagonal(&[0.25, 0.75]);
        let b = CMatrix::from_real_diagonal(&[0.5, 0.3, 0.2]);
        let ab = a.kron(&b);
        assert!(ab.partial_trace_inner(2, 3).max_abs_diff(&a) < 1e-15);
        assert!((ab.trace().re - 1.0).abs() < 1e-15);
    }
}
