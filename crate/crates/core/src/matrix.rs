//! Small dense complex matrices for spinor-space algebra.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Real, C};

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T> {
    dim: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![czero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = cone();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds from row-major entries; fails unless `data.len()` is a perfect square.
    pub fn from_row_major(data: Vec<C<T>>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim * dim != data.len() {
            return Err(Error::Shape(format!("{} entries do not form a square matrix", data.len())));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: C<T>, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |i, j| self.get(i / m, j / m) * other.get(i % m, j % m))
    }

    pub fn commutator(a: &Self, b: &Self) -> Self {
        &(a * b) - &(b * a)
    }

    pub fn anticommutator(a: &Self, b: &Self) -> Self {
        &(a * b) + &(b * a)
    }

    pub fn trace(&self) -> C<T> {
        (0..self.dim).fold(czero(), |acc, i| acc + self.get(i, i))
    }

    /// Largest entry modulus.
    pub fn sup_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// `‖A − A†‖_sup`.
    pub fn hermitian_residual(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    #[inline]
    pub fn apply(&self, x: &[C<T>], out: &mut [C<T>]) {
        let n = self.dim;
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let mut acc = czero();
            for (a, &b) in row.iter().zip(x) {
                acc += *a * b;
            }
            out[i] = acc;
        }
    }

    pub fn to_f64(&self) -> CMat<f64> {
        CMat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()))
                .collect(),
        }
    }

    pub fn from_f64(m: &CMat<f64>) -> Self {
        CMat {
            dim: m.dim,
            data: m.data.iter().map(|z| Complex::new(T::lit(z.re), T::lit(z.im))).collect(),
        }
    }

    fn to_nalgebra(&self) -> DMatrix<Complex<f64>> {
        let m = self.to_f64();
        DMatrix::from_fn(self.dim, self.dim, |i, j| m.get(i, j))
    }

    /// Operator 2-norm (largest singular value).
    pub fn op_norm(&self) -> T {
        if self.dim == 0 {
            return T::zero();
        }
        let n = self.dim;
        // B = A†A. Clifford-type matrices give B = c·I, whose norm needs no eigensolve.
        let mut b = vec![C::<f64>::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = czero::<T>();
                for row in self.data.chunks_exact(n) {
                    acc += row[i].conj() * row[j];
                }
                let acc = C::new(acc.re.to_f64_lossy(), acc.im.to_f64_lossy());
                b[i * n + j] = acc;
                b[j * n + i] = acc.conj();
            }
        }
        let diag: Vec<f64> = (0..n).map(|i| b[i * n + i].re).collect();
        let top = diag.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return T::zero();
        }
        let spread = diag.iter().fold(0.0f64, |m, &x| m.max(top - x));
        let off = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).fold(0.0f64, |m, (i, j)| m.max(b[i * n + j].norm()));
        if spread <= 1e-13 * top && off <= 1e-13 * top {
            return T::lit(top.sqrt());
        }
        let ev = nalgebra::DMatrix::from_fn(n, n, |i, j| b[i * n + j]).symmetric_eigenvalues();
        T::lit(ev.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt())
    }

    /// Eigenvalues (ascending) and column eigenvectors of a Hermitian matrix.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, CMat<f64>)> {
        let res = self.hermitian_residual().to_f64_lossy();
        let scale = self.sup_norm().to_f64_lossy().max(1.0);
        if res > 1e-10 * scale {
            return Err(Error::NotHermitian(res));
        }
        let eig = self.to_nalgebra().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vecs = CMat::from_fn(self.dim, |i, c| eig.eigenvectors[(i, order[c])]);
        Ok((vals, vecs))
    }

    /// `exp(−i t A)` for Hermitian `A`, by eigendecomposition.
    pub fn exp_i_hermitian(&self, t: T) -> Result<Self> {
        let (vals, vecs) = self.hermitian_eigen()?;
        let t = t.to_f64_lossy();
        let n = self.dim;
        let out = CMat::<f64>::from_fn(n, |i, j| {
            let mut acc = Complex::new(0.0, 0.0);
            for k in 0..n {
                let ph = Complex::from_polar(1.0, -t * vals[k]);
                acc += vecs.get(i, k) * ph * vecs.get(j, k).conj();
            }
            acc
        });
        Ok(Self::from_f64(&out))
    }
}

impl<'a, T: Real> Mul for &'a CMat<T> {
    type Output = CMat<T>;
    fn mul(self, rhs: Self) -> CMat<T> {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut out = CMat::zeros(n);
        for (orow, arow) in out.data.chunks_exact_mut(n).zip(self.data.chunks_exact(n)) {
            for (&a, brow) in arow.iter().zip(rhs.data.chunks_exact(n)) {
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl<'a, T: Real> Add for &'a CMat<T> {
    type Output = CMat<T>;
    fn add(self, rhs: Self) -> CMat<T> {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        CMat { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect() }
    }
}

impl<'a, T: Real> Sub for &'a CMat<T> {
    type Output = CMat<T>;
    fn sub(self, rhs: Self) -> CMat<T> {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        CMat { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect() }
    }
}

impl<'a, T: Real> Neg for &'a CMat<T> {
    type Output = CMat<T>;
    fn neg(self) -> CMat<T> {
        CMat { dim: self.dim, data: self.data.iter().map(|&a| -a).collect() }
    }
}
