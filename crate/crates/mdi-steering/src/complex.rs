//! Dense complex matrices, row-major, sized for few-qubit operators.
//!
//! Everything in the library lives in dimension ≤ 8 (two qubits plus an
//! embedding factor), so a flat `Vec<Complex64>` with no stride tricks is
//! both the simplest and the fastest representation at this scale.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Index, IndexMut};

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    /// Identity of dimension `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a row-major slice of complex entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from nested real/imag arrays (row-major).
    pub fn from_re_im(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let rows = re.len();
        if rows == 0 || im.len() != rows {
            return Err(Error::DimensionMismatch("re/im row counts differ or empty".into()));
        }
        let cols = re[0].len();
        let mut data = Vec::with_capacity(rows * cols);
        for (rr, ri) in re.iter().zip(im.iter()) {
            if rr.len() != cols || ri.len() != cols {
                return Err(Error::DimensionMismatch("ragged re/im rows".into()));
            }
            for (a, b) in rr.iter().zip(ri.iter()) {
                data.push(Complex64::new(*a, *b));
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Rank-1 projector |v⟩⟨v| / ⟨v|v⟩ from an unnormalized vector.
    pub fn projector(v: &[Complex64]) -> Self {
        let n = v.len();
        let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj() / norm2;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Matrix sum.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Matrix difference.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Scale by a real factor.
    pub fn scale(&self, f: f64) -> Self {
        let data = self.data.iter().map(|a| a * f).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Scale by a complex factor.
    pub fn scale_complex(&self, f: Complex64) -> Self {
        let data = self.data.iter().map(|a| a * f).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// In-place `self += f * other`.
    pub fn axpy(&mut self, f: f64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * f;
        }
    }

    /// Matrix product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Trace (square matrices).
    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Real part of Tr(self · other): the Hilbert-Schmidt pairing used for
    /// Hermitian operands (where the trace is real anyway).
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.cols, other.rows));
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += self[(i, j)] * other[(j, i)];
            }
        }
        acc.re
    }

    /// Largest entrywise deviation from Hermiticity, max |M_ij − conj(M_ji)|.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Largest absolute imaginary part over all entries.
    pub fn max_abs_im(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product, `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Hermitian symmetrization (M + M†)/2.
    pub fn hermitize(&self) -> Self {
        assert!(self.is_square());
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker (tensor) product of two matrices.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = tensor_product(&i2, &i2);
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn z_tensor_ket0_projector_is_diagonal() {
        let z = ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let p0 = ComplexMatrix::projector(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let t = tensor_product(&z, &p0);
        let expect = [1.0, 0.0, -1.0, 0.0];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { expect[i] } else { 0.0 };
                assert_abs_diff_eq!(t[(i, j)].re, want, epsilon = 1e-15);
                assert_abs_diff_eq!(t[(i, j)].im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn trace_multiplicative_over_tensor() {
        let a = ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.5), c(0.2, -0.1), c(0.3, 0.0), c(2.0, -0.5)]).unwrap();
        let b = ComplexMatrix::from_vec(2, 2, vec![c(0.5, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(-1.5, 0.25)]).unwrap();
        let t = tensor_product(&a, &b);
        let lhs = t.trace();
        let rhs = a.trace() * b.trace();
        assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-14);
        assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-14);
    }

    #[test]
    fn tensor_associative() {
        let a = ComplexMatrix::from_vec(1, 2, vec![c(1.0, 1.0), c(2.0, 0.0)]).unwrap();
        let b = ComplexMatrix::from_vec(2, 1, vec![c(0.0, 1.0), c(3.0, 0.0)]).unwrap();
        let d = ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.5), c(1.0, -1.0)]).unwrap();
        let left = tensor_product(&tensor_product(&a, &b), &d);
        let right = tensor_product(&a, &tensor_product(&b, &d));
        assert_eq!(left.rows(), right.rows());
        for (x, y) in left.data().iter().zip(right.data().iter()) {
            assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-14);
            assert_abs_diff_eq!(x.im, y.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn dagger_and_hermiticity() {
        let m = ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(0.5, 0.5), c(0.5, -0.5), c(2.0, 0.0)]).unwrap();
        assert!(m.hermiticity_deviation() < 1e-15);
        let n = ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(0.5, 0.5), c(0.5, 0.5), c(2.0, 0.0)]).unwrap();
        assert!(n.hermiticity_deviation() > 0.9);
        assert_eq!(n.dagger().dagger(), n);
    }
}
