//! Dense real linear algebra for the interior-point core.
//!
//! Matrices are row-major `Vec<f64>` slices with explicit dimensions. Sizes
//! here are tiny (blocks ≤ 16, systems ≤ ~40), so everything is written for
//! clarity and numerical care rather than asymptotics.

use crate::complex::ComplexMatrix;
use crate::eig;
use num_complex::Complex64;

/// C = A·B with A m×k, B k×n.
pub fn mul_nn(m: usize, k: usize, n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        for l in 0..k {
            let ail = a[i * k + l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += ail * b[l * n + j];
            }
        }
    }
    c
}

/// C = Aᵀ·B with A k×m, B k×n.
pub fn mul_tn(m: usize, k: usize, n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for l in 0..k {
        for i in 0..m {
            let ali = a[l * m + i];
            if ali == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += ali * b[l * n + j];
            }
        }
    }
    c
}

/// C = A·Bᵀ with A m×k, B n×k.
pub fn mul_nt(m: usize, k: usize, n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let mut acc = 0.0;
            for l in 0..k {
                acc += a[i * k + l] * b[j * k + l];
            }
            c[i * n + j] = acc;
        }
    }
    c
}

/// Frobenius inner product Σ a_ij b_ij.
pub fn frob_inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn frob_norm(a: &[f64]) -> f64 {
    frob_inner(a, a).sqrt()
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// (A + Aᵀ)/2 in place.
pub fn symmetrize(n: usize, a: &mut [f64]) {
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = avg;
            a[j * n + i] = avg;
        }
    }
}

/// Cholesky A = L·Lᵀ (lower L). `Err` carries the first non-positive pivot.
pub fn chol(n: usize, a: &[f64]) -> Result<Vec<f64>, f64> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = a[i * n + j];
            for k in 0..j {
                acc -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if acc <= 0.0 || !acc.is_finite() {
                    return Err(acc);
                }
                l[i * n + i] = acc.sqrt();
            } else {
                l[i * n + j] = acc / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Solve L·x = rhs in place (forward substitution, L lower triangular).
pub fn forward_solve(n: usize, l: &[f64], rhs: &mut [f64]) {
    for i in 0..n {
        let mut acc = rhs[i];
        for k in 0..i {
            acc -= l[i * n + k] * rhs[k];
        }
        rhs[i] = acc / l[i * n + i];
    }
}

/// Solve Lᵀ·x = rhs in place (back substitution).
pub fn back_solve(n: usize, l: &[f64], rhs: &mut [f64]) {
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for k in (i + 1)..n {
            acc -= l[k * n + i] * rhs[k];
        }
        rhs[i] = acc / l[i * n + i];
    }
}

/// Solve (L·Lᵀ)·x = rhs in place.
pub fn chol_solve(n: usize, l: &[f64], rhs: &mut [f64]) {
    forward_solve(n, l, rhs);
    back_solve(n, l, rhs);
}

/// L⁻¹ for lower-triangular L (forward substitution on identity columns).
pub fn lower_inverse(n: usize, l: &[f64]) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        forward_solve(n, l, &mut e);
        for row in 0..n {
            inv[row * n + col] = e[row];
        }
    }
    inv
}

/// Thin SVD A = U·diag(σ)·Vᵀ of an m×n matrix with m ≥ n, by one-sided Jacobi
/// (rotations orthogonalize column pairs), which delivers small singular
/// values to high relative accuracy — needed because the scaling-point
/// computation divides by √σ as the barrier parameter shrinks.
/// Returns (U m×n, σ descending, V n×n).
pub fn jacobi_svd(m: usize, n: usize, a: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    assert!(m >= n, "one-sided Jacobi SVD expects a square or tall matrix");
    let mut w = a.to_vec();
    let mut v = identity(n);
    const MAX_SWEEPS: usize = 60;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    let wp = w[i * n + p];
                    let wq = w[i * n + q];
                    app += wp * wp;
                    aqq += wq * wq;
                    apq += wp * wq;
                }
                if apq.abs() <= 1e-15 * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..m {
                    let wp = w[i * n + p];
                    let wq = w[i * n + q];
                    w[i * n + p] = cs * wp - sn * wq;
                    w[i * n + q] = sn * wp + cs * wq;
                }
                for i in 0..n {
                    let vp = v[i * n + p];
                    let vq = v[i * n + q];
                    v[i * n + p] = cs * vp - sn * vq;
                    v[i * n + q] = sn * vp + cs * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    // Column norms are the singular values; normalize to get U.
    let mut order: Vec<usize> = (0..n).collect();
    let mut sigma = vec![0.0; n];
    for (j, s) in sigma.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..m {
            acc += w[i * n + j] * w[i * n + j];
        }
        *s = acc.sqrt();
    }
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let mut u = vec![0.0; m * n];
    let mut s_sorted = vec![0.0; n];
    let mut v_sorted = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        s_sorted[dst] = sigma[src];
        let inv = if sigma[src] > 0.0 { 1.0 / sigma[src] } else { 0.0 };
        for i in 0..m {
            u[i * n + dst] = w[i * n + src] * inv;
        }
        for i in 0..n {
            v_sorted[i * n + dst] = v[i * n + src];
        }
    }
    (u, s_sorted, v_sorted)
}

fn to_complex(n: usize, a: &[f64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = Complex64::new(a[i * n + j], 0.0);
        }
    }
    m
}

/// Eigenvalues (ascending) of a real symmetric matrix, via the complex
/// Hermitian solver — one eigensolver for the whole crate.
pub fn sym_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    eig::hermitian_eigenvalues(&to_complex(n, a)).expect("symmetric input")
}

/// Full eigendecomposition of a real symmetric matrix: (values ascending,
/// eigenvector columns as a row-major n×n matrix).
pub fn sym_eigen(n: usize, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (vals, vecs) = eig::hermitian_eigen(&to_complex(n, a)).expect("symmetric input");
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = vecs[(i, j)].re;
        }
    }
    (vals, v)
}
