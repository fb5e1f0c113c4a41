//! Small dense vector and matrix helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let l = norm(a);
    a.iter().map(|x| x / l).collect()
}

pub fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).as_slice().to_vec()
}

pub fn mat_t_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m.transpose() * DVector::from_column_slice(v)).as_slice().to_vec()
}

/// Row-major flat data into an `n x n` matrix.
pub fn matrix_from_rows(n: usize, data: &[f64]) -> Result<DMatrix<f64>> {
    if data.len() != n * n {
        return Err(Error::Config(format!(
            "expected {} matrix entries for n={n}, got {}",
            n * n,
            data.len()
        )));
    }
    Ok(DMatrix::from_row_slice(n, n, data))
}

pub fn invert(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("matrix is singular".into()))
}

/// Square root of a symmetric positive definite matrix.
pub fn spd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Inverse square root of a symmetric positive definite matrix.
pub fn spd_inv_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.max(1e-300).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Traceless `n x n` matrix from `n^2 - 1` coordinates (the last diagonal
/// entry absorbs the trace).
pub fn traceless_from_params(n: usize, params: &[f64]) -> DMatrix<f64> {
    debug_assert_eq!(params.len(), n * n - 1);
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    let mut trace = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == n - 1 && j == n - 1 {
                continue;
            }
            m[(i, j)] = params[k];
            if i == j {
                trace += params[k];
            }
            k += 1;
        }
    }
    m[(n - 1, n - 1)] = -trace;
    m
}

/// Symmetric traceless `n x n` matrix from `n(n+1)/2 - 1` coordinates.
pub fn sym_traceless_from_params(n: usize, params: &[f64]) -> DMatrix<f64> {
    debug_assert_eq!(params.len(), n * (n + 1) / 2 - 1);
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    let mut trace = 0.0;
    for i in 0..n {
        for j in i..n {
            if i == n - 1 && j == n - 1 {
                continue;
            }
            m[(i, j)] = params[k];
            m[(j, i)] = params[k];
            if i == j {
                trace += params[k];
            }
            k += 1;
        }
    }
    m[(n - 1, n - 1)] = -trace;
    m
}

/// `exp(X)` of a traceless matrix lies in SL_n.
pub fn sl_exp(n: usize, params: &[f64]) -> DMatrix<f64> {
    traceless_from_params(n, params).exp()
}

/// Rescale `m` to unit determinant (sign preserved).
pub fn to_unit_det(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows() as f64;
    let d = m.determinant();
    m * (1.0 / d.abs().powf(1.0 / n))
}

/// Random SL_n matrix `exp(X)` with Gaussian traceless X of entry scale `scale`.
pub fn random_sl<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let params: Vec<f64> = (0..n * n - 1)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect::<Vec<f64>>();
    sl_exp(n, &params)
}

/// Spectral condition number.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for s in sv.iter() {
        lo = lo.min(*s);
        hi = hi.max(*s);
    }
    hi / lo
}
