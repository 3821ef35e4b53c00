//! Small dense Hermitian linear algebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{GmeError, Result};

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Eigen {
    /// `sum_k lambda_k v_k v_k^dag`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let n = self.vectors.nrows();
        let mut out = DMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            out += (&v * v.adjoint()) * Complex64::new(lam, 0.0);
        }
        out
    }

    /// Number of eigenvalues strictly above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.values.iter().take_while(|&&v| v > tol).count()
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise `|M - M^dag|`.
pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_eig(m: &DMatrix<Complex64>) -> Result<Eigen> {
    hermitian_eig_tol(m, 1e-9)
}

/// Hermitian eigendecomposition; rejects inputs whose Hermiticity defect exceeds `tol`.
pub fn hermitian_eig_tol(m: &DMatrix<Complex64>, tol: f64) -> Result<Eigen> {
    let defect = hermiticity_defect(m);
    if defect > tol {
        return Err(GmeError::Validation { check: "hermiticity", value: defect, tol });
    }
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigen { values, vectors })
}
