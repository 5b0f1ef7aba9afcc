//! Cyclic complex Jacobi eigensolver for small Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies an ordinary real Jacobi rotation, so the update
//! `A ← J† A J` zeroes `a_pq` exactly. Dimensions here never exceed 8, so the
//! rotations are applied as dense products.

use super::matrix::{c, Complex, ComplexMatrix, HERMITIAN_TOL};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Unitary whose k-th column is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<Complex> {
        (0..self.vectors.rows()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// Rebuilds `V diag(values) V†` from (possibly modified) eigenvalues.
    pub fn reconstruct(&self, values: &[f64]) -> Result<ComplexMatrix> {
        let d = ComplexMatrix::diagonal(values);
        self.vectors.matmul(&d)?.matmul(&self.vectors.adjoint())
    }
}

fn max_off_diagonal(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut off = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(a[(i, j)].norm());
            }
        }
    }
    off
}

fn frobenius(a: &ComplexMatrix) -> f64 {
    a.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<Eigen> {
    let defect = m.hermiticity_defect()?;
    let scale = frobenius(m).max(1.0);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let tol = OFF_DIAGONAL_TOL * scale;

    let mut sweeps = 0;
    while max_off_diagonal(&a) >= tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence { sweeps, off: max_off_diagonal(&a) });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag < tol * 1e-3 {
                    continue;
                }
                let phase = apq / mag;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // J = diag(1, conj(phase)) · R(θ), restricted to the (p, q) plane.
                let mut j = ComplexMatrix::identity(n);
                j[(p, p)] = c(cs, 0.0);
                j[(p, q)] = c(sn, 0.0);
                j[(q, p)] = -phase.conj() * sn;
                j[(q, q)] = phase.conj() * cs;
                a = j.adjoint().matmul(&a)?.matmul(&j)?;
                a[(p, q)] = c(0.0, 0.0);
                a[(q, p)] = c(0.0, 0.0);
                v = v.matmul(&j)?;
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(Eigen { values, vectors })
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.values)
}
