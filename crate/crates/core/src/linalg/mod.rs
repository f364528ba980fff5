//! Small dense linear algebra: symmetric eigendecomposition, Cholesky
//! solves, pseudo-inverse, subspace helpers and finite-difference oracles.

mod cholesky;
mod eigen;
mod matrix;

pub use cholesky::{solve_spd, Cholesky};
pub use eigen::{eig_sym, rank_tolerance, SpectralDecomposition};
pub use matrix::{add, axpy, dot, max_abs, norm, scale, sub, Matrix, SymMatrix};

use crate::par::{self, Execution};
use thiserror::Error;

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("Jacobi eigensolver did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("non-finite value encountered")]
    NonFinite,
}

/// Moore–Penrose pseudo-inverse; eigenvalues within the rank tolerance are
/// treated as exactly zero.
pub fn pinv_sym(z: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    let d = eig_sym(z)?;
    Ok(d.spectral_map(|r| if r == 0.0 { 0.0 } else { 1.0 / r }))
}

/// Central-difference Jacobian of `f` at `u`; column `i` is
/// `(f(u + h·eᵢ) − f(u − h·eᵢ)) / 2h`. Columns are evaluated in parallel
/// when the build allows it.
pub fn fd_jacobian<F>(f: F, u: &[f64], step: f64) -> Result<Matrix, LinalgError>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync + Send,
{
    fd_jacobian_with(Execution::Parallel, f, u, step)
}

pub fn fd_jacobian_with<F>(exec: Execution, f: F, u: &[f64], step: f64) -> Result<Matrix, LinalgError>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync + Send,
{
    let n = u.len();
    let columns = par::map_range(exec, n, |i| {
        let mut up = u.to_vec();
        let mut um = u.to_vec();
        up[i] += step;
        um[i] -= step;
        let fp = f(&up);
        let fm = f(&um);
        fp.iter()
            .zip(&fm)
            .map(|(a, b)| (a - b) / (2.0 * step))
            .collect::<Vec<f64>>()
    });
    let rows = match columns.first() {
        Some(c) => c.len(),
        None => f(u).len(),
    };
    let jac = Matrix::from_columns(rows, &columns);
    if jac.is_finite() {
        Ok(jac)
    } else {
        Err(LinalgError::NonFinite)
    }
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient<F>(f: F, u: &[f64], step: f64) -> Result<Vec<f64>, LinalgError>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let jac = fd_jacobian(|v| vec![f(v)], u, step)?;
    Ok(jac.row(0).to_vec())
}

/// Orthonormal basis (as columns) of the null space of `c`, i.e. the
/// eigenvectors of `cᵀc` whose eigenvalues are at most
/// `rel_tol·max(1, largest)`.
pub fn null_space(c: &Matrix, rel_tol: f64) -> Result<Matrix, LinalgError> {
    let n = c.cols();
    if c.rows() == 0 {
        return Ok(Matrix::identity(n));
    }
    let gram = SymMatrix::gram(c);
    let d = eig_sym(&gram)?;
    let largest = d.eigenvalues.first().copied().unwrap_or(0.0).max(1.0);
    let keep: Vec<Vec<f64>> = (0..n)
        .filter(|&i| d.eigenvalues[i] <= rel_tol * largest)
        .map(|i| d.eigenvector(i))
        .collect();
    Ok(Matrix::from_columns(n, &keep))
}

/// Smallest and largest eigenvalue of `m·mᵀ`; `m` has full row rank iff the
/// ratio clears the caller's threshold.
pub fn row_gram_extremes(m: &Matrix) -> Result<(f64, f64), LinalgError> {
    if m.rows() == 0 {
        return Ok((0.0, 0.0));
    }
    let gram = SymMatrix::gram(&m.transpose());
    let d = eig_sym(&gram)?;
    Ok((*d.eigenvalues.last().unwrap(), d.eigenvalues[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_examples() {
        let p = pinv_sym(&SymMatrix::diag(&[2.0, 0.0])).unwrap();
        assert_eq!(p, SymMatrix::diag(&[0.5, 0.0]));
        let p = pinv_sym(&SymMatrix::identity(3)).unwrap();
        assert!(p.as_matrix().sub(&Matrix::identity(3)).max_abs() < 1e-15);
        let p = pinv_sym(&SymMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]])).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((p.get(i, j) - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fd_identity() {
        let j = fd_jacobian(|u| u.to_vec(), &[0.3, -1.0, 2.0], FD_STEP).unwrap();
        assert!(j.sub(&Matrix::identity(3)).max_abs() < 1e-9);
    }

    #[test]
    fn fd_square() {
        let j = fd_jacobian(|u| vec![u[0] * u[0], u[1]], &[3.0, 5.0], 1e-6).unwrap();
        assert!(j.sub(&Matrix::diag(&[6.0, 1.0])).max_abs() < 1e-6);
    }

    #[test]
    fn fd_orthant_projection() {
        let proj = |u: &[f64]| u.iter().map(|v| v.max(0.0)).collect::<Vec<_>>();
        let j = fd_jacobian(proj, &[2.0, -2.0], FD_STEP).unwrap();
        assert!(j.sub(&Matrix::diag(&[1.0, 0.0])).max_abs() < 1e-9);
    }

    #[test]
    fn fd_non_finite_is_error() {
        let r = fd_jacobian(|u| vec![1.0 / (u[0] - u[0])], &[1.0], FD_STEP);
        assert_eq!(r.unwrap_err(), LinalgError::NonFinite);
    }

    #[test]
    fn null_space_of_single_row() {
        let c = Matrix::from_rows(&[[1.0, 0.0, 0.0]]);
        let n = null_space(&c, 1e-12).unwrap();
        assert_eq!(n.cols(), 2);
        assert!(c.matmul(&n).max_abs() < 1e-15);
    }
}
