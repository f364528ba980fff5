use super::matrix::{Matrix, SymMatrix};
use super::LinalgError;

/// Lower-triangular factor `A = L·Lᵀ` of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors `a`, rejecting any pivot at or below `1e-12·trace(A)/dim`.
    pub fn new(a: &SymMatrix) -> Result<Self, LinalgError> {
        let n = a.dim();
        let mut l = Matrix::zeros(n, n);
        if n == 0 {
            return Ok(Cholesky { l });
        }
        let trace = a.trace();
        if !(trace > 0.0) {
            return Err(LinalgError::NotPositiveDefinite { pivot: 0, value: trace });
        }
        let pivot_tol = 1e-12 * trace / n as f64;
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > pivot_tol) {
                return Err(LinalgError::NotPositiveDefinite { pivot: j, value: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs dimension mismatch");
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Solves `A·X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let mut x = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            x.set_column(j, &self.solve(&b.column(j)));
        }
        x
    }
}

/// Solves `A·x = b` for symmetric positive definite `A`.
pub fn solve_spd(a: &SymMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    Ok(Cholesky::new(a)?.solve(b))
}
