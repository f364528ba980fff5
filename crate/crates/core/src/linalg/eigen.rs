use super::matrix::{Matrix, SymMatrix};
use super::LinalgError;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Eigendecomposition `Z = P·diag(ρ)·Pᵀ` with eigenvalues sorted descending
/// and the positive / zero / negative index split at the rank tolerance.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthogonal factor; column `i` is the eigenvector of `eigenvalues[i]`.
    pub vectors: Matrix,
    pub rank_tol: f64,
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub gamma: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    /// Eigenvalue with the rank tolerance applied (entries in β read as 0).
    pub fn clean_eigenvalue(&self, i: usize) -> f64 {
        let r = self.eigenvalues[i];
        if r.abs() <= self.rank_tol {
            0.0
        } else {
            r
        }
    }

    /// `P·diag(φ(ρᵢ))·Pᵀ` where `φ` sees the cleaned eigenvalues.
    pub fn spectral_map(&self, phi: impl Fn(f64) -> f64) -> SymMatrix {
        let p = self.dim();
        let weights: Vec<f64> = (0..p).map(|i| phi(self.clean_eigenvalue(i))).collect();
        let mut out = SymMatrix::zeros(p);
        for i in 0..p {
            for j in i..p {
                let v: f64 = (0..p)
                    .map(|k| weights[k] * self.vectors[(i, k)] * self.vectors[(j, k)])
                    .sum();
                out.set(i, j, v);
            }
        }
        out
    }

    /// `Pᵀ·H·P`
    pub fn rotate_in(&self, h: &SymMatrix) -> SymMatrix {
        h.congruence(&self.vectors)
    }

    /// `P·H·Pᵀ`
    pub fn rotate_out(&self, h: &SymMatrix) -> SymMatrix {
        h.congruence(&self.vectors.transpose())
    }
}

/// Rank tolerance used for the α/β/γ split of a matrix with the given
/// Frobenius norm.
pub fn rank_tolerance(frobenius: f64) -> f64 {
    1e-9 * frobenius.max(1.0)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn eig_sym(z: &SymMatrix) -> Result<SpectralDecomposition, LinalgError> {
    let n = z.dim();
    let znorm = z.frobenius_norm();
    if !znorm.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let mut a = z.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let threshold = OFF_DIAGONAL_TOL * znorm;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    // Stable sort keeps the Jacobi order among ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);

    let rank_tol = rank_tolerance(znorm);
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut gamma = Vec::new();
    for (i, &r) in eigenvalues.iter().enumerate() {
        if r > rank_tol {
            alpha.push(i);
        } else if r < -rank_tol {
            gamma.push(i);
        } else {
            beta.push(i);
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        vectors,
        rank_tol,
        alpha,
        beta,
        gamma,
    })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            s += a[(p, q)] * a[(p, q)];
        }
    }
    (2.0 * s).sqrt()
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    // Below rounding level relative to both diagonal entries: drop it.
    if apq.abs() <= f64::EPSILON * 0.25 * app.abs() && apq.abs() <= f64::EPSILON * 0.25 * aqq.abs() {
        a[(p, q)] = 0.0;
        a[(q, p)] = 0.0;
        return;
    }
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}
