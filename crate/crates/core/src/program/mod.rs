//! Problem instances: oracle bundles, KKT residuals and derivative checks.

mod builtin;
mod quadratic;

pub use builtin::{builtin, builtin_names, Instance, Reference};
pub use quadratic::{AffineMap, BuiltinRef, ObjectiveSpec, ProblemConfig, QuadraticProgram, QuadraticSpec};

use crate::cones::Cone;
use crate::error::{Error, Result};
use crate::linalg::{dot, fd_gradient, fd_jacobian, norm, Matrix, SymMatrix, FD_STEP};
use serde::Serialize;

/// A nonlinear conic program
///
/// ```text
/// min f(x)  s.t.  h(x) = 0,  g(x) ∈ K
/// ```
///
/// described by its first- and second-order oracles. `g` takes values in the
/// ambient space of `cone()`, with PSD blocks in packed coordinates.
pub trait Program: Send + Sync {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn cone(&self) -> &Cone;
    fn f(&self, x: &[f64]) -> f64;
    fn grad_f(&self, x: &[f64]) -> Vec<f64>;
    fn h(&self, x: &[f64]) -> Vec<f64>;
    /// `m × n`
    fn jac_h(&self, x: &[f64]) -> Matrix;
    fn g(&self, x: &[f64]) -> Vec<f64>;
    /// `dim(K) × n`
    fn jac_g(&self, x: &[f64]) -> Matrix;
    /// `∇²f(x) − Σᵢ λᵢ∇²hᵢ(x) − ⟨μ, ∇²g(x)⟩`
    fn hess_lagrangian(&self, x: &[f64], lambda: &[f64], mu: &[f64]) -> SymMatrix;

    /// Total multiplier dimension `m + dim(K)`.
    fn dual_dim(&self) -> usize {
        self.m() + self.cone().dim()
    }
}

/// `∇ₓL₀(x, λ, μ) = ∇f(x) − Jh(x)ᵀλ − Jg(x)ᵀμ`
pub fn lagrangian_gradient<P: Program + ?Sized>(p: &P, x: &[f64], lambda: &[f64], mu: &[f64]) -> Vec<f64> {
    let mut grad = p.grad_f(x);
    let jh = p.jac_h(x).tr_matvec(lambda);
    let jg = p.jac_g(x).tr_matvec(mu);
    for i in 0..grad.len() {
        grad[i] -= jh[i] + jg[i];
    }
    grad
}

pub(crate) fn check_dims<P: Program + ?Sized>(p: &P, x: &[f64], lambda: &[f64], mu: &[f64]) -> Result<()> {
    for (what, expected, got) in [
        ("x", p.n(), x.len()),
        ("lambda", p.m(), lambda.len()),
        ("mu", p.cone().dim(), mu.len()),
    ] {
        if expected != got {
            return Err(Error::Dimension { what, expected, got });
        }
    }
    Ok(())
}

/// Componentwise violation of the KKT system at `(x, λ, μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KktResidual {
    pub stationarity: f64,
    pub eq_feas: f64,
    pub cone_feas: f64,
    pub dual_feas: f64,
    pub complementarity: f64,
    pub total: f64,
}

pub fn kkt_residual<P: Program + ?Sized>(p: &P, x: &[f64], lambda: &[f64], mu: &[f64]) -> Result<KktResidual> {
    check_dims(p, x, lambda, mu)?;
    let gx = p.g(x);
    let stationarity = norm(&lagrangian_gradient(p, x, lambda, mu));
    let eq_feas = norm(&p.h(x));
    let cone_feas = p.cone().dist(&gx)?;
    let dual_feas = p.cone().dist(mu)?;
    let complementarity = dot(mu, &gx).abs();
    let total = stationarity
        .max(eq_feas)
        .max(cone_feas)
        .max(dual_feas)
        .max(complementarity);
    Ok(KktResidual {
        stationarity,
        eq_feas,
        cone_feas,
        dual_feas,
        complementarity,
        total,
    })
}

/// Largest deviation between one analytic oracle and its finite-difference
/// counterpart.
#[derive(Clone, Debug, Serialize)]
pub struct OracleCheck {
    pub oracle: &'static str,
    pub max_rel_dev: f64,
    /// `(row, column)` of the worst entry.
    pub location: Option<(usize, usize)>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeReport {
    pub checks: Vec<OracleCheck>,
    pub max_rel_dev: f64,
    pub passed: bool,
}

impl DerivativeReport {
    pub fn failures(&self) -> impl Iterator<Item = &OracleCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn compare(oracle: &'static str, analytic: &Matrix, fd: &Matrix, tol: f64) -> OracleCheck {
    let scale = fd.max_abs().max(1.0);
    let mut worst = 0.0;
    let mut location = None;
    for i in 0..fd.rows() {
        for j in 0..fd.cols() {
            let dev = (analytic[(i, j)] - fd[(i, j)]).abs() / scale;
            if dev > worst || dev.is_nan() {
                worst = if dev.is_nan() { f64::INFINITY } else { dev };
                location = Some((i, j));
            }
        }
    }
    OracleCheck {
        oracle,
        max_rel_dev: worst,
        location,
        passed: worst <= tol,
    }
}

/// Compares `grad_f`, `jac_h`, `jac_g` and `hess_lagrangian` against central
/// differences at `x`, with multipliers `λᵢ = 1/(i+1)`, `μⱼ = 1/(j+1)` for
/// the Hessian.
pub fn check_derivatives<P: Program + ?Sized>(p: &P, x: &[f64], tol: f64) -> Result<DerivativeReport> {
    let lambda: Vec<f64> = (0..p.m()).map(|i| 1.0 / (i as f64 + 1.0)).collect();
    let mu: Vec<f64> = (0..p.cone().dim()).map(|j| 1.0 / (j as f64 + 1.0)).collect();
    check_derivatives_at(p, x, &lambda, &mu, tol)
}

pub fn check_derivatives_at<P: Program + ?Sized>(
    p: &P,
    x: &[f64],
    lambda: &[f64],
    mu: &[f64],
    tol: f64,
) -> Result<DerivativeReport> {
    check_dims(p, x, lambda, mu)?;
    let n = p.n();
    let grad = Matrix::from_rows(&[p.grad_f(x)]);
    let fd_grad = Matrix::from_rows(&[fd_gradient(|u| p.f(u), x, FD_STEP)?]);
    let mut checks = vec![compare("grad_f", &grad, &fd_grad, tol)];
    if p.m() > 0 {
        let fd = fd_jacobian(|u| p.h(u), x, FD_STEP)?;
        checks.push(compare("jac_h", &p.jac_h(x), &fd, tol));
    }
    let fd = fd_jacobian(|u| p.g(u), x, FD_STEP)?;
    checks.push(compare("jac_g", &p.jac_g(x), &fd, tol));
    let fd = fd_jacobian(|u| lagrangian_gradient(p, u, lambda, mu), x, FD_STEP)?;
    let hess = p.hess_lagrangian(x, lambda, mu);
    debug_assert_eq!(hess.dim(), n);
    checks.push(compare("hess_lagrangian", hess.as_matrix(), &fd, tol));
    let max_rel_dev = checks.iter().map(|c| c.max_rel_dev).fold(0.0, f64::max);
    let passed = checks.iter().all(|c| c.passed);
    Ok(DerivativeReport {
        checks,
        max_rel_dev,
        passed,
    })
}
