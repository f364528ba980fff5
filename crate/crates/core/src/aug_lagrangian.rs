//! The augmented Lagrangian
//!
//! ```text
//! L_c(x, λ, μ) = f(x) − ⟨λ, h(x)⟩ + (c/2)‖h(x)‖² + (1/2c)(‖Π_K(μ − c·g(x))‖² − ‖μ‖²)
//! ```
//!
//! its gradient and generalized Hessian in `x`, and a globalized semismooth
//! Newton solver for `min_x L_c(x, λ, μ)`.

use crate::cones::SubdiffElement;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, Cholesky, LinalgError, SymMatrix};
use crate::program::{check_dims, Program};
use serde::Serialize;

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("penalty c must be positive, got {c}")))
    }
}

/// `μ − c·g(x)`
fn shifted<P: Program + ?Sized>(p: &P, c: f64, x: &[f64], mu: &[f64]) -> Vec<f64> {
    axpy(mu, -c, &p.g(x))
}

pub fn eval_lc<P: Program + ?Sized>(p: &P, c: f64, x: &[f64], lambda: &[f64], mu: &[f64]) -> Result<f64> {
    check_c(c)?;
    check_dims(p, x, lambda, mu)?;
    let h = p.h(x);
    let proj = p.cone().project(&shifted(p, c, x, mu))?;
    Ok(p.f(x) - dot(lambda, &h) + 0.5 * c * dot(&h, &h) + (dot(&proj, &proj) - dot(mu, mu)) / (2.0 * c))
}

/// `∇f(x) − Jh(x)ᵀ(λ − c·h(x)) − Jg(x)ᵀΠ_K(μ − c·g(x))`
pub fn grad_lc<P: Program + ?Sized>(p: &P, c: f64, x: &[f64], lambda: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
    check_c(c)?;
    check_dims(p, x, lambda, mu)?;
    let lam_c = axpy(lambda, -c, &p.h(x));
    let mu_c = p.cone().project(&shifted(p, c, x, mu))?;
    Ok(crate::program::lagrangian_gradient(p, x, &lam_c, &mu_c))
}

/// One element of the generalized Hessian of `L_c` in `x`,
///
/// ```text
/// A = ∇²ₓₓL₀(x, λ − c·h, Π_K(μ − c·g)) + c·JhᵀJh + c·JgᵀWJg
/// ```
///
/// with `W` the deterministic element of `∂_BΠ_K(μ − c·g(x))`.
pub fn hess_element_lc<P: Program + ?Sized>(
    p: &P,
    c: f64,
    x: &[f64],
    lambda: &[f64],
    mu: &[f64],
) -> Result<(SymMatrix, SubdiffElement)> {
    check_c(c)?;
    check_dims(p, x, lambda, mu)?;
    let z = shifted(p, c, x, mu);
    let w = p.cone().bsubdiff_element(&z)?;
    let lam_c = axpy(lambda, -c, &p.h(x));
    let mu_c = p.cone().project(&z)?;
    Ok((hessian_with(p, c, x, &lam_c, &mu_c, &w), w))
}

/// `∇²ₓₓL₀(x, λ_c, μ_c) + c·JhᵀJh + c·JgᵀWJg` for a given element `W`.
pub(crate) fn hessian_with<P: Program + ?Sized>(
    p: &P,
    c: f64,
    x: &[f64],
    lam_c: &[f64],
    mu_c: &[f64],
    w: &SubdiffElement,
) -> SymMatrix {
    let jh = p.jac_h(x);
    let jg = p.jac_g(x);
    p.hess_lagrangian(x, lam_c, mu_c)
        .add(&SymMatrix::gram(&jh).scaled(c))
        .add(&w.congruence(&jg).scaled(c))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerOptions {
    /// Absolute tolerance on `‖∇ₓL_c‖`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for InnerOptions {
    fn default() -> Self {
        InnerOptions {
            tol: 1e-12,
            max_iter: 100,
        }
    }
}

const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 50;
const MAX_SHIFT_DOUBLINGS: usize = 200;

/// How an inner step was accepted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepAcceptance {
    /// Sufficient decrease of `L_c` with the given number of halvings.
    Armijo { backtracks: usize },
    /// The predicted decrease is below the rounding level of `L_c`, so the
    /// full Newton step is taken on the strength of a smaller gradient.
    Local,
    /// Extra full step after the tolerance is met, kept because it
    /// reduced the gradient norm.
    Refinement,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct InnerStep {
    /// `L_c` before the step.
    pub value_before: f64,
    /// `L_c` after the step.
    pub value_after: f64,
    pub step_length: f64,
    pub acceptance: StepAcceptance,
}

/// Outcome of [`minimize_inner`].
#[derive(Clone, Debug)]
pub struct InnerResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    /// Whether any Newton system needed a Levenberg shift.
    pub regularized: bool,
    /// Element of `∂_BΠ_K(μ − c·g(x))` at the returned `x`.
    pub w: SubdiffElement,
    pub converged: bool,
    pub steps: Vec<InnerStep>,
}

/// Factors `A`, shifting by `τI` with `τ` doubling from `1e−8·(1 + ‖A‖_F)`
/// until the factorization succeeds. Returns the factor and whether a shift
/// was needed.
fn factor_with_shift(a: &SymMatrix) -> Result<(Cholesky, bool)> {
    match Cholesky::new(a) {
        Ok(ch) => return Ok((ch, false)),
        Err(LinalgError::NotPositiveDefinite { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    let n = a.dim();
    let mut tau = 1e-8 * (1.0 + a.frobenius_norm());
    for _ in 0..MAX_SHIFT_DOUBLINGS {
        let shifted = a.add(&SymMatrix::identity(n).scaled(tau));
        if let Ok(ch) = Cholesky::new(&shifted) {
            return Ok((ch, true));
        }
        tau *= 2.0;
    }
    Err(LinalgError::NonFinite.into())
}

/// Semismooth Newton with Armijo backtracking for `min_x L_c(x, λ, μ)`,
/// warm-started at `x_start`.
///
/// Iteration stops once `‖∇ₓL_c‖ ≤ tol`, after one refinement step that is
/// kept only if it lowers the gradient norm further. Exhausting `max_iter` or the line
/// search returns a result with `converged == false`.
pub fn minimize_inner<P: Program + ?Sized>(
    p: &P,
    c: f64,
    lambda: &[f64],
    mu: &[f64],
    x_start: &[f64],
    opts: InnerOptions,
) -> Result<InnerResult> {
    check_c(c)?;
    check_dims(p, x_start, lambda, mu)?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inner tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let mut x = x_start.to_vec();
    let mut value = eval_lc(p, c, &x, lambda, mu)?;
    let mut grad = grad_lc(p, c, &x, lambda, mu)?;
    let mut regularized = false;
    let mut steps = Vec::new();
    let mut iterations = 0;
    let mut converged = norm(&grad) <= opts.tol;

    while !converged && iterations < opts.max_iter {
        let (a, _) = hess_element_lc(p, c, &x, lambda, mu)?;
        let (chol, shifted) = factor_with_shift(&a)?;
        regularized |= shifted;
        let dir: Vec<f64> = chol.solve(&grad).iter().map(|v| -v).collect();
        let slope = dot(&grad, &dir);

        let mut accepted = None;
        let mut t = 1.0;
        for backtracks in 0..=MAX_BACKTRACKS {
            let trial = axpy(&x, t, &dir);
            let trial_value = eval_lc(p, c, &trial, lambda, mu)?;
            if trial_value <= value + ARMIJO_C1 * t * slope && trial_value < value {
                accepted = Some((trial, trial_value, StepAcceptance::Armijo { backtracks }));
                break;
            }
            if backtracks == 0 && -slope <= 1e3 * f64::EPSILON * (1.0 + value.abs()) {
                let trial_grad = grad_lc(p, c, &trial, lambda, mu)?;
                if norm(&trial_grad) < norm(&grad) {
                    accepted = Some((trial, trial_value, StepAcceptance::Local));
                    break;
                }
            }
            t *= BACKTRACK;
        }
        let Some((trial, trial_value, acceptance)) = accepted else {
            break;
        };
        steps.push(InnerStep {
            value_before: value,
            value_after: trial_value,
            step_length: if matches!(acceptance, StepAcceptance::Local) {
                1.0
            } else {
                t
            },
            acceptance,
        });
        x = trial;
        value = trial_value;
        grad = grad_lc(p, c, &x, lambda, mu)?;
        iterations += 1;
        converged = norm(&grad) <= opts.tol;
    }

    if converged && norm(&grad) > 0.0 {
        // one more full Newton step, kept only if it shrinks the gradient
        let (a, _) = hess_element_lc(p, c, &x, lambda, mu)?;
        let (chol, shifted) = factor_with_shift(&a)?;
        let trial: Vec<f64> = x.iter().zip(chol.solve(&grad)).map(|(xi, di)| xi - di).collect();
        let trial_grad = grad_lc(p, c, &trial, lambda, mu)?;
        if norm(&trial_grad) < norm(&grad) {
            let trial_value = eval_lc(p, c, &trial, lambda, mu)?;
            steps.push(InnerStep {
                value_before: value,
                value_after: trial_value,
                step_length: 1.0,
                acceptance: StepAcceptance::Refinement,
            });
            regularized |= shifted;
            x = trial;
            grad = trial_grad;
            iterations += 1;
        }
    }

    let w = p.cone().bsubdiff_element(&shifted(p, c, &x, mu))?;
    Ok(InnerResult {
        grad_norm: norm(&grad),
        x,
        iterations,
        regularized,
        w,
        converged,
        steps,
    })
}
