//! Multiplier updates: the classic first-order step and the generalized
//! Newton step on the dual function `ϑ_c(λ, μ) = min_x L_c(x, λ, μ)`.

mod solve;

pub use solve::{solve, solve_batch, IterationRecord, RateSource, SolveOptions, SolveReport, Status, ETA_CLAMP};

use crate::aug_lagrangian::{eval_lc, hessian_with, minimize_inner, InnerOptions, InnerResult};
use crate::cones::SubdiffElement;
use crate::error::{Error, Result};
use crate::linalg::{axpy, eig_sym, norm, Cholesky, LinalgError, Matrix, SymMatrix};
use crate::program::{check_dims, kkt_residual, Program};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which multiplier update an outer loop uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// `λ⁺ = λ − c·h(x⁺)`, `μ⁺ = Π_K(μ − c·g(x⁺))`
    First,
    /// Generalized Newton step on `∇ϑ_c`.
    Second,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::First => "first",
            Method::Second => "second",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Method::First),
            "second" => Ok(Method::Second),
            _ => Err(Error::InvalidParameter(format!("unknown method `{s}`"))),
        }
    }
}

/// Outer iterate `(λ, μ)` for a fixed penalty `c`, with the primal point
/// used to warm-start the next inner solve.
#[derive(Clone, Debug, PartialEq)]
pub struct DualState {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub c: f64,
    pub x: Vec<f64>,
    /// `∇ϑ_c(λ, μ)`, once an inner solve at this iterate has produced it.
    pub grad_theta: Option<Vec<f64>>,
}

impl DualState {
    pub fn new<P: Program + ?Sized>(p: &P, c: f64, y: &[f64], x_start: &[f64]) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("penalty c must be positive, got {c}")));
        }
        if y.len() != p.dual_dim() {
            return Err(Error::Dimension {
                what: "y",
                expected: p.dual_dim(),
                got: y.len(),
            });
        }
        let (lambda, mu) = y.split_at(p.m());
        check_dims(p, x_start, lambda, mu)?;
        Ok(DualState {
            lambda: lambda.to_vec(),
            mu: mu.to_vec(),
            c,
            x: x_start.to_vec(),
            grad_theta: None,
        })
    }

    /// Stacked `(λ, μ)`.
    pub fn y(&self) -> Vec<f64> {
        let mut y = self.lambda.clone();
        y.extend_from_slice(&self.mu);
        y
    }

    fn with_y(&self, m: usize, y: &[f64], x: Vec<f64>) -> DualState {
        DualState {
            lambda: y[..m].to_vec(),
            mu: y[m..].to_vec(),
            c: self.c,
            x,
            grad_theta: None,
        }
    }
}

/// `(λ − c·h(x⁺), Π_K(μ − c·g(x⁺)))`
pub fn multiplier_images<P: Program + ?Sized>(
    p: &P,
    c: f64,
    x: &[f64],
    lambda: &[f64],
    mu: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dims(p, x, lambda, mu)?;
    let lam_c = axpy(lambda, -c, &p.h(x));
    let mu_c = p.cone().project(&axpy(mu, -c, &p.g(x)))?;
    Ok((lam_c, mu_c))
}

/// `∇ϑ_c(λ, μ) = (−h(x⁺), (Π_K(μ − c·g(x⁺)) − μ)/c)` for the inner
/// minimizer `x⁺` at `(λ, μ)`.
pub fn grad_theta<P: Program + ?Sized>(p: &P, c: f64, x: &[f64], lambda: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
    let (_, mu_c) = multiplier_images(p, c, x, lambda, mu)?;
    let mut out: Vec<f64> = p.h(x).iter().map(|v| -v).collect();
    out.extend(mu_c.iter().zip(mu).map(|(a, b)| (a - b) / c));
    Ok(out)
}

/// `A_c = ∇²ₓₓL₀(x⁺, λ_c, μ_c) + c·JhᵀJh + c·JgᵀWJg`
pub fn build_ac<P: Program + ?Sized>(
    p: &P,
    c: f64,
    x: &[f64],
    lam_c: &[f64],
    mu_c: &[f64],
    w: &SubdiffElement,
) -> Result<SymMatrix> {
    check_dims(p, x, lam_c, mu_c)?;
    Ok(hessian_with(p, c, x, lam_c, mu_c, w))
}

/// A dense element of the generalized Hessian of `ϑ_c`,
///
/// ```text
/// V = −BᵀA_c⁻¹B − (1/c)·diag(0, I − W),   B = [Jhᵀ | JgᵀW]
/// ```
#[derive(Clone, Debug)]
pub struct VOperator {
    pub matrix: SymMatrix,
    pub w: SubdiffElement,
}

impl VOperator {
    pub fn apply(&self, d: &[f64]) -> Vec<f64> {
        self.matrix.matvec(d)
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(eig_sym(&self.matrix)?
            .eigenvalues
            .first()
            .copied()
            .unwrap_or(f64::NEG_INFINITY))
    }
}

/// Builds `V` at the inner minimizer `x⁺` of `(λ, μ)`. Fails with
/// [`LinalgError::NotPositiveDefinite`] when `A_c` is not positive definite.
pub fn build_v<P: Program + ?Sized>(
    p: &P,
    c: f64,
    x: &[f64],
    lambda: &[f64],
    mu: &[f64],
    w: &SubdiffElement,
) -> Result<VOperator> {
    let (lam_c, mu_c) = multiplier_images(p, c, x, lambda, mu)?;
    let a = build_ac(p, c, x, &lam_c, &mu_c, w)?;
    v_from_ac(p, c, x, &a, w)
}

fn v_from_ac<P: Program + ?Sized>(p: &P, c: f64, x: &[f64], a: &SymMatrix, w: &SubdiffElement) -> Result<VOperator> {
    let n = p.n();
    let m = p.m();
    let dim = p.cone().dim();
    let chol = Cholesky::new(a)?;
    // columns of B: Jh rows, then Jgᵀ(W eⱼ)
    let jh = p.jac_h(x);
    let wjg = {
        let jg = p.jac_g(x);
        let mut out = Matrix::zeros(dim, n);
        for j in 0..n {
            out.set_column(j, &w.apply(&jg.column(j)));
        }
        out
    };
    let b = Matrix::from_fn(n, m + dim, |i, j| if j < m { jh[(j, i)] } else { wjg[(j - m, i)] });
    let ainv_b = chol.solve_matrix(&b);
    let mut v = b.tr_matmul(&ainv_b).scaled(-1.0);
    let w_dense = w.to_dense();
    for i in 0..dim {
        for j in 0..dim {
            let id = if i == j { 1.0 } else { 0.0 };
            v[(m + i, m + j)] -= (id - w_dense.get(i, j)) / c;
        }
    }
    Ok(VOperator {
        matrix: SymMatrix::from_matrix(&v),
        w: w.clone(),
    })
}

/// Everything the outer loop needs from one inner solve at `(λ, μ)`.
#[derive(Clone, Debug)]
pub struct DualEval {
    pub inner: InnerResult,
    /// `ϑ_c(λ, μ) = L_c(x⁺, λ, μ)`
    pub theta: f64,
    pub grad_theta: Vec<f64>,
    /// `V` at this iterate, or the reason it could not be formed.
    pub v: std::result::Result<VOperator, LinalgError>,
}

/// Solves the inner problem at `y = (λ, μ)` and evaluates `ϑ_c`, `∇ϑ_c`
/// and `V` there. Inner non-convergence is an error.
pub fn evaluate_dual<P: Program + ?Sized>(
    p: &P,
    c: f64,
    y: &[f64],
    x_start: &[f64],
    opts: InnerOptions,
) -> Result<DualEval> {
    if y.len() != p.dual_dim() {
        return Err(Error::Dimension {
            what: "y",
            expected: p.dual_dim(),
            got: y.len(),
        });
    }
    let (lambda, mu) = y.split_at(p.m());
    let inner = minimize_inner(p, c, lambda, mu, x_start, opts)?;
    if !inner.converged {
        return Err(Error::InnerFailure {
            iterations: inner.iterations,
            grad_norm: inner.grad_norm,
        });
    }
    let theta = eval_lc(p, c, &inner.x, lambda, mu)?;
    let gt = grad_theta(p, c, &inner.x, lambda, mu)?;
    let v = match build_v(p, c, &inner.x, lambda, mu, &inner.w) {
        Ok(v) => Ok(v),
        Err(Error::Linalg(e)) => Err(e),
        Err(e) => return Err(e),
    };
    Ok(DualEval {
        inner,
        theta,
        grad_theta: gt,
        v,
    })
}

/// Result of one outer step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: DualState,
    pub inner: InnerResult,
    /// `∇ϑ_c` at the iterate the step started from.
    pub grad_theta: Vec<f64>,
    /// True when a second-order step was replaced by the first-order one.
    pub fallback: bool,
}

/// `(λ⁺, μ⁺) = (λ − c·h(x⁺), Π_K(μ − c·g(x⁺)))`
pub fn first_order_step<P: Program + ?Sized>(p: &P, state: &DualState, opts: InnerOptions) -> Result<StepOutcome> {
    let inner = minimize_inner(p, state.c, &state.lambda, &state.mu, &state.x, opts)?;
    if !inner.converged {
        return Err(Error::InnerFailure {
            iterations: inner.iterations,
            grad_norm: inner.grad_norm,
        });
    }
    let gt = grad_theta(p, state.c, &inner.x, &state.lambda, &state.mu)?;
    let (lambda, mu) = multiplier_images(p, state.c, &inner.x, &state.lambda, &state.mu)?;
    Ok(StepOutcome {
        state: DualState {
            lambda,
            mu,
            c: state.c,
            x: inner.x.clone(),
            grad_theta: None,
        },
        inner,
        grad_theta: gt,
        fallback: false,
    })
}

/// Absolute slack added to the residual-increase safeguard so that steps
/// taken at round-off level are never rejected.
const SAFEGUARD_FLOOR: f64 = 1e-12;

/// Solves `(−V)·Δy = ∇ϑ_c` and returns `y + Δy`.
///
/// Falls back to the first-order update when `−V` is not positive definite
/// or when the new multipliers raise the KKT residual at `x⁺` more than
/// tenfold.
pub fn second_order_step<P: Program + ?Sized>(p: &P, state: &DualState, opts: InnerOptions) -> Result<StepOutcome> {
    let y = state.y();
    let eval = evaluate_dual(p, state.c, &y, &state.x, opts)?;
    let x_plus = eval.inner.x.clone();
    let newton = eval.v.as_ref().ok().and_then(|v| {
        let neg = v.matrix.scaled(-1.0);
        Cholesky::new(&neg).ok().map(|ch| ch.solve(&eval.grad_theta))
    });
    let m = p.m();
    let candidate = match newton {
        Some(dy) => {
            let y_plus: Vec<f64> = y.iter().zip(&dy).map(|(a, b)| a + b).collect();
            let before = kkt_residual(p, &x_plus, &state.lambda, &state.mu)?.total;
            let after = kkt_residual(p, &x_plus, &y_plus[..m], &y_plus[m..])?.total;
            (after.is_finite() && after <= 10.0 * before + SAFEGUARD_FLOOR).then_some(y_plus)
        }
        None => None,
    };
    let (new_state, fallback) = match candidate {
        Some(y_plus) => (state.with_y(m, &y_plus, x_plus), false),
        None => {
            let (lambda, mu) = multiplier_images(p, state.c, &x_plus, &state.lambda, &state.mu)?;
            let mut y_plus = lambda;
            y_plus.extend(mu);
            (state.with_y(m, &y_plus, x_plus), true)
        }
    };
    Ok(StepOutcome {
        state: new_state,
        inner: eval.inner,
        grad_theta: eval.grad_theta,
        fallback,
    })
}

/// Spectral data for one sampled element `W`.
#[derive(Clone, Debug, Serialize)]
pub struct ElementCheck {
    pub min_eig_a: f64,
    /// `None` when `A_c` is not positive definite and `V` is undefined.
    pub max_eig_v: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub c: f64,
    pub elements: Vec<ElementCheck>,
    pub min_eig_a: f64,
    pub max_eig_v: f64,
    pub passed: bool,
}

/// Largest number of sampled elements before sampling switches from the
/// full product over blocks to one block at a time.
pub const ELEMENT_SAMPLE_CAP: usize = 64;

/// Checks `A_c ≻ 0` and `V ≺ 0` at a KKT point for the deterministic
/// element of `∂_BΠ_K(μ* − c·g(x*))` and its kink alternatives.
pub fn check_assumptions<P: Program + ?Sized>(
    p: &P,
    x: &[f64],
    lambda: &[f64],
    mu: &[f64],
    c: f64,
) -> Result<AssumptionReport> {
    let kkt = kkt_residual(p, x, lambda, mu)?;
    if kkt.total > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "assumption check needs a KKT point (residual {:e})",
            kkt.total
        )));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("penalty c must be positive, got {c}")));
    }
    let z = axpy(mu, -c, &p.g(x));
    let (lam_c, mu_c) = multiplier_images(p, c, x, lambda, mu)?;
    let mut elements = Vec::new();
    for w in p.cone().bsubdiff_sample(&z, ELEMENT_SAMPLE_CAP)? {
        let a = build_ac(p, c, x, &lam_c, &mu_c, &w)?;
        let min_eig_a = eig_sym(&a)?.eigenvalues.last().copied().unwrap_or(f64::INFINITY);
        let max_eig_v = match v_from_ac(p, c, x, &a, &w) {
            Ok(v) => Some(v.max_eigenvalue()?),
            Err(Error::Linalg(LinalgError::NotPositiveDefinite { .. })) => None,
            Err(e) => return Err(e),
        };
        elements.push(ElementCheck { min_eig_a, max_eig_v });
    }
    let min_eig_a = elements.iter().map(|e| e.min_eig_a).fold(f64::INFINITY, f64::min);
    let max_eig_v = elements
        .iter()
        .map(|e| e.max_eig_v.unwrap_or(f64::INFINITY))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(AssumptionReport {
        c,
        passed: min_eig_a > 0.0 && max_eig_v < 0.0,
        elements,
        min_eig_a,
        max_eig_v,
    })
}

/// `‖y − y*‖`
pub fn dual_error(y: &[f64], y_star: &[f64]) -> f64 {
    norm(&crate::linalg::sub(y, y_star))
}
