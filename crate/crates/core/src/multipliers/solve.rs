use super::{dual_error, first_order_step, second_order_step, DualState, Method};
use crate::aug_lagrangian::InnerOptions;
use crate::diagnostics::{estimate_rate_in, RateEstimate, RateWindow};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::program::{kkt_residual, KktResidual, Program, Reference};
use serde::Serialize;

/// With a reference solution, a KKT-converged run keeps iterating while
/// `ηᵏ` still shrinks by more than this factor per step.
const SUPERLINEAR_DROP: f64 = 0.1;

/// Plotting floor for `ηᵏ`.
pub const ETA_CLAMP: f64 = 1e-50;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    pub c: f64,
    /// Stop once the KKT residual total is at most this.
    pub outer_tol: f64,
    pub max_outer: usize,
    pub inner: InnerOptions,
    /// With a reference solution, also stop once `ηᵏ` is at most this.
    /// Such runs also keep going past `outer_tol` while `ηᵏ` still drops by
    /// more than a factor of ten per iteration.
    pub eta_tol: f64,
    pub rate_window: RateWindow,
    /// Primal start for the first inner solve; zeros when `None`.
    pub x_start: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::Second,
            c: 1.0,
            outer_tol: 1e-12,
            max_outer: 100,
            inner: InnerOptions::default(),
            eta_tol: 1e-20,
            rate_window: RateWindow::default(),
            x_start: None,
        }
    }
}

impl SolveOptions {
    pub fn with_method(method: Method) -> Self {
        SolveOptions {
            method,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("c", self.c)?;
        positive("outer tolerance", self.outer_tol)?;
        positive("inner tolerance", self.inner.tol)?;
        if self.eta_tol < 0.0 || self.eta_tol.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "eta tolerance must be nonnegative, got {}",
                self.eta_tol
            )));
        }
        self.rate_window.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxOuter,
    InnerFailure,
}

/// One row of the outer history. Row `k` pairs `(λᵏ, μᵏ)` with the inner
/// minimizer `xᵏ` that produced it; row 0 holds the starting point.
#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub x: Vec<f64>,
    /// `‖(λᵏ, μᵏ) − (λ*, μ*)‖` when a reference solution is known.
    pub eta: Option<f64>,
    pub kkt: KktResidual,
    /// `‖yᵏ − yᵏ⁻¹‖`
    pub step_norm: f64,
    pub fallback: bool,
    pub inner_iterations: usize,
}

/// Which error sequence the rate estimate was computed from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateSource {
    /// Distance to the reference multipliers.
    Eta,
    /// KKT residual totals, used when no reference is available.
    Kkt,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub method: Method,
    pub c: f64,
    pub status: Status,
    pub history: Vec<IterationRecord>,
    pub rate: Option<RateEstimate>,
    pub rate_source: RateSource,
    pub fallback_count: usize,
    /// Inner-solver failure message, if any.
    pub failure: Option<String>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn outer_iterations(&self) -> usize {
        self.history.len() - 1
    }

    pub fn last(&self) -> &IterationRecord {
        self.history.last().expect("history is never empty")
    }

    pub fn kkt_total(&self) -> f64 {
        self.last().kkt.total
    }

    pub fn etas(&self) -> Option<Vec<f64>> {
        self.history.iter().map(|r| r.eta).collect()
    }

    /// `(k, log₁₀ max(ηᵏ, 10⁻⁵⁰))` rows.
    pub fn log_eta_series(&self) -> Option<Vec<(usize, f64)>> {
        Some(
            self.etas()?
                .into_iter()
                .enumerate()
                .map(|(k, e)| (k, e.max(ETA_CLAMP).log10()))
                .collect(),
        )
    }
}

/// Runs the outer loop of `opts.method` from `y0`.
///
/// Invalid inputs are errors; inner-solver failure ends the run with
/// [`Status::InnerFailure`] and the history gathered so far.
pub fn solve<P: Program + ?Sized>(
    p: &P,
    y0: &[f64],
    reference: Option<&Reference>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    if let Some(r) = reference {
        r.validate(p)?;
    }
    let x_start = opts.x_start.clone().unwrap_or_else(|| vec![0.0; p.n()]);
    let mut state = DualState::new(p, opts.c, y0, &x_start)?;
    let y_star = reference.map(Reference::y);
    let eta_of = |s: &DualState| y_star.as_ref().map(|ys| dual_error(&s.y(), ys));
    let mut history = vec![IterationRecord {
        k: 0,
        lambda: state.lambda.clone(),
        mu: state.mu.clone(),
        x: state.x.clone(),
        eta: eta_of(&state),
        kkt: kkt_residual(p, &state.x, &state.lambda, &state.mu)?,
        step_norm: 0.0,
        fallback: false,
        inner_iterations: 0,
    }];
    let mut state_eta = history[0].eta;
    let mut status = Status::MaxOuter;
    let mut failure = None;

    for k in 1..=opts.max_outer {
        let step = match opts.method {
            Method::First => first_order_step(p, &state, opts.inner),
            Method::Second => second_order_step(p, &state, opts.inner),
        };
        let outcome = match step {
            Ok(o) => o,
            Err(e @ Error::InnerFailure { .. }) => {
                status = Status::InnerFailure;
                failure = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        let next = outcome.state;
        let record = IterationRecord {
            k,
            lambda: next.lambda.clone(),
            mu: next.mu.clone(),
            x: next.x.clone(),
            eta: eta_of(&next),
            kkt: kkt_residual(p, &next.x, &next.lambda, &next.mu)?,
            step_norm: dual_error(&next.y(), &state.y()),
            fallback: outcome.fallback,
            inner_iterations: outcome.inner.iterations,
        };
        let still_superlinear = match (record.eta, state_eta) {
            (Some(e), Some(prev)) => e < SUPERLINEAR_DROP * prev,
            _ => false,
        };
        let done =
            record.eta.is_some_and(|e| e <= opts.eta_tol) || (record.kkt.total <= opts.outer_tol && !still_superlinear);
        state_eta = record.eta;
        history.push(record);
        state = next;
        if done {
            status = Status::Converged;
            break;
        }
    }

    let (errors, rate_source) = match history.iter().map(|r| r.eta).collect::<Option<Vec<_>>>() {
        Some(etas) => (etas, RateSource::Eta),
        None => (history.iter().map(|r| r.kkt.total).collect(), RateSource::Kkt),
    };
    let rate = estimate_rate_in(&errors, opts.rate_window).ok();
    Ok(SolveReport {
        method: opts.method,
        c: opts.c,
        status,
        fallback_count: history.iter().filter(|r| r.fallback).count(),
        history,
        rate,
        rate_source,
        failure,
    })
}

/// Independent solves from several starting multipliers, run concurrently
/// when `exec` allows it. Results keep the order of `starts`.
pub fn solve_batch<P: Program + ?Sized>(
    exec: Execution,
    p: &P,
    starts: &[Vec<f64>],
    reference: Option<&Reference>,
    opts: &SolveOptions,
) -> Vec<Result<SolveReport>> {
    par::map(exec, starts, |y0| solve(p, y0, reference, opts))
}
