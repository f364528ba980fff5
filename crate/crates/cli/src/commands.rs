use crate::config::{config_err, CliError, MethodChoice, Resolved};
use serde::Serialize;
use somm::diagnostics::{check_licq, check_nondegeneracy, check_ssosc, RankReport, SsoscReport};
use somm::multipliers::{check_assumptions, solve, AssumptionReport, Method, SolveOptions, SolveReport, Status};
use somm::par::{self, Execution};
use somm::program::{check_derivatives, DerivativeReport, Reference};
use somm::report::{compare_csv, error_series, history_csv, plot_data, Summary};
use std::path::Path;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_INNER_FAILURE: i32 = 4;

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn exit_code(status: Status) -> i32 {
    match status {
        Status::Converged => EXIT_OK,
        Status::MaxOuter => EXIT_MAX_ITER,
        Status::InnerFailure => EXIT_INNER_FAILURE,
    }
}

fn run(r: &Resolved, opts: &SolveOptions, reference: bool) -> Result<SolveReport, CliError> {
    let refsol = if reference { r.instance.reference.as_ref() } else { None };
    solve(r.instance.program.as_ref(), &r.y0, refsol, opts).map_err(config_err)
}

pub fn cmd_solve(r: Resolved) -> Result<i32, CliError> {
    if r.method == MethodChoice::Compare {
        return cmd_compare(r);
    }
    let report = run(&r, &r.opts, r.reference)?;
    if let Some(msg) = &report.failure {
        eprintln!("{msg}");
    }
    let summary = Summary::new(&r.instance.name, &report);
    if let Some(p) = &r.report {
        write(p, &history_csv(&report))?;
    }
    if let Some(p) = &r.json {
        write(p, &to_json(&summary))?;
    }
    if let Some(p) = &r.plot_data {
        let series = error_series(&report);
        write(p, &plot_data(&[(&report.method.to_string(), &series)]))?;
    }
    print!("{}", to_json(&summary));
    Ok(exit_code(report.status))
}

#[derive(Serialize)]
struct CompareSummary {
    first: Summary,
    second: Summary,
}

/// Runs both methods from the same start. The error columns are `ηᵏ` when
/// the problem has a reference solution and KKT totals otherwise.
pub fn cmd_compare(r: Resolved) -> Result<i32, CliError> {
    let track = r.instance.reference.is_some();
    let first_opts = SolveOptions {
        method: Method::First,
        ..r.opts.clone()
    };
    let second_opts = SolveOptions {
        method: Method::Second,
        ..r.opts.clone()
    };
    let (first, second) = par::join(
        Execution::Parallel,
        || run(&r, &first_opts, track),
        || run(&r, &second_opts, track),
    );
    let (first, second) = (first?, second?);
    let summary = CompareSummary {
        first: Summary::new(&r.instance.name, &first),
        second: Summary::new(&r.instance.name, &second),
    };
    if let Some(p) = &r.report {
        write(p, &compare_csv(&first, &second))?;
    }
    if let Some(p) = &r.json {
        write(p, &to_json(&summary))?;
    }
    if let Some(p) = &r.plot_data {
        let a = error_series(&first);
        let b = error_series(&second);
        write(p, &plot_data(&[("first", &a), ("second", &b)]))?;
    }
    print!("{}", to_json(&summary));
    Ok(exit_code(first.status).max(exit_code(second.status)))
}

#[derive(Serialize)]
struct CheckReport {
    problem: String,
    /// Where the checked point came from: `reference` or `solve`.
    point_source: &'static str,
    x: Vec<f64>,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    derivatives: DerivativeReport,
    /// Only defined for orthant-type cones.
    licq: Option<RankReport>,
    nondegeneracy: RankReport,
    ssosc: SsoscReport,
    assumptions: AssumptionReport,
    passed: bool,
}

pub fn cmd_check(r: Resolved) -> Result<i32, CliError> {
    let p = r.instance.program.as_ref();
    let (point, source) = match &r.instance.reference {
        Some(refsol) => (refsol.clone(), "reference"),
        None => {
            let report = run(
                &r,
                &SolveOptions {
                    method: Method::Second,
                    ..r.opts.clone()
                },
                false,
            )?;
            if !report.converged() {
                eprintln!("solve did not converge; cannot locate a KKT point to check");
                return Ok(exit_code(report.status));
            }
            let last = report.last();
            (
                Reference {
                    x: last.x.clone(),
                    lambda: last.lambda.clone(),
                    mu: last.mu.clone(),
                },
                "solve",
            )
        }
    };
    let derivatives = check_derivatives(p, &point.x, 1e-5).map_err(config_err)?;
    let licq = if p.cone().is_polyhedral() {
        Some(check_licq(p, &point.x).map_err(config_err)?)
    } else {
        None
    };
    let nondegeneracy = check_nondegeneracy(p, &point.x).map_err(config_err)?;
    let ssosc = check_ssosc(p, &point.x, &point.lambda, &point.mu).map_err(config_err)?;
    let assumptions = check_assumptions(p, &point.x, &point.lambda, &point.mu, r.opts.c).map_err(config_err)?;
    let passed = derivatives.passed
        && licq.as_ref().is_none_or(|l| l.holds)
        && nondegeneracy.holds
        && ssosc.holds
        && assumptions.passed;
    let report = CheckReport {
        problem: r.instance.name.clone(),
        point_source: source,
        x: point.x,
        lambda: point.lambda,
        mu: point.mu,
        derivatives,
        licq,
        nondegeneracy,
        ssosc,
        assumptions,
        passed,
    };
    let text = to_json(&report);
    if let Some(path) = &r.json {
        write(path, &text)?;
    }
    print!("{text}");
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}
