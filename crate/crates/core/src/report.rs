//! Text outputs of a solve: CSV histories, JSON summaries and plot data.

use crate::multipliers::{Method, SolveReport, ETA_CLAMP};
use serde::Serialize;
use std::fmt::Write as _;

pub const HISTORY_HEADER: &str = "k,eta,kkt_stat,kkt_feas_eq,kkt_feas_cone,kkt_dual,kkt_comp,step_norm,fallback";
pub const COMPARE_HEADER: &str = "k,eta_first,eta_second";

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One row per outer iteration under [`HISTORY_HEADER`]. `eta` is empty
/// without a reference solution.
pub fn history_csv(report: &SolveReport) -> String {
    let mut out = String::new();
    out.push_str(HISTORY_HEADER);
    out.push('\n');
    for r in &report.history {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.k,
            opt(r.eta),
            num(r.kkt.stationarity),
            num(r.kkt.eq_feas),
            num(r.kkt.cone_feas),
            num(r.kkt.dual_feas),
            num(r.kkt.complementarity),
            num(r.step_norm),
            u8::from(r.fallback)
        );
    }
    out
}

/// Error sequence used for comparisons: `ηᵏ` when tracked, else the KKT
/// residual total.
pub fn error_series(report: &SolveReport) -> Vec<f64> {
    report
        .etas()
        .unwrap_or_else(|| report.history.iter().map(|r| r.kkt.total).collect())
}

/// `k,eta_first,eta_second`; the shorter run leaves its column empty.
pub fn compare_csv(first: &SolveReport, second: &SolveReport) -> String {
    let a = error_series(first);
    let b = error_series(second);
    let mut out = String::new();
    out.push_str(COMPARE_HEADER);
    out.push('\n');
    for k in 0..a.len().max(b.len()) {
        let _ = writeln!(out, "{k},{},{}", opt(a.get(k).copied()), opt(b.get(k).copied()));
    }
    out
}

/// `log₁₀ max(e, 10⁻⁵⁰)`
pub fn clamped_log10(e: f64) -> f64 {
    e.max(ETA_CLAMP).log10()
}

/// Whitespace-separated `(k, log10_eta)` rows, one column per run. A run
/// that stopped early repeats its final value so every column spans the
/// same rows.
pub fn plot_data(columns: &[(&str, &[f64])]) -> String {
    let mut out = String::from("# k");
    for (name, _) in columns {
        let _ = write!(out, " log10_eta_{name}");
    }
    out.push('\n');
    let rows = columns.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    for k in 0..rows {
        let _ = write!(out, "{k}");
        for (_, c) in columns {
            let e = c.get(k).or(c.last()).copied().unwrap_or(f64::NAN);
            let _ = write!(out, " {}", clamped_log10(e));
        }
        out.push('\n');
    }
    out
}

/// Stable JSON summary of one solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub problem: String,
    pub method: Method,
    pub c: f64,
    pub converged: bool,
    pub outer_iterations: usize,
    pub kkt_total: f64,
    pub linear_rate: Option<f64>,
    pub order_q: Option<f64>,
    pub fallback_count: usize,
}

impl Summary {
    pub fn new(problem: &str, report: &SolveReport) -> Self {
        Summary {
            problem: problem.to_string(),
            method: report.method,
            c: report.c,
            converged: report.converged(),
            outer_iterations: report.outer_iterations(),
            kkt_total: report.kkt_total(),
            linear_rate: report.rate.map(|r| r.linear_rate),
            order_q: report.rate.map(|r| r.order_q),
            fallback_count: report.fallback_count,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipliers::{solve, SolveOptions};
    use crate::program::builtin;

    fn run(method: Method) -> SolveReport {
        let inst = builtin("nlp_toy").unwrap();
        solve(
            inst.program.as_ref(),
            &inst.y0,
            inst.reference.as_ref(),
            &SolveOptions::with_method(method),
        )
        .unwrap()
    }

    #[test]
    fn history_layout() {
        let rep = run(Method::Second);
        let csv = history_csv(&rep);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], HISTORY_HEADER);
        assert_eq!(lines.len(), rep.history.len() + 1);
        assert!(lines[1].starts_with("0,"));
        assert_eq!(lines[1].split(',').count(), 9);
    }

    #[test]
    fn plot_rows_pad_and_clamp() {
        let txt = plot_data(&[("a", &[1.0, 0.0]), ("b", &[10.0, 1.0, 0.1])]);
        let lines: Vec<&str> = txt.lines().collect();
        assert_eq!(lines[0], "# k log10_eta_a log10_eta_b");
        assert_eq!(lines[2], "1 -50 0");
        assert_eq!(lines[3], "2 -50 -1");
    }

    #[test]
    fn compare_columns() {
        let csv = compare_csv(&run(Method::First), &run(Method::Second));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], COMPARE_HEADER);
        assert!(lines[5].ends_with(','));
    }
}
