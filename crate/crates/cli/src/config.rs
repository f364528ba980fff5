use clap::{Args, ValueEnum};
use serde::Deserialize;
use somm::diagnostics::RateWindow;
use somm::multipliers::{Method, SolveOptions};
use somm::program::{builtin, builtin_names, Instance, ProblemConfig};
use std::fmt;
use std::path::{Path, PathBuf};

/// Failure classes of a command, mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Output(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

pub fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    First,
    Second,
    Compare,
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// `--config` file and then to the defaults.
#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// Built-in problem name or path to a JSON problem file.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// Penalty parameter.
    #[arg(long)]
    pub c: Option<f64>,
    /// Starting multipliers `λ₀,μ₀` as a comma-separated list.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    pub y0: Option<Vec<f64>>,
    #[arg(long)]
    pub outer_tol: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub inner_tol: Option<f64>,
    #[arg(long)]
    pub inner_max_iter: Option<usize>,
    /// Lower bound of the error window used for rate estimates.
    #[arg(long)]
    pub rate_lo: Option<f64>,
    /// Upper bound of the error window used for rate estimates.
    #[arg(long)]
    pub rate_hi: Option<f64>,
    /// Track the distance to the problem's reference multipliers.
    #[arg(long)]
    pub reference: bool,
    /// CSV history output.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// JSON summary output.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// `(k, log10 eta)` rows output.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// The `--config` file: the same settings as the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub method: Option<MethodChoice>,
    pub c: Option<f64>,
    pub y0: Option<Vec<f64>>,
    pub outer_tol: Option<f64>,
    pub max_outer: Option<usize>,
    pub inner_tol: Option<f64>,
    pub inner_max_iter: Option<usize>,
    pub rate_lo: Option<f64>,
    pub rate_hi: Option<f64>,
    #[serde(default)]
    pub reference: bool,
    pub report: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub plot_data: Option<PathBuf>,
}

pub struct Resolved {
    pub instance: Instance,
    pub method: MethodChoice,
    pub y0: Vec<f64>,
    pub opts: SolveOptions,
    pub reference: bool,
    pub report: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub plot_data: Option<PathBuf>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

pub fn load_problem(spec: &str) -> Result<Instance, CliError> {
    if builtin_names().iter().any(|n| n == spec) {
        return builtin(spec).map_err(config_err);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(config_err(format!(
            "`{spec}` is neither a built-in ({}) nor a file",
            builtin_names().join(", ")
        )));
    }
    read_json::<ProblemConfig>(path)?.into_instance().map_err(config_err)
}

impl RunArgs {
    pub fn resolve(self, default_method: MethodChoice) -> Result<Resolved, CliError> {
        let file: RunConfig = match &self.config {
            Some(p) => read_json(p)?,
            None => RunConfig::default(),
        };
        let problem = self
            .problem
            .or(file.problem)
            .ok_or_else(|| config_err("no problem given (use --problem)"))?;
        let instance = load_problem(&problem)?;
        let p = instance.program.as_ref();

        let y0 = self.y0.or(file.y0).unwrap_or_else(|| instance.y0.clone());
        if y0.len() != p.dual_dim() {
            return Err(config_err(format!(
                "y0 has {} entries, problem `{}` needs {}",
                y0.len(),
                instance.name,
                p.dual_dim()
            )));
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(config_err("y0 must be finite"));
        }
        let method = self.method.or(file.method).unwrap_or(default_method);
        let mut opts = SolveOptions::with_method(match method {
            MethodChoice::First => Method::First,
            _ => Method::Second,
        });
        opts.c = self.c.or(file.c).unwrap_or(opts.c);
        opts.outer_tol = self.outer_tol.or(file.outer_tol).unwrap_or(opts.outer_tol);
        opts.max_outer = self.max_outer.or(file.max_outer).unwrap_or(opts.max_outer);
        opts.inner.tol = self.inner_tol.or(file.inner_tol).unwrap_or(opts.inner.tol);
        opts.inner.max_iter = self
            .inner_max_iter
            .or(file.inner_max_iter)
            .unwrap_or(opts.inner.max_iter);
        opts.rate_window = RateWindow {
            lo: self.rate_lo.or(file.rate_lo).unwrap_or(opts.rate_window.lo),
            hi: self.rate_hi.or(file.rate_hi).unwrap_or(opts.rate_window.hi),
        };
        for (name, v) in [
            ("c", opts.c),
            ("outer-tol", opts.outer_tol),
            ("inner-tol", opts.inner.tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(format!("{name} must be positive, got {v}")));
            }
        }
        opts.rate_window.validate().map_err(config_err)?;

        let reference = self.reference || file.reference;
        if reference && instance.reference.is_none() {
            return Err(config_err(format!(
                "problem `{}` has no reference solution",
                instance.name
            )));
        }
        Ok(Resolved {
            instance,
            method,
            y0,
            opts,
            reference,
            report: self.report.or(file.report),
            json: self.json.or(file.json),
            plot_data: self.plot_data.or(file.plot_data),
        })
    }
}
