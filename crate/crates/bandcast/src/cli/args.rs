//! Flag definitions and three-layer parameter resolution:
//! command-line flags override the JSON config file, which overrides
//! defaults. Bandwidth and half-order have no defaults and must come from
//! one of the two explicit layers.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use super::CliError;
use crate::signal_model::FitConfig;

#[derive(Debug, Parser)]
#[command(
    name = "bandcast",
    version,
    about = "Band-limited least-squares smoothing and forecasting for integer-time series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic signal CSV (sum of sinusoids plus seeded noise).
    Synth(SynthArgs),
    /// Fit the band-limited model to a window and emit reconstruction and
    /// forecast rows.
    Fit(FitArgs),
    /// Replay a CSV stream through the causal filter.
    Filter(FilterArgs),
    /// Gram-matrix conditioning diagnostics.
    Eigs(EigsArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct CommonOpts {
    /// Bandwidth in radians per sample, strictly inside (0, pi).
    #[arg(long)]
    pub omega: Option<f64>,
    /// Series half-order N; the model has 2N+1 coefficients.
    #[arg(long = "half-order")]
    pub half_order: Option<usize>,
    /// Tikhonov regularization weight (default 1e-3).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// First time of the window.
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<i64>,
    /// Last time of the window.
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<i64>,
    /// Forecast horizon (default 2N+1).
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Input CSV path.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Summary JSON path.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// JSON config file supplying any of the other parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Relative-residual stop for the iterative fallback solver.
    #[arg(long = "solver-tol")]
    pub solver_tol: Option<f64>,
    /// Iteration cap for the iterative fallback solver.
    #[arg(long = "solver-max-iter")]
    pub solver_max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// RNG seed; a fixed seed reproduces the file exactly.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sinusoid spec "amplitude,frequency,phase"; repeatable.
    #[arg(long = "sine", value_name = "A,F,P", allow_hyphen_values = true)]
    pub sines: Vec<String>,
    /// Uniform noise amplitude (samples get noise drawn from [-a, a]).
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Buffering mode.
    #[arg(long, value_parser = ["expanding", "sliding"])]
    pub mode: Option<String>,
    /// Buffer width for sliding mode.
    #[arg(long)]
    pub width: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EigsArgs {
    #[command(flatten)]
    pub common: CommonOpts,
}

/// JSON config file contents; every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub omega: Option<f64>,
    pub half_order: Option<usize>,
    pub epsilon: Option<f64>,
    pub from: Option<i64>,
    pub to: Option<i64>,
    pub horizon: Option<usize>,
    pub mode: Option<String>,
    pub width: Option<usize>,
    pub seed: Option<u64>,
    pub noise: Option<f64>,
    pub sines: Option<Vec<SineSpec>>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub solver_tol: Option<f64>,
    pub solver_max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct SineSpec {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Fully resolved parameters shared by fit/filter/eigs.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub fit_config: FitConfig,
    pub from: Option<i64>,
    pub to: Option<i64>,
    pub horizon: usize,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

pub fn resolve_common(opts: &CommonOpts, file: &FileConfig) -> Result<Resolved, CliError> {
    let omega = opts
        .omega
        .or(file.omega)
        .ok_or_else(|| CliError::Config("missing required parameter: omega".into()))?;
    let half_order = opts
        .half_order
        .or(file.half_order)
        .ok_or_else(|| CliError::Config("missing required parameter: half-order".into()))?;
    let epsilon = opts
        .epsilon
        .or(file.epsilon)
        .unwrap_or(FitConfig::DEFAULT_EPSILON);

    let mut fit_config = FitConfig::new(omega, half_order)
        .and_then(|c| c.with_epsilon(epsilon))
        .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(tol) = opts.solver_tol.or(file.solver_tol) {
        fit_config = fit_config
            .with_solver_tol(tol)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(cap) = opts.solver_max_iter.or(file.solver_max_iter) {
        fit_config = fit_config
            .with_solver_max_iter(cap)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }

    let horizon = opts
        .horizon
        .or(file.horizon)
        .unwrap_or(fit_config.coefficient_count());
    if horizon == 0 {
        return Err(CliError::Config("horizon must be at least 1".into()));
    }
    let resolved = Resolved {
        horizon,
        fit_config,
        from: opts.from.or(file.from),
        to: opts.to.or(file.to),
        input: opts.input.clone().or_else(|| file.input.clone()),
        output: opts.output.clone().or_else(|| file.output.clone()),
        summary: opts.summary.clone().or_else(|| file.summary.clone()),
    };
    ensure_distinct_paths(&[
        ("input", resolved.input.as_deref()),
        ("output", resolved.output.as_deref()),
        ("summary", resolved.summary.as_deref()),
    ])?;
    Ok(resolved)
}

pub fn ensure_distinct_paths(paths: &[(&str, Option<&Path>)]) -> Result<(), CliError> {
    for (i, (name_a, a)) in paths.iter().enumerate() {
        for (name_b, b) in paths.iter().skip(i + 1) {
            if let (Some(a), Some(b)) = (a, b) {
                if a == b {
                    return Err(CliError::Config(format!(
                        "{name_a} and {name_b} must be distinct paths, both are {}",
                        a.display()
                    )));
                }
            }
        }
    }
    Ok(())
}

pub fn parse_sine_flag(raw: &str) -> Result<SineSpec, CliError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!(
            "sine spec must be \"amplitude,frequency,phase\", got {raw:?}"
        )));
    }
    let mut nums = [0.0f64; 3];
    for (slot, part) in nums.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad number {part:?} in sine spec {raw:?}")))?;
    }
    Ok(SineSpec {
        amplitude: nums[0],
        frequency: nums[1],
        phase: nums[2],
    })
}
