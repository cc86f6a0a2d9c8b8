//! Command implementations behind the CLI surface. Kept as library code so
//! integration tests can drive them without spawning processes.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::args::{
    load_file_config, parse_sine_flag, resolve_common, Cli, Command, EigsArgs, FilterArgs, FitArgs,
    Resolved, SineSpec, SynthArgs,
};
use super::csvio::{fmt_f64, read_series, write_json, Series, Sink};
use super::CliError;
use crate::approximator::{fit, forecast};
use crate::signal_model::{Signal, TimeWindow};
use crate::sinc_ops::gram;
use crate::solver::{condition_estimate, regularize, symmetric_eigenvalues};
use crate::streaming_filter::{run_offline, FilterMode, FilterState};

/// Full spectra are emitted only up to this dimension (2N + 1).
const EIGS_FULL_SPECTRUM_LIMIT: usize = 512;

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(args) => cmd_synth(&args),
        Command::Fit(args) => cmd_fit(&args),
        Command::Filter(args) => cmd_filter(&args),
        Command::Eigs(args) => cmd_eigs(&args),
    }
}

fn window_from(resolved: &Resolved) -> Result<(i64, i64), CliError> {
    match (resolved.from, resolved.to) {
        (Some(q), Some(s)) => Ok((q, s)),
        _ => Err(CliError::Config(
            "missing required parameters: from and to".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// synth

pub fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let file = load_file_config(args.common.config.as_deref())?;
    let (q, s) = match (args.common.from.or(file.from), args.common.to.or(file.to)) {
        (Some(q), Some(s)) => (q, s),
        _ => {
            return Err(CliError::Config(
                "missing required parameters: from and to".into(),
            ))
        }
    };
    let window = TimeWindow::new(q, s)?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let noise = args.noise.or(file.noise).unwrap_or(0.0);
    if !noise.is_finite() || noise < 0.0 {
        return Err(CliError::Config(format!(
            "noise amplitude must be nonnegative, got {noise}"
        )));
    }
    let mut sines: Vec<SineSpec> = Vec::new();
    for raw in &args.sines {
        sines.push(parse_sine_flag(raw)?);
    }
    if sines.is_empty() {
        if let Some(from_file) = &file.sines {
            sines = from_file.clone();
        }
    }

    let output = args.common.output.clone().or(file.output);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sink = Sink::create(output.as_deref())?;
    sink.write_line("t,value")?;
    for t in window.iter() {
        let tf = t as f64;
        let mut v = 0.0;
        for sine in &sines {
            v += sine.amplitude * (sine.frequency * tf + sine.phase).cos();
        }
        v += noise * rng.gen_range(-1.0..1.0);
        sink.write_line(&format!("{t},{}", fmt_f64(v)))?;
    }
    sink.finish()
}

// ---------------------------------------------------------------------------
// fit

#[derive(Serialize)]
struct WindowJson {
    q: i64,
    s: i64,
}

#[derive(Serialize)]
struct SolverJson {
    method: &'static str,
    iterations: usize,
    achieved_residual: f64,
    condition_estimate: f64,
    lambda_max_est: f64,
    lambda_min_est: f64,
}

#[derive(Serialize)]
struct TimingJson {
    fit_ms: f64,
    total_ms: f64,
}

#[derive(Serialize)]
struct FitSummary {
    omega: f64,
    half_order: usize,
    epsilon: f64,
    window: WindowJson,
    horizon: usize,
    unique_regime: bool,
    residual_l2: f64,
    normal_residual: f64,
    coefficient_norm: f64,
    solver: SolverJson,
    timing: TimingJson,
}

fn sliced_signal(series: &Series, resolved: &Resolved) -> Result<Signal, CliError> {
    let q = resolved.from.unwrap_or(series.first_t);
    let s = resolved.to.unwrap_or(series.last_t());
    if q > s {
        return Err(CliError::Config(format!(
            "empty window: from {q} is after to {s}"
        )));
    }
    if q < series.first_t || s > series.last_t() {
        // Distinct message from the parse errors: the file is fine, the
        // requested slice is not.
        return Err(CliError::Config(format!(
            "window {q}..{s} is not covered by the input ({}..{})",
            series.first_t,
            series.last_t()
        )));
    }
    let window = TimeWindow::new(q, s)?;
    let values: Vec<f64> = window
        .iter()
        .map(|t| series.value_at(t).expect("coverage checked"))
        .collect();
    Ok(Signal::new(window, values)?)
}

pub fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let file = load_file_config(args.common.config.as_deref())?;
    let resolved = resolve_common(&args.common, &file)?;
    let input = resolved
        .input
        .clone()
        .ok_or_else(|| CliError::Config("missing required parameter: input".into()))?;

    let series = read_series(&input)?;
    let signal = sliced_signal(&series, &resolved)?;

    let fit_started = Instant::now();
    let result = fit(&signal, &resolved.fit_config)?;
    let ahead = forecast(&result, resolved.horizon);
    let fit_ms = fit_started.elapsed().as_secs_f64() * 1e3;

    let window = signal.window();
    let mut sink = Sink::create(resolved.output.as_deref())?;
    sink.write_line("t,x,xhat,is_forecast")?;
    for t in window.iter() {
        let x = signal.value_at(t).expect("window value");
        let xhat = result.value_at(t);
        sink.write_line(&format!("{t},{},{},0", fmt_f64(x), fmt_f64(xhat)))?;
    }
    for (i, xhat) in ahead.iter().enumerate() {
        let t = window.last() + 1 + i as i64;
        // Forecast rows keep the observed value when the input extends past
        // the fitted window, so forecasts can be compared against truth.
        let x = series.value_at(t).map(fmt_f64).unwrap_or_default();
        sink.write_line(&format!("{t},{x},{},1", fmt_f64(*xhat)))?;
    }
    sink.finish()?;

    if let Some(summary_path) = &resolved.summary {
        let info = result.solver_info();
        let summary = FitSummary {
            omega: resolved.fit_config.omega(),
            half_order: resolved.fit_config.half_order(),
            epsilon: resolved.fit_config.epsilon(),
            window: WindowJson {
                q: window.first(),
                s: window.last(),
            },
            horizon: resolved.horizon,
            unique_regime: result.unique_regime(),
            residual_l2: result.residual_l2(),
            normal_residual: result.normal_residual(),
            coefficient_norm: crate::linalg::norm2(result.model().coefficients()),
            solver: SolverJson {
                method: info.method.name(),
                iterations: info.iterations,
                achieved_residual: info.achieved_residual,
                condition_estimate: info.condition_estimate,
                lambda_max_est: info.lambda_max_est,
                lambda_min_est: info.lambda_min_est,
            },
            timing: TimingJson {
                fit_ms,
                total_ms: started.elapsed().as_secs_f64() * 1e3,
            },
        };
        write_json(summary_path, &summary)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// filter

pub fn cmd_filter(args: &FilterArgs) -> Result<(), CliError> {
    let file = load_file_config(args.common.config.as_deref())?;
    let resolved = resolve_common(&args.common, &file)?;
    let input = resolved
        .input
        .clone()
        .ok_or_else(|| CliError::Config("missing required parameter: input".into()))?;

    let mode_name = args
        .mode
        .clone()
        .or(file.mode)
        .unwrap_or_else(|| "expanding".to_string());
    let mode = match mode_name.as_str() {
        "expanding" => FilterMode::Expanding,
        "sliding" => {
            let width = args
                .width
                .or(file.width)
                .ok_or_else(|| CliError::Config("sliding mode requires a width".into()))?;
            if width == 0 {
                return Err(CliError::Config("width must be at least 1".into()));
            }
            FilterMode::Sliding { width }
        }
        other => {
            return Err(CliError::Config(format!(
                "mode must be expanding or sliding, got {other:?}"
            )))
        }
    };

    let series = read_series(&input)?;
    let signal = sliced_signal(&series, &resolved)?;
    let template = FilterState::new(mode, resolved.fit_config, resolved.horizon);
    let outputs = run_offline(&signal, &template)?;

    let mut sink = Sink::create(resolved.output.as_deref())?;
    let mut header = String::from("t,x,smoothed");
    for i in 1..=resolved.horizon {
        header.push_str(&format!(",forecast_{i}"));
    }
    header.push_str(",unique_regime");
    sink.write_line(&header)?;
    for (out, x) in outputs.iter().zip(signal.values()) {
        let mut row = format!(
            "{},{},{}",
            out.t_now,
            fmt_f64(*x),
            fmt_f64(out.smoothed_now)
        );
        for f in &out.forecasts {
            row.push(',');
            row.push_str(&fmt_f64(*f));
        }
        row.push_str(if out.unique_regime { ",1" } else { ",0" });
        sink.write_line(&row)?;
    }
    sink.finish()
}

// ---------------------------------------------------------------------------
// eigs

#[derive(Serialize)]
struct EigsSummary {
    omega: f64,
    half_order: usize,
    epsilon: f64,
    window: WindowJson,
    dim: usize,
    lambda_max_est: f64,
    lambda_min_est: f64,
    condition_estimate: f64,
    ratio_min_max: f64,
    /// Deflated power-iteration estimates, descending; empty above the
    /// dimension limit.
    eigenvalues: Vec<f64>,
}

pub fn cmd_eigs(args: &EigsArgs) -> Result<(), CliError> {
    let file = load_file_config(args.common.config.as_deref())?;
    let resolved = resolve_common(&args.common, &file)?;
    let (q, s) = window_from(&resolved)?;
    let window = TimeWindow::new(q, s)?;
    let cfg = &resolved.fit_config;
    let r = gram(window, cfg.omega(), cfg.half_order());
    let m = regularize(&r, cfg.epsilon());

    let (lambda_max_est, lambda_min_est) = condition_estimate(&m, 300);
    let eigenvalues = if m.rows() <= EIGS_FULL_SPECTRUM_LIMIT {
        symmetric_eigenvalues(&m, 400)
    } else {
        Vec::new()
    };
    let (top, bottom) = match (eigenvalues.first(), eigenvalues.last()) {
        (Some(&top), Some(&bottom)) => (top, bottom),
        _ => (lambda_max_est, lambda_min_est),
    };
    let ratio_min_max = if top > 0.0 {
        (bottom.max(0.0)) / top
    } else {
        0.0
    };

    let summary = EigsSummary {
        omega: cfg.omega(),
        half_order: cfg.half_order(),
        epsilon: cfg.epsilon(),
        window: WindowJson { q, s },
        dim: m.rows(),
        lambda_max_est,
        lambda_min_est,
        condition_estimate: crate::solver::condition_ratio(lambda_max_est, lambda_min_est),
        ratio_min_max,
        eigenvalues,
    };
    match &resolved.output {
        Some(path) => write_json(path, &summary),
        None => {
            let text = serde_json::to_string_pretty(&summary)
                .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
            println!("{text}");
            Ok(())
        }
    }
}
