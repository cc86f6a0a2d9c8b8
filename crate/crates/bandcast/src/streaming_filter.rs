//! Causal filtering by repeated re-fitting: as each sample arrives the
//! normal equations are rebuilt and solved on the current buffer, emitting
//! the smoothed "now" value and a forecast. The filter is causal but not
//! time invariant — the operator is recomputed at every step.
//!
//! Expanding mode keeps the absolute arrival times, so the final state
//! reproduces a one-shot fit of the whole window. Sliding mode re-anchors
//! the buffer to the fixed window `{-(W-1), ..., 0}` before fitting, which
//! makes the filter shift-equivariant: the same `W` sample values produce
//! identical coefficients no matter when they arrive.

use std::collections::VecDeque;

use crate::approximator::{fit, forecast, FitResult};
use crate::error::{Error, Result};
use crate::signal_model::{FitConfig, Signal, TimeWindow};

/// Buffering policy of the filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    /// Keep every sample since the first push; the window start is fixed.
    Expanding,
    /// Keep only the latest `width` samples.
    Sliding { width: usize },
}

/// One emission of the filter, produced per pushed sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    /// Absolute time of the sample that triggered this output (= current s).
    pub t_now: i64,
    /// Fitted value at the current time, `x_hat(s)`.
    pub smoothed_now: f64,
    /// `x_hat(s+1), ..., x_hat(s+horizon)`.
    pub forecasts: Vec<f64>,
    pub unique_regime: bool,
    pub residual_l2: f64,
}

/// Filter state: single-owner, mutated only through [`FilterState::push`].
/// Distinct streams are independent.
#[derive(Debug, Clone)]
pub struct FilterState {
    mode: FilterMode,
    config: FitConfig,
    horizon: usize,
    buffer: VecDeque<f64>,
    /// Absolute time of the front of the buffer; meaningful when non-empty.
    buffer_start: i64,
    /// Expected next arrival time; `None` before the first push.
    next_time: Option<i64>,
}

impl FilterState {
    pub fn new(mode: FilterMode, config: FitConfig, horizon: usize) -> Self {
        assert!(horizon >= 1, "horizon must be at least 1");
        if let FilterMode::Sliding { width } = mode {
            assert!(width >= 1, "sliding width must be at least 1");
        }
        Self {
            mode,
            config,
            horizon,
            buffer: VecDeque::new(),
            buffer_start: 0,
            next_time: None,
        }
    }

    pub fn mode(&self) -> FilterMode {
        self.mode
    }

    pub fn config(&self) -> &FitConfig {
        &self.config
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    /// Accepts the sample at time `t` (which must be exactly one step after
    /// the previous sample), refits on the current buffer, and emits the
    /// smoothed value plus forecasts. Output at time `t` depends only on
    /// samples with index `<= t`.
    pub fn push(&mut self, t: i64, value: f64) -> Result<FilterOutput> {
        if !value.is_finite() {
            return Err(Error::NonFiniteValue { t });
        }
        if let Some(expected) = self.next_time {
            if t != expected {
                return Err(Error::NonConsecutiveTime { expected, got: t });
            }
        }
        if self.buffer.is_empty() {
            self.buffer_start = t;
        }
        self.buffer.push_back(value);
        if let FilterMode::Sliding { width } = self.mode {
            while self.buffer.len() > width {
                self.buffer.pop_front();
                self.buffer_start += 1;
            }
        }
        self.next_time = Some(t + 1);

        let result = self.refit()?;
        Ok(FilterOutput {
            t_now: t,
            smoothed_now: *result
                .fitted_values()
                .last()
                .expect("buffer is never empty here"),
            forecasts: forecast(&result, self.horizon),
            unique_regime: result.unique_regime(),
            residual_l2: result.residual_l2(),
        })
    }

    fn refit(&self) -> Result<FitResult> {
        let len = self.buffer.len() as i64;
        let window = match self.mode {
            FilterMode::Expanding => {
                TimeWindow::new(self.buffer_start, self.buffer_start + len - 1)?
            }
            // Anchor the end at 0 so the fit depends only on the values.
            FilterMode::Sliding { .. } => TimeWindow::new(1 - len, 0)?,
        };
        let values: Vec<f64> = self.buffer.iter().copied().collect();
        fit(&Signal::new(window, values)?, &self.config)
    }
}

/// Replays a whole signal through a copy of `template`, returning the
/// outputs in time order. Exactly equivalent to pushing each sample.
pub fn run_offline(signal: &Signal, template: &FilterState) -> Result<Vec<FilterOutput>> {
    let mut state = template.clone();
    signal
        .window()
        .iter()
        .zip(signal.values())
        .map(|(t, &x)| state.push(t, x))
        .collect()
}
