//! Uniform sampling grids for time- and frequency-domain series.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("time grid needs t_end > t_start (got {t_start} .. {t_end})")]
    EmptyInterval { t_start: f64, t_end: f64 },
    #[error("time grid needs at least 2 samples (got {0})")]
    TooFewSamples(usize),
    #[error("frequency grid needs omega_max > 0 (got {0})")]
    NonPositiveOmegaMax(f64),
    #[error("frequency grid needs a positive even sample count (got {0})")]
    OddSampleCount(usize),
}

/// Uniform grid on `[t_start, t_end]`, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_samples: usize) -> Result<Self, GridError> {
        if !(t_end > t_start) {
            return Err(GridError::EmptyInterval { t_start, t_end });
        }
        if n_samples < 2 {
            return Err(GridError::TooFewSamples(n_samples));
        }
        Ok(Self { t_start, t_end, n_samples })
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_samples - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|i| self.time(i)).collect()
    }

    pub fn contains(&self, t: f64) -> bool {
        let slack = 1e-12 * (1.0 + self.t_end.abs() + self.t_start.abs());
        t >= self.t_start - slack && t <= self.t_end + slack
    }
}

/// Symmetric uniform frequency grid `omega in [-omega_max, omega_max)` with an
/// even number of nodes; the node at -omega_max has no positive partner and a
/// node sits exactly at omega = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyGrid {
    pub omega_max: f64,
    pub n_samples: usize,
}

impl FrequencyGrid {
    pub fn new(omega_max: f64, n_samples: usize) -> Result<Self, GridError> {
        if !(omega_max > 0.0) {
            return Err(GridError::NonPositiveOmegaMax(omega_max));
        }
        if n_samples < 2 || n_samples % 2 != 0 {
            return Err(GridError::OddSampleCount(n_samples));
        }
        Ok(Self { omega_max, n_samples })
    }

    pub fn d_omega(&self) -> f64 {
        2.0 * self.omega_max / self.n_samples as f64
    }

    pub fn omega(&self, k: usize) -> f64 {
        (k as f64 - self.n_samples as f64 / 2.0) * self.d_omega()
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n_samples).map(|k| self.omega(k)).collect()
    }

    /// Index holding `-omega(k)`; index 0 (the lone `-omega_max` node) maps to
    /// itself.
    pub fn negation_index(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            self.n_samples - k
        }
    }

    /// Step of the implied discrete-transform time grid.
    pub fn time_step(&self) -> f64 {
        PI / self.omega_max
    }

    /// Period of the implied discrete-transform time grid.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.d_omega()
    }

    /// Time represented by transform index `m`: `m * dt` on the first half,
    /// `m * dt - period` (negative times) on the second.
    pub fn fold_time(&self, m: usize) -> f64 {
        let t = m as f64 * self.time_step();
        if m <= self.n_samples / 2 {
            t
        } else {
            t - self.period()
        }
    }
}

pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (end - start) / (n - 1) as f64;
    (0..n).map(|i| start + i as f64 * step).collect()
}
