//! Adaptive gradient accumulation: converts the masked-sample ratio of each
//! batch into an integer accumulation step count.
//!
//! The raw prediction λ·N_all/(N_all − N_masked) is subjected to three
//! restrictions: the series never decreases, consecutive values differ by at
//! most 1, and values never exceed the configured cap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masking::BatchMaskStats;

/// Scheduler memory: the scale λ, the cap, and the current step count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccumState {
    lambda: f64,
    s_max: u32,
    current: u32,
}

impl AccumState {
    /// Starts at one accumulation step, i.e. plain per-batch updates.
    pub fn new(lambda: f64, s_max: u32) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Config(format!("lambda {lambda} must be positive")));
        }
        if s_max < 1 {
            return Err(Error::Config("s_max must be at least 1".into()));
        }
        Ok(Self {
            lambda,
            s_max,
            current: 1,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn s_max(&self) -> u32 {
        self.s_max
    }

    pub fn current(&self) -> u32 {
        self.current
    }

    /// Folds one batch's mask counts into the step count. A fully masked
    /// batch maps to an unbounded raw prediction, i.e. one increment capped
    /// at `s_max`.
    pub fn update(&mut self, stats: &BatchMaskStats) -> u32 {
        debug_assert!(stats.n_all >= 1 && stats.n_masked <= stats.n_all);
        let raw = if stats.n_masked < stats.n_all {
            (self.lambda * stats.n_all as f64 / (stats.n_all - stats.n_masked) as f64).floor()
        } else {
            f64::INFINITY
        };
        let mut next = if raw <= self.current as f64 {
            self.current
        } else if raw >= (self.current + 1) as f64 {
            self.current + 1
        } else {
            raw as u32
        };
        next = next.min(self.s_max);
        self.current = next;
        next
    }
}

/// True when the batch at `batch_index` completes an accumulation window of
/// `steps_accum` batches. Accumulated gradients are summed, then divided by
/// the count of non-masked samples that contributed, so per-sample weighting
/// matches a single large batch.
pub fn should_step(batch_index: u64, steps_accum: u32) -> bool {
    debug_assert!(steps_accum >= 1);
    (batch_index + 1) % steps_accum as u64 == 0
}
