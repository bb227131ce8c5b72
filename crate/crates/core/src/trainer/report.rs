//! Training run records and their consistency checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::LossKind;

/// Metrics of one evaluation pass over a split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    /// Exact-match accuracy; absent for multi-label tasks.
    pub accuracy: Option<f64>,
    pub macro_f1: f64,
    pub micro_f1: f64,
}

impl EvalRecord {
    /// The headline metric: accuracy for multi-class, micro-F1 otherwise.
    pub fn primary(&self) -> f64 {
        self.accuracy.unwrap_or(self.micro_f1)
    }
}

/// One epoch-end evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    /// Global batch count at this checkpoint.
    pub step: u64,
    pub epoch: u32,
    /// Mean per-sample train loss over the epoch (masked samples count 0).
    pub train_loss: f64,
    /// Mean per-sample loss over the validation split.
    pub val_loss: f64,
    /// Primary validation metric.
    pub val_metric: f64,
    /// Fraction of train samples masked during the epoch.
    pub masked_ratio: f64,
    /// Accumulation step count at epoch end.
    pub steps_accum: u32,
    pub cumulative_gradient_evaluations: u64,
    pub cumulative_optimizer_steps: u64,
}

/// Full record of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss_kind: LossKind,
    pub seed: i64,
    /// Global dataset indices of the train split, in split order.
    pub train_indices: Vec<usize>,
    pub checkpoints: Vec<CheckpointRecord>,
    /// Accumulation step count after every batch.
    pub steps_accum_series: Vec<u32>,
    /// The scheduler cap, when a scheduler was active.
    pub s_max: Option<u32>,
    pub final_test: EvalRecord,
    /// Mask status of each train sample in its final epoch, aligned with
    /// `train_indices`.
    pub final_train_masked: Vec<bool>,
}

impl TrainReport {
    /// Checks the structural invariants: strictly increasing checkpoint
    /// steps, ratios in range, and the scheduler restrictions (the series
    /// never decreases, grows by at most 1 per batch, and never exceeds the
    /// cap).
    pub fn validate(&self) -> Result<()> {
        for pair in self.checkpoints.windows(2) {
            if pair[1].step <= pair[0].step {
                return Err(Error::Contract("checkpoint steps not increasing".into()));
            }
            if pair[1].cumulative_gradient_evaluations < pair[0].cumulative_gradient_evaluations
                || pair[1].cumulative_optimizer_steps < pair[0].cumulative_optimizer_steps
            {
                return Err(Error::Contract("cumulative counters decreased".into()));
            }
        }
        for c in &self.checkpoints {
            if !(0.0..=1.0).contains(&c.masked_ratio) {
                return Err(Error::Contract(format!(
                    "masked ratio {} out of range",
                    c.masked_ratio
                )));
            }
        }
        let cap = self.s_max.unwrap_or(u32::MAX);
        let mut prev = 1u32;
        for (i, &sa) in self.steps_accum_series.iter().enumerate() {
            if sa < 1 {
                return Err(Error::Contract(format!("steps_accum 0 at batch {i}")));
            }
            if sa < prev {
                return Err(Error::Contract(format!(
                    "steps_accum decreased at batch {i}: {prev} -> {sa}"
                )));
            }
            if sa - prev > 1 {
                return Err(Error::Contract(format!(
                    "steps_accum jumped at batch {i}: {prev} -> {sa}"
                )));
            }
            if sa > cap {
                return Err(Error::Contract(format!(
                    "steps_accum {sa} above cap {cap} at batch {i}"
                )));
            }
            prev = sa;
        }
        if self.final_train_masked.len() != self.train_indices.len() {
            return Err(Error::Contract("final mask status length mismatch".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checkpoint(step: u64) -> CheckpointRecord {
        CheckpointRecord {
            step,
            epoch: 0,
            train_loss: 1.0,
            val_loss: 1.0,
            val_metric: 0.5,
            masked_ratio: 0.0,
            steps_accum: 1,
            cumulative_gradient_evaluations: step * 32,
            cumulative_optimizer_steps: step,
        }
    }

    fn report(series: Vec<u32>, s_max: Option<u32>) -> TrainReport {
        TrainReport {
            loss_kind: LossKind::AsSoftmax,
            seed: 1,
            train_indices: vec![0, 1],
            checkpoints: vec![checkpoint(1), checkpoint(2)],
            steps_accum_series: series,
            s_max,
            final_test: EvalRecord {
                accuracy: Some(1.0),
                macro_f1: 1.0,
                micro_f1: 1.0,
            },
            final_train_masked: vec![false, true],
        }
    }

    #[test]
    fn valid_series_passes() {
        assert!(report(vec![1, 1, 2, 2, 3], Some(4)).validate().is_ok());
    }

    #[test]
    fn decreasing_series_fails() {
        assert!(report(vec![1, 2, 1], Some(4)).validate().is_err());
    }

    #[test]
    fn jump_fails() {
        assert!(report(vec![1, 3], Some(4)).validate().is_err());
    }

    #[test]
    fn cap_violation_fails() {
        assert!(report(vec![1, 2, 3], Some(2)).validate().is_err());
    }
}
