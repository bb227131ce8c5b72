//! The margin criterion behind the adaptive sparse losses, δ warm-up
//! scheduling, and batch-level mask statistics consumed by the accumulation
//! scheduler and the metrics suite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::MultiLabelTarget;
use crate::numerics::Probs;

/// Outcome of the margin criterion for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskDecision {
    /// Per-class z factors; `false` means the class is dropped.
    pub retained: Vec<bool>,
    /// True iff every droppable class was dropped.
    pub sample_masked: bool,
    /// The margin actually applied (after warm-up).
    pub effective_delta: f64,
}

/// Warm-up: hold δ at 1 (masking disabled) for the first `r` fraction of
/// training steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarmupConfig {
    /// Fraction of total steps spent at δ = 1, in [0, 1).
    pub r: f64,
    /// The margin used after warm-up, in (0, 1].
    pub delta: f64,
}

impl Default for WarmupConfig {
    fn default() -> Self {
        Self { r: 0.0, delta: 0.3 }
    }
}

impl WarmupConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.r) {
            return Err(Error::Config(format!("warm-up ratio {} not in [0, 1)", self.r)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Config(format!("delta {} not in (0, 1]", self.delta)));
        }
        Ok(())
    }
}

/// Counts of masked samples in one batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchMaskStats {
    pub n_all: usize,
    pub n_masked: usize,
}

/// The margin in effect at `step`: 1.0 during the first ⌊r·total⌋ steps,
/// `cfg.delta` afterwards.
pub fn effective_delta(step: u64, total_steps: u64, cfg: &WarmupConfig) -> Result<f64> {
    cfg.validate()?;
    if step >= total_steps {
        return Err(Error::Contract(format!(
            "step {step} not below total_steps {total_steps}"
        )));
    }
    let cutoff = (cfg.r * total_steps as f64).floor() as u64;
    Ok(if step < cutoff { 1.0 } else { cfg.delta })
}

/// Multi-class criterion: class i is dropped iff p_t − p_i ≥ δ and i ≠ t.
/// The sample is masked when every non-target class is dropped.
pub fn mask_multiclass(p: &Probs, target: usize, delta: f64) -> Result<MaskDecision> {
    if target >= p.len() {
        return Err(Error::Contract(format!(
            "target {target} out of range for {} classes",
            p.len()
        )));
    }
    let pt = p[target];
    let mut retained = vec![true; p.len()];
    let mut any_kept = false;
    for (i, &pi) in p.iter().enumerate() {
        if i == target {
            continue;
        }
        if pt - pi >= delta {
            retained[i] = false;
        } else {
            any_kept = true;
        }
    }
    Ok(MaskDecision {
        retained,
        sample_masked: !any_kept,
        effective_delta: delta,
    })
}

/// Multi-label criterion: a negative class i is dropped iff
/// min_pos(p) − p_i ≥ δ; a positive class t is dropped iff
/// p_t − max_neg(p) ≥ δ. With no negative classes nothing is dropped.
pub fn mask_multilabel(p: &Probs, targets: &MultiLabelTarget, delta: f64) -> Result<MaskDecision> {
    if targets.n_classes() != p.len() {
        return Err(Error::Contract(format!(
            "target defined over {} classes but got {} probabilities",
            targets.n_classes(),
            p.len()
        )));
    }
    let pos_min = targets
        .positives()
        .iter()
        .map(|&t| p[t])
        .fold(f64::INFINITY, f64::min);
    let neg_max = targets.negatives().map(|i| p[i]).fold(f64::NEG_INFINITY, f64::max);
    let has_negatives = neg_max > f64::NEG_INFINITY;

    let mut retained = vec![true; p.len()];
    let mut any_kept = false;
    for i in 0..p.len() {
        let drop = if targets.is_positive(i) {
            has_negatives && p[i] - neg_max >= delta
        } else {
            pos_min - p[i] >= delta
        };
        if drop {
            retained[i] = false;
        } else {
            any_kept = true;
        }
    }
    Ok(MaskDecision {
        retained,
        sample_masked: !any_kept,
        effective_delta: delta,
    })
}

/// Aggregates per-sample decisions into batch counts.
pub fn batch_stats(decisions: &[MaskDecision]) -> Result<BatchMaskStats> {
    if decisions.is_empty() {
        return Err(Error::Contract("empty batch".into()));
    }
    Ok(BatchMaskStats {
        n_all: decisions.len(),
        n_masked: decisions.iter().filter(|d| d.sample_masked).count(),
    })
}
