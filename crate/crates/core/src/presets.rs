//! Canonical desk-scale experiment presets shared by the CLI and the
//! acceptance suite.
//!
//! Three synthetic 5-class setups:
//! - `Separable`: well-separated clusters with light label noise; masking
//!   ramps up quickly, the regime where the accumulation scheduler pays off.
//! - `Hard`: heavily overlapping clusters with 20% label noise and an MLP
//!   big enough to overfit; the regime where the loss–accuracy correlation
//!   of plain softmax degrades.
//! - `Noisy`: clean separation but 25% flipped labels; the unmasked
//!   leftovers of an adaptive-sparse run concentrate on the flipped samples.

use serde::{Deserialize, Serialize};

use crate::datasets::SynthSpec;
use crate::losses::LossKind;
use crate::scheduler::AccumState;
use crate::trainer::{ModelArch, TrainSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetKind {
    Separable,
    Hard,
    Noisy,
}

impl PresetKind {
    pub fn spec(self) -> SynthSpec {
        match self {
            PresetKind::Separable => SynthSpec {
                n_classes: 5,
                dim: 8,
                samples_per_class: 300,
                separation: 6.0,
                label_noise_rate: 0.1,
                seed: 11,
            },
            PresetKind::Hard => SynthSpec {
                n_classes: 5,
                dim: 8,
                samples_per_class: 120,
                separation: 1.5,
                label_noise_rate: 0.2,
                seed: 29,
            },
            PresetKind::Noisy => SynthSpec {
                n_classes: 5,
                dim: 8,
                samples_per_class: 240,
                separation: 6.0,
                label_noise_rate: 0.3,
                seed: 37,
            },
        }
    }

    /// Training settings for this preset with the given loss; `seed` varies
    /// the run, not the dataset.
    pub fn settings(self, loss_kind: LossKind, seed: i64) -> TrainSettings {
        let arch = match self {
            PresetKind::Hard => ModelArch::Mlp { hidden: 256 },
            _ => ModelArch::Linear,
        };
        let mut s = TrainSettings::new(arch, loss_kind);
        s.optimizer.seed = seed;
        s.loss_config.delta = 0.3;
        match self {
            PresetKind::Separable => {
                s.optimizer.learning_rate = 0.004;
                s.optimizer.epochs = 10;
            }
            PresetKind::Hard => {
                s.optimizer.learning_rate = 0.05;
                s.optimizer.epochs = 30;
            }
            PresetKind::Noisy => {
                s.optimizer.learning_rate = 0.02;
                s.optimizer.epochs = 12;
            }
        }
        s
    }

    /// The accumulation scheduler used with this preset when acceleration is
    /// requested.
    pub fn scheduler(self) -> AccumState {
        AccumState::new(1.0, 4).expect("valid scheduler config")
    }
}
