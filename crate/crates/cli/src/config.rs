//! Experiment configuration files: flat `key = value` text with dotted
//! sections, e.g.
//!
//! ```text
//! [dataset]
//! kind = "synth-multiclass"
//! classes = 5
//!
//! [loss]
//! kind = "as-softmax"
//! delta = 0.3
//! ```
//!
//! Every field has a default; the fully resolved configuration is echoed to
//! `resolved_config.json` next to each run's reports.

use std::path::Path;

use serde::{Deserialize, Serialize};

use as_softmax::datasets::{
    gen_multiclass, gen_multilabel, load_csv, CsvSchema, Dataset, SynthSpec,
};
use as_softmax::losses::{LossConfig, LossKind};
use as_softmax::scheduler::AccumState;
use as_softmax::trainer::{ModelArch, OptimizerConfig, TrainSettings};

use crate::exit::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    SynthMulticlass,
    SynthMultilabel,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub kind: DatasetKind,
    pub classes: usize,
    pub dim: usize,
    pub per_class: usize,
    pub separation: f64,
    pub label_noise: f64,
    pub seed: u64,
    pub labels_per_sample: usize,
    pub path: Option<String>,
    pub strict_labels: bool,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            kind: DatasetKind::SynthMulticlass,
            classes: 5,
            dim: 8,
            per_class: 300,
            separation: 6.0,
            label_noise: 0.1,
            seed: 11,
            labels_per_sample: 2,
            path: None,
            strict_labels: true,
        }
    }
}

impl DatasetSection {
    pub fn spec(&self) -> SynthSpec {
        SynthSpec {
            n_classes: self.classes,
            dim: self.dim,
            samples_per_class: self.per_class,
            separation: self.separation,
            label_noise_rate: self.label_noise,
            seed: self.seed,
        }
    }

    pub fn build(&self) -> Result<Dataset, CliError> {
        match self.kind {
            DatasetKind::SynthMulticlass => Ok(gen_multiclass(&self.spec())?),
            DatasetKind::SynthMultilabel => {
                Ok(gen_multilabel(&self.spec(), self.labels_per_sample)?)
            }
            DatasetKind::Csv => {
                let path = self.path.as_deref().ok_or_else(|| {
                    CliError::Usage("dataset.kind = \"csv\" requires dataset.path".into())
                })?;
                if !Path::new(path).exists() {
                    return Err(CliError::Usage(format!("dataset file `{path}` not found")));
                }
                let schema = CsvSchema {
                    task: None,
                    strict_labels: self.strict_labels,
                };
                Ok(load_csv(path, &schema)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Linear,
    Mlp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub hidden: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKind::Linear,
            hidden: 32,
        }
    }
}

impl ModelSection {
    pub fn arch(&self) -> ModelArch {
        match self.kind {
            ModelKind::Linear => ModelArch::Linear,
            ModelKind::Mlp => ModelArch::Mlp {
                hidden: self.hidden,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossSection {
    pub kind: LossKind,
    pub delta: f64,
    pub delta_prime: f64,
    pub tau: f64,
    pub epsilon: f64,
    pub k: usize,
    pub s_scale: f64,
    pub m_margin: f64,
}

impl Default for LossSection {
    fn default() -> Self {
        let c = LossConfig::default();
        Self {
            kind: LossKind::Softmax,
            delta: c.delta,
            delta_prime: c.delta_prime,
            tau: c.tau,
            epsilon: c.epsilon,
            k: c.k,
            s_scale: c.s_scale,
            m_margin: c.m_margin,
        }
    }
}

impl LossSection {
    pub fn config(&self) -> LossConfig {
        LossConfig {
            delta: self.delta,
            delta_prime: self.delta_prime,
            tau: self.tau,
            epsilon: self.epsilon,
            k: self.k,
            s_scale: self.s_scale,
            m_margin: self.m_margin,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarmupSection {
    pub r: f64,
}

impl Default for WarmupSection {
    fn default() -> Self {
        Self { r: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerSection {
    pub lambda: f64,
    pub s_max: u32,
}

impl Default for SchedulerSection {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            s_max: 4,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub multilabel_top2: bool,
}

/// One experiment: dataset, model, loss, optimiser, warm-up, optional
/// accumulation scheduler.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSection,
    pub model: ModelSection,
    pub loss: LossSection,
    pub optimizer: OptimizerConfig,
    pub warmup: WarmupSection,
    pub scheduler: Option<SchedulerSection>,
    pub eval: EvalSection,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        if !path.exists() {
            return Err(CliError::Usage(format!(
                "config file `{}` not found",
                path.display()
            )));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read `{}`: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config `{}`: {e}", path.display())))
    }

    /// Training settings for one run; `seed` varies the run, not the data.
    pub fn settings(&self, seed: i64) -> Result<TrainSettings, CliError> {
        let mut optimizer = self.optimizer;
        optimizer.seed = seed;
        let accumulation = match &self.scheduler {
            Some(s) => Some(AccumState::new(s.lambda, s.s_max)?),
            None => None,
        };
        let settings = TrainSettings {
            arch: self.model.arch(),
            loss_kind: self.loss.kind,
            loss_config: self.loss.config(),
            optimizer,
            warmup_r: self.warmup.r,
            accumulation,
            multilabel_top2: self.eval.multilabel_top2,
        };
        settings.loss_config.validate()?;
        settings.optimizer.validate()?;
        Ok(settings)
    }
}

/// The resolved configuration echoed next to each run's reports.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig<'a> {
    pub seed: i64,
    #[serde(flatten)]
    pub config: &'a ExperimentConfig,
}
