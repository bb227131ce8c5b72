//! Self-contained training: deterministic batching, per-sample
//! forward/backward through the stand-in models, AdamW updates, warm-up of
//! the masking margin, and the adaptive accumulation hook.

mod model;
mod optim;
mod report;

pub use model::{Model, ModelArch};
pub use optim::OptimizerConfig;
pub use report::{CheckpointRecord, EvalRecord, TrainReport};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::{Dataset, TaskKind, Targets};
use crate::error::{Error, Result};
use crate::losses::{evaluate_loss, LossConfig, LossKind, MultiLabelTarget, Target};
use crate::masking::{effective_delta, BatchMaskStats, WarmupConfig};
use crate::metrics::f1_scores;
use crate::scheduler::{should_step, AccumState};
use optim::AdamW;

/// Everything a training run needs besides the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSettings {
    pub arch: ModelArch,
    pub loss_kind: LossKind,
    pub loss_config: LossConfig,
    pub optimizer: OptimizerConfig,
    /// Warm-up fraction r: δ is held at 1 for the first ⌊r·total⌋ batches.
    pub warmup_r: f64,
    /// Enables the adaptive accumulation scheduler.
    pub accumulation: Option<AccumState>,
    /// Multi-label evaluation predicts the two largest classes instead of
    /// thresholding at zero.
    pub multilabel_top2: bool,
}

impl TrainSettings {
    pub fn new(arch: ModelArch, loss_kind: LossKind) -> Self {
        Self {
            arch,
            loss_kind,
            loss_config: LossConfig::default(),
            optimizer: OptimizerConfig::default(),
            warmup_r: 0.0,
            accumulation: None,
            multilabel_top2: false,
        }
    }

    fn validate(&self, ds: &Dataset) -> Result<()> {
        self.loss_config.validate()?;
        self.optimizer.validate()?;
        if !(0.0..1.0).contains(&self.warmup_r) {
            return Err(Error::Config(format!(
                "warm-up ratio {} not in [0, 1)",
                self.warmup_r
            )));
        }
        ds.validate()?;
        let task = ds.task_kind();
        if self.loss_kind.is_multilabel() != (task == TaskKind::MultiLabel) {
            return Err(Error::Contract(format!(
                "loss `{}` does not fit a {:?} dataset",
                self.loss_kind, task
            )));
        }
        if ds.train.is_empty() || ds.val.is_empty() || ds.test.is_empty() {
            return Err(Error::Contract("dataset needs nonempty train/val/test".into()));
        }
        Ok(())
    }
}

/// A finished run: the report plus the trained model.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub report: TrainReport,
    pub model: Model,
}

enum SampleTargets {
    Class(Vec<usize>),
    Labels(Vec<MultiLabelTarget>),
}

impl SampleTargets {
    fn build(ds: &Dataset) -> Result<Self> {
        Ok(match &ds.targets {
            Targets::MultiClass(v) => SampleTargets::Class(v.clone()),
            Targets::MultiLabel(_) => SampleTargets::Labels(
                (0..ds.n_samples())
                    .map(|i| ds.labels_of(i))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    fn get(&self, i: usize) -> Target<'_> {
        match self {
            SampleTargets::Class(v) => Target::Class(v[i]),
            SampleTargets::Labels(v) => Target::Labels(&v[i]),
        }
    }
}

/// Deterministic training loop. Gradients are summed per accumulation
/// window and divided by the count of non-masked samples that contributed,
/// so per-sample weighting matches one large batch. Masked samples
/// contribute nothing.
pub fn train(ds: &Dataset, settings: &TrainSettings) -> Result<TrainOutcome> {
    settings.validate(ds)?;
    let kind = settings.loss_kind;
    let opt_cfg = &settings.optimizer;
    let mut rng = ChaCha8Rng::seed_from_u64(opt_cfg.seed as u64);
    let mut model = Model::init(settings.arch, ds.dim, ds.n_classes, &mut rng)?;
    let mut adamw = AdamW::new(opt_cfg, model.params.len());
    let mut accum = settings.accumulation.clone();
    let targets = SampleTargets::build(ds)?;

    let n_train = ds.train.len();
    let batches_per_epoch = n_train.div_ceil(opt_cfg.batch_size);
    let total_steps = opt_cfg.epochs as u64 * batches_per_epoch as u64;
    let warmup = WarmupConfig {
        r: settings.warmup_r,
        delta: settings.loss_config.delta,
    };
    let warmup_cutoff = (settings.warmup_r * total_steps as f64).floor() as u64;

    let mut grad_sum = vec![0.0; model.params.len()];
    let mut contributing = 0usize;
    let mut order: Vec<usize> = (0..n_train).collect();
    let mut final_masked = vec![false; n_train];
    let mut steps_accum_series = Vec::with_capacity(total_steps as usize);
    let mut checkpoints = Vec::with_capacity(opt_cfg.epochs as usize);
    let mut global_batch = 0u64;
    let mut grad_evals = 0u64;
    let mut opt_steps = 0u64;

    for epoch in 0..opt_cfg.epochs {
        for i in (1..n_train).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        let mut epoch_masked = 0usize;
        let mut epoch_all = 0usize;
        let mut cfg = settings.loss_config;
        let mut steps_accum = accum.as_ref().map_or(1, AccumState::current);

        for chunk in order.chunks(opt_cfg.batch_size) {
            let delta_eff = effective_delta(global_batch, total_steps, &warmup)?;
            if kind.applies_delta() {
                cfg.delta = delta_eff;
            }
            if kind == LossKind::AsVariant {
                cfg.delta_prime = if global_batch < warmup_cutoff {
                    f64::INFINITY
                } else {
                    settings.loss_config.delta_prime
                };
            }

            let mut n_masked = 0usize;
            for &pos in chunk {
                let gi = ds.train[pos];
                let x = &ds.features[gi];
                let logits = model.forward(x)?;
                let lr = match evaluate_loss(kind, &cfg, &logits, &targets.get(gi)) {
                    Ok(lr) if lr.loss.is_finite() => lr,
                    Ok(_) | Err(Error::InvalidInput(_)) => {
                        return Err(Error::Numeric {
                            step: Some(global_batch),
                            msg: "training diverged to a non-finite loss".into(),
                        })
                    }
                    Err(e) => return Err(e),
                };
                epoch_loss += lr.loss;
                if lr.sample_masked {
                    n_masked += 1;
                } else {
                    model.backward(x, &lr.grad, &mut grad_sum)?;
                    contributing += 1;
                }
                final_masked[pos] = lr.sample_masked;
                grad_evals += 1;
            }

            let stats = BatchMaskStats {
                n_all: chunk.len(),
                n_masked,
            };
            steps_accum = accum.as_mut().map_or(1, |st| st.update(&stats));
            steps_accum_series.push(steps_accum);
            if should_step(global_batch, steps_accum) {
                let scale = 1.0 / contributing.max(1) as f64;
                adamw.step_scaled(&mut model.params, &grad_sum, scale);
                grad_sum.fill(0.0);
                contributing = 0;
                opt_steps += 1;
            }
            global_batch += 1;
            epoch_all += chunk.len();
            epoch_masked += n_masked;
        }

        let val_loss = mean_loss(&model, ds, &ds.val, kind, &cfg)?;
        let val_eval = evaluate(&model, ds, &ds.val, settings.multilabel_top2)?;
        checkpoints.push(CheckpointRecord {
            step: global_batch,
            epoch,
            train_loss: epoch_loss / epoch_all as f64,
            val_loss,
            val_metric: val_eval.primary(),
            masked_ratio: epoch_masked as f64 / epoch_all as f64,
            steps_accum,
            cumulative_gradient_evaluations: grad_evals,
            cumulative_optimizer_steps: opt_steps,
        });
    }

    let final_test = evaluate(&model, ds, &ds.test, settings.multilabel_top2)?;
    let report = TrainReport {
        loss_kind: kind,
        seed: opt_cfg.seed,
        train_indices: ds.train.clone(),
        checkpoints,
        steps_accum_series,
        s_max: settings.accumulation.as_ref().map(AccumState::s_max),
        final_test,
        final_train_masked: final_masked,
    };
    report.validate()?;
    Ok(TrainOutcome { report, model })
}

/// Mean per-sample loss over a split (masked samples contribute 0).
pub fn mean_loss(
    model: &Model,
    ds: &Dataset,
    indices: &[usize],
    kind: LossKind,
    cfg: &LossConfig,
) -> Result<f64> {
    if indices.is_empty() {
        return Err(Error::Contract("empty split".into()));
    }
    let targets = SampleTargets::build(ds)?;
    let mut total = 0.0;
    for &i in indices {
        let logits = model.forward(&ds.features[i])?;
        total += evaluate_loss(kind, cfg, &logits, &targets.get(i))?.loss;
    }
    Ok(total / indices.len() as f64)
}

/// Logits of every sample in a split, in split order.
pub fn split_logits(model: &Model, ds: &Dataset, indices: &[usize]) -> Result<Vec<Vec<f64>>> {
    indices.iter().map(|&i| model.forward(&ds.features[i])).collect()
}

fn top2(logits: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..logits.len()).collect();
    idx.sort_by(|&a, &b| logits[b].partial_cmp(&logits[a]).unwrap());
    let mut out = vec![idx[0], idx[1]];
    out.sort_unstable();
    out
}

/// Evaluates a split: argmax prediction for multi-class; positive-logit
/// prediction (or the two largest classes when `multilabel_top2`) for
/// multi-label.
pub fn evaluate(
    model: &Model,
    ds: &Dataset,
    indices: &[usize],
    multilabel_top2: bool,
) -> Result<EvalRecord> {
    if indices.is_empty() {
        return Err(Error::Contract("empty split".into()));
    }
    match &ds.targets {
        Targets::MultiClass(classes) => {
            let mut preds = Vec::with_capacity(indices.len());
            let mut golds = Vec::with_capacity(indices.len());
            for &i in indices {
                let logits = model.forward(&ds.features[i])?;
                preds.push(crate::numerics::argmax(&logits));
                golds.push(classes[i]);
            }
            let acc = crate::metrics::accuracy(&preds, &golds)?;
            let pred_sets: Vec<Vec<usize>> = preds.iter().map(|&p| vec![p]).collect();
            let gold_sets: Vec<Vec<usize>> = golds.iter().map(|&g| vec![g]).collect();
            let f1 = f1_scores(&pred_sets, &gold_sets, ds.n_classes)?;
            Ok(EvalRecord {
                accuracy: Some(acc),
                macro_f1: f1.macro_f1,
                micro_f1: f1.micro_f1,
            })
        }
        Targets::MultiLabel(labels) => {
            let mut pred_sets = Vec::with_capacity(indices.len());
            let mut gold_sets = Vec::with_capacity(indices.len());
            for &i in indices {
                let logits = model.forward(&ds.features[i])?;
                let pred = if multilabel_top2 {
                    top2(&logits)
                } else {
                    (0..logits.len()).filter(|&c| logits[c] > 0.0).collect()
                };
                pred_sets.push(pred);
                gold_sets.push(labels[i].clone());
            }
            let f1 = f1_scores(&pred_sets, &gold_sets, ds.n_classes)?;
            Ok(EvalRecord {
                accuracy: None,
                macro_f1: f1.macro_f1,
                micro_f1: f1.micro_f1,
            })
        }
    }
}

/// Global indices of the train samples still unmasked at the end of an
/// adaptive-sparse run: the hard ones.
pub fn extract_hard_samples(report: &TrainReport) -> Result<Vec<usize>> {
    if !report.loss_kind.is_adaptive_sparse() {
        return Err(Error::Contract(format!(
            "hard-sample extraction needs an adaptive-sparse run, got `{}`",
            report.loss_kind
        )));
    }
    Ok(report
        .train_indices
        .iter()
        .zip(&report.final_train_masked)
        .filter(|(_, &masked)| !masked)
        .map(|(&i, _)| i)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{gen_multiclass, SynthSpec};

    fn small_ds() -> Dataset {
        gen_multiclass(&SynthSpec {
            n_classes: 2,
            dim: 4,
            samples_per_class: 60,
            separation: 10.0,
            label_noise_rate: 0.0,
            seed: 17,
        })
        .unwrap()
    }

    fn settings(kind: LossKind) -> TrainSettings {
        let mut s = TrainSettings::new(ModelArch::Linear, kind);
        s.optimizer.epochs = 20;
        s.optimizer.learning_rate = 0.05;
        s.optimizer.seed = 7;
        s
    }

    #[test]
    fn separable_data_trains_to_perfect_train_accuracy() {
        let ds = small_ds();
        let out = train(&ds, &settings(LossKind::Softmax)).unwrap();
        let train_eval = evaluate(&out.model, &ds, &ds.train, false).unwrap();
        assert_eq!(train_eval.accuracy, Some(1.0));
    }

    #[test]
    fn as_softmax_delta_one_matches_softmax_bitwise() {
        let ds = small_ds();
        let softmax = train(&ds, &settings(LossKind::Softmax)).unwrap();
        let mut s = settings(LossKind::AsSoftmax);
        s.loss_config.delta = 1.0;
        let asx = train(&ds, &s).unwrap();
        assert_eq!(softmax.model.params, asx.model.params);
        assert_eq!(softmax.report.checkpoints, asx.report.checkpoints);
        assert_eq!(softmax.report.final_test, asx.report.final_test);
    }

    #[test]
    fn identical_seeds_reproduce_bitwise() {
        let ds = small_ds();
        let a = train(&ds, &settings(LossKind::AsSoftmax)).unwrap();
        let b = train(&ds, &settings(LossKind::AsSoftmax)).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.model.params, b.model.params);
    }

    #[test]
    fn scheduler_reduces_optimizer_steps() {
        let ds = small_ds();
        let plain = train(&ds, &settings(LossKind::Softmax)).unwrap();
        let mut s = settings(LossKind::AsSoftmax);
        s.loss_config.delta = 0.3;
        s.accumulation = Some(crate::scheduler::AccumState::new(1.0, 4).unwrap());
        let sped = train(&ds, &s).unwrap();
        let plain_steps = plain
            .report
            .checkpoints
            .last()
            .unwrap()
            .cumulative_optimizer_steps;
        let sped_steps = sped
            .report
            .checkpoints
            .last()
            .unwrap()
            .cumulative_optimizer_steps;
        assert!(sped_steps < plain_steps, "{sped_steps} !< {plain_steps}");
        // Gradient evaluations are unaffected by the scheduler.
        assert_eq!(
            plain.report.checkpoints.last().unwrap().cumulative_gradient_evaluations,
            sped.report.checkpoints.last().unwrap().cumulative_gradient_evaluations,
        );
    }

    #[test]
    fn gradient_evaluations_count_samples() {
        let ds = small_ds();
        let out = train(&ds, &settings(LossKind::Softmax)).unwrap();
        let last = out.report.checkpoints.last().unwrap();
        assert_eq!(
            last.cumulative_gradient_evaluations,
            20 * ds.train.len() as u64
        );
        let per_epoch = ds.train.len().div_ceil(32) as u64;
        assert_eq!(last.cumulative_optimizer_steps, 20 * per_epoch);
    }

    #[test]
    fn masked_samples_add_nothing_to_gradients() {
        let ds = small_ds();
        let mut s = settings(LossKind::AsSoftmax);
        s.loss_config.delta = 0.3;
        s.optimizer.epochs = 10;
        let model = train(&ds, &s).unwrap().model;
        let cfg = LossConfig {
            delta: 0.3,
            ..LossConfig::default()
        };
        let targets = SampleTargets::build(&ds).unwrap();

        // Accumulate over all train samples, then over only the unmasked
        // ones; the sums must agree exactly.
        let mut all = vec![0.0; model.params.len()];
        let mut kept = vec![0.0; model.params.len()];
        let mut saw_masked = false;
        for &i in &ds.train {
            let logits = model.forward(&ds.features[i]).unwrap();
            let lr =
                evaluate_loss(LossKind::AsSoftmax, &cfg, &logits, &targets.get(i)).unwrap();
            if lr.sample_masked {
                saw_masked = true;
                assert!(lr.grad.iter().all(|&g| g == 0.0));
            } else {
                model.backward(&ds.features[i], &lr.grad, &mut kept).unwrap();
            }
            model.backward(&ds.features[i], &lr.grad, &mut all).unwrap();
        }
        assert_eq!(all, kept);
        assert!(saw_masked, "test setup should mask at least one sample");
    }

    #[test]
    fn divergent_run_reports_step() {
        // A non-finite feature drives the forward pass to NaN logits; the
        // loop must abort with the failing step.
        let mut ds = small_ds();
        let victim = ds.train[0];
        ds.features[victim][0] = f64::NAN;
        match train(&ds, &settings(LossKind::Softmax)) {
            Err(Error::Numeric { step: Some(_), .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn hard_samples_require_adaptive_run() {
        let ds = small_ds();
        let out = train(&ds, &settings(LossKind::Softmax)).unwrap();
        assert!(extract_hard_samples(&out.report).is_err());

        let mut s = settings(LossKind::AsSoftmax);
        s.loss_config.delta = 0.3;
        let out = train(&ds, &s).unwrap();
        let hard = extract_hard_samples(&out.report).unwrap();
        let masked_count = out
            .report
            .final_train_masked
            .iter()
            .filter(|&&m| m)
            .count();
        assert_eq!(hard.len() + masked_count, ds.train.len());
    }

    #[test]
    fn loss_task_mismatch_is_rejected() {
        let ds = small_ds();
        assert!(train(&ds, &settings(LossKind::MultilabelSoftmax)).is_err());
    }
}
