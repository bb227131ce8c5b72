//! Evaluation metrics and analysis statistics: accuracy, macro/micro-F1,
//! Pearson loss–metric correlation, probability-margin distributions, and
//! masked-ratio series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::stable_softmax;
use crate::trainer::TrainReport;

/// An ordered (checkpoint step, value) series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub points: Vec<(u64, f64)>,
}

/// The probability margin p_t − max non-target p of one sample. Positive iff
/// the prediction is correct; ties at exactly zero count as incorrect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginSample {
    pub p_margin: f64,
    pub correct: bool,
}

/// Per-class precision/recall/F1 with the 0/0 → 0 convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassPrf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Macro (unweighted mean over all declared classes) and micro (pooled
/// counts) F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Scores {
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub per_class: Vec<ClassPrf>,
}

/// Histogram of probability margins over [−1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginHistogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl MarginHistogram {
    /// Lower edge of bin `i`.
    pub fn bin_lower(&self, i: usize) -> f64 {
        -1.0 + i as f64 * self.bin_width
    }
}

/// Fraction of exactly matching predictions.
pub fn accuracy(preds: &[usize], golds: &[usize]) -> Result<f64> {
    if preds.is_empty() || preds.len() != golds.len() {
        return Err(Error::Contract(format!(
            "need equal nonempty prediction/gold lists, got {}/{}",
            preds.len(),
            golds.len()
        )));
    }
    let hits = preds.iter().zip(golds).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / preds.len() as f64)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Set-valued F1: works for multi-label predictions directly and for
/// multi-class via singleton sets. Classes absent from both golds and
/// predictions score 0 and still enter the macro mean.
pub fn f1_scores(
    pred_sets: &[Vec<usize>],
    gold_sets: &[Vec<usize>],
    n_classes: usize,
) -> Result<F1Scores> {
    if pred_sets.is_empty() || pred_sets.len() != gold_sets.len() {
        return Err(Error::Contract(format!(
            "need equal nonempty prediction/gold lists, got {}/{}",
            pred_sets.len(),
            gold_sets.len()
        )));
    }
    let mut tp = vec![0u64; n_classes];
    let mut fp = vec![0u64; n_classes];
    let mut fn_ = vec![0u64; n_classes];
    for (pred, gold) in pred_sets.iter().zip(gold_sets) {
        for &c in pred {
            if c >= n_classes {
                return Err(Error::Contract(format!("class {c} out of range")));
            }
            if gold.contains(&c) {
                tp[c] += 1;
            } else {
                fp[c] += 1;
            }
        }
        for &c in gold {
            if c >= n_classes {
                return Err(Error::Contract(format!("class {c} out of range")));
            }
            if !pred.contains(&c) {
                fn_[c] += 1;
            }
        }
    }

    let per_class: Vec<ClassPrf> = (0..n_classes)
        .map(|c| {
            let precision = ratio(tp[c] as f64, (tp[c] + fp[c]) as f64);
            let recall = ratio(tp[c] as f64, (tp[c] + fn_[c]) as f64);
            let f1 = ratio(2.0 * precision * recall, precision + recall);
            ClassPrf {
                precision,
                recall,
                f1,
            }
        })
        .collect();
    let macro_f1 = per_class.iter().map(|c| c.f1).sum::<f64>() / n_classes as f64;
    let (tp_all, fp_all, fn_all) = (
        tp.iter().sum::<u64>() as f64,
        fp.iter().sum::<u64>() as f64,
        fn_.iter().sum::<u64>() as f64,
    );
    let micro_p = ratio(tp_all, tp_all + fp_all);
    let micro_r = ratio(tp_all, tp_all + fn_all);
    let micro_f1 = ratio(2.0 * micro_p * micro_r, micro_p + micro_r);
    Ok(F1Scores {
        macro_f1,
        micro_f1,
        per_class,
    })
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(Error::Contract(format!(
            "need two equal-length series of length ≥ 2, got {}/{}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::Undefined(
            "Pearson correlation of a constant series".into(),
        ));
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

/// Probability margins p_t − max non-target p per sample, plus a histogram
/// of them over [−1, 1] with the given bin width.
pub fn p_margin_stats(
    logits_per_sample: &[Vec<f64>],
    targets: &[usize],
    bin_width: f64,
) -> Result<(Vec<MarginSample>, MarginHistogram)> {
    if logits_per_sample.len() != targets.len() {
        return Err(Error::Contract("logits/target length mismatch".into()));
    }
    if !(bin_width > 0.0 && bin_width <= 2.0) {
        return Err(Error::Config(format!("bin width {bin_width} not in (0, 2]")));
    }
    let n_bins = (2.0 / bin_width).ceil() as usize;
    let mut counts = vec![0u64; n_bins];
    let mut samples = Vec::with_capacity(targets.len());
    for (o, &t) in logits_per_sample.iter().zip(targets) {
        if t >= o.len() {
            return Err(Error::Contract(format!("target {t} out of range")));
        }
        let p = stable_softmax(o)?;
        let max_other = p
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != t)
            .map(|(_, &x)| x)
            .fold(f64::NEG_INFINITY, f64::max);
        let margin = p[t] - max_other;
        let bin = (((margin + 1.0) / bin_width).floor() as usize).min(n_bins - 1);
        counts[bin] += 1;
        samples.push(MarginSample {
            p_margin: margin,
            correct: margin > 0.0,
        });
    }
    Ok((
        samples,
        MarginHistogram {
            bin_width,
            counts,
        },
    ))
}

/// Per-checkpoint masked-sample ratio of a training run.
pub fn masked_ratio_series(report: &TrainReport) -> MetricSeries {
    MetricSeries {
        points: report
            .checkpoints
            .iter()
            .map(|c| (c.step, c.masked_ratio))
            .collect(),
    }
}
