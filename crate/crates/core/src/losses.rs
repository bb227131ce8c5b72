//! The full loss family: standard softmax cross-entropy, six baseline
//! variants (temperature, label smoothing, top-k sparse, additive margin,
//! sparsemax, 1.5-entmax), the adaptive sparse softmax losses for
//! multi-class and multi-label targets, and the logit-margin variant.
//!
//! Every loss exposes a single forward-plus-gradient evaluation returning a
//! [`LossResult`]. A sample whose loss is exactly zero because every class
//! satisfied the margin criterion is reported as `sample_masked`; such
//! samples contribute no gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masking::{mask_multiclass, mask_multilabel};
use crate::numerics::{entmax15, log_sum_exp, simplex_project, stable_softmax};

/// Loss value, gradient w.r.t. the logits, the retained-class factors, and
/// whether the whole sample was masked out.
#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    /// Nonnegative scalar loss.
    pub loss: f64,
    /// ∂loss/∂o, same length as the logits. Zero for dropped classes.
    pub grad: Vec<f64>,
    /// The binary z factors: `false` means the class was dropped.
    pub retained: Vec<bool>,
    /// True iff the sample contributes nothing (loss and gradient are zero).
    pub sample_masked: bool,
}

impl LossResult {
    fn masked(n: usize, target_retained: Option<usize>) -> Self {
        let mut retained = vec![false; n];
        if let Some(t) = target_retained {
            retained[t] = true;
        }
        Self {
            loss: 0.0,
            grad: vec![0.0; n],
            retained,
            sample_masked: true,
        }
    }
}

/// Target partition for multi-label classification: a nonempty positive set
/// and its complement.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLabelTarget {
    positives: Vec<usize>,
    positive_mask: Vec<bool>,
}

impl MultiLabelTarget {
    pub fn new(mut positives: Vec<usize>, n_classes: usize) -> Result<Self> {
        if positives.is_empty() {
            return Err(Error::Contract("positive label set is empty".into()));
        }
        positives.sort_unstable();
        positives.dedup();
        if *positives.last().unwrap() >= n_classes {
            return Err(Error::Contract(format!(
                "label {} out of range for {} classes",
                positives.last().unwrap(),
                n_classes
            )));
        }
        let mut positive_mask = vec![false; n_classes];
        for &p in &positives {
            positive_mask[p] = true;
        }
        Ok(Self {
            positives,
            positive_mask,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.positive_mask.len()
    }

    pub fn positives(&self) -> &[usize] {
        &self.positives
    }

    pub fn is_positive(&self, class: usize) -> bool {
        self.positive_mask[class]
    }

    pub fn negatives(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.positive_mask.len()).filter(|&i| !self.positive_mask[i])
    }
}

/// Hyper-parameters for the whole loss family. Each loss reads only the
/// fields it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    /// Probability margin δ of the adaptive sparse losses, in (0, 1].
    pub delta: f64,
    /// Logit margin δ' of the logit-criterion variant, ≥ 0 (∞ disables masking).
    pub delta_prime: f64,
    /// Softmax temperature τ > 0.
    pub tau: f64,
    /// Label-smoothing weight ε in [0, 1).
    pub epsilon: f64,
    /// Top-k retention count of the sparse top-k loss, ≥ 1.
    pub k: usize,
    /// Additive-margin scale s > 0.
    pub s_scale: f64,
    /// Additive margin m ≥ 0.
    pub m_margin: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            delta: 0.3,
            delta_prime: 2.0,
            tau: 1.0,
            epsilon: 0.1,
            k: 4,
            s_scale: 10.0,
            m_margin: 0.3,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Config(format!("delta {} not in (0, 1]", self.delta)));
        }
        if self.delta_prime.is_nan() || self.delta_prime < 0.0 {
            return Err(Error::Config(format!(
                "delta_prime {} is negative",
                self.delta_prime
            )));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::Config(format!("tau {} must be positive", self.tau)));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!(
                "epsilon {} not in [0, 1)",
                self.epsilon
            )));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.s_scale.is_finite() && self.s_scale > 0.0) {
            return Err(Error::Config(format!(
                "s_scale {} must be positive",
                self.s_scale
            )));
        }
        if !(self.m_margin.is_finite() && self.m_margin >= 0.0) {
            return Err(Error::Config(format!(
                "m_margin {} is negative",
                self.m_margin
            )));
        }
        Ok(())
    }
}

/// Which loss to train with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Softmax,
    TSoftmax,
    LabelSmoothing,
    SparseSoftmax,
    AmSoftmax,
    Sparsemax,
    Entmax15,
    AsSoftmax,
    AsVariant,
    MultilabelSoftmax,
    AsMultilabel,
}

impl LossKind {
    /// Losses that can mask whole samples by the adaptive margin criterion.
    pub fn is_adaptive_sparse(self) -> bool {
        matches!(
            self,
            LossKind::AsSoftmax | LossKind::AsVariant | LossKind::AsMultilabel
        )
    }

    /// Losses whose margin is the probability-space δ (subject to warm-up).
    pub fn applies_delta(self) -> bool {
        matches!(self, LossKind::AsSoftmax | LossKind::AsMultilabel)
    }

    pub fn is_multilabel(self) -> bool {
        matches!(self, LossKind::MultilabelSoftmax | LossKind::AsMultilabel)
    }

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Softmax => "softmax",
            LossKind::TSoftmax => "t-softmax",
            LossKind::LabelSmoothing => "label-smoothing",
            LossKind::SparseSoftmax => "sparse-softmax",
            LossKind::AmSoftmax => "am-softmax",
            LossKind::Sparsemax => "sparsemax",
            LossKind::Entmax15 => "entmax15",
            LossKind::AsSoftmax => "as-softmax",
            LossKind::AsVariant => "as-variant",
            LossKind::MultilabelSoftmax => "multilabel-softmax",
            LossKind::AsMultilabel => "as-multilabel",
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "softmax" => LossKind::Softmax,
            "t-softmax" => LossKind::TSoftmax,
            "label-smoothing" => LossKind::LabelSmoothing,
            "sparse-softmax" => LossKind::SparseSoftmax,
            "am-softmax" => LossKind::AmSoftmax,
            "sparsemax" => LossKind::Sparsemax,
            "entmax15" => LossKind::Entmax15,
            "as-softmax" => LossKind::AsSoftmax,
            "as-variant" => LossKind::AsVariant,
            "multilabel-softmax" => LossKind::MultilabelSoftmax,
            "as-multilabel" => LossKind::AsMultilabel,
            other => return Err(Error::Config(format!("unknown loss kind `{other}`"))),
        })
    }
}

/// A per-sample target, matching the task kind.
#[derive(Debug, Clone)]
pub enum Target<'a> {
    Class(usize),
    Labels(&'a MultiLabelTarget),
}

fn validate_logits(o: &[f64]) -> Result<()> {
    if o.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 classes, got {}",
            o.len()
        )));
    }
    if o.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite logit".into()));
    }
    Ok(())
}

fn validate_class(o: &[f64], target: usize) -> Result<()> {
    if target >= o.len() {
        return Err(Error::Contract(format!(
            "target {} out of range for {} classes",
            target,
            o.len()
        )));
    }
    Ok(())
}

/// Cross-entropy of the softmax renormalised over the retained classes.
///
/// Every renormalising loss (plain softmax, sparse top-k, the adaptive
/// sparse losses) funnels through this so that their degenerate
/// configurations agree with plain softmax bit for bit. The target must be
/// retained.
fn renorm_ce(o: &[f64], retained: &[bool], target: usize) -> (f64, Vec<f64>) {
    let mut max = f64::NEG_INFINITY;
    for (i, &x) in o.iter().enumerate() {
        if retained[i] && x > max {
            max = x;
        }
    }
    let mut exps = vec![0.0; o.len()];
    let mut sum = 0.0;
    for (i, &x) in o.iter().enumerate() {
        if retained[i] {
            let e = (x - max).exp();
            exps[i] = e;
            sum += e;
        }
    }
    let loss = max + sum.ln() - o[target];
    let mut grad = exps;
    for (i, g) in grad.iter_mut().enumerate() {
        if retained[i] {
            *g /= sum;
        }
    }
    grad[target] -= 1.0;
    (loss, grad)
}

/// Standard softmax cross-entropy: loss = logΣe^{o_j} − o_t.
pub fn softmax_ce(o: &[f64], target: usize) -> Result<LossResult> {
    validate_logits(o)?;
    validate_class(o, target)?;
    let retained = vec![true; o.len()];
    let (loss, grad) = renorm_ce(o, &retained, target);
    Ok(LossResult {
        loss,
        grad,
        retained,
        sample_masked: false,
    })
}

/// Temperature softmax: cross-entropy of softmax(o/τ), gradient carries the
/// 1/τ chain factor.
pub fn t_softmax_ce(o: &[f64], target: usize, tau: f64) -> Result<LossResult> {
    validate_logits(o)?;
    validate_class(o, target)?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Config(format!("tau {tau} must be positive")));
    }
    let scaled: Vec<f64> = o.iter().map(|x| x / tau).collect();
    let retained = vec![true; o.len()];
    let (loss, mut grad) = renorm_ce(&scaled, &retained, target);
    for g in &mut grad {
        *g /= tau;
    }
    Ok(LossResult {
        loss,
        grad,
        retained,
        sample_masked: false,
    })
}

/// Cross-entropy against the smoothed target that puts weight ε/(n−1) on
/// every non-target class.
pub fn label_smoothing_ce(o: &[f64], target: usize, epsilon: f64) -> Result<LossResult> {
    validate_logits(o)?;
    validate_class(o, target)?;
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Config(format!("epsilon {epsilon} not in [0, 1)")));
    }
    let n = o.len();
    let off_weight = epsilon / (n - 1) as f64;
    let lse = log_sum_exp(o)?;
    let mut weighted = 0.0;
    for (j, &x) in o.iter().enumerate() {
        let q = if j == target { 1.0 - epsilon } else { off_weight };
        weighted += q * x;
    }
    let loss = lse - weighted;
    let p = stable_softmax(o)?;
    let grad: Vec<f64> = p
        .values()
        .iter()
        .enumerate()
        .map(|(j, &pj)| {
            let q = if j == target { 1.0 - epsilon } else { off_weight };
            pj - q
        })
        .collect();
    Ok(LossResult {
        loss,
        grad,
        retained: vec![true; n],
        sample_masked: false,
    })
}

/// Sparse top-k softmax: renormalise over the k largest logits with the
/// target force-included. Ties at the k-th value keep the lower index.
pub fn sparse_topk_ce(o: &[f64], target: usize, k: usize) -> Result<LossResult> {
    validate_logits(o)?;
    validate_class(o, target)?;
    if k < 1 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let n = o.len();
    let mut retained = vec![false; n];
    if k >= n {
        retained.fill(true);
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| o[b].partial_cmp(&o[a]).unwrap());
        for &i in order.iter().take(k) {
            retained[i] = true;
        }
        retained[target] = true;
    }
    let (loss, grad) = renorm_ce(o, &retained, target);
    Ok(LossResult {
        loss,
        grad,
        retained,
        sample_masked: false,
    })
}

/// Additive-margin softmax: the target logit is shifted by −m and all logits
/// scaled by s before the cross-entropy.
pub fn am_softmax(o: &[f64], target: usize, s_scale: f64, m_margin: f64) -> Result<LossResult> {
    validate_logits(o)?;
    validate_class(o, target)?;
    if !(s_scale.is_finite() && s_scale > 0.0) {
        return Err(Error::Config(format!("s_scale {s_scale} must be positive")));
    }
    if !(m_margin.is_finite() && m_margin >= 0.0) {
        return Err(Error::Config(format!("m_margin {m_margin} is negative")));
    }
    let shifted: Vec<f64> = o
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            if j == target {
                s_scale * (x - m_margin)
            } else {
                s_scale * x
            }
        })
        .collect();
    if shifted.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric {
            step: None,
            msg: "additive-margin logits overflowed".into(),
        });
    }
    let retained = vec![true; o.len()];
    let (loss, mut grad) = renorm_ce(&shifted, &retained, target);
    for g in &mut grad {
        *g *= s_scale;
    }
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric {
            step: None,
            msg: "additive-margin loss is not finite".into(),
        });
    }
    Ok(LossResult {
        loss,
        grad,
        retained,
        sample_masked: false,
    })
}

fn one_hot_at(p: &[f64], target: usize) -> bool {
    p.iter()
        .enumerate()
        .all(|(i, &x)| if i == target { x == 1.0 } else { x == 0.0 })
}

/// Sparsemax training loss. The gradient is exactly
/// `simplex_project(o) − onehot(t)`; the forward value is the closed form
/// ⟨p − y, o⟩ + (1 − ‖p‖²)/2.
pub fn sparsemax_loss(o: &[f64], target: usize) -> Result<LossResult> {
    validate_logits(o)?;
    validate_class(o, target)?;
    let p = simplex_project(o)?;
    let mut loss = 0.0;
    let mut sq = 0.0;
    let mut grad = vec![0.0; o.len()];
    for (j, (&pj, &oj)) in p.values().iter().zip(o).enumerate() {
        let y = if j == target { 1.0 } else { 0.0 };
        grad[j] = pj - y;
        loss += (pj - y) * oj;
        sq += pj * pj;
    }
    loss += 0.5 * (1.0 - sq);
    let sample_masked = one_hot_at(p.values(), target);
    Ok(LossResult {
        loss: loss.max(0.0),
        grad,
        retained: p.values().iter().map(|&x| x > 0.0).collect(),
        sample_masked,
    })
}

/// 1.5-entmax training loss. The gradient is exactly
/// `entmax15(o) − onehot(t)`; the forward value is the Tsallis potential
/// closed form ⟨p − y, o⟩ + (4/3)(1 − Σ p^{3/2}).
pub fn entmax15_loss(o: &[f64], target: usize) -> Result<LossResult> {
    validate_logits(o)?;
    validate_class(o, target)?;
    let p = entmax15(o)?;
    let mut loss = 0.0;
    let mut power = 0.0;
    let mut grad = vec![0.0; o.len()];
    for (j, (&pj, &oj)) in p.values().iter().zip(o).enumerate() {
        let y = if j == target { 1.0 } else { 0.0 };
        grad[j] = pj - y;
        loss += (pj - y) * oj;
        power += pj * pj.sqrt();
    }
    loss += (4.0 / 3.0) * (1.0 - power);
    let sample_masked = one_hot_at(p.values(), target);
    Ok(LossResult {
        loss: loss.max(0.0),
        grad,
        retained: p.values().iter().map(|&x| x > 0.0).collect(),
        sample_masked,
    })
}

/// Adaptive sparse softmax. Classes whose softmax probability trails the
/// target's by at least δ are dropped and the cross-entropy is renormalised
/// over the rest; when every non-target class is dropped the sample is
/// masked (zero loss, zero gradient).
pub fn as_softmax(o: &[f64], target: usize, delta: f64) -> Result<LossResult> {
    validate_logits(o)?;
    validate_class(o, target)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Config(format!("delta {delta} not in (0, 1]")));
    }
    let p = stable_softmax(o)?;
    let decision = mask_multiclass(&p, target, delta)?;
    if decision.sample_masked {
        return Ok(LossResult::masked(o.len(), Some(target)));
    }
    let (loss, grad) = renorm_ce(o, &decision.retained, target);
    Ok(LossResult {
        loss,
        grad,
        retained: decision.retained,
        sample_masked: false,
    })
}

/// The logit-margin variant: same renormalisation as [`as_softmax`] but the
/// drop criterion is o_t − o_i ≥ δ' on raw logits. δ' = ∞ disables masking.
pub fn as_variant(o: &[f64], target: usize, delta_prime: f64) -> Result<LossResult> {
    validate_logits(o)?;
    validate_class(o, target)?;
    if delta_prime.is_nan() || delta_prime < 0.0 {
        return Err(Error::Config(format!("delta_prime {delta_prime} is negative")));
    }
    let mut retained = vec![true; o.len()];
    let mut any_kept = false;
    for (i, &oi) in o.iter().enumerate() {
        if i != target && o[target] - oi >= delta_prime {
            retained[i] = false;
        } else if i != target {
            any_kept = true;
        }
    }
    if !any_kept {
        return Ok(LossResult::masked(o.len(), Some(target)));
    }
    let (loss, grad) = renorm_ce(o, &retained, target);
    Ok(LossResult {
        loss,
        grad,
        retained,
        sample_masked: false,
    })
}

/// Shared forward/gradient for the multi-label softmax losses; `retained`
/// carries the binary z factors (all-true for the plain loss).
fn multilabel_terms(o: &[f64], targets: &MultiLabelTarget, retained: &[bool]) -> (f64, Vec<f64>) {
    let mut neg_terms = vec![0.0];
    let mut pos_terms = vec![0.0];
    for i in targets.negatives() {
        if retained[i] {
            neg_terms.push(o[i]);
        }
    }
    for &t in targets.positives() {
        if retained[t] {
            pos_terms.push(-o[t]);
        }
    }
    let lse_neg = log_sum_exp(&neg_terms).expect("finite by construction");
    let lse_pos = log_sum_exp(&pos_terms).expect("finite by construction");
    let mut grad = vec![0.0; o.len()];
    for i in targets.negatives() {
        if retained[i] {
            grad[i] = (o[i] - lse_neg).exp();
        }
    }
    for &t in targets.positives() {
        if retained[t] {
            grad[t] = -(-o[t] - lse_pos).exp();
        }
    }
    (lse_neg + lse_pos, grad)
}

fn validate_multilabel(o: &[f64], targets: &MultiLabelTarget) -> Result<()> {
    validate_logits(o)?;
    if targets.n_classes() != o.len() {
        return Err(Error::Contract(format!(
            "target defined over {} classes but got {} logits",
            targets.n_classes(),
            o.len()
        )));
    }
    Ok(())
}

/// Multi-label softmax loss
/// log(1+Σ_{i∈neg} e^{o_i}) + log(1+Σ_{t∈pos} e^{−o_t}): positive logits are
/// pushed above zero and negative logits below zero.
pub fn multilabel_softmax(o: &[f64], targets: &MultiLabelTarget) -> Result<LossResult> {
    validate_multilabel(o, targets)?;
    let retained = vec![true; o.len()];
    let (loss, grad) = multilabel_terms(o, targets, &retained);
    Ok(LossResult {
        loss,
        grad,
        retained,
        sample_masked: false,
    })
}

/// Adaptive sparse softmax for multi-label targets: a negative class is
/// dropped once the smallest positive probability leads it by δ, a positive
/// class once it leads the largest negative probability by δ. The sample is
/// masked when the smallest positive leads the largest negative by δ.
pub fn as_multilabel(o: &[f64], targets: &MultiLabelTarget, delta: f64) -> Result<LossResult> {
    validate_multilabel(o, targets)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Config(format!("delta {delta} not in (0, 1]")));
    }
    let p = stable_softmax(o)?;
    let decision = mask_multilabel(&p, targets, delta)?;
    if decision.sample_masked {
        return Ok(LossResult::masked(o.len(), None));
    }
    let (loss, grad) = multilabel_terms(o, targets, &decision.retained);
    Ok(LossResult {
        loss,
        grad,
        retained: decision.retained,
        sample_masked: false,
    })
}

/// Evaluates the loss selected by `kind`, pulling its hyper-parameters from
/// `cfg`. The target variant must match the task family of the loss.
pub fn evaluate_loss(
    kind: LossKind,
    cfg: &LossConfig,
    o: &[f64],
    target: &Target<'_>,
) -> Result<LossResult> {
    match (kind, target) {
        (LossKind::Softmax, Target::Class(t)) => softmax_ce(o, *t),
        (LossKind::TSoftmax, Target::Class(t)) => t_softmax_ce(o, *t, cfg.tau),
        (LossKind::LabelSmoothing, Target::Class(t)) => label_smoothing_ce(o, *t, cfg.epsilon),
        (LossKind::SparseSoftmax, Target::Class(t)) => sparse_topk_ce(o, *t, cfg.k),
        (LossKind::AmSoftmax, Target::Class(t)) => am_softmax(o, *t, cfg.s_scale, cfg.m_margin),
        (LossKind::Sparsemax, Target::Class(t)) => sparsemax_loss(o, *t),
        (LossKind::Entmax15, Target::Class(t)) => entmax15_loss(o, *t),
        (LossKind::AsSoftmax, Target::Class(t)) => as_softmax(o, *t, cfg.delta),
        (LossKind::AsVariant, Target::Class(t)) => as_variant(o, *t, cfg.delta_prime),
        (LossKind::MultilabelSoftmax, Target::Labels(tl)) => multilabel_softmax(o, tl),
        (LossKind::AsMultilabel, Target::Labels(tl)) => as_multilabel(o, tl, cfg.delta),
        (kind, _) => Err(Error::Contract(format!(
            "loss `{kind}` does not accept this target kind"
        ))),
    }
}
