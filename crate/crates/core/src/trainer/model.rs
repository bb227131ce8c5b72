//! Stand-in classifiers with exact hand-derived gradients: a linear model
//! and a one-hidden-layer rectifier network.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classifier architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ModelArch {
    Linear,
    Mlp { hidden: usize },
}

/// Flat parameter storage.
///
/// Linear layout: `[W (n×d row-major), b (n)]`.
/// MLP layout: `[W1 (h×d), b1 (h), W2 (n×h), b2 (n)]` with a rectifier
/// between the layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub arch: ModelArch,
    pub input_dim: usize,
    pub n_classes: usize,
    pub params: Vec<f64>,
}

impl Model {
    pub fn param_count(arch: ModelArch, input_dim: usize, n_classes: usize) -> usize {
        match arch {
            ModelArch::Linear => n_classes * input_dim + n_classes,
            ModelArch::Mlp { hidden } => {
                hidden * input_dim + hidden + n_classes * hidden + n_classes
            }
        }
    }

    /// Initialises each layer uniformly in ±1/√fan_in, drawing parameters in
    /// layout order so results are reproducible per seed.
    pub fn init(
        arch: ModelArch,
        input_dim: usize,
        n_classes: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if input_dim < 1 || n_classes < 2 {
            return Err(Error::Config(
                "model needs input_dim ≥ 1 and n_classes ≥ 2".into(),
            ));
        }
        if let ModelArch::Mlp { hidden } = arch {
            if hidden < 1 {
                return Err(Error::Config("hidden width must be positive".into()));
            }
        }
        let mut params = Vec::with_capacity(Self::param_count(arch, input_dim, n_classes));
        match arch {
            ModelArch::Linear => {
                let bound = 1.0 / (input_dim as f64).sqrt();
                for _ in 0..n_classes * input_dim + n_classes {
                    params.push(rng.gen_range(-bound..bound));
                }
            }
            ModelArch::Mlp { hidden } => {
                let bound1 = 1.0 / (input_dim as f64).sqrt();
                for _ in 0..hidden * input_dim + hidden {
                    params.push(rng.gen_range(-bound1..bound1));
                }
                let bound2 = 1.0 / (hidden as f64).sqrt();
                for _ in 0..n_classes * hidden + n_classes {
                    params.push(rng.gen_range(-bound2..bound2));
                }
            }
        }
        Ok(Self {
            arch,
            input_dim,
            n_classes,
            params,
        })
    }

    fn check_features(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Contract(format!(
                "expected {} features, got {}",
                self.input_dim,
                x.len()
            )));
        }
        Ok(())
    }

    fn hidden_pre(&self, x: &[f64], hidden: usize) -> Vec<f64> {
        let d = self.input_dim;
        let b1_off = hidden * d;
        (0..hidden)
            .map(|k| {
                let mut acc = self.params[b1_off + k];
                for (j, &xj) in x.iter().enumerate() {
                    acc += self.params[k * d + j] * xj;
                }
                acc
            })
            .collect()
    }

    /// Logits for one sample.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_features(x)?;
        let d = self.input_dim;
        let n = self.n_classes;
        match self.arch {
            ModelArch::Linear => {
                let b_off = n * d;
                Ok((0..n)
                    .map(|c| {
                        let mut acc = self.params[b_off + c];
                        for (j, &xj) in x.iter().enumerate() {
                            acc += self.params[c * d + j] * xj;
                        }
                        acc
                    })
                    .collect())
            }
            ModelArch::Mlp { hidden } => {
                let act: Vec<f64> = self
                    .hidden_pre(x, hidden)
                    .into_iter()
                    .map(|v| v.max(0.0))
                    .collect();
                let w2_off = hidden * d + hidden;
                let b2_off = w2_off + n * hidden;
                Ok((0..n)
                    .map(|c| {
                        let mut acc = self.params[b2_off + c];
                        for (k, &ak) in act.iter().enumerate() {
                            acc += self.params[w2_off + c * hidden + k] * ak;
                        }
                        acc
                    })
                    .collect())
            }
        }
    }

    /// Accumulates ∂loss/∂params into `grad_out` (+=) given ∂loss/∂logits.
    /// A zero `loss_grad` contributes nothing.
    pub fn backward(&self, x: &[f64], loss_grad: &[f64], grad_out: &mut [f64]) -> Result<()> {
        self.check_features(x)?;
        if loss_grad.len() != self.n_classes || grad_out.len() != self.params.len() {
            return Err(Error::Contract("gradient buffer shape mismatch".into()));
        }
        let d = self.input_dim;
        let n = self.n_classes;
        match self.arch {
            ModelArch::Linear => {
                let b_off = n * d;
                for (c, &g) in loss_grad.iter().enumerate() {
                    for (j, &xj) in x.iter().enumerate() {
                        grad_out[c * d + j] += g * xj;
                    }
                    grad_out[b_off + c] += g;
                }
            }
            ModelArch::Mlp { hidden } => {
                let pre = self.hidden_pre(x, hidden);
                let act: Vec<f64> = pre.iter().map(|&v| v.max(0.0)).collect();
                let w2_off = hidden * d + hidden;
                let b2_off = w2_off + n * hidden;
                let mut d_act = vec![0.0; hidden];
                for (c, &g) in loss_grad.iter().enumerate() {
                    for (k, &ak) in act.iter().enumerate() {
                        grad_out[w2_off + c * hidden + k] += g * ak;
                        d_act[k] += g * self.params[w2_off + c * hidden + k];
                    }
                    grad_out[b2_off + c] += g;
                }
                let b1_off = hidden * d;
                for (k, (&da, &pk)) in d_act.iter().zip(&pre).enumerate() {
                    if pk > 0.0 {
                        for (j, &xj) in x.iter().enumerate() {
                            grad_out[k * d + j] += da * xj;
                        }
                        grad_out[b1_off + k] += da;
                    }
                }
            }
        }
        Ok(())
    }
}
