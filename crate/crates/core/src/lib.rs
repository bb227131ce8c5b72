//! Adaptive sparse softmax (AS-Softmax) and friends.
//!
//! The adaptive sparse losses drop classes whose probability trails the
//! target class by a margin δ and renormalise over the rest; once every
//! competitor is dropped the sample's loss is exactly zero and it leaves
//! back-propagation. The crate bundles:
//!
//! - [`numerics`]: stable log-sum-exp/softmax, simplex projection
//!   (sparsemax), and the exact sorting-based 1.5-entmax mapping;
//! - [`losses`]: softmax cross-entropy, temperature softmax, label
//!   smoothing, sparse top-k, additive-margin softmax, sparsemax and
//!   1.5-entmax losses, the adaptive sparse losses (multi-class,
//!   multi-label, and the raw-logit-margin variant);
//! - [`masking`]: the margin criterion, δ warm-up, and batch mask counts;
//! - [`scheduler`]: masked-ratio-driven adaptive gradient accumulation;
//! - [`trainer`]: deterministic linear/MLP training with AdamW and exact
//!   hand-derived gradients;
//! - [`datasets`]: synthetic cluster generators, CSV ingestion, imbalance
//!   resampling;
//! - [`metrics`]: accuracy, macro/micro-F1, Pearson correlation,
//!   probability-margin statistics;
//! - [`presets`]: the canonical desk-scale experiment setups.

pub mod datasets;
pub mod error;
pub mod losses;
pub mod masking;
pub mod metrics;
pub mod numerics;
pub mod presets;
pub mod scheduler;
pub mod trainer;

pub use error::{Error, Result};
