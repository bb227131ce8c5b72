//! Dataset handling: synthetic Gaussian-cluster generators for multi-class
//! and multi-label tasks, a generic CSV ingester, and the imbalance
//! resampling protocols.

mod csv_io;
mod synth;

pub use csv_io::{load_csv, write_csv, CsvSchema};
pub use synth::{gen_multiclass, gen_multilabel};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::MultiLabelTarget;

/// Which classification family a dataset belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    MultiClass,
    MultiLabel,
}

/// Per-sample targets for the whole dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Targets {
    MultiClass(Vec<usize>),
    MultiLabel(Vec<Vec<usize>>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::MultiClass(v) => v.len(),
            Targets::MultiLabel(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An in-memory dataset with disjoint train/val/test splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub targets: Targets,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub n_classes: usize,
    pub dim: usize,
    /// Class-name → index mapping in first-seen order.
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn task_kind(&self) -> TaskKind {
        match self.targets {
            Targets::MultiClass(_) => TaskKind::MultiClass,
            Targets::MultiLabel(_) => TaskKind::MultiLabel,
        }
    }

    pub fn n_samples(&self) -> usize {
        self.features.len()
    }

    /// The single target class of sample `i` (multi-class datasets).
    pub fn class_of(&self, i: usize) -> Result<usize> {
        match &self.targets {
            Targets::MultiClass(v) => Ok(v[i]),
            Targets::MultiLabel(_) => {
                Err(Error::Contract("multi-label dataset has no single class".into()))
            }
        }
    }

    /// The positive label set of sample `i` (multi-label datasets).
    pub fn labels_of(&self, i: usize) -> Result<MultiLabelTarget> {
        match &self.targets {
            Targets::MultiLabel(v) => MultiLabelTarget::new(v[i].clone(), self.n_classes),
            Targets::MultiClass(_) => {
                Err(Error::Contract("multi-class dataset has no label sets".into()))
            }
        }
    }

    /// A copy with the train split replaced by `indices` (val/test untouched).
    pub fn with_train_subset(&self, indices: Vec<usize>) -> Result<Dataset> {
        if indices.iter().any(|&i| i >= self.n_samples()) {
            return Err(Error::Contract("train subset index out of range".into()));
        }
        let mut out = self.clone();
        out.train = indices;
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_samples();
        if self.targets.len() != n {
            return Err(Error::Contract("feature/target length mismatch".into()));
        }
        if self.features.iter().any(|f| f.len() != self.dim) {
            return Err(Error::Contract("feature row with wrong dimension".into()));
        }
        let mut seen = vec![false; n];
        for &i in self.train.iter().chain(&self.val).chain(&self.test) {
            if i >= n {
                return Err(Error::Contract(format!("split index {i} out of range")));
            }
            if seen[i] {
                return Err(Error::Contract(format!("sample {i} in more than one split")));
            }
            seen[i] = true;
        }
        match &self.targets {
            Targets::MultiClass(v) => {
                if v.iter().any(|&c| c >= self.n_classes) {
                    return Err(Error::Contract("class index out of range".into()));
                }
            }
            Targets::MultiLabel(v) => {
                for labels in v {
                    if labels.is_empty() {
                        return Err(Error::Contract("sample with empty positive set".into()));
                    }
                    if labels.iter().any(|&c| c >= self.n_classes) {
                        return Err(Error::Contract("label index out of range".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Specification of a synthetic Gaussian-cluster dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_classes: usize,
    pub dim: usize,
    pub samples_per_class: usize,
    /// Distance of each cluster mean from the origin (unit covariance noise).
    pub separation: f64,
    /// Fraction of train labels resampled uniformly among other classes.
    pub label_noise_rate: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::Config("need at least 2 classes".into()));
        }
        if self.dim < 1 || self.samples_per_class < 1 {
            return Err(Error::Config("dim and samples_per_class must be positive".into()));
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return Err(Error::Config(format!(
                "separation {} must be nonnegative",
                self.separation
            )));
        }
        if !(0.0..1.0).contains(&self.label_noise_rate) {
            return Err(Error::Config(format!(
                "label_noise_rate {} not in [0, 1)",
                self.label_noise_rate
            )));
        }
        Ok(())
    }
}

/// How to skew the train split of a balanced dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ResampleMode {
    /// Setting 1: majors untouched, every minor subsampled to `minor_count`.
    KeepMajorShrinkMinor { minor_count: usize },
    /// Setting 2: minors fixed at `minor_count`, majors subsampled to
    /// `minor_count × major_ratio`.
    FixMinorGrowMajor { minor_count: usize, major_ratio: f64 },
}

/// Skews only the train split; val/test and the class universe are
/// preserved. Selection keeps the original train order so a request equal to
/// the current size is the identity.
pub fn resample_imbalance(
    ds: &Dataset,
    major_classes: &[usize],
    mode: ResampleMode,
    seed: u64,
) -> Result<Dataset> {
    let classes = match &ds.targets {
        Targets::MultiClass(v) => v,
        Targets::MultiLabel(_) => {
            return Err(Error::Contract(
                "imbalance resampling requires a multi-class dataset".into(),
            ))
        }
    };
    if major_classes.iter().any(|&c| c >= ds.n_classes) {
        return Err(Error::Contract("major class index out of range".into()));
    }
    let is_major: Vec<bool> = (0..ds.n_classes)
        .map(|c| major_classes.contains(&c))
        .collect();

    // Train positions grouped by class, in train order.
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.n_classes];
    for (pos, &i) in ds.train.iter().enumerate() {
        by_class[classes[i]].push(pos);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; ds.train.len()];
    for (c, positions) in by_class.iter().enumerate() {
        let target = match mode {
            ResampleMode::KeepMajorShrinkMinor { minor_count } => {
                if is_major[c] {
                    positions.len()
                } else {
                    minor_count
                }
            }
            ResampleMode::FixMinorGrowMajor {
                minor_count,
                major_ratio,
            } => {
                if is_major[c] {
                    (minor_count as f64 * major_ratio).round() as usize
                } else {
                    minor_count
                }
            }
        };
        if target > positions.len() {
            return Err(Error::Contract(format!(
                "class {c}: requested {target} train samples but only {} available",
                positions.len()
            )));
        }
        if target == positions.len() {
            for &p in positions {
                keep[p] = true;
            }
            continue;
        }
        let mut pool = positions.clone();
        for i in 0..target {
            let j = rng.gen_range(i..pool.len());
            pool.swap(i, j);
            keep[pool[i]] = true;
        }
    }

    let mut out = ds.clone();
    out.train = ds
        .train
        .iter()
        .enumerate()
        .filter(|(pos, _)| keep[*pos])
        .map(|(_, &i)| i)
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resample_identity_when_counts_match() {
        let ds = gen_multiclass(&SynthSpec {
            n_classes: 3,
            dim: 4,
            samples_per_class: 30,
            separation: 3.0,
            label_noise_rate: 0.0,
            seed: 5,
        })
        .unwrap();
        let counts = train_counts(&ds);
        let minor_count = *counts.iter().min().unwrap();
        // Shrinking minors to their current size must be the identity when
        // every minor already has exactly that many samples.
        let majors: Vec<usize> = (0..3).filter(|&c| counts[c] != minor_count).collect();
        let rs = resample_imbalance(
            &ds,
            &majors,
            ResampleMode::KeepMajorShrinkMinor { minor_count },
            99,
        )
        .unwrap();
        assert_eq!(rs.train, ds.train);
        assert_eq!(rs.val, ds.val);
        assert_eq!(rs.test, ds.test);
    }

    #[test]
    fn resample_shrinks_minors_only() {
        let ds = gen_multiclass(&SynthSpec {
            n_classes: 5,
            dim: 4,
            samples_per_class: 60,
            separation: 3.0,
            label_noise_rate: 0.0,
            seed: 6,
        })
        .unwrap();
        let before = train_counts(&ds);
        let majors = [1usize, 3];
        let rs = resample_imbalance(
            &ds,
            &majors,
            ResampleMode::KeepMajorShrinkMinor { minor_count: 10 },
            7,
        )
        .unwrap();
        let after = train_counts(&rs);
        for c in 0..5 {
            if majors.contains(&c) {
                assert_eq!(after[c], before[c]);
            } else {
                assert_eq!(after[c], 10);
            }
        }
        assert_eq!(rs.val, ds.val);
        assert_eq!(rs.test, ds.test);
        assert_eq!(rs.n_classes, 5);
    }

    #[test]
    fn resample_ratio_is_exact() {
        let ds = gen_multiclass(&SynthSpec {
            n_classes: 4,
            dim: 3,
            samples_per_class: 200,
            separation: 2.0,
            label_noise_rate: 0.0,
            seed: 8,
        })
        .unwrap();
        let majors = [0usize];
        let rs = resample_imbalance(
            &ds,
            &majors,
            ResampleMode::FixMinorGrowMajor {
                minor_count: 8,
                major_ratio: 15.0,
            },
            3,
        )
        .unwrap();
        let after = train_counts(&rs);
        assert_eq!(after[0], 120);
        assert_eq!(after[1], 8);
        assert_eq!(after[0] / after[1], 15);
    }

    #[test]
    fn resample_rejects_infeasible_counts() {
        let ds = gen_multiclass(&SynthSpec {
            n_classes: 3,
            dim: 2,
            samples_per_class: 10,
            separation: 2.0,
            label_noise_rate: 0.0,
            seed: 9,
        })
        .unwrap();
        assert!(resample_imbalance(
            &ds,
            &[0],
            ResampleMode::KeepMajorShrinkMinor { minor_count: 1000 },
            1,
        )
        .is_err());
    }

    fn train_counts(ds: &Dataset) -> Vec<usize> {
        let classes = match &ds.targets {
            Targets::MultiClass(v) => v,
            _ => unreachable!(),
        };
        let mut counts = vec![0usize; ds.n_classes];
        for &i in &ds.train {
            counts[classes[i]] += 1;
        }
        counts
    }
}
