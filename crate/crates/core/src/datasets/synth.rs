//! Synthetic Gaussian-cluster datasets. Fully deterministic per (spec, seed).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Dataset, SynthSpec, Targets};
use crate::error::{Error, Result};

const TRAIN_FRACTION: f64 = 0.70;
const VAL_FRACTION: f64 = 0.15;

/// Cluster mean directions: standard basis vectors when the dimension
/// allows, otherwise random unit vectors.
fn unit_directions(count: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    if dim >= count {
        (0..count)
            .map(|c| {
                let mut v = vec![0.0; dim];
                v[c] = 1.0;
                v
            })
            .collect()
    } else {
        (0..count)
            .map(|_| loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-6 {
                    return v.into_iter().map(|x| x / norm).collect();
                }
            })
            .collect()
    }
}

fn split_indices(n: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    let n_train = (TRAIN_FRACTION * n as f64).floor() as usize;
    let n_val = (VAL_FRACTION * n as f64).floor() as usize;
    let test = idx.split_off(n_train + n_val);
    let mut train = idx;
    let val = train.split_off(n_train);
    (train, val, test)
}

/// Picks ⌊rate·len⌋ distinct positions of `pool` via partial shuffle.
fn pick_noise_positions(pool: &[usize], rate: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n_flip = (rate * pool.len() as f64).floor() as usize;
    let mut copy = pool.to_vec();
    for i in 0..n_flip {
        let j = rng.gen_range(i..copy.len());
        copy.swap(i, j);
    }
    copy.truncate(n_flip);
    copy
}

/// Multi-class Gaussian mixture: one unit-covariance cluster per class with
/// means `separation` apart from the origin, split 70/15/15, with
/// `label_noise_rate` of the train labels resampled uniformly among the
/// other classes.
pub fn gen_multiclass(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let means = unit_directions(spec.n_classes, spec.dim, &mut rng);

    let n = spec.n_classes * spec.samples_per_class;
    let mut features = Vec::with_capacity(n);
    let mut classes = Vec::with_capacity(n);
    for (c, mean) in means.iter().enumerate() {
        for _ in 0..spec.samples_per_class {
            let x: Vec<f64> = mean
                .iter()
                .map(|&m| spec.separation * m + rng.sample::<f64, _>(StandardNormal))
                .collect();
            features.push(x);
            classes.push(c);
        }
    }

    let (train, val, test) = split_indices(n, &mut rng);
    for &i in &pick_noise_positions(&train, spec.label_noise_rate, &mut rng) {
        let old = classes[i];
        let r = rng.gen_range(0..spec.n_classes - 1);
        classes[i] = if r >= old { r + 1 } else { r };
    }

    let ds = Dataset {
        features,
        targets: Targets::MultiClass(classes),
        train,
        val,
        test,
        n_classes: spec.n_classes,
        dim: spec.dim,
        class_names: (0..spec.n_classes).map(|c| format!("c{c}")).collect(),
    };
    ds.validate()?;
    Ok(ds)
}

/// Multi-label clusters: classes are partitioned into groups of
/// `labels_per_sample`; each cluster's samples share its group's label set.
/// Label noise reassigns a sample's label set to another group's.
pub fn gen_multilabel(spec: &SynthSpec, labels_per_sample: usize) -> Result<Dataset> {
    spec.validate()?;
    if labels_per_sample < 1 || labels_per_sample >= spec.n_classes {
        return Err(Error::Config(format!(
            "labels_per_sample {labels_per_sample} must be in [1, n_classes)"
        )));
    }
    let groups = spec.n_classes / labels_per_sample;
    if groups < 2 {
        return Err(Error::Config(
            "need at least 2 label groups; lower labels_per_sample or add classes".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let means = unit_directions(groups, spec.dim, &mut rng);

    let group_labels: Vec<Vec<usize>> = (0..groups)
        .map(|g| (g * labels_per_sample..(g + 1) * labels_per_sample).collect())
        .collect();

    let n = groups * spec.samples_per_class;
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (g, mean) in means.iter().enumerate() {
        for _ in 0..spec.samples_per_class {
            let x: Vec<f64> = mean
                .iter()
                .map(|&m| spec.separation * m + rng.sample::<f64, _>(StandardNormal))
                .collect();
            features.push(x);
            labels.push(group_labels[g].clone());
        }
    }

    let (train, val, test) = split_indices(n, &mut rng);
    for &i in &pick_noise_positions(&train, spec.label_noise_rate, &mut rng) {
        let old = i / spec.samples_per_class;
        let r = rng.gen_range(0..groups - 1);
        let g = if r >= old { r + 1 } else { r };
        labels[i] = group_labels[g].clone();
    }

    let ds = Dataset {
        features,
        targets: Targets::MultiLabel(labels),
        train,
        val,
        test,
        n_classes: spec.n_classes,
        dim: spec.dim,
        class_names: (0..spec.n_classes).map(|c| format!("c{c}")).collect(),
    };
    ds.validate()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SynthSpec {
        SynthSpec {
            n_classes: 5,
            dim: 8,
            samples_per_class: 40,
            separation: 4.0,
            label_noise_rate: 0.0,
            seed: 21,
        }
    }

    #[test]
    fn multiclass_is_deterministic() {
        let a = gen_multiclass(&spec()).unwrap();
        let b = gen_multiclass(&spec()).unwrap();
        assert_eq!(a, b);
        let mut other = spec();
        other.seed = 22;
        assert_ne!(gen_multiclass(&other).unwrap(), a);
    }

    #[test]
    fn multiclass_split_sizes() {
        let ds = gen_multiclass(&spec()).unwrap();
        assert_eq!(ds.n_samples(), 200);
        assert_eq!(ds.train.len(), 140);
        assert_eq!(ds.val.len(), 30);
        assert_eq!(ds.test.len(), 30);
    }

    #[test]
    fn label_noise_flips_expected_fraction() {
        let mut s = spec();
        s.label_noise_rate = 0.2;
        s.samples_per_class = 100;
        let noisy = gen_multiclass(&s).unwrap();
        s.label_noise_rate = 0.0;
        let clean = gen_multiclass(&s).unwrap();
        let (a, b) = match (&noisy.targets, &clean.targets) {
            (Targets::MultiClass(a), Targets::MultiClass(b)) => (a, b),
            _ => unreachable!(),
        };
        let flipped = noisy
            .train
            .iter()
            .filter(|&&i| a[i] != b[i])
            .count();
        let frac = flipped as f64 / noisy.train.len() as f64;
        assert!(frac >= 0.18, "only {frac} of train labels flipped");
        assert!(frac <= 0.2 + 1e-9);
        // Val/test labels keep their cluster identity.
        assert!(noisy.val.iter().chain(&noisy.test).all(|&i| a[i] == b[i]));
    }

    #[test]
    fn multilabel_fixed_cardinality() {
        let ds = gen_multilabel(&spec(), 2).unwrap();
        let labels = match &ds.targets {
            Targets::MultiLabel(v) => v,
            _ => unreachable!(),
        };
        assert!(labels.iter().all(|l| l.len() == 2));
        assert_eq!(gen_multilabel(&spec(), 2).unwrap(), ds);
    }

    #[test]
    fn multilabel_rejects_bad_cardinality() {
        assert!(gen_multilabel(&spec(), 0).is_err());
        assert!(gen_multilabel(&spec(), 5).is_err());
        assert!(gen_multilabel(&spec(), 4).is_err()); // only one group
    }
}
