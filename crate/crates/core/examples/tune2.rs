//! Scratch: grid probes for the hard and noisy presets.

use as_softmax::datasets::{gen_multiclass, SynthSpec, Targets};
use as_softmax::losses::LossKind;
use as_softmax::metrics::pearson;
use as_softmax::trainer::{
    extract_hard_samples, train, ModelArch, TrainSettings,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hard_spec(per_class: usize) -> SynthSpec {
    SynthSpec {
        n_classes: 5,
        dim: 8,
        samples_per_class: per_class,
        separation: 1.5,
        label_noise_rate: 0.2,
        seed: 29,
    }
}

fn settings(kind: LossKind, seed: i64, hidden: usize, lr: f64, epochs: u32) -> TrainSettings {
    let mut s = TrainSettings::new(ModelArch::Mlp { hidden }, kind);
    s.optimizer.seed = seed;
    s.optimizer.learning_rate = lr;
    s.optimizer.epochs = epochs;
    s.loss_config.delta = 0.3;
    s
}

fn hard_grid() {
    for per_class in [300usize] {
        let ds = gen_multiclass(&hard_spec(per_class)).unwrap();
        for hidden in [256usize, 512] {
            for lr in [0.02, 0.03, 0.05] {
                for epochs in [24u32, 32] {
                    let mut soft_r = vec![];
                    let mut as_r = vec![];
                    let mut soft_acc = vec![];
                    let mut as_acc = vec![];
                    for seed in 1..=5i64 {
                        for kind in [LossKind::Softmax, LossKind::AsSoftmax] {
                            let out =
                                train(&ds, &settings(kind, seed, hidden, lr, epochs)).unwrap();
                            let losses: Vec<f64> =
                                out.report.checkpoints.iter().map(|c| c.val_loss).collect();
                            let accs: Vec<f64> =
                                out.report.checkpoints.iter().map(|c| c.val_metric).collect();
                            let r = pearson(&losses, &accs).unwrap_or(f64::NAN);
                            if kind == LossKind::Softmax {
                                soft_r.push(r);
                                soft_acc.push(out.report.final_test.primary());
                            } else {
                                as_r.push(r);
                                as_acc.push(out.report.final_test.primary());
                            }
                        }
                    }
                    let m = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
                    println!(
                        "pc {per_class} h {hidden} lr {lr} ep {epochs}: soft r {:.3} acc {:.3} | as r {:.3} acc {:.3} | as_r per-seed {:?}",
                        m(&soft_r), m(&soft_acc), m(&as_r), m(&as_acc),
                        as_r.iter().map(|a| (a * 100.0).round() / 100.0).collect::<Vec<_>>()
                    );
                }
            }
        }
    }
}

fn noisy_grid() {
    for sep in [2.5, 3.0, 4.0] {
        let spec = SynthSpec {
            n_classes: 5,
            dim: 8,
            samples_per_class: 240,
            separation: sep,
            label_noise_rate: 0.3,
            seed: 37,
        };
        let ds = gen_multiclass(&spec).unwrap();
        let clean = gen_multiclass(&SynthSpec {
            label_noise_rate: 0.0,
            ..spec
        })
        .unwrap();
        let (noisy_t, clean_t) = match (&ds.targets, &clean.targets) {
            (Targets::MultiClass(a), Targets::MultiClass(b)) => (a, b),
            _ => unreachable!(),
        };
        for delta in [0.15, 0.2, 0.3] {
            let mut oks = 0;
            let mut summary = String::new();
            for seed in 1..=5i64 {
                let mut s = TrainSettings::new(ModelArch::Linear, LossKind::AsSoftmax);
                s.optimizer.seed = seed;
                s.optimizer.learning_rate = 0.02;
                s.optimizer.epochs = 12;
                s.loss_config.delta = delta;
                let out = train(&ds, &s).unwrap();
                let hard = extract_hard_samples(&out.report).unwrap();
                let flipped_in_hard =
                    hard.iter().filter(|&&i| noisy_t[i] != clean_t[i]).count();

                let mut pool = ds.train.clone();
                let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
                for i in 0..hard.len() {
                    let j = rng.gen_range(i..pool.len());
                    pool.swap(i, j);
                }
                pool.truncate(hard.len());

                let mut retrain = TrainSettings::new(ModelArch::Linear, LossKind::Softmax);
                retrain.optimizer.seed = seed;
                retrain.optimizer.learning_rate = 0.02;
                retrain.optimizer.epochs = 12;
                let hard_acc = train(&ds.with_train_subset(hard.clone()).unwrap(), &retrain)
                    .unwrap()
                    .report
                    .final_test
                    .primary();
                let rand_acc = train(&ds.with_train_subset(pool).unwrap(), &retrain)
                    .unwrap()
                    .report
                    .final_test
                    .primary();
                if hard_acc < rand_acc {
                    oks += 1;
                }
                summary.push_str(&format!(
                    " s{seed}[n={} fl={}% h={:.3} r={:.3}]",
                    hard.len(),
                    (100.0 * flipped_in_hard as f64 / hard.len() as f64).round(),
                    hard_acc,
                    rand_acc
                ));
            }
            println!("sep {sep} delta {delta}: {oks}/5 ok;{summary}");
        }
    }
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "hard".into());
    match which.as_str() {
        "hard" => hard_grid(),
        "noisy" => noisy_grid(),
        _ => {
            hard_grid();
            noisy_grid();
        }
    }
}
