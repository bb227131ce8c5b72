//! Scratch preset explorer (not part of the deliverable test suite).

use as_softmax::datasets::{gen_multiclass, Targets};
use as_softmax::losses::LossKind;
use as_softmax::metrics::{p_margin_stats, pearson};
use as_softmax::presets::PresetKind;
use as_softmax::trainer::{evaluate, extract_hard_samples, split_logits, train};

fn main() {
    let seeds: Vec<i64> = vec![1, 2, 3, 4, 5];

    println!("=== separable ===");
    let ds = gen_multiclass(&PresetKind::Separable.spec()).unwrap();
    for &seed in &seeds {
        let soft = train(&ds, &PresetKind::Separable.settings(LossKind::Softmax, seed)).unwrap();
        let mut s = PresetKind::Separable.settings(LossKind::AsSoftmax, seed);
        s.loss_config.delta = 0.3;
        let asx = train(&ds, &s).unwrap();
        let mut sped_settings = PresetKind::Separable.settings(LossKind::AsSoftmax, seed);
        sped_settings.loss_config.delta = 0.3;
        sped_settings.accumulation = Some(PresetKind::Separable.scheduler());
        let sped = train(&ds, &sped_settings).unwrap();
        let first = asx.report.checkpoints.first().unwrap().masked_ratio;
        let last = asx.report.checkpoints.last().unwrap().masked_ratio;
        let soft_steps = soft.report.checkpoints.last().unwrap().cumulative_optimizer_steps;
        let sped_steps = sped.report.checkpoints.last().unwrap().cumulative_optimizer_steps;
        println!(
            "seed {seed}: masked {first:.3}->{last:.3} (diff {:.3}); acc soft {:.4} as {:.4} sped {:.4}; steps {soft_steps}->{sped_steps} ({:.0}%)",
            last - first,
            soft.report.final_test.primary(),
            asx.report.final_test.primary(),
            sped.report.final_test.primary(),
            100.0 * (1.0 - sped_steps as f64 / soft_steps as f64),
        );
    }

    println!("=== hard ===");
    let ds = gen_multiclass(&PresetKind::Hard.spec()).unwrap();
    let classes = match &ds.targets {
        Targets::MultiClass(c) => c.clone(),
        _ => unreachable!(),
    };
    let golds: Vec<usize> = ds.test.iter().map(|&i| classes[i]).collect();
    for delta in [0.2, 0.3, 0.35] {
        let mut accs = vec![];
        let mut vals = vec![];
        let mut rs = vec![];
        for &seed in &seeds {
            let mut s = PresetKind::Hard.settings(LossKind::AsSoftmax, seed);
            s.loss_config.delta = delta;
            let out = train(&ds, &s).unwrap();
            let losses: Vec<f64> = out.report.checkpoints.iter().map(|c| c.val_loss).collect();
            let metrics: Vec<f64> = out.report.checkpoints.iter().map(|c| c.val_metric).collect();
            rs.push(pearson(&losses, &metrics).unwrap_or(f64::NAN));
            accs.push(out.report.final_test.primary());
            vals.push(out.report.checkpoints.last().unwrap().val_metric);
        }
        println!(
            "as delta {delta}: acc {:?} mean {:.4}, val mean {:.4}, pearson {:?} mean {:.3}",
            accs.iter().map(|a| (a * 1e4).round() / 1e4).collect::<Vec<_>>(),
            accs.iter().sum::<f64>() / 5.0,
            vals.iter().sum::<f64>() / 5.0,
            rs.iter().map(|a| (a * 1e3).round() / 1e3).collect::<Vec<_>>(),
            rs.iter().sum::<f64>() / 5.0,
        );
    }
    let mut soft_accs = vec![];
    let mut soft_rs = vec![];
    for &seed in &seeds {
        let out = train(&ds, &PresetKind::Hard.settings(LossKind::Softmax, seed)).unwrap();
        let losses: Vec<f64> = out.report.checkpoints.iter().map(|c| c.val_loss).collect();
        let metrics: Vec<f64> = out.report.checkpoints.iter().map(|c| c.val_metric).collect();
        soft_rs.push(pearson(&losses, &metrics).unwrap_or(f64::NAN));
        soft_accs.push(out.report.final_test.primary());
    }
    println!(
        "softmax: acc {:?} mean {:.4}, pearson {:?} mean {:.3}",
        soft_accs.iter().map(|a| (a * 1e4).round() / 1e4).collect::<Vec<_>>(),
        soft_accs.iter().sum::<f64>() / 5.0,
        soft_rs.iter().map(|a| (a * 1e3).round() / 1e3).collect::<Vec<_>>(),
        soft_rs.iter().sum::<f64>() / 5.0,
    );

    // Margins (criterion 10 shape): pooled over seeds at delta 0.3.
    let mut as_correct: Vec<f64> = vec![];
    let mut soft_correct: Vec<f64> = vec![];
    for &seed in &seeds {
        let mut s = PresetKind::Hard.settings(LossKind::AsSoftmax, seed);
        s.loss_config.delta = 0.3;
        let out = train(&ds, &s).unwrap();
        let logits = split_logits(&out.model, &ds, &ds.test).unwrap();
        let (m, _) = p_margin_stats(&logits, &golds, 0.05).unwrap();
        as_correct.extend(m.iter().filter(|x| x.correct).map(|x| x.p_margin));
        let out = train(&ds, &PresetKind::Hard.settings(LossKind::Softmax, seed)).unwrap();
        let logits = split_logits(&out.model, &ds, &ds.test).unwrap();
        let (m, _) = p_margin_stats(&logits, &golds, 0.05).unwrap();
        soft_correct.extend(m.iter().filter(|x| x.correct).map(|x| x.p_margin));
    }
    let med = |v: &mut Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let in_band = as_correct.iter().filter(|&&m| m > 0.0 && m <= 0.5).count() as f64
        / as_correct.len() as f64;
    println!(
        "margins: as median {:.3} soft median {:.3}, as in (0,0.5] {:.3}",
        med(&mut as_correct.clone()),
        med(&mut soft_correct.clone()),
        in_band
    );

    println!("=== noisy (hard-sample direction) ===");
    let ds = gen_multiclass(&PresetKind::Noisy.spec()).unwrap();
    for &seed in &seeds {
        let mut s = PresetKind::Noisy.settings(LossKind::AsSoftmax, seed);
        s.loss_config.delta = 0.3;
        let out = train(&ds, &s).unwrap();
        let hard = extract_hard_samples(&out.report).unwrap();
        // Noise overlap: how many hard samples have flipped labels?
        let clean = gen_multiclass(&as_softmax::datasets::SynthSpec {
            label_noise_rate: 0.0,
            ..PresetKind::Noisy.spec()
        })
        .unwrap();
        let (noisy_t, clean_t) = match (&ds.targets, &clean.targets) {
            (Targets::MultiClass(a), Targets::MultiClass(b)) => (a, b),
            _ => unreachable!(),
        };
        let frac_flipped_in_hard = hard.iter().filter(|&&i| noisy_t[i] != clean_t[i]).count()
            as f64
            / hard.len() as f64;

        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut pool = ds.train.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed as u64);
        for i in 0..hard.len() {
            let j = rng.gen_range(i..pool.len());
            pool.swap(i, j);
        }
        pool.truncate(hard.len());

        let retrain = PresetKind::Noisy.settings(LossKind::Softmax, seed);
        let hard_ds = ds.with_train_subset(hard.clone()).unwrap();
        let rand_ds = ds.with_train_subset(pool).unwrap();
        let hard_out = train(&hard_ds, &retrain).unwrap();
        let rand_out = train(&rand_ds, &retrain).unwrap();
        let hard_acc = evaluate(&hard_out.model, &hard_ds, &hard_ds.test, false)
            .unwrap()
            .primary();
        let rand_acc = rand_out.report.final_test.primary();
        println!(
            "seed {seed}: hard set {} ({}% flipped), retrain acc hard {:.4} vs random {:.4} ({})",
            hard.len(),
            (frac_flipped_in_hard * 100.0).round(),
            hard_acc,
            rand_acc,
            if hard_acc < rand_acc { "OK" } else { "VIOLATED" }
        );
    }
}
