//! The six subcommands: gen-data, train, compare, sweep, hard-samples,
//! imbalance.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use as_softmax::datasets::{
    gen_multiclass, gen_multilabel, resample_imbalance, write_csv, Dataset, ResampleMode, Targets,
};
use as_softmax::losses::LossKind;
use as_softmax::metrics::{p_margin_stats, pearson, MarginSample};
use as_softmax::trainer::{extract_hard_samples, split_logits, train, TrainOutcome, TrainReport};

use crate::config::{DatasetSection, ExperimentConfig, ResolvedConfig};
use crate::exit::CliError;
use crate::output::{
    fmt_f64, render_table, write_json, write_margins_csv, write_rows_csv, write_series_csv,
};

pub struct CommonArgs {
    pub seeds: Vec<i64>,
    pub out: PathBuf,
    pub quiet: bool,
}

impl CommonArgs {
    fn ensure_out(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| CliError::Other(format!("cannot create `{}`: {e}", self.out.display())))
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn run_one(
    config: &ExperimentConfig,
    ds: &Dataset,
    seed: i64,
) -> Result<TrainOutcome, CliError> {
    let settings = config.settings(seed)?;
    Ok(train(ds, &settings)?)
}

fn test_margins(outcome: &TrainOutcome, ds: &Dataset) -> Result<Vec<MarginSample>, CliError> {
    match &ds.targets {
        Targets::MultiClass(classes) => {
            let logits = split_logits(&outcome.model, ds, &ds.test)?;
            let golds: Vec<usize> = ds.test.iter().map(|&i| classes[i]).collect();
            let (samples, _) = p_margin_stats(&logits, &golds, 0.05)?;
            Ok(samples)
        }
        Targets::MultiLabel(_) => Ok(Vec::new()),
    }
}

fn run_pearson(report: &TrainReport) -> Option<f64> {
    let losses: Vec<f64> = report.checkpoints.iter().map(|c| c.val_loss).collect();
    let metrics: Vec<f64> = report.checkpoints.iter().map(|c| c.val_metric).collect();
    pearson(&losses, &metrics).ok()
}

fn write_run_files(
    dir: &Path,
    config: &ExperimentConfig,
    seed: i64,
    outcome: &TrainOutcome,
    ds: &Dataset,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Other(format!("cannot create `{}`: {e}", dir.display())))?;
    write_json(&dir.join("resolved_config.json"), &ResolvedConfig { seed, config })?;
    write_json(&dir.join("report.json"), &outcome.report)?;
    write_series_csv(&dir.join("series.csv"), &outcome.report)?;
    write_margins_csv(&dir.join("margins.csv"), &test_margins(outcome, ds)?)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GenKind {
    Multiclass,
    Multilabel,
}

#[allow(clippy::too_many_arguments)]
pub fn gen_data(
    kind: GenKind,
    classes: usize,
    dim: usize,
    per_class: usize,
    separation: f64,
    noise: f64,
    labels_per_sample: usize,
    data_seed: u64,
    common: &CommonArgs,
) -> Result<(), CliError> {
    common.ensure_out()?;
    let section = DatasetSection {
        classes,
        dim,
        per_class,
        separation,
        label_noise: noise,
        seed: data_seed,
        labels_per_sample,
        ..DatasetSection::default()
    };
    let ds = match kind {
        GenKind::Multiclass => gen_multiclass(&section.spec())?,
        GenKind::Multilabel => gen_multilabel(&section.spec(), labels_per_sample)?,
    };
    let path = common.out.join("dataset.csv");
    write_csv(&ds, &path)?;
    common.say(format!(
        "wrote {} ({} classes, dim {}; {} train / {} val / {} test)",
        path.display(),
        ds.n_classes,
        ds.dim,
        ds.train.len(),
        ds.val.len(),
        ds.test.len()
    ));
    Ok(())
}

pub fn cmd_train(config_path: &Path, common: &CommonArgs) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let ds = config.dataset.build()?;
    common.ensure_out()?;
    for &seed in &common.seeds {
        let outcome = run_one(&config, &ds, seed)?;
        let dir = if common.seeds.len() == 1 {
            common.out.clone()
        } else {
            common.out.join(format!("seed-{seed}"))
        };
        write_run_files(&dir, &config, seed, &outcome, &ds)?;
        let last = outcome.report.checkpoints.last().unwrap();
        common.say(format!(
            "{} seed {seed}: test {} = {}, optimizer steps {}, masked ratio {}",
            config.loss.kind,
            if outcome.report.final_test.accuracy.is_some() {
                "accuracy"
            } else {
                "micro-f1"
            },
            fmt_f64(outcome.report.final_test.primary()),
            last.cumulative_optimizer_steps,
            fmt_f64(last.masked_ratio),
        ));
    }
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

pub fn cmd_compare(config_paths: &[PathBuf], common: &CommonArgs) -> Result<(), CliError> {
    if config_paths.len() < 2 {
        return Err(CliError::Usage("compare needs at least two --config".into()));
    }
    common.ensure_out()?;
    let header = [
        "method",
        "runs",
        "mean_metric",
        "std_metric",
        "mean_optimizer_steps",
        "mean_gradient_evaluations",
        "mean_pearson_r",
        "status",
    ];
    let mut rows = Vec::new();
    let mut any_failed = false;
    for path in config_paths {
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let result: Result<Vec<TrainOutcome>, CliError> = (|| {
            let config = ExperimentConfig::load(path)?;
            let ds = config.dataset.build()?;
            common
                .seeds
                .iter()
                .map(|&seed| run_one(&config, &ds, seed))
                .collect()
        })();
        match result {
            Ok(outcomes) => {
                let metrics: Vec<f64> = outcomes
                    .iter()
                    .map(|o| o.report.final_test.primary())
                    .collect();
                let steps: Vec<f64> = outcomes
                    .iter()
                    .map(|o| {
                        o.report.checkpoints.last().unwrap().cumulative_optimizer_steps as f64
                    })
                    .collect();
                let evals: Vec<f64> = outcomes
                    .iter()
                    .map(|o| {
                        o.report.checkpoints.last().unwrap().cumulative_gradient_evaluations
                            as f64
                    })
                    .collect();
                let pearsons: Vec<f64> = outcomes
                    .iter()
                    .filter_map(|o| run_pearson(&o.report))
                    .collect();
                rows.push(vec![
                    label,
                    outcomes.len().to_string(),
                    fmt_f64(mean(&metrics)),
                    fmt_f64(std_dev(&metrics)),
                    fmt_f64(mean(&steps)),
                    fmt_f64(mean(&evals)),
                    if pearsons.is_empty() {
                        "nan".to_string()
                    } else {
                        fmt_f64(mean(&pearsons))
                    },
                    "ok".to_string(),
                ]);
            }
            Err(e) => {
                any_failed = true;
                rows.push(vec![
                    label,
                    "0".to_string(),
                    "nan".to_string(),
                    "nan".to_string(),
                    "nan".to_string(),
                    "nan".to_string(),
                    "nan".to_string(),
                    format!("failed: {e}"),
                ]);
            }
        }
    }
    write_rows_csv(&common.out.join("compare.csv"), &header, &rows)?;
    let table = render_table(&header, &rows);
    std::fs::write(common.out.join("compare.txt"), &table)?;
    common.say(table.trim_end());
    if any_failed {
        return Err(CliError::Partial(
            "one or more comparison runs failed; partial results written".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    Delta,
    DeltaPrime,
}

pub fn cmd_sweep(
    config_path: &Path,
    param: SweepParam,
    values: &[f64],
    common: &CommonArgs,
) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Usage("sweep needs a nonempty --values list".into()));
    }
    let config = ExperimentConfig::load(config_path)?;
    for &v in values {
        let legal = match param {
            SweepParam::Delta => v > 0.0 && v <= 1.0,
            SweepParam::DeltaPrime => v >= 0.0 && !v.is_nan(),
        };
        if !legal {
            return Err(CliError::Usage(format!(
                "value {v} is out of range for {param:?}"
            )));
        }
    }
    match param {
        SweepParam::Delta if !config.loss.kind.applies_delta() => {
            return Err(CliError::Usage(format!(
                "sweeping delta requires an adaptive sparse loss, config uses `{}`",
                config.loss.kind
            )));
        }
        SweepParam::DeltaPrime if config.loss.kind != LossKind::AsVariant => {
            return Err(CliError::Usage(format!(
                "sweeping delta-prime requires loss `as-variant`, config uses `{}`",
                config.loss.kind
            )));
        }
        _ => {}
    }

    common.ensure_out()?;
    let ds = config.dataset.build()?;
    let header = ["param", "value", "seed", "val_metric", "test_metric"];
    let mut rows = Vec::new();
    for &value in values {
        let mut cfg = config.clone();
        match param {
            SweepParam::Delta => cfg.loss.delta = value,
            SweepParam::DeltaPrime => cfg.loss.delta_prime = value,
        }
        for &seed in &common.seeds {
            let outcome = run_one(&cfg, &ds, seed)?;
            rows.push(vec![
                match param {
                    SweepParam::Delta => "delta".to_string(),
                    SweepParam::DeltaPrime => "delta_prime".to_string(),
                },
                value.to_string(),
                seed.to_string(),
                fmt_f64(outcome.report.checkpoints.last().unwrap().val_metric),
                fmt_f64(outcome.report.final_test.primary()),
            ]);
        }
    }
    write_rows_csv(&common.out.join("sweep.csv"), &header, &rows)?;
    common.say(render_table(&header, &rows).trim_end());
    Ok(())
}

pub fn cmd_hard_samples(
    report_path: &Path,
    config_path: &Path,
    common: &CommonArgs,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(report_path)
        .map_err(|e| CliError::Usage(format!("cannot read `{}`: {e}", report_path.display())))?;
    let report: TrainReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad report `{}`: {e}", report_path.display())))?;
    let config = ExperimentConfig::load(config_path)?;
    let ds = config.dataset.build()?;
    if report.train_indices != ds.train {
        return Err(CliError::Usage(
            "report train split does not match the dataset in --config".into(),
        ));
    }
    let hard = extract_hard_samples(&report)?;
    if hard.is_empty() {
        return Err(CliError::Empty(
            "every train sample was masked; no hard samples to retrain on".into(),
        ));
    }

    common.ensure_out()?;
    // Retraining always uses plain softmax, whatever the base config says.
    let mut retrain = config.clone();
    retrain.loss.kind = LossKind::Softmax;

    let header = ["subset", "seed", "size", "test_accuracy"];
    let mut rows = Vec::new();
    for &seed in &common.seeds {
        let mut pool = ds.train.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
        for i in 0..hard.len() {
            let j = rng.gen_range(i..pool.len());
            pool.swap(i, j);
        }
        pool.truncate(hard.len());

        for (name, subset) in [("hard", hard.clone()), ("random", pool)] {
            let sub_ds = ds.with_train_subset(subset)?;
            let outcome = run_one(&retrain, &sub_ds, seed)?;
            rows.push(vec![
                name.to_string(),
                seed.to_string(),
                hard.len().to_string(),
                fmt_f64(outcome.report.final_test.primary()),
            ]);
        }
    }
    write_rows_csv(&common.out.join("hard_samples.csv"), &header, &rows)?;
    common.say(render_table(&header, &rows).trim_end());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ImbalanceSetting {
    Setting1,
    Setting2,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_imbalance(
    config_path: &Path,
    setting: ImbalanceSetting,
    major: &[usize],
    minor_counts: &[usize],
    minor: Option<usize>,
    ratios: &[f64],
    common: &CommonArgs,
) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let ds = config.dataset.build()?;
    if major.is_empty() {
        return Err(CliError::Usage("imbalance needs --major class indices".into()));
    }
    let modes: Vec<(String, ResampleMode)> = match setting {
        ImbalanceSetting::Setting1 => {
            if minor_counts.is_empty() {
                return Err(CliError::Usage("setting1 needs --minor-counts".into()));
            }
            minor_counts
                .iter()
                .map(|&mc| {
                    (
                        format!("setting1,{mc},"),
                        ResampleMode::KeepMajorShrinkMinor { minor_count: mc },
                    )
                })
                .collect()
        }
        ImbalanceSetting::Setting2 => {
            let mc = minor.ok_or_else(|| CliError::Usage("setting2 needs --minor".into()))?;
            if ratios.is_empty() {
                return Err(CliError::Usage("setting2 needs --ratios".into()));
            }
            ratios
                .iter()
                .map(|&r| {
                    (
                        format!("setting2,{mc},{r}"),
                        ResampleMode::FixMinorGrowMajor {
                            minor_count: mc,
                            major_ratio: r,
                        },
                    )
                })
                .collect()
        }
    };

    // Surface infeasible counts before any training happens.
    for (_, mode) in &modes {
        resample_imbalance(&ds, major, *mode, 0)?;
    }

    common.ensure_out()?;
    let mut softmax_cfg = config.clone();
    softmax_cfg.loss.kind = LossKind::Softmax;
    let mut as_cfg = config.clone();
    as_cfg.loss.kind = LossKind::AsSoftmax;

    let header = [
        "setting",
        "minor_count",
        "major_ratio",
        "softmax_accuracy",
        "as_softmax_accuracy",
    ];
    let mut rows = Vec::new();
    for (prefix, mode) in &modes {
        let mut soft_accs = Vec::new();
        let mut as_accs = Vec::new();
        for &seed in &common.seeds {
            let skewed = resample_imbalance(&ds, major, *mode, seed as u64)?;
            soft_accs.push(
                run_one(&softmax_cfg, &skewed, seed)?
                    .report
                    .final_test
                    .primary(),
            );
            as_accs.push(
                run_one(&as_cfg, &skewed, seed)?
                    .report
                    .final_test
                    .primary(),
            );
        }
        let mut row: Vec<String> = prefix.split(',').map(|s| s.to_string()).collect();
        row.push(fmt_f64(mean(&soft_accs)));
        row.push(fmt_f64(mean(&as_accs)));
        rows.push(row);
    }
    write_rows_csv(&common.out.join("imbalance.csv"), &header, &rows)?;
    common.say(render_table(&header, &rows).trim_end());
    Ok(())
}
