//! CSV dataset format: header row with real-valued columns `f0..f{d-1}`,
//! a `label` column (multi-class) or a `labels` column with `;`-separated
//! names (multi-label), and an optional `split` column in {train,val,test}.
//! UTF-8, comma separated, LF line endings.

use std::collections::HashMap;
use std::path::Path;

use super::{Dataset, TaskKind, Targets};
use crate::error::{Error, Result};

/// Expectations for [`load_csv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvSchema {
    /// Expected task; `None` infers it from the label column name.
    pub task: Option<TaskKind>,
    /// Reject label names whose first occurrence is in a val/test row.
    pub strict_labels: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            task: None,
            strict_labels: true,
        }
    }
}

fn load_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Load {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Loads a dataset in the CSV format above. Rows missing a `split` column
/// are split 70/15/15 sequentially.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| load_err(path, 1, e.to_string()))?;

    let headers = reader
        .headers()
        .map_err(|e| load_err(path, 1, e.to_string()))?
        .clone();
    let mut feature_cols: Vec<(usize, usize)> = Vec::new(); // (feature index, column)
    let mut label_col = None;
    let mut labels_col = None;
    let mut split_col = None;
    for (col, name) in headers.iter().enumerate() {
        if let Some(rest) = name.strip_prefix('f') {
            if let Ok(fi) = rest.parse::<usize>() {
                feature_cols.push((fi, col));
                continue;
            }
        }
        match name {
            "label" => label_col = Some(col),
            "labels" => labels_col = Some(col),
            "split" => split_col = Some(col),
            other => return Err(load_err(path, 1, format!("unexpected column `{other}`"))),
        }
    }
    feature_cols.sort_unstable();
    let dim = feature_cols.len();
    if dim == 0 {
        return Err(load_err(path, 1, "no feature columns f0..f{d-1}"));
    }
    if feature_cols.iter().enumerate().any(|(i, &(fi, _))| fi != i) {
        return Err(load_err(path, 1, "feature columns are not contiguous f0..f{d-1}"));
    }

    let task = match (label_col, labels_col) {
        (Some(_), None) => TaskKind::MultiClass,
        (None, Some(_)) => TaskKind::MultiLabel,
        (Some(_), Some(_)) => {
            return Err(load_err(path, 1, "both `label` and `labels` columns present"))
        }
        (None, None) => return Err(load_err(path, 1, "no `label` or `labels` column")),
    };
    if let Some(expected) = schema.task {
        if expected != task {
            return Err(load_err(
                path,
                1,
                format!("schema expects {expected:?} but header declares {task:?}"),
            ));
        }
    }
    let target_col = label_col.or(labels_col).unwrap();

    let mut class_names: Vec<String> = Vec::new();
    let mut name_to_index: HashMap<String, usize> = HashMap::new();
    // Per class: seen in a train row / first line of an eval-row occurrence.
    let mut seen_in_train: Vec<bool> = Vec::new();
    let mut first_eval_line: Vec<Option<usize>> = Vec::new();
    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut class_targets: Vec<usize> = Vec::new();
    let mut label_targets: Vec<Vec<usize>> = Vec::new();
    let mut splits: Vec<Option<usize>> = Vec::new(); // 0 train, 1 val, 2 test

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(0);
            load_err(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != headers.len() {
            return Err(load_err(
                path,
                line,
                format!("expected {} fields, got {}", headers.len(), record.len()),
            ));
        }

        let mut row = vec![0.0; dim];
        for &(fi, col) in &feature_cols {
            row[fi] = record[col].trim().parse::<f64>().map_err(|_| {
                load_err(path, line, format!("bad feature value `{}`", &record[col]))
            })?;
        }

        let split = match split_col {
            Some(col) => Some(match record[col].trim() {
                "train" => 0,
                "val" => 1,
                "test" => 2,
                other => {
                    return Err(load_err(path, line, format!("unknown split `{other}`")))
                }
            }),
            None => None,
        };
        let in_eval_split = matches!(split, Some(1) | Some(2));

        let mut resolve = |name: &str| -> Result<usize> {
            if name.is_empty() {
                return Err(load_err(path, line, "empty label"));
            }
            let idx = match name_to_index.get(name) {
                Some(&idx) => idx,
                None => {
                    let idx = class_names.len();
                    class_names.push(name.to_string());
                    name_to_index.insert(name.to_string(), idx);
                    seen_in_train.push(false);
                    first_eval_line.push(None);
                    idx
                }
            };
            if in_eval_split {
                if first_eval_line[idx].is_none() {
                    first_eval_line[idx] = Some(line);
                }
            } else {
                seen_in_train[idx] = true;
            }
            Ok(idx)
        };

        let cell = record[target_col].trim();
        match task {
            TaskKind::MultiClass => class_targets.push(resolve(cell)?),
            TaskKind::MultiLabel => {
                if cell.is_empty() {
                    return Err(load_err(path, line, "empty label cell"));
                }
                let mut set = Vec::new();
                for name in cell.split(';') {
                    set.push(resolve(name.trim())?);
                }
                set.sort_unstable();
                set.dedup();
                label_targets.push(set);
            }
        }
        features.push(row);
        splits.push(split);
    }

    let n = features.len();
    if n == 0 {
        return Err(load_err(path, 2, "no data rows"));
    }
    if schema.strict_labels {
        for (idx, eval_line) in first_eval_line.iter().enumerate() {
            if let Some(l) = eval_line {
                if !seen_in_train[idx] {
                    return Err(load_err(
                        path,
                        *l,
                        format!("label `{}` never appears in the train split", class_names[idx]),
                    ));
                }
            }
        }
    }

    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    if split_col.is_some() {
        for (i, s) in splits.iter().enumerate() {
            match s.unwrap() {
                0 => train.push(i),
                1 => val.push(i),
                _ => test.push(i),
            }
        }
    } else {
        let n_train = (0.70 * n as f64).floor() as usize;
        let n_val = (0.15 * n as f64).floor() as usize;
        for i in 0..n {
            if i < n_train {
                train.push(i);
            } else if i < n_train + n_val {
                val.push(i);
            } else {
                test.push(i);
            }
        }
    }

    let n_classes = class_names.len();
    let ds = Dataset {
        features,
        targets: match task {
            TaskKind::MultiClass => Targets::MultiClass(class_targets),
            TaskKind::MultiLabel => Targets::MultiLabel(label_targets),
        },
        train,
        val,
        test,
        n_classes,
        dim,
        class_names,
    };
    ds.validate()?;
    Ok(ds)
}

/// Writes a dataset in the format read by [`load_csv`]. Samples outside all
/// splits are skipped.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    ds.validate()?;
    let mut member = vec![None::<&'static str>; ds.n_samples()];
    for (name, idx) in [("train", &ds.train), ("val", &ds.val), ("test", &ds.test)] {
        for &i in idx {
            member[i] = Some(name);
        }
    }
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..ds.dim).map(|j| format!("f{j}")).collect();
    header.push(
        match ds.task_kind() {
            TaskKind::MultiClass => "label",
            TaskKind::MultiLabel => "labels",
        }
        .to_string(),
    );
    header.push("split".to_string());
    writer.write_record(&header)?;

    for i in 0..ds.n_samples() {
        let Some(split) = member[i] else { continue };
        let mut row: Vec<String> = ds.features[i].iter().map(|x| x.to_string()).collect();
        match &ds.targets {
            Targets::MultiClass(v) => row.push(ds.class_names[v[i]].clone()),
            Targets::MultiLabel(v) => row.push(
                v[i].iter()
                    .map(|&c| ds.class_names[c].as_str())
                    .collect::<Vec<_>>()
                    .join(";"),
            ),
        }
        row.push(split.to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{gen_multiclass, gen_multilabel, SynthSpec};
    use std::io::Write;

    fn spec() -> SynthSpec {
        SynthSpec {
            n_classes: 3,
            dim: 4,
            samples_per_class: 20,
            separation: 3.0,
            label_noise_rate: 0.0,
            seed: 77,
        }
    }

    #[test]
    fn round_trip_multiclass() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mc.csv");
        let ds = gen_multiclass(&spec()).unwrap();
        write_csv(&ds, &path).unwrap();
        let loaded = load_csv(&path, &CsvSchema::default()).unwrap();
        assert_eq!(loaded.dim, ds.dim);
        assert_eq!(loaded.n_classes, ds.n_classes);
        assert_eq!(loaded.train.len(), ds.train.len());
        // Row order differs (write groups by index, membership is the same);
        // compare the feature/target multiset via sorted global indices.
        for &i in &ds.train {
            assert!(loaded
                .features
                .iter()
                .any(|f| f == &ds.features[i]));
        }
    }

    #[test]
    fn round_trip_multilabel_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ml.csv");
        let ds = gen_multilabel(&spec(), 1).unwrap();
        write_csv(&ds, &path).unwrap();
        let a = std::fs::read(&path).unwrap();
        write_csv(&load_csv(&path, &CsvSchema::default()).unwrap(), &path).unwrap();
        let b = std::fs::read(&path).unwrap();
        // Load → write is idempotent: the second file is byte-identical.
        assert_eq!(a, b);
    }

    #[test]
    fn hand_written_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hand.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "f0,f1,label,split").unwrap();
        writeln!(f, "0.5,1.5,pos,train").unwrap();
        writeln!(f, "-0.5,2.0,neg,train").unwrap();
        writeln!(f, "1.25,-3.5,pos,val").unwrap();
        writeln!(f, "0,0,neg,test").unwrap();
        let ds = load_csv(&path, &CsvSchema::default()).unwrap();
        assert_eq!(ds.dim, 2);
        assert_eq!(ds.n_classes, 2);
        assert_eq!(ds.class_names, vec!["pos", "neg"]);
        assert_eq!(ds.features[2], vec![1.25, -3.5]);
        match &ds.targets {
            Targets::MultiClass(v) => assert_eq!(v, &vec![0, 1, 0, 1]),
            _ => panic!("expected multi-class"),
        }
        assert_eq!(ds.train, vec![0, 1]);
        assert_eq!(ds.val, vec![2]);
        assert_eq!(ds.test, vec![3]);
    }

    #[test]
    fn ragged_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "f0,f1,label\n1.0,2.0,a\n1.0,b\n").unwrap();
        match load_csv(&path, &CsvSchema::default()) {
            Err(Error::Load { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected load error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_label_in_eval_split_is_strict_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("strict.csv");
        std::fs::write(
            &path,
            "f0,label,split\n1.0,a,train\n2.0,b,val\n",
        )
        .unwrap();
        match load_csv(&path, &CsvSchema::default()) {
            Err(Error::Load { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected load error, got {other:?}"),
        }
        let lax = CsvSchema {
            strict_labels: false,
            ..CsvSchema::default()
        };
        assert!(load_csv(&path, &lax).is_ok());
    }

    #[test]
    fn empty_multilabel_cell_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "f0,labels,split\n1.0,,train\n").unwrap();
        assert!(load_csv(&path, &CsvSchema::default()).is_err());
    }
}
