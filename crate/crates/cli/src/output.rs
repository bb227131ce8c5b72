//! Report files: per-checkpoint CSV series, margin samples, and aligned
//! plain-text tables. All CSV output is UTF-8, comma separated, LF
//! terminated, with a header row.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use as_softmax::metrics::MarginSample;
use as_softmax::trainer::TrainReport;

use crate::exit::CliError;

pub fn write_series_csv(path: &Path, report: &TrainReport) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(
        w,
        "step,epoch,train_loss,val_loss,val_metric,masked_ratio,steps_accum,\
         cumulative_gradient_evaluations,cumulative_optimizer_steps\n"
    )?;
    for c in &report.checkpoints {
        write!(
            w,
            "{},{},{},{},{},{},{},{},{}\n",
            c.step,
            c.epoch,
            c.train_loss,
            c.val_loss,
            c.val_metric,
            c.masked_ratio,
            c.steps_accum,
            c.cumulative_gradient_evaluations,
            c.cumulative_optimizer_steps
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_margins_csv(path: &Path, samples: &[MarginSample]) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "p_margin,correct\n")?;
    for s in samples {
        write!(w, "{},{}\n", s.p_margin, s.correct)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::Other(format!("cannot serialise report: {e}")))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Rows of already-formatted cells rendered as an aligned table.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let emit = |out: &mut String, cells: &[String]| {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(cell);
            for _ in cell.len()..widths[i] {
                out.push(' ');
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    let header_cells: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    emit(&mut out, &header_cells);
    for row in rows {
        emit(&mut out, row);
    }
    out
}

/// Writes rows as CSV with the given header.
pub fn write_rows_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "{}\n", header.join(","))?;
    for row in rows {
        write!(w, "{}\n", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.6}")
    }
}
