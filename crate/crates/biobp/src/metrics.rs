//! Metrics rows and their CSV serialization.
//!
//! The CSV schema is part of the tool's external contract:
//! `step,rule,seed,train_loss,test_loss,test_acc,align_l1,...,align_lk,wall_ms`
//! with one `align_l<i>` column per weight layer. Floats are written in
//! scientific notation with nine significant digits; undefined angles are the
//! literal `nan`. Identical runs must produce identical bytes, so `wall_ms`
//! is the deterministic constant 0 — real timing goes to the log, never into
//! the file.

use crate::error::{Error, Result};
use crate::rules::RuleKind;

/// One emitted measurement during training.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub step: u64,
    pub rule: RuleKind,
    pub seed: u64,
    pub train_loss: f64,
    pub test_loss: f64,
    pub test_acc: f64,
    /// Per-layer alignment angle vs a same-trace backprop update, `None`
    /// when undefined (zero-norm layer or not measured at this step).
    pub align: Vec<Option<f64>>,
    /// Always 0; see module docs.
    pub wall_ms: u64,
}

/// A float with nine significant digits, e.g. `2.30258509e0`.
pub fn fmt_sig9(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.8e}")
    }
}

/// Header line for a model with `layer_count` weight layers.
pub fn csv_header(layer_count: usize) -> String {
    let mut cols = vec![
        "step".to_string(),
        "rule".to_string(),
        "seed".to_string(),
        "train_loss".to_string(),
        "test_loss".to_string(),
        "test_acc".to_string(),
    ];
    for l in 1..=layer_count {
        cols.push(format!("align_l{l}"));
    }
    cols.push("wall_ms".to_string());
    cols.join(",")
}

fn row_line(row: &MetricsRow) -> String {
    let mut cols = vec![
        row.step.to_string(),
        row.rule.tag().to_string(),
        row.seed.to_string(),
        fmt_sig9(row.train_loss),
        fmt_sig9(row.test_loss),
        fmt_sig9(row.test_acc),
    ];
    for a in &row.align {
        cols.push(match a {
            Some(v) => fmt_sig9(*v),
            None => "nan".to_string(),
        });
    }
    cols.push(row.wall_ms.to_string());
    cols.join(",")
}

/// Renders rows (all with the same layer count) to CSV text.
pub fn to_csv(rows: &[MetricsRow], layer_count: usize) -> Result<String> {
    let mut out = String::new();
    out.push_str(&csv_header(layer_count));
    out.push('\n');
    for row in rows {
        if row.align.len() != layer_count {
            return Err(Error::Param(format!(
                "row at step {} has {} alignment entries, expected {layer_count}",
                row.step,
                row.align.len()
            )));
        }
        out.push_str(&row_line(row));
        out.push('\n');
    }
    Ok(out)
}

/// A parsed metrics CSV (or any comma-separated table with a header).
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub records: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<CsvTable> {
        let mut lines = text.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::Format("empty CSV".into()))?;
        let header: Vec<String> = header_line.split(',').map(str::to_string).collect();
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<String> = line.split(',').map(str::to_string).collect();
            if fields.len() != header.len() {
                return Err(Error::Format(format!(
                    "CSV record {} has {} fields, header has {}",
                    i + 2,
                    fields.len(),
                    header.len()
                )));
            }
            records.push(fields);
        }
        Ok(CsvTable { header, records })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Values of a numeric column; the literal `nan` parses to `f64::NAN`.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name).ok_or_else(|| {
            Error::Format(format!(
                "no column '{name}' (available: {})",
                self.header.join(", ")
            ))
        })?;
        self.records
            .iter()
            .map(|r| {
                r[idx]
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("bad number '{}' in column {name}", r[idx])))
            })
            .collect()
    }
}
