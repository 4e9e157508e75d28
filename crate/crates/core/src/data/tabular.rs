//! Delimited text datasets (Iris, Wisconsin breast cancer).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// How label strings become class indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LabelMap {
    /// Label `names[k]` is class `k`.
    Names { names: Vec<String> },
    /// Classes numbered in order of first appearance.
    FirstSeen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub delimiter: u8,
    pub has_header: bool,
    /// Zero-based feature columns, in output order.
    pub feature_columns: Vec<usize>,
    pub label_column: usize,
    /// Cell value marking a missing entry; such rows are dropped.
    pub missing: Option<String>,
    pub labels: LabelMap,
}

impl CsvSchema {
    /// UCI `iris.data`: four measurements then the species name.
    pub fn iris() -> Self {
        Self {
            delimiter: b',',
            has_header: false,
            feature_columns: vec![0, 1, 2, 3],
            label_column: 4,
            missing: None,
            labels: LabelMap::Names {
                names: vec!["Iris-setosa".into(), "Iris-versicolor".into(), "Iris-virginica".into()],
            },
        }
    }

    /// UCI `breast-cancer-wisconsin.data`: id, nine cytology scores, class
    /// 2 (benign) or 4 (malignant); `?` marks missing values.
    pub fn wisconsin() -> Self {
        Self {
            delimiter: b',',
            has_header: false,
            feature_columns: (1..=9).collect(),
            label_column: 10,
            missing: Some("?".into()),
            labels: LabelMap::Names {
                names: vec!["2".into(), "4".into()],
            },
        }
    }
}

pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    let mut dropped = 0;
    let csv_error = |line: u64, message: String| Error::Csv {
        path: path.into(),
        line,
        message,
    };

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let cell = |c: usize| {
            record
                .get(c)
                .ok_or_else(|| csv_error(line, format!("expected at least {} columns, found {}", c + 1, record.len())))
        };
        let mut missing = false;
        let mut row = Vec::with_capacity(schema.feature_columns.len());
        for &c in &schema.feature_columns {
            let v = cell(c)?;
            if schema.missing.as_deref() == Some(v) {
                missing = true;
                break;
            }
            let x: f64 = v
                .parse()
                .map_err(|_| csv_error(line, format!("column {c}: cannot parse {v:?} as a number")))?;
            if !x.is_finite() {
                return Err(csv_error(line, format!("column {c}: non-finite value {v:?}")));
            }
            row.push(x);
        }
        let label = cell(schema.label_column)?;
        if missing || schema.missing.as_deref() == Some(label) {
            dropped += 1;
            continue;
        }
        let y = match &schema.labels {
            LabelMap::Names { names } => names
                .iter()
                .position(|n| n == label)
                .ok_or_else(|| csv_error(line, format!("unknown label {label:?}")))?,
            LabelMap::FirstSeen => match seen.iter().position(|n| n == label) {
                Some(k) => k,
                None => {
                    seen.push(label.to_string());
                    seen.len() - 1
                }
            },
        };
        features.push(row);
        labels.push(y);
    }

    if labels.is_empty() {
        return Err(Error::EmptyDataset(path.into()));
    }
    let classes = match &schema.labels {
        LabelMap::Names { names } => names.len(),
        LabelMap::FirstSeen => seen.len(),
    };
    let mut ds = Dataset::new(features, labels, classes, path.display().to_string())?;
    ds.dropped = dropped;
    Ok(ds)
}
