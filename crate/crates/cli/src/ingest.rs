//! CSV ingestion and export.
//!
//! Input files carry a header row, numeric feature columns, one sensitive
//! column and one label column. Other columns are ignored. Categorical
//! features must be expanded into indicator columns beforehand.

use std::path::Path;

use serde::{Deserialize, Serialize};
use stablefair::data::{normalize_max_norm, Sample};
use stablefair::{Dataset, Label};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelEncoding {
    /// Accepts `0`, `1`, `-1` and `+1`.
    #[default]
    Auto,
    /// `0 → −1`, `1 → +1`.
    ZeroOne,
    /// `−1` and `+1` only.
    PlusMinus,
}

impl LabelEncoding {
    fn parse(self, cell: &str) -> Option<Label> {
        let v: f64 = cell.trim().parse().ok()?;
        match (self, v) {
            (LabelEncoding::Auto | LabelEncoding::ZeroOne, 0.0) => Some(Label::Negative),
            (LabelEncoding::Auto | LabelEncoding::PlusMinus, -1.0) => Some(Label::Negative),
            (_, 1.0) => Some(Label::Positive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub features: Vec<String>,
    pub sensitive: String,
    pub label: String,
    pub label_encoding: LabelEncoding,
    /// Fixed category order for the sensitive column. Without it,
    /// categories are numbered in the order they are first seen.
    pub sensitive_values: Option<Vec<String>>,
}

/// A loaded dataset and the sensitive category names by index.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub dataset: Dataset,
    pub categories: Vec<String>,
}

pub fn load_csv(path: &Path, schema: &Schema) -> Result<Loaded> {
    if schema.features.is_empty() {
        return Err(CliError::Config("schema lists no feature columns".into()));
    }
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("{}: missing column `{name}`", path.display())))
    };
    let feature_cols = schema.features.iter().map(|f| column(f)).collect::<Result<Vec<_>>>()?;
    let sensitive_col = column(&schema.sensitive)?;
    let label_col = column(&schema.label)?;

    let fixed = schema.sensitive_values.is_some();
    let mut categories = schema.sensitive_values.clone().unwrap_or_default();
    let mut samples = Vec::new();
    for (k, record) in reader.records().enumerate() {
        // header is line 1
        let row = k + 2;
        let bad = |message: String| CliError::Row {
            path: path.to_path_buf(),
            row,
            message,
        };
        let record = record.map_err(csv_err)?;
        let x = feature_cols
            .iter()
            .zip(&schema.features)
            .map(|(&c, name)| {
                let cell = &record[c];
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(bad(format!("non-numeric value `{cell}` in feature column `{name}`"))),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let cat = &record[sensitive_col];
        let z = match categories.iter().position(|c| c == cat) {
            Some(z) => z,
            None if fixed => {
                return Err(bad(format!(
                    "unknown value `{cat}` in sensitive column `{}`",
                    schema.sensitive
                )))
            }
            None => {
                categories.push(cat.to_string());
                categories.len() - 1
            }
        };
        let cell = &record[label_col];
        let y = schema
            .label_encoding
            .parse(cell)
            .ok_or_else(|| bad(format!("unknown label value `{cell}` in column `{}`", schema.label)))?;
        samples.push(Sample { x, z, y });
    }
    let num_groups = categories.len().max(2);
    let dataset = Dataset::new(samples, schema.features.len(), num_groups)?;
    Ok(Loaded { dataset, categories })
}

/// Writes `s` with feature columns `x0, x1, …`, sensitive column `group`
/// (the category index) and label column `label` (±1). Returns a schema
/// that reads the file back into an identical dataset.
pub fn write_csv(path: &Path, s: &Dataset) -> Result<Schema> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let features: Vec<String> = (0..s.dim()).map(|j| format!("x{j}")).collect();
    let mut header = features.clone();
    header.push("group".into());
    header.push("label".into());
    w.write_record(&header).map_err(csv_err)?;
    for sample in s.iter() {
        let mut row: Vec<String> = sample.x.iter().map(f64::to_string).collect();
        row.push(sample.z.to_string());
        row.push(format!("{}", sample.y.value()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(Schema {
        features,
        sensitive: "group".into(),
        label: "label".into(),
        label_encoding: LabelEncoding::PlusMinus,
        sensitive_values: Some((0..s.num_groups()).map(|z| z.to_string()).collect()),
    })
}

/// Scales features so the largest norm is 1. Returns the factor applied.
pub fn normalize(s: &Dataset) -> Result<(Dataset, f64)> {
    normalize_max_norm(s).map_err(|e| CliError::Data(format!("cannot normalize features: {e}")))
}
