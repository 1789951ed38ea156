//! Comma-delimited dataset files.
//!
//! Dialect: comma separator, header on the first line, `.` decimal point,
//! an empty field means "missing". Floats are written with Rust's shortest
//! round-trip formatting, so a write/read cycle reproduces values bit-exactly.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::{AuxColumn, Dataset};
use crate::error::{Error, Result};

/// Role of each column used from a file. Columns not named here are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub outcome: String,
    pub features: Vec<String>,
    /// Explicit 0/1 selection indicator; overrides outcome blankness.
    #[serde(default)]
    pub selection: Option<String>,
    /// Extra numeric columns carried along but never fitted.
    #[serde(default)]
    pub aux: Vec<String>,
}

impl Schema {
    pub fn new(outcome: impl Into<String>, features: Vec<String>) -> Self {
        Schema {
            outcome: outcome.into(),
            features,
            selection: None,
            aux: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.len() < 2 {
            return Err(Error::Schema(format!(
                "need at least 2 selection-feature columns, got {}",
                self.features.len()
            )));
        }
        let mut seen = HashSet::new();
        let all = std::iter::once(&self.outcome)
            .chain(&self.features)
            .chain(&self.selection)
            .chain(&self.aux);
        for name in all {
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("column `{name}` is given more than one role")));
            }
        }
        Ok(())
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, &path.display().to_string(), schema)
}

/// Parses a dataset from any reader; `source` names it in error messages.
pub fn read_csv<R: Read>(reader: R, source: &str, schema: &Schema) -> Result<Dataset> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let locate = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("column `{name}` not found in {source}")))
    };
    let outcome_col = locate(&schema.outcome)?;
    let feature_cols = schema.features.iter().map(|f| locate(f)).collect::<Result<Vec<_>>>()?;
    let selection_col = schema.selection.as_deref().map(locate).transpose()?;
    let aux_cols = schema.aux.iter().map(|a| locate(a)).collect::<Result<Vec<_>>>()?;

    let k = feature_cols.len();
    let mut features: Vec<f64> = Vec::new();
    let mut outcomes: Vec<Option<f64>> = Vec::new();
    let mut aux: Vec<Vec<f64>> = vec![Vec::new(); aux_cols.len()];

    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let number = |col: usize, name: &str| -> Result<Option<f64>> {
            let raw = record.get(col).unwrap_or("").trim();
            if raw.is_empty() {
                return Ok(None);
            }
            let v: f64 = raw
                .parse()
                .map_err(|_| parse_err(line, format!("column `{name}`: `{raw}` is not a number")))?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    column: name.to_string(),
                    line,
                });
            }
            Ok(Some(v))
        };
        let required = |col: usize, name: &str| -> Result<f64> {
            number(col, name)?.ok_or_else(|| parse_err(line, format!("column `{name}` is empty")))
        };

        for (&col, name) in feature_cols.iter().zip(&schema.features) {
            features.push(required(col, name)?);
        }
        let y = number(outcome_col, &schema.outcome)?;
        let y = match (selection_col, &schema.selection) {
            (Some(col), Some(name)) => match required(col, name)? {
                s if s == 1.0 => Some(y.ok_or_else(|| {
                    parse_err(line, format!("row is selected by `{name}` but its outcome is empty"))
                })?),
                s if s == 0.0 => None,
                s => return Err(parse_err(line, format!("selection indicator `{name}` must be 0 or 1, got {s}"))),
            },
            _ => y,
        };
        outcomes.push(y);
        for (values, (&col, name)) in aux.iter_mut().zip(aux_cols.iter().zip(&schema.aux)) {
            values.push(required(col, name)?);
        }
    }

    if outcomes.is_empty() {
        return Err(Error::InvalidDataset(format!("{source} has no data rows")));
    }
    let x = DMatrix::from_row_slice(outcomes.len(), k, &features);
    let aux = schema
        .aux
        .iter()
        .zip(aux)
        .map(|(name, values)| AuxColumn {
            name: name.clone(),
            values,
        })
        .collect();
    Dataset::from_rows(x, &outcomes, schema.features.clone(), aux)
}

/// Writes `data` in its original row order with columns
/// `features…, outcome, aux…`; unobserved outcomes are left empty.
pub fn write_csv(data: &Dataset, outcome_name: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(data, outcome_name, file).map_err(|e| match e {
        Error::Serialization(msg) => Error::Serialization(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_csv_to<W: Write>(data: &Dataset, outcome_name: &str, writer: W) -> Result<()> {
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    let header = data
        .feature_names()
        .iter()
        .map(String::as_str)
        .chain(std::iter::once(outcome_name))
        .chain(data.aux().iter().map(|a| a.name.as_str()));
    w.write_record(header).map_err(ser)?;

    // stored row i came from input row row_order[i]
    let mut stored_of = vec![0; data.n()];
    for (i, &orig) in data.row_order().iter().enumerate() {
        stored_of[orig] = i;
    }
    let x = data.x_sel();
    for &i in &stored_of {
        let mut fields: Vec<String> = (0..data.k()).map(|k| x[(i, k)].to_string()).collect();
        fields.push(if data.selected(i) {
            data.y_observed()[i].to_string()
        } else {
            String::new()
        });
        fields.extend(data.aux().iter().map(|a| a.values[i].to_string()));
        w.write_record(&fields).map_err(ser)?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}
