//! Tabular dataset ingestion, protected-attribute handling, and seeded
//! permutation / splitting.
//!
//! Categorical columns are dictionary-encoded to small integers in
//! first-appearance order; the dictionaries travel with the dataset so
//! reports can render the original strings.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Immutable feature matrix plus outcome column and optional model scores.
///
/// Rows are stored row-major; `label` is the binary true outcome and
/// `score`, when present, is a precomputed model score in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub column_names: Vec<String>,
    data: Vec<f64>,
    pub n_rows: usize,
    pub n_features: usize,
    pub label: Vec<u8>,
    pub score: Option<Vec<f64>>,
    /// Dictionary per categorical column: value strings in code order.
    pub encoders: BTreeMap<String, Vec<String>>,
}

/// Which column holds the protected attribute and which encoded values
/// form the audited groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtectedSpec {
    pub column: String,
    /// Distinct encoded values (at least two).
    pub groups: Vec<f64>,
    /// The outcome value deemed advantageous.
    pub favorable_outcome: u8,
}

/// Column declarations needed to interpret a CSV file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label: String,
    pub score: Option<String>,
    pub protected: String,
    /// Group values as they appear in the file (strings for categorical
    /// columns, numeric literals otherwise).
    pub groups: Vec<String>,
    pub favorable_outcome: u8,
}

impl Dataset {
    /// Build a dataset from in-memory rows, validating the documented invariants.
    pub fn from_parts(
        column_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        label: Vec<u8>,
        score: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n_features = column_names.len();
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::Validation("dataset must have at least one row".into()));
        }
        if label.len() != n_rows {
            return Err(Error::Validation(format!(
                "label length {} != row count {}",
                label.len(),
                n_rows
            )));
        }
        let mut data = Vec::with_capacity(n_rows * n_features);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::Validation(format!(
                    "row {} has {} values, expected {}",
                    i,
                    row.len(),
                    n_features
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("row {i} contains a non-finite value")));
            }
            data.extend_from_slice(row);
        }
        if label.iter().any(|&y| y > 1) {
            return Err(Error::Validation("label values must be 0 or 1".into()));
        }
        if let Some(s) = &score {
            if s.len() != n_rows {
                return Err(Error::Validation("score length != row count".into()));
            }
            if s.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
                return Err(Error::Validation("score values must lie in [0, 1]".into()));
            }
        }
        Ok(Dataset {
            column_names,
            data,
            n_rows,
            n_features,
            label,
            score,
            encoders: BTreeMap::new(),
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn feature_column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i)[j]).collect()
    }

    /// Flat row-major view of the feature matrix.
    pub fn rows_view(&self) -> crate::shap::RowsView<'_> {
        crate::shap::RowsView::new(&self.data, self.n_features)
    }

    pub(crate) fn set_feature_column(&mut self, j: usize, values: &[f64]) {
        assert_eq!(values.len(), self.n_rows);
        for (i, v) in values.iter().enumerate() {
            self.data[i * self.n_features + j] = *v;
        }
    }

    /// New dataset containing the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut data = Vec::with_capacity(indices.len() * self.n_features);
        let mut label = Vec::with_capacity(indices.len());
        let mut score = self.score.as_ref().map(|_| Vec::with_capacity(indices.len()));
        for &i in indices {
            data.extend_from_slice(self.row(i));
            label.push(self.label[i]);
            if let (Some(out), Some(src)) = (score.as_mut(), self.score.as_ref()) {
                out.push(src[i]);
            }
        }
        Dataset {
            column_names: self.column_names.clone(),
            data,
            n_rows: indices.len(),
            n_features: self.n_features,
            label,
            score,
            encoders: self.encoders.clone(),
        }
    }

    /// Render an encoded value of `column` back to its original string.
    pub fn decode(&self, column: &str, code: f64) -> String {
        if let Some(values) = self.encoders.get(column) {
            let idx = code as usize;
            if code.fract() == 0.0 && idx < values.len() {
                return values[idx].clone();
            }
        }
        format_number(code)
    }
}

impl ProtectedSpec {
    pub fn new(column: impl Into<String>, groups: Vec<f64>, favorable_outcome: u8) -> Self {
        ProtectedSpec {
            column: column.into(),
            groups,
            favorable_outcome,
        }
    }

    /// Check the spec against a dataset and return the protected column index.
    pub fn validate(&self, d: &Dataset) -> Result<usize> {
        if self.groups.len() < 2 {
            return Err(Error::Validation(
                "protected attribute needs at least two groups".into(),
            ));
        }
        if self.favorable_outcome > 1 {
            return Err(Error::Validation("favorable outcome must be 0 or 1".into()));
        }
        let col = d
            .feature_index(&self.column)
            .ok_or_else(|| Error::Schema(format!("protected column '{}' not found", self.column)))?;
        for i in 0..d.n_rows {
            let v = d.row(i)[col];
            if !self.groups.contains(&v) {
                return Err(Error::Validation(format!(
                    "row {} has protected value {} outside the declared groups",
                    i,
                    d.decode(&self.column, v)
                )));
            }
        }
        Ok(col)
    }
}

fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Load an RFC-4180 CSV with a header row.
///
/// Column typing is sniffed from the first data row: a cell that parses as
/// a finite number makes the column numeric, otherwise the column is
/// dictionary-encoded. Returns the dataset together with the resolved
/// protected-group encoding.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<(Dataset, ProtectedSpec)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Schema(format!("cannot open {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Schema(format!("missing header row: {e}")))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();

    let mut seen = std::collections::HashSet::new();
    for h in &headers {
        if !seen.insert(h.clone()) {
            return Err(Error::Schema(format!("duplicate column name '{h}'")));
        }
    }
    let col_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("declared column '{name}' not found in header")))
    };
    let label_col = col_of(&schema.label)?;
    let score_col = schema.score.as_deref().map(col_of).transpose()?;
    col_of(&schema.protected)?;

    let mut records: Vec<csv::StringRecord> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: i,
            message: e.to_string(),
        })?;
        if rec.len() != headers.len() {
            return Err(Error::Parse {
                row: i,
                message: format!("expected {} fields, found {}", headers.len(), rec.len()),
            });
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::Validation("dataset must have at least one row".into()));
    }

    // Feature columns keep file order; label/score are carried separately.
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| c != label_col && Some(c) != score_col)
        .collect();
    let column_names: Vec<String> = feature_cols.iter().map(|&c| headers[c].clone()).collect();

    let numeric: Vec<bool> = (0..headers.len())
        .map(|c| parse_cell(records[0].get(c).unwrap_or("")).is_some())
        .collect();

    let mut encoders: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut data = Vec::with_capacity(records.len() * feature_cols.len());
    let mut label = Vec::with_capacity(records.len());
    let mut score = score_col.map(|_| Vec::with_capacity(records.len()));

    for (i, rec) in records.iter().enumerate() {
        for &c in &feature_cols {
            let cell = rec.get(c).unwrap_or("").trim();
            if numeric[c] {
                let v = parse_cell(cell).ok_or_else(|| Error::Parse {
                    row: i,
                    message: format!("non-numeric cell '{cell}' in numeric column '{}'", headers[c]),
                })?;
                data.push(v);
            } else {
                let dict = encoders.entry(headers[c].clone()).or_default();
                let code = match dict.iter().position(|v| v == cell) {
                    Some(p) => p,
                    None => {
                        dict.push(cell.to_string());
                        dict.len() - 1
                    }
                };
                data.push(code as f64);
            }
        }
        let label_cell = rec.get(label_col).unwrap_or("").trim();
        let y = parse_cell(label_cell).ok_or_else(|| Error::Parse {
            row: i,
            message: format!("non-numeric label '{label_cell}'"),
        })?;
        if y != 0.0 && y != 1.0 {
            return Err(Error::Validation(format!(
                "label value {y} at row {i} is outside {{0, 1}}"
            )));
        }
        label.push(y as u8);
        if let (Some(out), Some(c)) = (score.as_mut(), score_col) {
            let cell = rec.get(c).unwrap_or("").trim();
            let v = parse_cell(cell).ok_or_else(|| Error::Parse {
                row: i,
                message: format!("non-numeric score '{cell}'"),
            })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!(
                    "score value {v} at row {i} is outside [0, 1]"
                )));
            }
            out.push(v);
        }
    }

    let dataset = Dataset {
        n_rows: records.len(),
        n_features: feature_cols.len(),
        column_names,
        data,
        label,
        score,
        encoders,
    };

    let spec = resolve_protected(&dataset, schema)?;
    spec.validate(&dataset)?;
    Ok((dataset, spec))
}

fn resolve_protected(d: &Dataset, schema: &CsvSchema) -> Result<ProtectedSpec> {
    if schema.groups.len() < 2 {
        return Err(Error::Validation(
            "protected attribute needs at least two groups".into(),
        ));
    }
    let mut groups = Vec::with_capacity(schema.groups.len());
    if let Some(dict) = d.encoders.get(&schema.protected) {
        for g in &schema.groups {
            let code = dict
                .iter()
                .position(|v| v == g)
                .ok_or_else(|| Error::Schema(format!("group '{g}' never appears in column '{}'", schema.protected)))?;
            groups.push(code as f64);
        }
    } else {
        for g in &schema.groups {
            let v: f64 = g
                .trim()
                .parse()
                .map_err(|_| Error::Schema(format!("group '{g}' is not numeric for numeric column '{}'", schema.protected)))?;
            groups.push(v);
        }
    }
    let mut distinct = groups.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() != groups.len() {
        return Err(Error::Validation("group values must be distinct".into()));
    }
    Ok(ProtectedSpec::new(
        schema.protected.clone(),
        groups,
        schema.favorable_outcome,
    ))
}

fn parse_cell(cell: &str) -> Option<f64> {
    let v: f64 = cell.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Write a dataset back to CSV, decoding categorical columns.
pub fn write_csv(d: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Schema(format!("{other:?}")),
    })?;
    let mut header: Vec<String> = d.column_names.clone();
    header.push("label".into());
    if d.score.is_some() {
        header.push("score".into());
    }
    w.write_record(&header)
        .map_err(|e| Error::Schema(e.to_string()))?;
    for i in 0..d.n_rows {
        let mut rec: Vec<String> = Vec::with_capacity(header.len());
        for (j, name) in d.column_names.iter().enumerate() {
            let v = d.row(i)[j];
            if d.encoders.contains_key(name) {
                rec.push(d.decode(name, v));
            } else {
                rec.push(format!("{v}"));
            }
        }
        rec.push(format!("{}", d.label[i]));
        if let Some(s) = &d.score {
            rec.push(format!("{}", s[i]));
        }
        w.write_record(&rec).map_err(|e| Error::Schema(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Copy of `d` with the protected column uniformly re-permuted.
///
/// Only that column changes; the multiset of group values (and hence the
/// group proportions) is preserved exactly.
pub fn permute_protected(d: &Dataset, spec: &ProtectedSpec, seed: u64) -> Result<Dataset> {
    let col = spec.validate(d)?;
    let mut values = d.feature_column(col);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    values.shuffle(&mut rng);
    let mut out = d.clone();
    out.set_feature_column(col, &values);
    Ok(out)
}

/// Disjoint, exhaustive train/test row partition, deterministic per seed.
pub fn split(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(0.0..1.0).contains(&train_fraction) || train_fraction == 0.0 {
        return Err(Error::Validation(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let n_train = (d.n_rows as f64 * train_fraction).floor() as usize;
    if n_train == 0 || n_train == d.n_rows {
        return Err(Error::Validation(format!(
            "train fraction {train_fraction} leaves an empty side for {} rows",
            d.n_rows
        )));
    }
    let mut idx: Vec<usize> = (0..d.n_rows).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let mut train_idx = idx[..n_train].to_vec();
    let mut test_idx = idx[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((d.subset(&train_idx), d.subset(&test_idx)))
}
