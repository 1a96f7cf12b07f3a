use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::FeatureError;

/// Identity of one observation row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowId {
    pub ordinal: usize,
    pub obs_id: String,
}

/// Column-major named feature matrix aligned to a list of row identities.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    row_ids: Vec<RowId>,
    index: HashMap<String, usize>,
}

impl FeatureMatrix {
    pub fn empty(row_ids: Vec<RowId>) -> Self {
        Self { names: Vec::new(), columns: Vec::new(), row_ids, index: HashMap::new() }
    }

    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>, row_ids: Vec<RowId>) -> Result<Self, FeatureError> {
        if names.len() != columns.len() {
            return Err(FeatureError::LengthMismatch { expected: names.len(), got: columns.len() });
        }
        let mut m = Self::empty(row_ids);
        for (n, c) in names.into_iter().zip(columns) {
            m.push_column(n, c)?;
        }
        Ok(m)
    }

    /// Builds a matrix from row-major data with generated row ids; handy for
    /// small fixtures.
    pub fn from_rows(names: &[&str], rows: &[Vec<f64>]) -> Result<Self, FeatureError> {
        let ids = (0..rows.len()).map(|i| RowId { ordinal: 1, obs_id: i.to_string() }).collect();
        let cols = (0..names.len())
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        Self::new(names.iter().map(|s| s.to_string()).collect(), cols, ids)
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<(), FeatureError> {
        let name = name.into();
        if values.len() != self.row_ids.len() {
            return Err(FeatureError::LengthMismatch { expected: self.row_ids.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite(name));
        }
        if self.index.contains_key(&name) {
            return Err(FeatureError::DuplicateColumn(name));
        }
        self.index.insert(name.clone(), self.names.len());
        self.names.push(name);
        self.columns.push(values);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn row_ids(&self) -> &[RowId] {
        &self.row_ids
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.index.get(name).map(|&i| self.columns[i].as_slice())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Columns in the requested order.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<FeatureMatrix, FeatureError> {
        let mut out = Self::empty(self.row_ids.clone());
        for n in names {
            let n = n.as_ref();
            let col = self.column(n).ok_or_else(|| FeatureError::UnknownColumn(n.to_string()))?;
            out.push_column(n, col.to_vec())?;
        }
        Ok(out)
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| rows.iter().map(|&r| c[r]).collect()).collect(),
            row_ids: rows.iter().map(|&r| self.row_ids[r].clone()).collect(),
            index: self.index.clone(),
        }
    }

    /// Stacks matrices with identical column names vertically.
    pub fn vstack(parts: &[&FeatureMatrix]) -> Result<FeatureMatrix, FeatureError> {
        let Some(first) = parts.first() else {
            return Ok(FeatureMatrix::empty(Vec::new()));
        };
        for p in parts {
            if p.names != first.names {
                return Err(FeatureError::ColumnMismatch(format!(
                    "cannot stack {:?} onto {:?}",
                    p.names.first(),
                    first.names.first()
                )));
            }
        }
        let columns = (0..first.n_cols())
            .map(|j| parts.iter().flat_map(|p| p.columns[j].iter().copied()).collect())
            .collect();
        let row_ids = parts.iter().flat_map(|p| p.row_ids.iter().cloned()).collect();
        Ok(FeatureMatrix { names: first.names.clone(), columns, row_ids, index: first.index.clone() })
    }

    /// Appends all columns of `other` (same rows).
    pub fn append(&mut self, other: FeatureMatrix) -> Result<(), FeatureError> {
        if other.row_ids != self.row_ids {
            return Err(FeatureError::ColumnMismatch("row identities differ".into()));
        }
        for (n, c) in other.names.into_iter().zip(other.columns) {
            self.push_column(n, c)?;
        }
        Ok(())
    }

    /// CSV with header `period,obs_id,<feature names...>`.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| std::io::Error::other(e.to_string());
        let mut header = vec!["period".to_string(), "obs_id".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(io)?;
        for (i, id) in self.row_ids.iter().enumerate() {
            let mut rec = vec![id.ordinal.to_string(), id.obs_id.clone()];
            rec.extend(self.columns.iter().map(|c| format!("{}", c[i])));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()
    }
}
