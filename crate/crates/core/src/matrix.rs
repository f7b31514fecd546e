//! Prediction and label matrices.
//!
//! Both are row-major with one row per target record. Records carry string
//! ids so that prediction and label files can be joined by id rather than by
//! position.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    Empty { rows: usize, cols: usize },
    #[error("row {row} has {found} values, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("value at row {row}, column {col} is outside [0, 1]")]
    OutOfRange { row: usize, col: usize },
    #[error("expected {expected} record ids, got {found}")]
    IdCount { expected: usize, found: usize },
    #[error("expected {expected} column names, got {found}")]
    NameCount { expected: usize, found: usize },
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("duplicate column name `{0}`")]
    DuplicateName(String),
    #[error("row index {index} out of range for {rows} records")]
    RowIndex { index: usize, rows: usize },
    #[error("column index {index} out of range for {cols} columns")]
    ColumnIndex { index: usize, cols: usize },
}

fn check_unique<'a, I: IntoIterator<Item = &'a String>>(
    items: I,
    err: fn(String) -> MatrixError,
) -> Result<(), MatrixError> {
    let mut seen = HashSet::new();
    for item in items {
        if !seen.insert(item.as_str()) {
            return Err(err(item.clone()));
        }
    }
    Ok(())
}

fn default_names(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|i| format!("{prefix}{i}")).collect()
}

/// Per-record predicted probabilities for each source label of a checkpoint.
///
/// Entry `(i, z)` is the probability that source label `z` applies to record
/// `i`. The complement is derived on demand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionMatrix<T> {
    record_ids: Vec<String>,
    source_label_names: Vec<String>,
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Scalar> PredictionMatrix<T> {
    pub fn new(
        record_ids: Vec<String>,
        source_label_names: Vec<String>,
        rows: Vec<Vec<T>>,
    ) -> Result<Self, MatrixError> {
        let n = rows.len();
        let z = source_label_names.len();
        if n == 0 || z == 0 {
            return Err(MatrixError::Empty { rows: n, cols: z });
        }
        if record_ids.len() != n {
            return Err(MatrixError::IdCount { expected: n, found: record_ids.len() });
        }
        check_unique(&record_ids, MatrixError::DuplicateId)?;
        check_unique(&source_label_names, MatrixError::DuplicateName)?;
        let mut values = Vec::with_capacity(n * z);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != z {
                return Err(MatrixError::Ragged { row: i, found: row.len(), expected: z });
            }
            for (j, v) in row.into_iter().enumerate() {
                // NaN fails both comparisons
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(MatrixError::OutOfRange { row: i, col: j });
                }
                values.push(v);
            }
        }
        Ok(Self { record_ids, source_label_names, rows: n, cols: z, values })
    }

    /// Builds a matrix with generated ids (`r0`, `r1`, ...) and source names
    /// (`s0`, `s1`, ...).
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        let z = rows.first().map_or(0, Vec::len);
        Self::new(default_names("r", n), default_names("s", z), rows)
    }

    pub fn n(&self) -> usize {
        self.rows
    }

    /// Number of source labels.
    pub fn z(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, record: usize, source: usize) -> T {
        self.values[record * self.cols + source]
    }

    pub fn row(&self, record: usize) -> &[T] {
        &self.values[record * self.cols..(record + 1) * self.cols]
    }

    pub fn column(&self, source: usize) -> impl Iterator<Item = T> + '_ {
        (0..self.rows).map(move |i| self.get(i, source))
    }

    pub fn record_ids(&self) -> &[String] {
        &self.record_ids
    }

    pub fn source_label_names(&self) -> &[String] {
        &self.source_label_names
    }

    /// Returns the sub-matrix made of the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self, MatrixError> {
        if indices.is_empty() {
            return Err(MatrixError::Empty { rows: 0, cols: self.cols });
        }
        let mut ids = Vec::with_capacity(indices.len());
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(MatrixError::RowIndex { index: i, rows: self.rows });
            }
            ids.push(self.record_ids[i].clone());
            values.extend_from_slice(self.row(i));
        }
        check_unique(&ids, MatrixError::DuplicateId)?;
        Ok(Self {
            record_ids: ids,
            source_label_names: self.source_label_names.clone(),
            rows: indices.len(),
            cols: self.cols,
            values,
        })
    }

    /// Returns the matrix with source columns rearranged.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self, MatrixError> {
        if indices.is_empty() {
            return Err(MatrixError::Empty { rows: self.rows, cols: 0 });
        }
        if let Some(&bad) = indices.iter().find(|&&c| c >= self.cols) {
            return Err(MatrixError::ColumnIndex { index: bad, cols: self.cols });
        }
        let names: Vec<String> = indices.iter().map(|&c| self.source_label_names[c].clone()).collect();
        check_unique(&names, MatrixError::DuplicateName)?;
        let mut values = Vec::with_capacity(self.rows * indices.len());
        for i in 0..self.rows {
            values.extend(indices.iter().map(|&c| self.get(i, c)));
        }
        Ok(Self {
            record_ids: self.record_ids.clone(),
            source_label_names: names,
            rows: self.rows,
            cols: indices.len(),
            values,
        })
    }

    /// Reorders rows so that record ids follow `order`. Every id must be
    /// present exactly once.
    pub fn align_to(&self, order: &[String]) -> Result<Self, AlignError> {
        let index: std::collections::HashMap<&str, usize> =
            self.record_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut rows = Vec::with_capacity(order.len());
        for id in order {
            match index.get(id.as_str()) {
                Some(&i) => rows.push(i),
                None => return Err(AlignError::MissingInPredictions(id.clone())),
            }
        }
        if order.len() != self.rows {
            let wanted: HashSet<&str> = order.iter().map(String::as_str).collect();
            let extra = self
                .record_ids
                .iter()
                .find(|id| !wanted.contains(id.as_str()))
                .cloned()
                .unwrap_or_default();
            return Err(AlignError::MissingInLabels(extra));
        }
        Ok(self.select_rows(&rows).expect("indices come from the id map"))
    }

    pub fn cast<U: Scalar>(&self, f: impl Fn(T) -> U) -> PredictionMatrix<U> {
        PredictionMatrix {
            record_ids: self.record_ids.clone(),
            source_label_names: self.source_label_names.clone(),
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignError {
    #[error("record `{0}` has labels but no predictions")]
    MissingInPredictions(String),
    #[error("record `{0}` has predictions but no labels")]
    MissingInLabels(String),
}

/// Binary ground truth for the target task, one column per target label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelMatrix {
    record_ids: Vec<String>,
    target_label_names: Vec<String>,
    rows: usize,
    cols: usize,
    values: Vec<bool>,
}

impl LabelMatrix {
    pub fn new(
        record_ids: Vec<String>,
        target_label_names: Vec<String>,
        rows: Vec<Vec<bool>>,
    ) -> Result<Self, MatrixError> {
        let n = rows.len();
        let y = target_label_names.len();
        if n == 0 || y == 0 {
            return Err(MatrixError::Empty { rows: n, cols: y });
        }
        if record_ids.len() != n {
            return Err(MatrixError::IdCount { expected: n, found: record_ids.len() });
        }
        check_unique(&record_ids, MatrixError::DuplicateId)?;
        check_unique(&target_label_names, MatrixError::DuplicateName)?;
        let mut values = Vec::with_capacity(n * y);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != y {
                return Err(MatrixError::Ragged { row: i, found: row.len(), expected: y });
            }
            values.extend(row);
        }
        Ok(Self { record_ids, target_label_names, rows: n, cols: y, values })
    }

    /// Builds a matrix from 0/1 rows with generated ids and label names
    /// (`t0`, `t1`, ...). Any nonzero entry counts as positive.
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        let y = rows.first().map_or(0, Vec::len);
        let rows = rows.into_iter().map(|r| r.into_iter().map(|v| v != 0).collect()).collect();
        Self::new(default_names("r", n), default_names("t", y), rows)
    }

    pub fn n(&self) -> usize {
        self.rows
    }

    /// Number of target labels.
    pub fn y(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, record: usize, label: usize) -> bool {
        self.values[record * self.cols + label]
    }

    pub fn row(&self, record: usize) -> &[bool] {
        &self.values[record * self.cols..(record + 1) * self.cols]
    }

    pub fn record_ids(&self) -> &[String] {
        &self.record_ids
    }

    pub fn target_label_names(&self) -> &[String] {
        &self.target_label_names
    }

    pub fn positives(&self, label: usize) -> usize {
        (0..self.rows).filter(|&i| self.get(i, label)).count()
    }

    pub fn negatives(&self, label: usize) -> usize {
        self.rows - self.positives(label)
    }

    pub fn select_rows(&self, indices: &[usize]) -> Result<Self, MatrixError> {
        if indices.is_empty() {
            return Err(MatrixError::Empty { rows: 0, cols: self.cols });
        }
        let mut ids = Vec::with_capacity(indices.len());
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(MatrixError::RowIndex { index: i, rows: self.rows });
            }
            ids.push(self.record_ids[i].clone());
            values.extend_from_slice(self.row(i));
        }
        check_unique(&ids, MatrixError::DuplicateId)?;
        Ok(Self {
            record_ids: ids,
            target_label_names: self.target_label_names.clone(),
            rows: indices.len(),
            cols: self.cols,
            values,
        })
    }

    pub fn select_columns(&self, indices: &[usize]) -> Result<Self, MatrixError> {
        if indices.is_empty() {
            return Err(MatrixError::Empty { rows: self.rows, cols: 0 });
        }
        if let Some(&bad) = indices.iter().find(|&&c| c >= self.cols) {
            return Err(MatrixError::ColumnIndex { index: bad, cols: self.cols });
        }
        let names: Vec<String> = indices.iter().map(|&c| self.target_label_names[c].clone()).collect();
        check_unique(&names, MatrixError::DuplicateName)?;
        let mut values = Vec::with_capacity(self.rows * indices.len());
        for i in 0..self.rows {
            values.extend(indices.iter().map(|&c| self.get(i, c)));
        }
        Ok(Self {
            record_ids: self.record_ids.clone(),
            target_label_names: names,
            rows: self.rows,
            cols: indices.len(),
            values,
        })
    }
}
