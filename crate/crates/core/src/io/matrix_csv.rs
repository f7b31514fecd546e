use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};

use super::DataError;
use crate::matrix::{LabelMatrix, PredictionMatrix};

struct RawTable {
    names: Vec<String>,
    ids: Vec<String>,
    /// (line, cells) per data row
    rows: Vec<(u64, StringRecord)>,
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}

fn csv_error(path: &Path, err: csv::Error) -> DataError {
    DataError::Csv { path: path.to_path_buf(), message: err.to_string() }
}

fn read_table<R: Read>(reader: R, path: &Path) -> Result<RawTable, DataError> {
    let mut rdr = ReaderBuilder::new().has_headers(false).flexible(true).trim(Trim::All).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_error(path, e))?,
        None => return Err(DataError::MissingHeader { path: path.to_path_buf() }),
    };
    let first = header.get(0).map(|c| c.trim_start_matches('\u{feff}'));
    if first != Some("id") {
        return Err(DataError::MissingHeader { path: path.to_path_buf() });
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if names.is_empty() {
        return Err(DataError::NoLabelColumns { path: path.to_path_buf() });
    }
    let mut seen = HashSet::new();
    for name in &names {
        if !seen.insert(name.as_str()) {
            return Err(DataError::DuplicateColumn { path: path.to_path_buf(), name: name.clone() });
        }
    }

    let expected = names.len() + 1;
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut seen_ids = HashSet::new();
    for record in records {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != expected {
            return Err(DataError::RaggedRow { path: path.to_path_buf(), row: line, found: record.len(), expected });
        }
        let id = record.get(0).unwrap_or_default().to_owned();
        if id.is_empty() {
            return Err(DataError::EmptyId { path: path.to_path_buf(), row: line });
        }
        if !seen_ids.insert(id.clone()) {
            return Err(DataError::DuplicateId { path: path.to_path_buf(), row: line, id });
        }
        ids.push(id);
        rows.push((line, record));
    }
    if rows.is_empty() {
        return Err(DataError::NoRecords { path: path.to_path_buf() });
    }
    Ok(RawTable { names, ids, rows })
}

fn parse_probability(path: &Path, row: u64, col: usize, cell: &str) -> Result<f64, DataError> {
    let value: f64 = cell.parse().map_err(|_| DataError::NonNumericCell {
        path: path.to_path_buf(),
        row,
        col,
        value: cell.to_owned(),
    })?;
    if value.is_nan() {
        return Err(DataError::NonNumericCell { path: path.to_path_buf(), row, col, value: cell.to_owned() });
    }
    if !(0.0..=1.0).contains(&value) {
        return Err(DataError::OutOfRange { path: path.to_path_buf(), row, col, value: cell.to_owned() });
    }
    Ok(value)
}

/// Parses a prediction matrix from any reader; `path` only labels errors.
pub fn parse_prediction_csv<R: Read>(reader: R, path: &Path) -> Result<PredictionMatrix<f64>, DataError> {
    let table = read_table(reader, path)?;
    let mut rows = Vec::with_capacity(table.rows.len());
    for (line, record) in &table.rows {
        let row = record
            .iter()
            .enumerate()
            .skip(1)
            .map(|(c, cell)| parse_probability(path, *line, c + 1, cell))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    PredictionMatrix::new(table.ids, table.names, rows).map_err(|e| DataError::invalid(path, e.to_string()))
}

pub fn parse_label_csv<R: Read>(reader: R, path: &Path) -> Result<LabelMatrix, DataError> {
    let table = read_table(reader, path)?;
    let mut rows = Vec::with_capacity(table.rows.len());
    for (line, record) in &table.rows {
        let row = record
            .iter()
            .enumerate()
            .skip(1)
            .map(|(c, cell)| match cell {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(DataError::NonBinaryCell {
                    path: path.to_path_buf(),
                    row: *line,
                    col: c + 1,
                    value: other.to_owned(),
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    LabelMatrix::new(table.ids, table.names, rows).map_err(|e| DataError::invalid(path, e.to_string()))
}

pub fn read_prediction_csv(path: impl AsRef<Path>) -> Result<PredictionMatrix<f64>, DataError> {
    let path = path.as_ref();
    parse_prediction_csv(open(path)?, path)
}

pub fn read_label_csv(path: impl AsRef<Path>) -> Result<LabelMatrix, DataError> {
    let path = path.as_ref();
    parse_label_csv(open(path)?, path)
}

fn write_rows<W: Write>(
    writer: W,
    path: &Path,
    names: &[String],
    ids: &[String],
    mut cells: impl FnMut(usize) -> Vec<String>,
) -> Result<(), DataError> {
    let mut wtr = WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let header = std::iter::once("id").chain(names.iter().map(String::as_str));
    wtr.write_record(header).map_err(|e| csv_error(path, e))?;
    for (i, id) in ids.iter().enumerate() {
        let row = std::iter::once(id.clone()).chain(cells(i));
        wtr.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    wtr.flush().map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}

fn create(path: &Path) -> Result<File, DataError> {
    File::create(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}

/// Writes probabilities with the shortest representation that reads back to
/// the same `f64`.
pub fn write_prediction_csv(path: impl AsRef<Path>, preds: &PredictionMatrix<f64>) -> Result<(), DataError> {
    let path = path.as_ref();
    write_rows(create(path)?, path, preds.source_label_names(), preds.record_ids(), |i| {
        preds.row(i).iter().map(|v| v.to_string()).collect()
    })
}

pub fn write_label_csv(path: impl AsRef<Path>, labels: &LabelMatrix) -> Result<(), DataError> {
    let path = path.as_ref();
    write_rows(create(path)?, path, labels.target_label_names(), labels.record_ids(), |i| {
        labels.row(i).iter().map(|&b| if b { "1" } else { "0" }.to_owned()).collect()
    })
}

fn read_keyed_rows(path: &Path, expected_header: &[&str]) -> Result<Vec<(u64, StringRecord)>, DataError> {
    let mut rdr = ReaderBuilder::new().has_headers(false).flexible(true).trim(Trim::All).from_reader(open(path)?);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_error(path, e))?,
        None => return Err(DataError::MissingHeader { path: path.to_path_buf() }),
    };
    let header: Vec<&str> = header.iter().map(|c| c.trim_start_matches('\u{feff}')).collect();
    if header != expected_header {
        return Err(DataError::invalid(path, format!("expected header `{}`", expected_header.join(","))));
    }
    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != expected_header.len() {
            return Err(DataError::RaggedRow {
                path: path.to_path_buf(),
                row: line,
                found: record.len(),
                expected: expected_header.len(),
            });
        }
        rows.push((line, record));
    }
    Ok(rows)
}

/// Reads per-source-label weights from a `label,weight` CSV, returned in the
/// order of `source_names`. Every source label must appear exactly once.
pub fn read_source_weights(path: impl AsRef<Path>, source_names: &[String]) -> Result<Vec<f64>, DataError> {
    let path = path.as_ref();
    let position: HashMap<&str, usize> = source_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut weights = vec![None; source_names.len()];
    for (line, record) in read_keyed_rows(path, &["label", "weight"])? {
        let name = &record[0];
        let &slot = position
            .get(name)
            .ok_or_else(|| DataError::invalid(path, format!("row {line}: unknown source label `{name}`")))?;
        if weights[slot].is_some() {
            return Err(DataError::invalid(path, format!("row {line}: source label `{name}` listed twice")));
        }
        let cell = &record[1];
        let w: f64 = cell.parse().map_err(|_| DataError::NonNumericCell {
            path: path.to_path_buf(),
            row: line,
            col: 2,
            value: cell.to_owned(),
        })?;
        if !(w.is_finite() && w >= 0.0) {
            return Err(DataError::invalid(path, format!("row {line}: weight must be finite and nonnegative")));
        }
        weights[slot] = Some(w);
    }
    weights
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.ok_or_else(|| DataError::invalid(path, format!("no weight for source label `{}`", source_names[i]))))
        .collect()
}

/// Externally measured downstream F1, keyed by (fold id, checkpoint id).
pub type F1Table = BTreeMap<(usize, String), f64>;

/// Reads a `fold_id,checkpoint_id,weighted_f1` CSV.
pub fn read_f1_table(path: impl AsRef<Path>) -> Result<F1Table, DataError> {
    let path = path.as_ref();
    let mut table = F1Table::new();
    for (line, record) in read_keyed_rows(path, &["fold_id", "checkpoint_id", "weighted_f1"])? {
        let fold: usize = record[0].parse().map_err(|_| DataError::NonNumericCell {
            path: path.to_path_buf(),
            row: line,
            col: 1,
            value: record[0].to_owned(),
        })?;
        let f1 = parse_probability(path, line, 3, &record[2])?;
        if table.insert((fold, record[1].to_owned()), f1).is_some() {
            return Err(DataError::invalid(
                path,
                format!("row {line}: duplicate entry for fold {fold}, checkpoint `{}`", &record[1]),
            ));
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preds(text: &str) -> Result<PredictionMatrix<f64>, DataError> {
        parse_prediction_csv(text.as_bytes(), Path::new("p.csv"))
    }

    fn labels(text: &str) -> Result<LabelMatrix, DataError> {
        parse_label_csv(text.as_bytes(), Path::new("l.csv"))
    }

    #[test]
    fn minimal_files() {
        let p = preds("id,A\nr1,0.5\n").unwrap();
        assert_eq!((p.n(), p.z()), (1, 1));
        assert_eq!(p.get(0, 0), 0.5);
        let l = labels("id,X\nr1,1\n").unwrap();
        assert!(l.get(0, 0));
    }

    #[test]
    fn accepts_crlf_and_scientific() {
        let p = preds("id,A,B\r\nr1,1e-3,2.5E-1\r\nr2,0,1\r\n").unwrap();
        assert_eq!(p.row(0), &[0.001, 0.25]);
        assert_eq!(p.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn cell_errors_carry_coordinates() {
        match preds("id,A,B\nr1,0.5,1.2\n").unwrap_err() {
            DataError::OutOfRange { row, col, .. } => assert_eq!((row, col), (2, 3)),
            e => panic!("{e}"),
        }
        match preds("id,A\nr1,0.5\nr2,abc\n").unwrap_err() {
            DataError::NonNumericCell { row, col, value, .. } => {
                assert_eq!((row, col, value.as_str()), (3, 2, "abc"))
            }
            e => panic!("{e}"),
        }
        assert!(matches!(preds("id,A\nr1,NaN\n"), Err(DataError::NonNumericCell { .. })));
        assert!(matches!(preds("id,A\nr1,inf\n"), Err(DataError::OutOfRange { .. })));
        match labels("id,X\nr1,0.5\n").unwrap_err() {
            DataError::NonBinaryCell { row, col, .. } => assert_eq!((row, col), (2, 2)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(preds(""), Err(DataError::MissingHeader { .. })));
        assert!(matches!(preds("name,A\nr1,0.5\n"), Err(DataError::MissingHeader { .. })));
        assert!(matches!(preds("id\nr1\n"), Err(DataError::NoLabelColumns { .. })));
        assert!(matches!(preds("id,A\n"), Err(DataError::NoRecords { .. })));
        assert!(matches!(preds("id,A,A\nr1,0.1,0.2\n"), Err(DataError::DuplicateColumn { .. })));
        match preds("id,A\nr1,0.5\nr1,0.2\n").unwrap_err() {
            DataError::DuplicateId { row, id, .. } => assert_eq!((row, id.as_str()), (3, "r1")),
            e => panic!("{e}"),
        }
        match preds("id,A,B\nr1,0.5\n").unwrap_err() {
            DataError::RaggedRow { row, found, expected, .. } => assert_eq!((row, found, expected), (2, 2, 3)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn strips_byte_order_mark() {
        let l = labels("\u{feff}id,X\nr1,0\n").unwrap();
        assert_eq!(l.n(), 1);
    }
}
