//! CSV ingestion, missing-value imputation and equal-frequency discretization.
//!
//! A [`RawTable`] keeps every cell as text and records, per column, whether
//! all non-missing cells parse as finite numbers. [`fit_preprocessor`] learns
//! imputation statistics and bin edges from training data only;
//! [`PreprocessModel::apply`] turns any table with the same schema into a
//! [`DiscreteTable`].

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::DiscreteTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub kind: ColumnKind,
    /// `None` marks a missing cell.
    pub cells: Vec<Option<String>>,
}

impl RawColumn {
    /// Builds a column and infers its kind from the non-missing cells.
    pub fn new(name: impl Into<String>, cells: Vec<Option<String>>) -> Self {
        let numeric = cells.iter().flatten().all(|c| parse_number(c).is_some());
        RawColumn {
            name: name.into(),
            kind: if numeric {
                ColumnKind::Numeric
            } else {
                ColumnKind::Categorical
            },
            cells,
        }
    }

    pub fn numeric(name: impl Into<String>, values: &[Option<f64>]) -> Self {
        RawColumn {
            name: name.into(),
            kind: ColumnKind::Numeric,
            cells: values.iter().map(|v| v.map(format_number)).collect(),
        }
    }

    /// Parsed values of a numeric column; `None` for categorical columns.
    pub fn values(&self) -> Option<Vec<Option<f64>>> {
        if self.kind != ColumnKind::Numeric {
            return None;
        }
        Some(
            self.cells
                .iter()
                .map(|c| c.as_deref().and_then(parse_number))
                .collect(),
        )
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Shortest round-tripping decimal rendering.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

/// A typed table of text cells with missing markers resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTable {
    columns: Vec<RawColumn>,
    n_rows: usize,
}

#[derive(Clone, Debug)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    pub missing_markers: Vec<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: true,
            missing_markers: vec![String::new(), "?".to_string()],
        }
    }
}

impl RawTable {
    pub fn new(columns: Vec<RawColumn>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, |c| c.cells.len());
        if let Some(c) = columns.iter().find(|c| c.cells.len() != n_rows) {
            return Err(Error::invalid(format!(
                "column `{}` has {} rows, expected {n_rows}",
                c.name,
                c.cells.len()
            )));
        }
        Ok(RawTable { columns, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_attrs(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[RawColumn] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &RawColumn {
        &self.columns[i]
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Rows in the given order; column kinds are kept as they are.
    pub fn select_rows(&self, rows: &[usize]) -> RawTable {
        RawTable {
            columns: self
                .columns
                .iter()
                .map(|c| RawColumn {
                    name: c.name.clone(),
                    kind: c.kind,
                    cells: rows.iter().map(|&r| c.cells[r].clone()).collect(),
                })
                .collect(),
            n_rows: rows.len(),
        }
    }

    /// Splits off one column, returning the remaining table and the column.
    pub fn remove_column(&self, index: usize) -> (RawTable, RawColumn) {
        let mut columns = self.columns.clone();
        let removed = columns.remove(index);
        (
            RawTable {
                columns,
                n_rows: self.n_rows,
            },
            removed,
        )
    }

    pub fn replace_column(&mut self, index: usize, column: RawColumn) -> Result<()> {
        if column.cells.len() != self.n_rows {
            return Err(Error::invalid("replacement column has the wrong length"));
        }
        self.columns[index] = column;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(writer);
        let io = |e: csv::Error| Error::io("<csv output>", std::io::Error::other(e));
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))
            .map_err(io)?;
        for r in 0..self.n_rows {
            w.write_record(
                self.columns
                    .iter()
                    .map(|c| c.cells[r].as_deref().unwrap_or("")),
            )
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, b',')?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Reads a CSV file into a [`RawTable`].
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, options)
}

pub fn read_csv<R: Read>(reader: R, options: &CsvOptions) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut line = 0usize;
    let parse_err = |row: usize, e: csv::Error| Error::Parse {
        row,
        message: e.to_string(),
    };
    if options.has_header {
        line += 1;
        match records.next() {
            Some(rec) => {
                let rec = rec.map_err(|e| parse_err(line, e))?;
                header = Some(rec.iter().map(|s| s.trim().to_string()).collect());
            }
            None => {
                return Err(Error::Parse {
                    row: 1,
                    message: "empty input".into(),
                })
            }
        }
    }
    for rec in records {
        line += 1;
        let rec = rec.map_err(|e| parse_err(line, e))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    let width = match (&header, rows.first()) {
        (Some(h), _) => h.len(),
        (None, Some(r)) => r.len(),
        (None, None) => {
            return Err(Error::Parse {
                row: 0,
                message: "empty input".into(),
            })
        }
    };
    let data_start = if options.has_header { 2 } else { 1 };
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(Error::Parse {
                row: data_start + i,
                message: format!("expected {width} fields, found {}", r.len()),
            });
        }
    }
    let names = header.unwrap_or_else(|| (1..=width).map(|i| format!("A{i}")).collect());
    let is_missing = |s: &str| options.missing_markers.iter().any(|m| m == s.trim());
    let columns = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let cells = rows
                .iter()
                .map(|r| {
                    let cell = &r[j];
                    (!is_missing(cell)).then(|| cell.trim().to_string())
                })
                .collect();
            RawColumn::new(name, cells)
        })
        .collect();
    RawTable::new(columns)
}

/// Per-column statistics learned from training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnModel {
    Numeric {
        name: String,
        mean: f64,
        /// Interior cut points; value ≤ edges[k] falls in bin k, the last bin is open above.
        edges: Vec<f64>,
        /// Training rows per bin after imputation.
        occupancy: Vec<usize>,
    },
    Categorical {
        name: String,
        mode: String,
        /// Code = position in this list; unseen symbols get code `symbols.len()`.
        symbols: Vec<String>,
    },
}

impl ColumnModel {
    pub fn name(&self) -> &str {
        match self {
            ColumnModel::Numeric { name, .. } | ColumnModel::Categorical { name, .. } => name,
        }
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnModel::Numeric { .. } => ColumnKind::Numeric,
            ColumnModel::Categorical { .. } => ColumnKind::Categorical,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessModel {
    pub bins: usize,
    pub columns: Vec<ColumnModel>,
}

/// Learns means, modes, dictionaries and equal-frequency bin edges.
pub fn fit_preprocessor(train: &RawTable, bins: usize) -> Result<PreprocessModel> {
    if bins == 0 {
        return Err(Error::invalid("bin count must be positive"));
    }
    if train.n_rows() == 0 {
        return Err(Error::invalid("training table is empty"));
    }
    let columns = train
        .columns()
        .iter()
        .map(|col| fit_column(col, bins))
        .collect::<Result<Vec<_>>>()?;
    Ok(PreprocessModel { bins, columns })
}

fn fit_column(col: &RawColumn, bins: usize) -> Result<ColumnModel> {
    if col.cells.iter().all(Option::is_none) {
        return Err(Error::UnusableColumn(col.name.clone()));
    }
    match col.kind {
        ColumnKind::Numeric => {
            let values = col.values().expect("numeric column");
            let present: Vec<f64> = values.iter().flatten().copied().collect();
            let mean = present.iter().sum::<f64>() / present.len() as f64;
            let edges = equal_frequency_edges(&present, bins);
            let mut occupancy = vec![0; edges.len() + 1];
            for v in &values {
                occupancy[bin_of(v.unwrap_or(mean), &edges)] += 1;
            }
            Ok(ColumnModel::Numeric {
                name: col.name.clone(),
                mean,
                edges,
                occupancy,
            })
        }
        ColumnKind::Categorical => {
            let mut symbols: Vec<String> = Vec::new();
            let mut counts: Vec<usize> = Vec::new();
            for c in col.cells.iter().flatten() {
                match symbols.iter().position(|s| s == c) {
                    Some(i) => counts[i] += 1,
                    None => {
                        symbols.push(c.clone());
                        counts.push(1);
                    }
                }
            }
            // first occurrence wins ties
            let best = counts
                .iter()
                .enumerate()
                .fold(0, |best, (i, &c)| if c > counts[best] { i } else { best });
            Ok(ColumnModel::Categorical {
                name: col.name.clone(),
                mode: symbols[best].clone(),
                symbols,
            })
        }
    }
}

/// Cut points splitting `values` into min(bins, distinct) bins of near-equal size.
///
/// Cuts fall only between distinct values, at midpoints. Each cut is the
/// distinct-value boundary closest to its ideal rank `j·n/k`, constrained so
/// that cuts stay strictly increasing and enough boundaries remain for the
/// cuts still to be placed.
pub fn equal_frequency_edges(values: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // boundary b means a cut between sorted[b - 1] and sorted[b]
    let boundaries: Vec<usize> = (1..n).filter(|&i| sorted[i] != sorted[i - 1]).collect();
    let k = bins.min(boundaries.len() + 1);
    let mut edges = Vec::with_capacity(k.saturating_sub(1));
    let mut lo = 0;
    for j in 1..k {
        let target = j as f64 * n as f64 / k as f64;
        let hi = boundaries.len() - (k - 1 - j);
        let mut pick = lo;
        for c in lo..hi {
            if (boundaries[c] as f64 - target).abs() < (boundaries[pick] as f64 - target).abs() {
                pick = c;
            }
        }
        let b = boundaries[pick];
        edges.push((sorted[b - 1] + sorted[b]) / 2.0);
        lo = pick + 1;
    }
    edges
}

fn bin_of(v: f64, edges: &[f64]) -> usize {
    edges.partition_point(|&e| e < v)
}

impl PreprocessModel {
    /// Imputes with training statistics and maps every cell to its code.
    pub fn apply(&self, data: &RawTable) -> Result<DiscreteTable> {
        self.check_schema(data)?;
        let mut codes = Vec::with_capacity(self.columns.len());
        let mut symbols = Vec::with_capacity(self.columns.len());
        for (model, col) in self.columns.iter().zip(data.columns()) {
            match model {
                ColumnModel::Numeric { mean, edges, .. } => {
                    let values = col.values().ok_or_else(|| Error::Schema {
                        column: col.name.clone(),
                        message: "expected a numeric column".into(),
                    })?;
                    codes.push(
                        values
                            .iter()
                            .map(|v| bin_of(v.unwrap_or(*mean), edges) as u32)
                            .collect(),
                    );
                    symbols.push(bin_labels(edges));
                }
                ColumnModel::Categorical {
                    mode,
                    symbols: dict,
                    ..
                } => {
                    let unknown = dict.len() as u32;
                    codes.push(
                        col.cells
                            .iter()
                            .map(|c| {
                                let sym = c.as_deref().unwrap_or(mode);
                                dict.iter()
                                    .position(|s| s == sym)
                                    .map_or(unknown, |i| i as u32)
                            })
                            .collect(),
                    );
                    let mut names = dict.clone();
                    names.push("<unknown>".to_string());
                    symbols.push(names);
                }
            }
        }
        let names = self.columns.iter().map(|c| c.name().to_string()).collect();
        DiscreteTable::with_names(names, codes, symbols)
    }

    /// Verifies column count, order, names and numeric parseability.
    pub fn check_schema(&self, data: &RawTable) -> Result<()> {
        for (i, model) in self.columns.iter().enumerate() {
            let Some(col) = data.columns().get(i) else {
                return Err(Error::Schema {
                    column: model.name().to_string(),
                    message: "column missing from input".into(),
                });
            };
            if col.name != model.name() {
                return Err(Error::Schema {
                    column: col.name.clone(),
                    message: format!("expected column `{}` at position {i}", model.name()),
                });
            }
            if model.kind() == ColumnKind::Numeric && col.kind != ColumnKind::Numeric {
                return Err(Error::Schema {
                    column: col.name.clone(),
                    message: "expected a numeric column".into(),
                });
            }
        }
        if let Some(extra) = data.columns().get(self.columns.len()) {
            return Err(Error::Schema {
                column: extra.name.clone(),
                message: "unexpected extra column".into(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn bin_labels(edges: &[f64]) -> Vec<String> {
    let mut out = Vec::with_capacity(edges.len() + 1);
    let mut lower = "-inf".to_string();
    for e in edges {
        let upper = format_number(*e);
        out.push(format!("({lower}, {upper}]"));
        lower = upper;
    }
    out.push(format!("({lower}, inf)"));
    out
}

/// Convenience: fit on `train` and apply to the same table.
pub fn fit_apply(train: &RawTable, bins: usize) -> Result<(PreprocessModel, DiscreteTable)> {
    let model = fit_preprocessor(train, bins)?;
    let table = model.apply(train)?;
    Ok((model, table))
}

pub fn apply_preprocessor(model: &PreprocessModel, data: &RawTable) -> Result<DiscreteTable> {
    model.apply(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::PAIR_EXAMPLE_CSV;

    fn csv(s: &str) -> RawTable {
        read_csv(s.as_bytes(), &CsvOptions::default()).unwrap()
    }

    fn one_to_ten() -> RawTable {
        let v: Vec<Option<f64>> = (1..=10).map(|i| Some(i as f64)).collect();
        RawTable::new(vec![RawColumn::numeric("x", &v)]).unwrap()
    }

    #[test]
    fn type_inference_and_missing_markers() {
        let t = csv("n,c\n1,R\n2,G\n?,B\n");
        assert_eq!(t.column(0).kind, ColumnKind::Numeric);
        assert_eq!(
            t.column(0).values().unwrap(),
            vec![Some(1.0), Some(2.0), None]
        );
        assert_eq!(t.column(1).kind, ColumnKind::Categorical);
        let (_, d) = fit_apply(&t, 10).unwrap();
        assert_eq!(d.arity(1), 3);
    }

    #[test]
    fn pair_example_csv_kinds() {
        let t = csv(PAIR_EXAMPLE_CSV);
        assert_eq!(t.n_rows(), 10);
        assert_eq!(t.column(0).kind, ColumnKind::Numeric);
        assert_eq!(t.column(1).kind, ColumnKind::Categorical);
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = read_csv("a,b\n1,2\n3\n".as_bytes(), &CsvOptions::default()).unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn custom_delimiter_and_marker() {
        let opts = CsvOptions {
            delimiter: b';',
            missing_markers: vec!["NA".into()],
            ..CsvOptions::default()
        };
        let t = read_csv("a;b\n1;NA\n2;x\n".as_bytes(), &opts).unwrap();
        assert_eq!(t.column(1).cells, vec![None, Some("x".to_string())]);
    }

    #[test]
    fn median_split() {
        let t = one_to_ten();
        let model = fit_preprocessor(&t, 2).unwrap();
        match &model.columns[0] {
            ColumnModel::Numeric {
                edges, occupancy, ..
            } => {
                assert_eq!(edges, &vec![5.5]);
                assert_eq!(occupancy, &vec![5, 5]);
            }
            _ => panic!("numeric expected"),
        }
        let d = model.apply(&t).unwrap();
        assert_eq!(d.column(0), &[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        let probe =
            RawTable::new(vec![RawColumn::numeric("x", &[Some(3.0), Some(7.0), None])]).unwrap();
        // missing imputed with the mean 5.5, which sits on the edge
        assert_eq!(model.apply(&probe).unwrap().column(0), &[0, 1, 0]);
    }

    #[test]
    fn categorical_mode_imputation() {
        let t = csv("c\nR\nR\nG\n?\n");
        let (model, d) = fit_apply(&t, 10).unwrap();
        match &model.columns[0] {
            ColumnModel::Categorical { mode, .. } => assert_eq!(mode, "R"),
            _ => panic!(),
        }
        assert_eq!(d.column(0), &[0, 0, 1, 0]);
    }

    #[test]
    fn mode_ties_go_to_first_occurrence() {
        let t = csv("c\nG\nR\nR\nG\n");
        let model = fit_preprocessor(&t, 10).unwrap();
        assert!(matches!(&model.columns[0], ColumnModel::Categorical { mode, .. } if mode == "G"));
    }

    #[test]
    fn unseen_symbol_gets_reserved_code() {
        let model = fit_preprocessor(&csv("c\nR\nG\n"), 10).unwrap();
        let d = model.apply(&csv("c\nZ\nG\n")).unwrap();
        assert_eq!(d.column(0), &[2, 1]);
        assert_eq!(d.symbol_names(0)[2], "<unknown>");
    }

    #[test]
    fn fully_missing_column_is_unusable() {
        let t = csv("a,b\n1,?\n2,?\n");
        match fit_preprocessor(&t, 3).unwrap_err() {
            Error::UnusableColumn(name) => assert_eq!(name, "b"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_mismatch_names_column() {
        let model = fit_preprocessor(&csv("a,b\n1,x\n2,y\n"), 3).unwrap();
        match model.apply(&csv("a,c\n1,x\n")).unwrap_err() {
            Error::Schema { column, .. } => assert_eq!(column, "c"),
            other => panic!("unexpected {other:?}"),
        }
        match model.apply(&csv("a\n1\n")).unwrap_err() {
            Error::Schema { column, .. } => assert_eq!(column, "b"),
            other => panic!("unexpected {other:?}"),
        }
        match model.apply(&csv("a,b\nq,x\n")).unwrap_err() {
            Error::Schema { column, .. } => assert_eq!(column, "a"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn categorical_model_accepts_numeric_looking_input() {
        let model = fit_preprocessor(&csv("c\nx\n1\n"), 3).unwrap();
        assert_eq!(model.apply(&csv("c\n1\n")).unwrap().column(0), &[1]);
    }

    #[test]
    fn duplicates_stay_in_one_bin() {
        let values = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 3.0];
        let edges = equal_frequency_edges(&values, 10);
        assert_eq!(edges, vec![1.5, 2.5]);
        let edges = equal_frequency_edges(&values, 2);
        assert_eq!(edges, vec![1.5]);
    }

    #[test]
    fn model_json_round_trip() {
        let model = fit_preprocessor(&csv("a,b\n1,x\n2,y\n5,x\n"), 2).unwrap();
        assert_eq!(
            PreprocessModel::from_json(&model.to_json().unwrap()).unwrap(),
            model
        );
    }
}
