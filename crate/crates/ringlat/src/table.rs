//! Plot-ready tables and their CSV/JSON encodings.
//!
//! CSV files start with `# key: value` metadata lines, then a header row.
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! every finite `f64`. JSON files hold `{"metadata", "columns", "rows"}` with
//! one object per row in column order.

use std::io::{BufRead, Write};

use serde_json::{json, Map, Value as Json};

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("row {row} has {got} values, schema has {want} columns")]
    Width { row: usize, got: usize, want: usize },
    #[error("row {row}, column `{column}`: expected {expected}")]
    Kind { row: usize, column: String, expected: &'static str },
    #[error("column `{0}` holds a non-finite value, which JSON cannot represent")]
    NonFinite(String),
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Text,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Float => "float",
            Kind::Int => "int",
            Kind::Text => "text",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn kind(&self) -> Kind {
        match self {
            Cell::Float(_) => Kind::Float,
            Cell::Int(_) => Kind::Int,
            Cell::Text(_) => Kind::Text,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Float(x) => Some(x),
            Cell::Int(i) => Some(i as f64),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    columns: Vec<(String, Kind)>,
}

impl Schema {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = (S, Kind)>) -> Self {
        Self {
            columns: columns.into_iter().map(|(n, k)| (n.into(), k)).collect(),
        }
    }

    /// All columns floating point.
    pub fn floats<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Self::new(names.into_iter().map(|n| (n, Kind::Float)))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.0.as_str())
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    fn check(&self, index: usize, row: &[Cell]) -> Result<(), TableError> {
        if row.len() != self.columns.len() {
            return Err(TableError::Width {
                row: index,
                got: row.len(),
                want: self.columns.len(),
            });
        }
        for ((name, kind), cell) in self.columns.iter().zip(row) {
            if cell.kind() != *kind {
                return Err(TableError::Kind {
                    row: index,
                    column: name.clone(),
                    expected: kind.name(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Schema,
    rows: Vec<Vec<Cell>>,
    metadata: Vec<(String, String)>,
}

impl Table {
    pub fn new(schema: Schema) -> Self {
        Self {
            schema,
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), TableError> {
        self.schema.check(self.rows.len(), &row)?;
        self.rows.push(row);
        Ok(())
    }

    /// Sets a metadata entry, replacing an existing one with the same key.
    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.metadata.iter_mut().find(|m| m.0 == key) {
            Some(slot) => slot.1 = value,
            None => self.metadata.push((key, value)),
        }
    }

    /// Puts `entries` ahead of the existing metadata; existing keys win.
    pub fn prepend_meta(&mut self, entries: Vec<(String, String)>) {
        let own = std::mem::replace(&mut self.metadata, entries);
        for (k, v) in own {
            self.meta(k, v);
        }
    }

    /// Float column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.schema.names().position(|n| n == name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Float(x) => format_float(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

/// Writes `table` in `format`. Output depends only on the table contents.
pub fn emit_table<W: Write>(table: &Table, format: Format, mut out: W) -> Result<(), TableError> {
    match format {
        Format::Csv => {
            for (k, v) in &table.metadata {
                // one physical line per entry
                writeln!(out, "# {k}: {}", v.replace(['\n', '\r'], " "))?;
            }
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
            w.write_record(table.schema.names())?;
            for row in &table.rows {
                w.write_record(row.iter().map(cell_text))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut meta = Map::new();
            for (k, v) in &table.metadata {
                meta.insert(k.clone(), Json::String(v.clone()));
            }
            let columns: Vec<Json> = table
                .schema
                .columns
                .iter()
                .map(|(n, k)| json!({"name": n, "type": k.name()}))
                .collect();
            let mut rows = Vec::with_capacity(table.rows.len());
            for row in &table.rows {
                let mut rec = Map::new();
                for ((name, _), cell) in table.schema.columns.iter().zip(row) {
                    let v = match cell {
                        Cell::Float(x) => Json::from(serde_json::Number::from_f64(*x).ok_or_else(|| TableError::NonFinite(name.clone()))?),
                        Cell::Int(i) => Json::from(*i),
                        Cell::Text(s) => Json::String(s.clone()),
                    };
                    rec.insert(name.clone(), v);
                }
                rows.push(Json::Object(rec));
            }
            let doc = json!({"metadata": meta, "columns": columns, "rows": rows});
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// A CSV file as written by [`emit_table`]: metadata, header and raw fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub records: Vec<Vec<String>>,
}

impl CsvFile {
    /// Parses one column as floats.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>, TableError> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TableError::Malformed(format!("no column `{name}`")))?;
        self.records
            .iter()
            .map(|r| r[i].parse::<f64>().map_err(|e| TableError::Malformed(format!("`{}` in `{name}`: {e}", r[i]))))
            .collect()
    }
}

pub fn read_csv<R: BufRead>(mut input: R) -> Result<CsvFile, TableError> {
    let mut metadata = Vec::new();
    let mut line = String::new();
    let mut rest = Vec::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        match line.strip_prefix("# ") {
            Some(m) => {
                let m = m.trim_end_matches(['\n', '\r']);
                let (k, v) = m
                    .split_once(": ")
                    .ok_or_else(|| TableError::Malformed(format!("metadata line `{m}`")))?;
                metadata.push((k.to_owned(), v.to_owned()));
            }
            None => {
                rest.extend_from_slice(line.as_bytes());
                input.read_to_end(&mut rest)?;
                break;
            }
        }
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(rest.as_slice());
    let header = r.headers()?.iter().map(str::to_owned).collect();
    let records = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_owned).collect()))
        .collect::<Result<_, _>>()?;
    Ok(CsvFile { metadata, header, records })
}

/// Reads a two-column `(x, V)` table separated by whitespace or commas.
/// Blank lines and lines starting with `#` are skipped.
pub fn read_potential_table<R: BufRead>(input: R) -> Result<Vec<(f64, f64)>, TableError> {
    let mut points = Vec::new();
    let mut header = false;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| TableError::Malformed(format!("line {}: `{s}` is not a finite number", i + 1)))
        };
        match fields.as_slice() {
            // a header line is allowed before the data
            [x, v] if points.is_empty() && !header && x.parse::<f64>().is_err() && v.parse::<f64>().is_err() => header = true,
            [x, v] => points.push((parse(x)?, parse(v)?)),
            _ => return Err(TableError::Malformed(format!("line {}: expected two columns", i + 1))),
        }
    }
    Ok(points)
}
