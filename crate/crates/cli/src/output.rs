//! Table rendering: the same run can be emitted as CSV (header row, LF
//! endings, decimals with 17 significant digits) or JSON (exact "num/den"
//! strings preserved next to the decimal value).

use ccp_core::numerics::decimal_string;
use ccp_core::Scalar;
use num_bigint::BigInt;
use serde_json::{Map, Number, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub enum Cell {
    UInt(u64),
    BigInt(BigInt),
    Scalar {
        exact: Option<String>,
        decimal: String,
    },
    Float(f64),
    Text(String),
}

impl Cell {
    pub fn scalar<S: Scalar>(value: &S) -> Self {
        Cell::Scalar {
            exact: value.as_fraction_string(),
            decimal: decimal_string(value),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::UInt(v) => v.to_string(),
            Cell::BigInt(v) => v.to_string(),
            Cell::Scalar { decimal, .. } => decimal.clone(),
            Cell::Float(v) => format!("{v}"),
            Cell::Text(v) => {
                if v.contains([',', '"', '\n']) {
                    format!("\"{}\"", v.replace('"', "\"\""))
                } else {
                    v.clone()
                }
            }
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::UInt(v) => Value::from(*v),
            Cell::BigInt(v) => raw_number(&v.to_string()),
            Cell::Scalar { exact, decimal } => match exact {
                Some(fraction) => {
                    let mut obj = Map::new();
                    obj.insert("exact".to_owned(), Value::from(fraction.clone()));
                    obj.insert("decimal".to_owned(), raw_number(decimal));
                    Value::Object(obj)
                }
                None => raw_number(decimal),
            },
            Cell::Float(v) => Value::from(*v),
            Cell::Text(v) => Value::from(v.clone()),
        }
    }
}

/// Emits the exact digit string as a JSON number (arbitrary precision, so
/// CSV and JSON carry identical numeric text); falls back to a string when
/// the token is not a finite number.
fn raw_number(token: &str) -> Value {
    let ok = token.parse::<f64>().map(f64::is_finite).unwrap_or(false);
    if ok {
        return Value::Number(Number::from_string_unchecked(token.to_owned()));
    }
    Value::from(token.to_owned())
}

/// One command's result: metadata, a column-labelled table, optional extra
/// JSON payload, warnings for stderr, and the process exit code.
pub struct Output {
    pub command: &'static str,
    pub meta: Vec<(&'static str, Value)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub extra: Vec<(&'static str, Value)>,
    pub warnings: Vec<String>,
    /// stderr lines emitted verbatim (failure details in CSV mode)
    pub notes: Vec<String>,
    pub exit: u8,
}

impl Output {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            command,
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
            extra: Vec::new(),
            warnings: Vec::new(),
            notes: Vec::new(),
            exit: 0,
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn meta(&mut self, key: &'static str, value: impl Into<Value>) {
        self.meta.push((key, value.into()));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let mut obj = Map::new();
        obj.insert("command".to_owned(), Value::from(self.command));
        for (key, value) in &self.meta {
            obj.insert((*key).to_owned(), value.clone());
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut entry = Map::new();
                for (column, cell) in self.columns.iter().zip(row) {
                    entry.insert((*column).to_owned(), cell.json());
                }
                Value::Object(entry)
            })
            .collect();
        obj.insert("rows".to_owned(), Value::from(rows));
        for (key, value) in &self.extra {
            obj.insert((*key).to_owned(), value.clone());
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(obj)).expect("render json");
        text.push('\n');
        text
    }
}
