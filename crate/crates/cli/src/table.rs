//! Row-major result tables and their CSV / JSON encodings.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde_json::{json, Value};

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
}

impl Cell {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Cell::Num(v) => v,
            Cell::Int(v) => v as f64,
        }
    }

    /// 17 significant digits, so values round-trip exactly.
    pub fn render(&self) -> String {
        match *self {
            Cell::Num(v) if v.is_nan() => "NaN".into(),
            Cell::Num(v) if v.is_infinite() => if v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
        }
    }

    fn to_json(self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) => Value::Null,
            Cell::Int(v) => json!(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv_string(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json_value(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|c| c.to_json()).collect()))
            .collect();
        json!({ "columns": self.header, "rows": rows })
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<(), CliError> {
        let text = match format {
            Format::Csv => self.to_csv_string()?,
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json_value())
                    .map_err(|e| io_err(path, e))?;
                s.push('\n');
                s
            }
        };
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(text.as_bytes()).map_err(|e| io_err(path, e))?;
        w.flush().map_err(|e| io_err(path, e))
    }

    /// Read a table written by [`Table::write`]. Integer-looking cells in
    /// the `singular` column come back as [`Cell::Int`].
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut text = String::new();
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| io_err(path, e))?;
        match Format::from_path(path) {
            Format::Csv => Self::from_csv(&text),
            Format::Json => Self::from_json(&text),
        }
    }

    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let bad = |msg: String| CliError::Config(vec![format!("unreadable table: {msg}")]);
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let row = rec
                .iter()
                .map(|s| match s.parse::<i64>() {
                    Ok(v) => Ok(Cell::Int(v)),
                    Err(_) => s
                        .parse::<f64>()
                        .map(Cell::Num)
                        .map_err(|_| bad(format!("row {k}: cannot parse \"{s}\""))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let bad = |msg: String| CliError::Config(vec![format!("unreadable table: {msg}")]);
        let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let header = v["columns"]
            .as_array()
            .ok_or_else(|| bad("missing \"columns\"".into()))?
            .iter()
            .map(|h| h.as_str().map(String::from).ok_or_else(|| bad("non-string column".into())))
            .collect::<Result<Vec<_>, _>>()?;
        let rows = v["rows"]
            .as_array()
            .ok_or_else(|| bad("missing \"rows\"".into()))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| bad("row is not an array".into()))?
                    .iter()
                    .map(|c| match c {
                        Value::Null => Ok(Cell::Num(f64::NAN)),
                        Value::Number(n) if n.is_i64() => Ok(Cell::Int(n.as_i64().unwrap_or(0))),
                        Value::Number(n) => Ok(Cell::Num(n.as_f64().unwrap_or(f64::NAN))),
                        other => Err(bad(format!("unexpected cell {other}"))),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { header, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(Cell::Num(0.1).render(), "1.0000000000000001e-1");
        assert_eq!(Cell::Num(-2.0).render(), "-2.0000000000000000e0");
        assert_eq!(Cell::Num(f64::NAN).render(), "NaN");
        assert_eq!(Cell::Int(1).render(), "1");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = Table {
            header: vec!["a".into(), "singular".into()],
            rows: vec![
                vec![Cell::Num(std::f64::consts::PI / 7.0), Cell::Int(0)],
                vec![Cell::Num(f64::NAN), Cell::Int(1)],
                vec![Cell::Num(-1e-300), Cell::Int(0)],
            ],
        };
        let back = Table::from_csv(&t.to_csv_string().unwrap()).unwrap();
        assert_eq!(back.header, t.header);
        assert_eq!(back.rows[0], t.rows[0]);
        assert!(back.rows[1][0].as_f64().is_nan());
        assert_eq!(back.rows[2], t.rows[2]);
    }

    #[test]
    fn json_round_trip() {
        let t = Table {
            header: vec!["x".into(), "singular".into()],
            rows: vec![vec![Cell::Num(1.0 / 3.0), Cell::Int(1)], vec![Cell::Num(f64::NAN), Cell::Int(0)]],
        };
        let back = Table::from_json(&t.to_json_value().to_string()).unwrap();
        assert_eq!(back.rows[0], t.rows[0]);
        assert!(back.rows[1][0].as_f64().is_nan());
    }
}
