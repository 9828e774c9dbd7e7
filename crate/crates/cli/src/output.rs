//! Result tables, run manifests and their CSV/JSON encodings.

use std::collections::BTreeMap;
use std::io::{self, Write};

use chrono::{DateTime, SecondsFormat, Utc};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[cfg(test)]
impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }
}

/// Everything needed to reproduce a run. Two runs with equal manifests
/// (ignoring the timestamp) write identical tables.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub parameters: BTreeMap<&'static str, Value>,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn to_json(&self) -> Value {
        let params: Map<String, Value> = self
            .parameters
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        json!({
            "subcommand": self.subcommand,
            "parameters": params,
            "version": self.version,
            "seed": self.seed,
            "timestamp": self.timestamp,
        })
    }
}

/// `--timestamp` if given, else `SOURCE_DATE_EPOCH` (seconds), else now.
pub fn run_timestamp(explicit: Option<&str>) -> String {
    if let Some(t) = explicit {
        return t.to_string();
    }
    if let Some(dt) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
    {
        return dt.to_rfc3339_opts(SecondsFormat::Secs, true);
    }
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn write_table(out: &mut dyn Write, format: Format, manifest: &RunManifest, table: &Table) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "# manifest: {}", manifest.to_json())?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::csv))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            let doc = json!({
                "manifest": manifest.to_json(),
                "columns": table.columns,
                "rows": rows,
            });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> RunManifest {
        RunManifest {
            subcommand: "exact",
            parameters: BTreeMap::from([("n", json!(3)), ("gamma", json!(0.5))]),
            version: "0.1.0",
            seed: None,
            timestamp: "2020-01-01T00:00:00Z".into(),
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["x", "label"]);
        t.rows.push(vec![0.1.into(), "a,b".into()]);
        let mut buf = Vec::new();
        write_table(&mut buf, Format::Csv, &manifest(), &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# manifest: {"));
        assert_eq!(lines[1], "x,label");
        assert_eq!(lines[2], "1.0000000000000001e-1,\"a,b\"");
        let parsed: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(parsed, 0.1);
    }

    #[test]
    fn json_layout() {
        let mut t = Table::new(vec!["x", "n"]);
        t.rows.push(vec![f64::NAN.into(), 4usize.into()]);
        let mut buf = Vec::new();
        write_table(&mut buf, Format::Json, &manifest(), &t).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["manifest"]["parameters"]["n"], json!(3));
        assert_eq!(v["rows"][0]["x"], Value::Null);
        assert_eq!(v["rows"][0]["n"], json!(4));
    }

    #[test]
    fn explicit_timestamp_wins() {
        assert_eq!(run_timestamp(Some("fixed")), "fixed");
    }
}
