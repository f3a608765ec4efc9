use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{Map, Value};

pub const CSV_VERSION: &str = "# dpl-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Csv,
    Json,
}

/// Rows with a fixed column set, rendered in any output format.
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    /// Comment lines appended after the CSV header.
    notes: Vec<String>,
    /// Column shown alone in plain output.
    primary: Option<usize>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
            primary: None,
        }
    }

    pub fn primary(mut self, col: usize) -> Self {
        self.primary = Some(col);
        self
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, line: String) {
        self.notes.push(line);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => {
                let objs: Vec<Value> = self.rows.iter().map(|r| self.object(r)).collect();
                let v = if objs.len() == 1 {
                    objs.into_iter().next().unwrap()
                } else {
                    Value::Array(objs)
                };
                serde_json::to_string_pretty(&v).expect("json") + "\n"
            }
            Format::Plain => self.plain(),
        }
    }

    fn object(&self, row: &[Value]) -> Value {
        let mut m = Map::new();
        for (c, v) in self.columns.iter().zip(row) {
            m.insert(c.to_string(), v.clone());
        }
        Value::Object(m)
    }

    fn csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{CSV_VERSION}").unwrap();
        for n in &self.notes {
            writeln!(s, "# {n}").unwrap();
        }
        writeln!(s, "{}", self.columns.join(",")).unwrap();
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(cell).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }

    fn plain(&self) -> String {
        let mut s = String::new();
        if let Some(col) = self.primary {
            for r in &self.rows {
                writeln!(s, "{}", cell(&r[col])).unwrap();
            }
            return s;
        }
        match self.rows.len() {
            1 if self.columns.len() == 1 => writeln!(s, "{}", cell(&self.rows[0][0])).unwrap(),
            1 => {
                let w = self.columns.iter().map(|c| c.len()).max().unwrap_or(0);
                for (c, v) in self.columns.iter().zip(&self.rows[0]) {
                    writeln!(s, "{c:<w$}  {}", cell(v)).unwrap();
                }
            }
            _ => {
                writeln!(s, "{}", self.columns.join("\t")).unwrap();
                for r in &self.rows {
                    let cells: Vec<String> = r.iter().map(cell).collect();
                    writeln!(s, "{}", cells.join("\t")).unwrap();
                }
            }
        }
        for n in &self.notes {
            writeln!(s, "{n}").unwrap();
        }
        s
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(xs) => xs.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

/// Floats that are not finite become null.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn opt(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

pub fn text(s: impl ToString) -> Value {
    Value::String(s.to_string())
}
