//! Report documents and their JSON, CSV and text renderings.

use num_bigint::BigInt;
use num_rational::BigRational;
use rankone::analysis::CertificateReport;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Exact rationals always print as `p/q`.
pub fn rat(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn int(x: &BigInt) -> String {
    x.to_string()
}

/// A report: metadata plus one table.
#[derive(Clone, Debug, Default)]
pub struct Doc {
    pub meta: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Doc {
    pub fn new(command: &str) -> Self {
        let mut d = Doc::default();
        d.set("command", command);
        d
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.meta.insert(key.to_string(), v.into());
    }

    pub fn columns(&mut self, cols: &[&str]) {
        self.columns = cols.iter().map(|c| c.to_string()).collect();
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    /// Verdict, horizon, notes and one row per value.
    pub fn certificate(&mut self, rep: &CertificateReport) {
        self.set("kind", rep.kind.as_str());
        self.set("verdict", rep.verdict.as_str());
        self.set("horizon", int(&rep.horizon));
        let notes: Map<String, Value> = rep
            .notes
            .iter()
            .map(|(k, v)| (k.clone(), Value::from(v.as_str())))
            .collect();
        self.set("notes", Value::Object(notes));
        let mut cols = vec![rep.index.to_string(), "value".to_string()];
        for e in &rep.values {
            for (name, _) in &e.extra {
                if !cols.iter().any(|c| c == name) {
                    cols.push(name.to_string());
                }
            }
        }
        self.columns = cols.clone();
        for e in &rep.values {
            let mut row = vec![int(&e.at), rat(&e.value)];
            for c in &cols[2..] {
                row.push(e.get(c).map(rat).unwrap_or_default());
            }
            self.rows.push(row);
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
            Format::Text => self.text(),
        }
    }

    fn json(&self) -> String {
        let mut obj = self.meta.clone();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.clone(), Value::from(v.as_str())))
                        .collect(),
                )
            })
            .collect();
        obj.insert("columns".into(), Value::from(self.columns.clone()));
        obj.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json");
        s.push('\n');
        s
    }

    fn csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            s.push_str(&format!("# {k}: {}\n", scalar(v)));
        }
        s.push_str(
            &self
                .columns
                .iter()
                .map(|c| csv_cell(c))
                .collect::<Vec<_>>()
                .join(","),
        );
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|c| csv_cell(c)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    fn text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            match v {
                Value::Object(m) => {
                    for (k2, v2) in m {
                        s.push_str(&format!("{k}.{k2}: {}\n", scalar(v2)));
                    }
                }
                _ => s.push_str(&format!("{k}: {}\n", scalar(v))),
            }
        }
        if self.columns.is_empty() {
            return s;
        }
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len().min(40));
            }
        }
        let line = |cells: &[String]| -> String {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        s.push_str(&line(&self.columns));
        s.push('\n');
        for r in &self.rows {
            s.push_str(line(r).trim_end());
            s.push('\n');
        }
        s
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}
