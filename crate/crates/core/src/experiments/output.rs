use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// A CSV artifact and its column contract.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ColumnDoc {
    pub name: String,
    pub description: String,
}

/// Sidecar `<name>.columns.json` describing a CSV file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sidecar {
    pub file: String,
    pub columns: Vec<ColumnDoc>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<(&'static str, &'static str)>) -> Self {
        Table {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Writes `<name>.csv` and `<name>.columns.json`; returns both file names.
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        let csv_name = format!("{}.csv", self.name);
        let mut w = csv::Writer::from_path(dir.join(&csv_name))?;
        w.write_record(self.columns.iter().map(|c| c.0))?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        let side = Sidecar {
            file: csv_name.clone(),
            columns: self
                .columns
                .iter()
                .map(|(n, d)| ColumnDoc {
                    name: n.to_string(),
                    description: d.to_string(),
                })
                .collect(),
        };
        let side_name = format!("{}.columns.json", self.name);
        fs::write(dir.join(&side_name), serde_json::to_string_pretty(&side)? + "\n")?;
        Ok(vec![csv_name, side_name])
    }
}

pub fn write_json(dir: &Path, name: &str, v: &impl Serialize) -> Result<String> {
    let file = format!("{name}.json");
    fs::write(dir.join(&file), serde_json::to_string_pretty(v)? + "\n")?;
    Ok(file)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// JSON with object keys sorted at every level and no whitespace.
pub fn canonical_json(v: &Value) -> String {
    fn sort(v: &Value) -> Value {
        match v {
            Value::Object(o) => {
                let mut keys: Vec<&String> = o.keys().collect();
                keys.sort();
                Value::Object(keys.into_iter().map(|k| (k.clone(), sort(&o[k]))).collect())
            }
            Value::Array(a) => Value::Array(a.iter().map(sort).collect()),
            x => x.clone(),
        }
    }
    sort(v).to_string()
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
