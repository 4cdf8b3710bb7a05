//! Result tables with a reproducibility header, emitted as CSV or JSON.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Everything needed to regenerate a table byte for byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub experiment: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub design: BTreeMap<String, String>,
}

impl Metadata {
    pub fn new(experiment: &str, config_hash: String, seed: u64) -> Self {
        Metadata {
            experiment: experiment.to_string(),
            version: crate_version(),
            config_hash,
            seed,
            design: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.design.insert(key.to_string(), value.to_string());
        self
    }
}

/// Stand-in for a VCS description: package name and version.
pub fn crate_version() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub p: usize,
    pub n: usize,
    /// Method or case name.
    pub label: String,
    /// `None` for rows that aggregate over replicates.
    pub replicate: Option<usize>,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

const KEY_COLUMNS: [&str; 4] = ["p", "n", "label", "replicate"];
const MISSING: &str = "NA";
const AGGREGATE: &str = "mean";

fn parse_err(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(format!("malformed result table: {}", msg.into()))
}

impl ResultTable {
    pub fn new(metadata: Metadata, columns: &[&str]) -> Self {
        ResultTable {
            metadata,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Value of `name` in `row`, if the column exists and the cell is defined.
    pub fn get(&self, row: &Row, name: &str) -> Option<f64> {
        self.column(name).and_then(|k| row.values[k])
    }

    pub fn rows_with_label<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.label == label)
    }

    /// One row per `(p, n, label)` in first-appearance order holding the mean
    /// of each column over its defined cells.
    pub fn summary(&self) -> ResultTable {
        let mut keys: Vec<(usize, usize, String)> = Vec::new();
        for r in &self.rows {
            let k = (r.p, r.n, r.label.clone());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        let rows = keys
            .into_iter()
            .map(|(p, n, label)| {
                let group: Vec<&Row> = self
                    .rows
                    .iter()
                    .filter(|r| r.p == p && r.n == n && r.label == label)
                    .collect();
                let values = (0..self.columns.len())
                    .map(|c| {
                        let defined: Vec<f64> = group.iter().filter_map(|r| r.values[c]).collect();
                        (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
                    })
                    .collect();
                Row {
                    p,
                    n,
                    label,
                    replicate: None,
                    values,
                }
            })
            .collect();
        ResultTable {
            metadata: self.metadata.clone(),
            columns: self.columns.clone(),
            rows,
        }
    }

    /// CSV with the metadata as leading `# key=value` comment lines.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        let m = &self.metadata;
        out.push_str(&format!("# experiment={}\n", m.experiment));
        out.push_str(&format!("# version={}\n", m.version));
        out.push_str(&format!("# config_hash={}\n", m.config_hash));
        out.push_str(&format!("# seed={}\n", m.seed));
        for (k, v) in &m.design {
            if k.contains(['=', '\n']) || v.contains('\n') {
                return Err(Error::InvalidConfig(format!("metadata entry {k:?} cannot be written to CSV")));
            }
            out.push_str(&format!("# design.{k}={v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = KEY_COLUMNS.iter().copied().chain(self.columns.iter().map(|s| s.as_str())).collect();
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.p.to_string(),
                r.n.to_string(),
                r.label.clone(),
                r.replicate.map_or(AGGREGATE.to_string(), |k| k.to_string()),
            ];
            rec.extend(r.values.iter().map(|v| v.map_or(MISSING.to_string(), |x| x.to_string())));
            w.write_record(&rec)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        out.push_str(std::str::from_utf8(&body).map_err(|e| Error::Io(e.to_string()))?);
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        let mut design = BTreeMap::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix("# ") else { break };
            body_start += line.len();
            let rest = rest.trim_end_matches('\n');
            let (k, v) = rest.split_once('=').ok_or_else(|| parse_err(format!("header line {rest:?}")))?;
            match k.strip_prefix("design.") {
                Some(dk) => design.insert(dk.to_string(), v.to_string()),
                None => meta.insert(k.to_string(), v.to_string()),
            };
        }
        let field = |k: &str| meta.get(k).cloned().ok_or_else(|| parse_err(format!("missing {k}")));
        let metadata = Metadata {
            experiment: field("experiment")?,
            version: field("version")?,
            config_hash: field("config_hash")?,
            seed: field("seed")?.parse().map_err(|_| parse_err("seed"))?,
            design,
        };
        let mut rdr = csv::Reader::from_reader(text[body_start..].as_bytes());
        let header = rdr.headers()?.clone();
        if header.len() < KEY_COLUMNS.len() || header.iter().zip(KEY_COLUMNS).any(|(a, b)| a != b) {
            return Err(parse_err("key columns"));
        }
        let columns: Vec<String> = header.iter().skip(KEY_COLUMNS.len()).map(String::from).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let num = |k: usize| rec[k].parse::<usize>().map_err(|_| parse_err(format!("field {:?}", &rec[k])));
            let replicate = match &rec[3] {
                AGGREGATE => None,
                _ => Some(num(3)?),
            };
            let values = (KEY_COLUMNS.len()..rec.len())
                .map(|k| match &rec[k] {
                    MISSING => Ok(None),
                    s => s.parse::<f64>().map(Some).map_err(|_| parse_err(format!("value {s:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(Row {
                p: num(0)?,
                n: num(1)?,
                label: rec[2].to_string(),
                replicate,
                values,
            });
        }
        Ok(ResultTable {
            metadata,
            columns,
            rows,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        fs::write(&csv_path, self.to_csv()?)?;
        fs::write(&json_path, self.to_json()?)?;
        Ok(vec![csv_path, json_path])
    }
}
