//! CSV and JSON report writing and reading.

use std::io::{self, Write};
use std::path::Path;

use exitspec::{Error, Result};
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

/// Every float is written with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io_err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.header).map_err(io_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(io_err)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }
}

struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }
}

pub fn json_bytes(value: &Value) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17);
    serde::Serialize::serialize(value, &mut ser).map_err(|e| Error::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Write via a temporary file in the same directory and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |e: io::Error| Error::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

/// CSV layouts written by the subcommands.
pub const KNOWN_HEADERS: &[(&str, &[&str])] = &[
    (
        "spectrum",
        &[
            "model_id",
            "b_or_custom",
            "m",
            "R",
            "k",
            "A_hat_k",
            "A_raw_k",
            "tol",
            "provenance",
        ],
    ),
    (
        "simulate",
        &["model_id", "m", "R", "r0", "k", "mc_mean", "std_err", "quad_value", "z"],
    ),
    ("compare-space", &["s", "r", "W", "lambda"]),
    ("balance", &["s", "margin"]),
    ("intrinsic", &["k", "ambient", "bound", "margin", "holds", "strict"]),
    (
        "mesh-verify",
        &["k", "mesh_value", "model_value", "bound_with_tol", "margin", "holds"],
    ),
    (
        "suite",
        &["criterion", "check", "value", "reference", "tolerance", "passed"],
    ),
];

const TEXT_COLUMNS: &[&str] = &["model_id", "b_or_custom", "provenance", "check", "criterion"];
const BOOL_COLUMNS: &[&str] = &["holds", "strict", "passed"];
const OPTIONAL_COLUMNS: &[&str] = &["quad_value", "z"];

#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Csv { kind: String, table: Table },
    Json { command: String, value: Value },
}

fn parse_float(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

pub fn parse_report(text: &str) -> Result<Report> {
    if text.trim_start().starts_with('{') {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            position: e.line(),
            message: e.to_string(),
        })?;
        let version = value.get("schema_version").and_then(Value::as_str);
        if version != Some(SCHEMA_VERSION) {
            return Err(Error::Validation(format!(
                "unsupported schema_version {version:?}, expected \"{SCHEMA_VERSION}\""
            )));
        }
        let command = value
            .get("command")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Validation("JSON report has no command".into()))?
            .to_string();
        return Ok(Report::Json { command, value });
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::Parse {
            position: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let kind = KNOWN_HEADERS
        .iter()
        .find(|(_, h)| h.iter().copied().eq(header.iter().map(String::as_str)))
        .map(|(k, _)| k.to_string())
        .ok_or_else(|| Error::Validation(format!("unknown CSV layout: {}", header.join(","))))?;
    let mut table = Table {
        header: header.clone(),
        rows: Vec::new(),
    };
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            position: line,
            message: e.to_string(),
        })?;
        for (col, field) in header.iter().zip(rec.iter()) {
            let ok = if TEXT_COLUMNS.contains(&col.as_str()) {
                true
            } else if BOOL_COLUMNS.contains(&col.as_str()) {
                field == "true" || field == "false"
            } else {
                (field.is_empty() && OPTIONAL_COLUMNS.contains(&col.as_str())) || parse_float(field).is_some()
            };
            if !ok {
                return Err(Error::Parse {
                    position: line,
                    message: format!("column {col}: cannot read '{field}'"),
                });
            }
        }
        table.rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(Report::Csv { kind, table })
}

pub fn read_report(path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_report(&text)
}

impl Report {
    /// Numeric value of `column` in every row of a CSV report; empty cells
    /// read as NaN.
    pub fn column(&self, column: &str) -> Option<Vec<f64>> {
        let Report::Csv { table, .. } = self else {
            return None;
        };
        let i = table.header.iter().position(|h| h == column)?;
        table
            .rows
            .iter()
            .map(|r| {
                if r[i].is_empty() {
                    Some(f64::NAN)
                } else {
                    parse_float(&r[i])
                }
            })
            .collect()
    }
}
