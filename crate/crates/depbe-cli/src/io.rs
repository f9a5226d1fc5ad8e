//! File reading, output routing and the CLI error type.

use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    /// bad arguments, unreadable or malformed input, unmet hypotheses
    Input(String),
    /// a verification ran and did not pass; output was still written
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Failed(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Failed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<depbe::Error> for CliError {
    fn from(e: depbe::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Parses JSON; serde's message carries the line and column.
pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("parse error in {}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    parse_json(path, &read_text(path)?)
}

/// First column of a CSV file as numbers. A non-numeric first row is
/// treated as a header.
pub fn read_column(path: &Path) -> CliResult<Vec<f64>> {
    let text = read_text(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let Some(field) = rec.get(0) else { continue };
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(x) => out.push(x),
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(CliError::Input(format!(
                    "{}: line {}: '{field}' is not a number",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Input(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Input(format!("csv: {e}")))
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Writes to `out`, or stdout when absent.
pub fn emit(out: Option<&PathBuf>, content: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, content).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Input(format!("stdout: {e}")))
        }
    }
}
