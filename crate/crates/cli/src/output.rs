//! Output destinations, metadata and table rendering.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use subideal::io::{write_signal_csv, write_table_csv};
use subideal::SampledSignal;

use crate::args::{Format, OutputOpts};

/// Error carrying the process exit code: 1 for numeric failures, 2 for usage
/// and configuration problems.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<subideal::Error> for CliError {
    fn from(e: subideal::Error) -> Self {
        use subideal::Error as E;
        match e {
            E::InvalidParameter(_) | E::Domain(_) | E::Format(_) | E::Io(_) | E::ShapeMismatch(_) => Self::usage(e.to_string()),
            _ => Self::numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub enum Destination {
    Stdout,
    File(PathBuf),
}

impl Destination {
    /// `--out`, else `<out_dir>/<default_name>`, else stdout.
    pub fn resolve(opts: &OutputOpts, default_name: &str) -> Self {
        match (&opts.out, &opts.out_dir) {
            (Some(path), _) => Destination::File(path.clone()),
            (None, Some(dir)) => Destination::File(dir.join(default_name)),
            (None, None) => Destination::Stdout,
        }
    }

    pub fn write(&self, bytes: &[u8]) -> CliResult<()> {
        match self {
            Destination::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::numeric(format!("writing stdout: {e}")))
            }
            Destination::File(path) => write_file(path, bytes),
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("creating {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::usage(format!("writing {}: {e}", path.display())))
}

/// Ordered `key: value` metadata. Values render as plain strings when they
/// are JSON strings and as compact JSON otherwise.
#[derive(Debug, Clone, Default)]
pub struct Metadata(Vec<(String, Value)>);

impl Metadata {
    pub fn new(command: &str, config: Value) -> Self {
        let mut m = Metadata::default();
        m.push("version", json!(subideal::ARTIFACT_VERSION));
        m.push("command", json!(command));
        m.push("config", config);
        m
    }

    pub fn push(&mut self, key: &str, value: Value) {
        self.0.push((key.to_string(), value));
    }

    fn as_lines(&self) -> Vec<(String, String)> {
        self.0
            .iter()
            .map(|(k, v)| (k.clone(), v.as_str().map_or_else(|| v.to_string(), str::to_string)))
            .collect()
    }

    fn as_object(&self) -> Value {
        Value::Object(self.0.iter().cloned().collect::<Map<String, Value>>())
    }
}

fn json_bytes(value: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

pub fn render_table(format: Format, header: &[String], columns: &[Vec<f64>], meta: &Metadata) -> CliResult<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_table_csv(&mut buf, header, columns, &meta.as_lines())?;
            Ok(buf)
        }
        Format::Json => Ok(json_bytes(&json!({"metadata": meta.as_object(), "columns": header, "data": columns}))),
    }
}

pub fn render_signal(format: Format, signal: &SampledSignal, meta: &Metadata) -> CliResult<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_signal_csv(&mut buf, signal, &meta.as_lines())?;
            Ok(buf)
        }
        Format::Json => {
            let t: Vec<f64> = (0..signal.len()).map(|j| signal.time(j)).collect();
            Ok(json_bytes(&json!({"metadata": meta.as_object(), "columns": ["t", "value"], "data": [t, signal.values()]})))
        }
    }
}
