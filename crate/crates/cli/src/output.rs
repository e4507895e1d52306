//! Output files. Every file carries the resolved configuration and the code
//! version; writes go to a temporary file in the target directory and are
//! renamed into place.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

pub const PROGRAM: &str = "lattice-light";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Sink {
    dir: PathBuf,
    command: &'static str,
    config: Value,
    pub written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path, command: &'static str, config: &RunConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let config = serde_json::to_value(config).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Sink { dir: dir.to_path_buf(), command, config, written: Vec::new() })
    }

    fn provenance(&self) -> Value {
        json!({ "program": PROGRAM, "version": VERSION, "command": self.command })
    }

    /// `{provenance, config, result}` as pretty JSON.
    pub fn json<S: Serialize>(&mut self, name: &str, result: &S) -> Result<(), CliError> {
        let result = serde_json::to_value(result).map_err(|e| CliError::Io(e.to_string()))?;
        let doc = json!({ "provenance": self.provenance(), "config": self.config, "result": result });
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// CSV preceded by `#` comment lines holding the provenance and the
    /// configuration as single-line JSON.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut text = String::new();
        writeln!(text, "# {}", self.provenance()).unwrap();
        writeln!(text, "# config {}", self.config).unwrap();
        writeln!(text, "{}", header.join(",")).unwrap();
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            writeln!(text, "{}", row.join(",")).unwrap();
        }
        self.write(name, text.as_bytes())
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.dir.join(name);
        atomic_write(&target, bytes)?;
        self.written.push(target);
        Ok(())
    }
}

/// Shortest representation that round-trips.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        "nan".to_string()
    }
}

pub fn numbers(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| format_number(*v)).collect()
}

/// Empty cell for a missing value.
pub fn optional(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

pub fn atomic_write(target: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = target.parent().unwrap_or(Path::new("."));
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", target.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(target).map_err(|e| io(e.error))?;
    Ok(())
}
