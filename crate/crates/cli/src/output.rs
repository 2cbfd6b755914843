//! CSV rendering with a `#` metadata header.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed-precision scientific notation; identical input gives identical text.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.10e}")
    }
}

/// Shortest round-trip decimal, used for grid coordinates.
pub fn plain(x: f64) -> String {
    x.to_string()
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<(String, String)>,
    pub notes: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<(String, String)>, columns: Vec<&'static str>) -> Self {
        Self {
            header,
            columns,
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = format!("# casimir-enz {VERSION}\n");
        for (k, v) in &self.header {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        for note in &self.notes {
            out.push_str(&format!("# {note}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("writing stdout: {e}")))
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}
