//! CSV/JSON emission with canonical float formatting.
//!
//! Floats are written with Rust's shortest-round-trip `Display`: the
//! shortest decimal string that parses back to the exact bit pattern in
//! memory (up to 17 significant digits when needed). Every numeric cell a
//! table emits therefore re-parses bit-exactly.

use std::path::{Path, PathBuf};

use nsis_core::Result;
use serde::Serialize;

/// Canonical float formatting: the shortest decimal that round-trips.
pub fn fmt_f64(value: f64) -> String {
    format!("{value}")
}

/// Escapes one CSV cell: wraps it in quotes (doubling interior quotes)
/// when it contains a comma, quote, or newline.
fn csv_escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// A CSV table with `# key: value` provenance comments above the header.
///
/// Experiment outputs must carry their seed and parameter provenance, so
/// construction starts from the header row and comments are pushed before
/// data rows.
#[derive(Debug, Clone)]
pub struct Table {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: Vec<S>) -> Self {
        Table {
            comments: Vec::new(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Adds one `# key: value` provenance line.
    pub fn comment(&mut self, key: &str, value: impl std::fmt::Display) {
        self.comments.push(format!("# {key}: {value}"));
    }

    /// Appends a data row; its arity must match the header.
    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row arity must match the header");
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(
            &self.header.iter().map(|h| csv_escape(h)).collect::<Vec<_>>().join(","),
        );
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Writes pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| nsis_core::Error::Input(format!("json serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Builds `prefix-suffix.ext` next to `prefix` (or `prefix.ext` when
/// `suffix` is empty), so one `--out` prefix fans out to a family of files.
pub fn out_path(prefix: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "out".to_string());
    let name = if suffix.is_empty() {
        format!("{stem}.{ext}")
    } else {
        format!("{stem}-{suffix}.{ext}")
    };
    prefix.with_file_name(name)
}
