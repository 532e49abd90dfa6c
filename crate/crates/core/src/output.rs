//! Result tables, JSON sidecars and run manifests.
//!
//! CSV files carry `#`-prefixed header rows (metadata, then column names),
//! comma delimiters and 17 significant digits for every float.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

/// Overrides the default output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "VBH_OUT_DIR";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "# {}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Float(v) => format_float(*v),
                    Cell::Int(v) => v.to_string(),
                    Cell::Text(t) => t.clone(),
                })
                .collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// Column as floats; `None` if absent or non-numeric.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows
            .iter()
            .map(|r| match &r[i] {
                Cell::Float(v) => Some(*v),
                Cell::Int(v) => Some(*v as f64),
                Cell::Text(_) => None,
            })
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: ScenarioConfig,
    /// The resolved config in its text form; parses back to `config`.
    pub config_text: String,
    /// SHA-256 of the config file as given, or of `config_text` without one.
    pub input_hash: String,
    pub threads: usize,
    pub outputs: Vec<OutputFile>,
    /// Wall-clock seconds per stage.
    pub timings: Vec<(String, f64)>,
    /// Outputs are bit-identical on the same platform and build; float
    /// results may differ in the last digits across CPUs and compilers.
    pub platform: String,
}

/// Serialized writer for one output directory; records every file.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        // probe writability up front
        let probe = root.join(".vbh-write-probe");
        std::fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
        let _ = std::fs::remove_file(&probe);
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.retain(|f| f.path != name);
        self.written.push(OutputFile { path: name.to_string(), sha256: sha256_hex(contents), bytes: contents.len() });
        Ok(path)
    }

    pub fn write_table(&mut self, table: &Table) -> Result<PathBuf> {
        self.write(&format!("{}.csv", table.name), table.to_csv().as_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn outputs(&self) -> &[OutputFile] {
        &self.written
    }
}

pub fn platform() -> String {
    format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format() {
        let mut t = Table::new("x", &["a", "method", "n"]);
        t.comments.push("note".into());
        t.push(vec![0.1.into(), "mbh".into(), 3usize.into()]);
        let s = t.to_csv();
        assert_eq!(s, "# note\n# a,method,n\n1.0000000000000001e-1,mbh,3\n");
        let v: f64 = s.lines().nth(2).unwrap().split(',').next().unwrap().parse().unwrap();
        assert_eq!(v, 0.1);
        assert_eq!(t.column("a"), Some(vec![0.1]));
        assert_eq!(t.column("method"), None);
    }

    #[test]
    fn writer_records_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write("a.txt", b"abc").unwrap();
        assert_eq!(
            out.outputs()[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
