//! Result files. Every file starts with the tool version, the master seed
//! and the resolved configuration; CSV files carry them as `#` comment lines.
//!
//! CSV headers leave out the worker count and the output directory, so the
//! same experiment gives byte-identical CSV whatever the pool size. The JSONL
//! meta record and `config.toml` have the full configuration.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CommandKind, ExperimentConfig};

pub const TOOL: &str = "twostage";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Output {
    dir: PathBuf,
    command: CommandKind,
    config: ExperimentConfig,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn create(command: CommandKind, config: &ExperimentConfig) -> Result<Self> {
        let dir = config.out.clone();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut out = Self {
            dir,
            command,
            config: config.clone(),
            written: Vec::new(),
        };
        let mut resolved = config.clone();
        resolved.command = Some(command);
        out.write("config.toml", resolved.to_toml().as_bytes())?;
        Ok(out)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn into_files(self) -> Vec<PathBuf> {
        self.written
    }

    /// `<stem>.csv` with a comment header and the given columns.
    pub fn csv(&mut self, columns: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut text = format!(
            "# {TOOL} {VERSION}\n# command: {}\n# seed: {}\n",
            self.command.name(),
            self.config.seed
        );
        let mut defining = self.config.result_defining();
        defining.command = Some(self.command);
        for line in defining.to_toml().lines() {
            text.push_str("# ");
            text.push_str(line);
            text.push('\n');
        }
        let mut w = csv::Writer::from_writer(text.into_bytes());
        w.write_record(columns)?;
        for row in rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        let name = format!("{}.csv", self.command.stem());
        self.write(&name, &bytes)
    }

    pub fn meta_record(&self) -> Value {
        let mut resolved = self.config.clone();
        resolved.command = Some(self.command);
        json!({
            "record": "meta",
            "tool": TOOL,
            "version": VERSION,
            "command": self.command.name(),
            "seed": self.config.seed,
            "config": resolved,
        })
    }

    /// `<stem>.jsonl`: the meta record, then one line per record.
    pub fn jsonl<T: Serialize>(&mut self, records: &[T]) -> Result<PathBuf> {
        let mut lines = vec![self.meta_record()];
        for r in records {
            lines.push(serde_json::to_value(r)?);
        }
        self.jsonl_values(&lines)
    }

    pub fn jsonl_values(&mut self, lines: &[Value]) -> Result<PathBuf> {
        let mut text = String::new();
        for v in lines {
            text.push_str(&serde_json::to_string(v)?);
            text.push('\n');
        }
        let name = format!("{}.jsonl", self.command.stem());
        self.write(&name, text.as_bytes())
    }
}

/// Read the data rows of a CSV written by [`Output::csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header = r.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_owned).collect());
    }
    Ok((header, rows))
}
