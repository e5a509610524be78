use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

pub const TOOL_VERSION: &str = concat!("coopsir ", env!("CARGO_PKG_VERSION"));

/// Provenance lines written at the top of every CSV. No timestamps, so reruns
/// are byte-identical.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl Header {
    pub fn new(command: &str, seed: Option<u64>, config: impl Serialize) -> Self {
        let config = serde_json::to_value(config).expect("header config is serializable");
        Header {
            command: command.to_string(),
            seed,
            config,
        }
    }

    pub fn render(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# tool: {TOOL_VERSION}\n# command: {}\n# seed: {seed}\n# config: {}\n",
            self.command, self.config
        )
    }
}

/// Builds a CSV file in memory: header comments first, then the table.
pub struct Table {
    header: String,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &Header, columns: &[&str]) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(columns)?;
        Ok(Table {
            header: header.render(),
            writer,
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn into_bytes(self) -> Result<Vec<u8>> {
        let mut out = self.header.into_bytes();
        out.extend(self.writer.into_inner().context("flushing csv buffer")?);
        Ok(out)
    }
}

/// Output directory with the never-silently-overwrite rule.
pub struct OutputDir {
    root: PathBuf,
    force: bool,
}

impl OutputDir {
    pub fn new(root: impl Into<PathBuf>, force: bool) -> Self {
        OutputDir {
            root: root.into(),
            force,
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Fails before anything is written if any target already exists.
    pub fn claim(&self, names: &[&str]) -> Result<()> {
        if self.force {
            return Ok(());
        }
        for name in names {
            let p = self.path(name);
            if p.exists() {
                bail!("refusing to overwrite {} (pass --force)", p.display());
            }
        }
        Ok(())
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        fs::create_dir_all(&self.root)
            .with_context(|| format!("cannot create output directory {}", self.root.display()))?;
        let p = self.path(name);
        fs::write(&p, bytes).with_context(|| format!("cannot write {}", p.display()))?;
        Ok(p)
    }
}

/// Column values of a CSV written by [`Table`], keyed by header name.
pub fn read_table(path: &Path) -> Result<Vec<std::collections::BTreeMap<String, String>>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        rows.push(names.iter().cloned().zip(rec.iter().map(str::to_string)).collect());
    }
    Ok(rows)
}
