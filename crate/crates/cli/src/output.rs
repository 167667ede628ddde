use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

pub const TOOL: &str = "zoll";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config_sha256: String,
    pub seed: u64,
}

/// Writes artifacts into the output directory, each stamped with the tool
/// version and the config hash.
pub struct Outputs {
    dir: PathBuf,
    meta: Meta,
    csv: bool,
    json: bool,
}

impl Outputs {
    pub fn new(cfg: &RunConfig, subcommand: &str) -> Result<Self> {
        let dir = cfg.output.directory.clone();
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Self {
            dir,
            meta: Meta {
                tool: TOOL,
                version: VERSION,
                subcommand: subcommand.into(),
                config_sha256: cfg.hash(),
                seed: cfg.wave.seed,
            },
            csv: cfg.output.csv(),
            json: cfg.output.json(),
        })
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// CSV file with a `# ` header block. `required` files are written even
    /// when CSV output is switched off.
    pub fn csv<F>(&self, name: &str, required: bool, body: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        if !(self.csv || required) {
            return Ok(());
        }
        let path = self.path(name);
        let mut out = BufWriter::new(
            File::create(&path).with_context(|| format!("cannot write {}", path.display()))?,
        );
        writeln!(out, "# {} {}", TOOL, VERSION)?;
        writeln!(out, "# subcommand {}", self.meta.subcommand)?;
        writeln!(out, "# config_sha256 {}", self.meta.config_sha256)?;
        writeln!(out, "# seed {}", self.meta.seed)?;
        body(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// JSON object `{"meta": ..., <fields of value>}`.
    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        if !self.json {
            return Ok(());
        }
        let mut doc = serde_json::to_value(value)?;
        if let serde_json::Value::Object(map) = &mut doc {
            let mut with_meta = serde_json::Map::new();
            with_meta.insert("meta".into(), serde_json::to_value(&self.meta)?);
            with_meta.append(map);
            doc = serde_json::Value::Object(with_meta);
        }
        let path = self.path(name);
        let text = serde_json::to_string_pretty(&doc)? + "\n";
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}

/// Reads the data rows of a CSV written by [`Outputs::csv`], skipping the
/// header block, comment lines and the column line.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<String>>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect())
}

/// The config hash recorded in a CSV header block.
pub fn recorded_hash(path: &Path) -> Option<String> {
    let text = fs::read_to_string(path).ok()?;
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# config_sha256 ").map(str::to_owned))
}
