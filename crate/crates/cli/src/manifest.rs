//! Per-run manifest written into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub output_dir: PathBuf,
    pub parallelism: usize,
    pub verbosity: u8,
    pub status: RunStatus,
    pub gamma: f64,
    /// Files written by the run, relative to `output_dir`.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn path(&self) -> PathBuf {
        self.output_dir.join(MANIFEST_FILE)
    }

    /// Creates the output directory and checks that no completed run would be overwritten.
    pub fn prepare(output_dir: &Path, force: bool) -> anyhow::Result<()> {
        fs::create_dir_all(output_dir)
            .with_context(|| format!("creating output directory {}", output_dir.display()))?;
        let existing = output_dir.join(MANIFEST_FILE);
        if existing.exists() && !force {
            if let Ok(m) = Self::load(&existing) {
                if m.status == RunStatus::Complete {
                    bail!(
                        "{} holds a completed run; pass --force to overwrite it",
                        output_dir.display()
                    );
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn store(&self) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        let path = self.path();
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}
