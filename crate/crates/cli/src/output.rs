//! Output directory bookkeeping: every data file is hashed as it is written
//! so the manifest can list it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::format::Csv;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputFile {
    pub name: String,
    /// Data rows, header excluded; absent for non-tabular files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    pub sha256: String,
}

#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> CliResult<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self { root, files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }

    pub fn write_csv(&mut self, name: &str, csv: Csv) -> CliResult<()> {
        let rows = csv.rows();
        self.write_bytes(name, &csv.into_bytes(), Some(rows))
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8], rows: Option<usize>) -> CliResult<()> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.push(OutputFile { name: name.to_string(), rows, sha256: hex::encode(Sha256::digest(bytes)) });
        Ok(())
    }

    /// Pretty JSON, not listed among the hashed outputs (manifests, reports).
    pub fn write_json(&self, name: &str, value: &impl Serialize) -> CliResult<PathBuf> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).expect("serialisable");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
