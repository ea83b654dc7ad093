//! `manifest.json`: the resolved configuration, a SHA-256 of every input
//! and the list of files written, enough to repeat a run exactly.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_SCHEMA: &str = "empf.manifest";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

impl InputRecord {
    pub fn read(path: &Path) -> Result<Self, String> {
        let data = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(Self {
            path: path.display().to_string(),
            bytes: data.len(),
            sha256: Sha256::digest(&data)
                .iter()
                .map(|b| format!("{b:02x}"))
                .collect(),
        })
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize, R: Serialize> {
    pub schema: &'static str,
    pub version: u32,
    pub tool_version: &'static str,
    pub parallel: bool,
    pub config: &'a C,
    /// Defaults filled in and files parsed, as actually used.
    pub resolved: R,
    pub inputs: Vec<InputRecord>,
    pub outputs: Vec<String>,
}
