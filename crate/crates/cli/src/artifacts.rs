// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use basin_lab::output::to_json_pretty;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Experiment, RunConfig};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: Experiment,
    /// `ok`, or `certificate_failure` when the run exits with code 3.
    pub status: String,
    pub config: RunConfig,
    pub artifacts: Vec<ArtifactEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Files written into one output directory, in write order.
pub struct ArtifactSet {
    dir: PathBuf,
    entries: Vec<ArtifactEntry>,
}

impl ArtifactSet {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        assert!(
            name != MANIFEST_NAME && !self.entries.iter().any(|e| e.path == name),
            "artifact {name} written twice"
        );
        fs::write(self.dir.join(name), bytes)?;
        self.entries.push(ArtifactEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> io::Result<()> {
        let text = to_json_pretty(value).map_err(io::Error::other)?;
        self.write(name, text.as_bytes())
    }

    pub fn finish(
        self,
        experiment: Experiment,
        status: &str,
        config: RunConfig,
    ) -> io::Result<Manifest> {
        let manifest = Manifest {
            tool: "basin-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            experiment,
            status: status.into(),
            config,
            artifacts: self.entries,
        };
        let text = to_json_pretty(&manifest).map_err(io::Error::other)?;
        fs::write(self.dir.join(MANIFEST_NAME), text)?;
        Ok(manifest)
    }
}

/// RFC 4180 text: CRLF line ends, header first.
pub fn csv_text(header: &str, rows: impl IntoIterator<Item = String>) -> Vec<u8> {
    let mut out = String::with_capacity(1024);
    out.push_str(header);
    out.push_str("\r\n");
    for row in rows {
        out.push_str(&row);
        out.push_str("\r\n");
    }
    out.into_bytes()
}
