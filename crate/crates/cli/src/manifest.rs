use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::io::create;
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, enough to rerun the command.
    pub argv: Vec<String>,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub wall_time_s: f64,
    pub library_version: String,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let mut file = BufReader::new(File::open(path).map_err(|e| CliError::io(path, e))?);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let k = file.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if k == 0 {
            break;
        }
        hasher.update(&buf[..k]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

pub fn hash_all(paths: &[PathBuf]) -> Result<Vec<FileHash>, CliError> {
    paths
        .iter()
        .map(|p| {
            Ok(FileHash {
                path: p.clone(),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut out = create(path)?;
        serde_json::to_writer_pretty(&mut out, self).map_err(|e| CliError::Usage(e.to_string()))?;
        writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}
