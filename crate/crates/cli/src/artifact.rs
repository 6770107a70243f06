//! Atomic artifact writes and run metadata.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::Failure;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temp file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Data(format!("{}: {e}", dir.display())))?;
    let io = |e: std::io::Error| Failure::Data(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Inputs read by a command, hashed as they are loaded.
#[derive(Default)]
pub struct Inputs {
    hashes: BTreeMap<String, String>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, Failure> {
        let bytes = std::fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        self.hashes.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn read_string(&mut self, path: &Path) -> Result<String, Failure> {
        String::from_utf8(self.read(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
    }

    /// Records a file another component reads (a replay log or mock script).
    pub fn note(&mut self, path: &Path) -> Result<(), Failure> {
        self.read(path).map(|_| ())
    }
}

/// `<out>.meta.json`: command, hash of the output-relevant configuration,
/// prompt template hash, input hashes and versions. No timestamps, so
/// identical runs produce identical metadata.
pub fn write_meta(
    out: &Path,
    command: &str,
    config: Value,
    template_hash: Option<String>,
    inputs: &Inputs,
) -> Result<(), Failure> {
    let config_bytes = serde_json::to_vec(&config).expect("json values serialize");
    let meta = json!({
        "command": command,
        "config": config,
        "config_hash": sha256_hex(&config_bytes),
        "template_hash": template_hash,
        "input_hashes": inputs.hashes,
        "versions": {
            "arground": env!("CARGO_PKG_VERSION"),
            "prompt_template": arground_core::prompting::TEMPLATE_VERSION,
        },
    });
    let mut text = serde_json::to_string_pretty(&meta).expect("json values serialize");
    text.push('\n');
    write_atomic(&sidecar(out, "meta.json"), text.as_bytes())
}

/// `report.csv` -> `report.csv.<suffix>`.
pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    out.with_file_name(name)
}
