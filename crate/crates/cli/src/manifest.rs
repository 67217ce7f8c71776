use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use otut_core::hashing::sha256_hex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Written last into every output directory. Holds no paths or timestamps,
/// so identical runs give identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub encoder_fingerprint: Option<String>,
    /// Input role to SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    /// Output file name to SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
    pub details: Value,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String) -> Self {
        RunManifest {
            command: command.to_string(),
            tool_version: otut_core::TOOL_VERSION.to_string(),
            config_hash,
            seed: None,
            encoder_fingerprint: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            details: Value::Null,
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) -> anyhow::Result<()> {
        let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.inputs.insert(role.to_string(), sha256_hex(&bytes));
        Ok(())
    }

    /// Writes `bytes` to `dir/name` and records its hash.
    pub fn output(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn finish(&self, dir: &Path) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }
}

pub fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> Vec<u8> {
    let mut buf = Vec::new();
    for it in items {
        serde_json::to_writer(&mut buf, &it).expect("record serializes");
        buf.push(b'\n');
    }
    buf
}

pub fn pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("value serializes");
    v.push(b'\n');
    v
}
