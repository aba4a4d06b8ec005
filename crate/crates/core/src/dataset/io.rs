use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::split::SplitSpec;
use super::triple::{DatasetTriple, Exclusion};
use crate::cqgen::GenerationConfig;
use crate::seed::sha256_hex;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
}

/// Writes one JSON object per line, `\n`-terminated.
pub fn write_jsonl<T: Serialize>(items: &[T], mut w: impl Write) -> Result<(), JsonlError> {
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|source| JsonlError::Json { line: 0, source })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads JSONL, skipping blank lines. Line numbers in errors are 1-based.
pub fn read_jsonl<T: DeserializeOwned>(r: impl io::Read) -> Result<Vec<T>, JsonlError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| JsonlError::Json {
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

pub fn export_jsonl(triples: &[DatasetTriple], path: &Path) -> Result<(), JsonlError> {
    write_jsonl(triples, io::BufWriter::new(fs::File::create(path)?))
}

pub fn import_jsonl(path: &Path) -> Result<Vec<DatasetTriple>, JsonlError> {
    read_jsonl(fs::File::open(path)?)
}

/// Hyperparameters of the downstream LoRA fine-tuning run, recorded for
/// whoever trains on the exported data. Nothing here is executed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineTuningMetadata {
    pub base_model: String,
    pub method: String,
    pub lora_rank: u32,
    pub lora_alpha: u32,
    pub lora_dropout: f64,
    pub epochs: u32,
    pub effective_batch_size: u32,
    pub learning_rate: f64,
    pub precision: String,
}

impl Default for FineTuningMetadata {
    fn default() -> Self {
        FineTuningMetadata {
            base_model: "LLaMA-3.1-8B-Instruct".into(),
            method: "LoRA".into(),
            lora_rank: 8,
            lora_alpha: 16,
            lora_dropout: 0.05,
            epochs: 3,
            effective_batch_size: 4,
            learning_rate: 3e-4,
            precision: "bf16".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestCounts {
    pub cases: usize,
    pub triples: usize,
    pub excluded: usize,
    pub train: usize,
    pub test: usize,
    /// Triples per misalignment type, keyed "type1".."type4".
    pub by_type: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub tool: String,
    pub tool_version: String,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    pub config: serde_json::Value,
    pub master_seed: u64,
    pub generation: GenerationConfig,
    pub split: SplitSpec,
    pub counts: ManifestCounts,
    pub exclusions: Vec<Exclusion>,
    /// Output file name -> SHA-256 of its bytes.
    pub files: BTreeMap<String, String>,
    pub fine_tuning: FineTuningMetadata,
}

/// Hash of a serializable config. `serde_json::Value` keeps object keys
/// sorted, so the text and the hash are stable.
pub fn config_hash<T: Serialize>(config: &T) -> (serde_json::Value, String) {
    let value = serde_json::to_value(config).expect("config serializes");
    let text = serde_json::to_string(&value).expect("value serializes");
    let hash = sha256_hex(text.as_bytes());
    (value, hash)
}

pub fn count_by_type(triples: &[DatasetTriple]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for t in triples {
        *out.entry(format!("type{}", t.assigned_type.number()))
            .or_insert(0) += 1;
    }
    out
}

pub fn write_json_pretty<T: Serialize>(value: &T, path: &Path) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}
