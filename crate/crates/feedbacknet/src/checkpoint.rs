//! Model directories: versioned binary parameter snapshots plus the
//! manifest, vocabulary, and epoch history.
//!
//! A trained run saves five files into one directory:
//!
//! - `manifest.json`: architecture, full config, padded length, tag order,
//!   and sha256 digests of the vocabulary and both parameter files.
//! - `model.bin`: the best-dev parameter snapshot (what gets loaded).
//! - `final.bin`: the final-epoch parameters.
//! - `vocab.txt`: one token per line in index order.
//! - `history.jsonl`: one epoch record per line.
//!
//! The binary format stores named tensors in canonical model order; loads
//! verify the digest first, so any byte flip is rejected, and round-trips
//! are bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Tag, Vocabulary};
use crate::models::{Architecture, Model};
use crate::numerics::Rng;
use crate::training::{build_model, EpochReport, TrainConfig, TrainingRun};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MODEL_FILE: &str = "model.bin";
pub const FINAL_MODEL_FILE: &str = "final.bin";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const HISTORY_FILE: &str = "history.jsonl";

const MAGIC: &[u8; 5] = b"FBNET";
const FORMAT_VERSION: u32 = 1;

/// Everything needed to rebuild and trust a saved model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub architecture: Architecture,
    pub config: TrainConfig,
    /// Padded sentence length the model was trained with; inputs at
    /// prediction time pad to the same length.
    pub max_len: usize,
    pub tag_order: Vec<String>,
    pub vocab_sha256: String,
    pub model_sha256: String,
    pub final_model_sha256: String,
    pub best_epoch: usize,
    pub best_dev_accuracy: f64,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

fn corrupt(message: impl Into<String>) -> Error {
    Error::Checkpoint(message.into())
}

/// Serializes every named tensor: magic, version, tensor count, then per
/// tensor its name, dimensions, and row-major little-endian values.
pub fn model_file_bytes(model: &Model) -> Vec<u8> {
    let views = model.tensors();
    let total: usize = views.iter().map(|v| v.data.len()).sum();
    let mut out = Vec::with_capacity(32 + total * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(views.len() as u32).to_le_bytes());
    for view in views {
        out.extend_from_slice(&(view.name.len() as u32).to_le_bytes());
        out.extend_from_slice(view.name.as_bytes());
        out.extend_from_slice(&(view.rows as u64).to_le_bytes());
        out.extend_from_slice(&(view.cols as u64).to_le_bytes());
        for v in view.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(corrupt(format!("truncated while reading {what}")));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }
}

/// Fills a freshly built model's tensors from serialized bytes. Names,
/// dimensions, and order must match the model exactly.
pub fn load_model_bytes(bytes: &[u8], model: &mut Model) -> Result<()> {
    let expected: Vec<(String, usize, usize)> = model
        .tensors()
        .iter()
        .map(|v| (v.name.clone(), v.rows, v.cols))
        .collect();
    let mut reader = ByteReader { bytes, pos: 0 };

    if reader.take(MAGIC.len(), "magic")? != MAGIC {
        return Err(corrupt("bad magic; not a model parameter file"));
    }
    let version = reader.u32("format version")?;
    if version != FORMAT_VERSION {
        return Err(corrupt(format!(
            "unsupported format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let count = reader.u32("tensor count")? as usize;
    if count != expected.len() {
        return Err(corrupt(format!(
            "tensor count {count} does not match the {} tensors of a {} model",
            expected.len(),
            model.architecture()
        )));
    }

    for (tensor_index, (name, slice)) in model.tensors_mut().into_iter().enumerate() {
        let (ref expected_name, rows, cols) = expected[tensor_index];
        assert_eq!(&name, expected_name, "tensor order must be stable");
        let name_len = reader.u32("tensor name length")? as usize;
        let stored_name = std::str::from_utf8(reader.take(name_len, "tensor name")?)
            .map_err(|_| corrupt("tensor name is not UTF-8"))?;
        if stored_name != name {
            return Err(corrupt(format!(
                "tensor {tensor_index} is {stored_name:?}, expected {name:?}"
            )));
        }
        let stored_rows = reader.u64("tensor rows")? as usize;
        let stored_cols = reader.u64("tensor cols")? as usize;
        if (stored_rows, stored_cols) != (rows, cols) {
            return Err(corrupt(format!(
                "tensor {name:?} is {stored_rows}x{stored_cols}, expected {rows}x{cols}"
            )));
        }
        let payload = reader.take(rows * cols * 8, &format!("values of {name:?}"))?;
        for (slot, chunk) in slice.iter_mut().zip(payload.chunks_exact(8)) {
            let v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
            if !v.is_finite() {
                return Err(corrupt(format!("non-finite parameter in tensor {name:?}")));
            }
            *slot = v;
        }
    }
    if reader.pos != bytes.len() {
        return Err(corrupt(format!(
            "{} trailing bytes after the last tensor",
            bytes.len() - reader.pos
        )));
    }
    match model {
        Model::Cnn(m) => m.embedding.refreeze_pad(),
        Model::CnnGru(m) => m.embedding.refreeze_pad(),
    }
    Ok(())
}

fn canonical_tag_order() -> Vec<String> {
    Tag::ALL.iter().map(|t| t.to_string()).collect()
}

/// Writes a finished training run as a model directory.
pub fn save_training_run(dir: impl AsRef<Path>, run: &TrainingRun) -> Result<Manifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let vocab_text = run.vocab.to_text();
    let best_bytes = model_file_bytes(&run.trained.best_model);
    let final_bytes = model_file_bytes(&run.trained.model);

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        architecture: run.trained.config.architecture,
        config: run.trained.config.clone(),
        max_len: run.max_len,
        tag_order: canonical_tag_order(),
        vocab_sha256: sha256_hex(vocab_text.as_bytes()),
        model_sha256: sha256_hex(&best_bytes),
        final_model_sha256: sha256_hex(&final_bytes),
        best_epoch: run.trained.best_epoch,
        best_dev_accuracy: run.trained.best_dev_accuracy,
    };

    fs::write(dir.join(VOCAB_FILE), vocab_text)?;
    fs::write(dir.join(MODEL_FILE), best_bytes)?;
    fs::write(dir.join(FINAL_MODEL_FILE), final_bytes)?;
    let mut manifest_json =
        serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest_json.push('\n');
    fs::write(dir.join(MANIFEST_FILE), manifest_json)?;

    let mut history = String::new();
    for report in &run.trained.history {
        history.push_str(&serde_json::to_string(report).expect("report serializes"));
        history.push('\n');
    }
    fs::write(dir.join(HISTORY_FILE), history)?;
    Ok(manifest)
}

/// A model directory pulled back into memory, integrity-checked.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: Model,
    pub vocab: Vocabulary,
    pub manifest: Manifest,
}

/// Loads the best-dev snapshot from a model directory.
///
/// Verifies the manifest version, the tag order, and the sha256 digests of
/// the vocabulary and parameter files before trusting any of them.
pub fn load_model_dir(dir: impl AsRef<Path>) -> Result<LoadedModel> {
    let dir = dir.as_ref();
    let manifest_text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: Manifest = serde_json::from_str(&manifest_text)
        .map_err(|e| corrupt(format!("bad manifest: {e}")))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(corrupt(format!(
            "unsupported manifest version {}, expected {FORMAT_VERSION}",
            manifest.format_version
        )));
    }
    if manifest.tag_order != canonical_tag_order() {
        return Err(corrupt(format!(
            "manifest tag order {:?} does not match this build",
            manifest.tag_order
        )));
    }

    let vocab_text = fs::read_to_string(dir.join(VOCAB_FILE))?;
    let vocab_hash = sha256_hex(vocab_text.as_bytes());
    if vocab_hash != manifest.vocab_sha256 {
        return Err(Error::VocabMismatch {
            expected: manifest.vocab_sha256,
            actual: vocab_hash,
        });
    }
    let vocab = Vocabulary::from_text(&vocab_text)?;

    let model_bytes = fs::read(dir.join(MODEL_FILE))?;
    let model_hash = sha256_hex(&model_bytes);
    if model_hash != manifest.model_sha256 {
        return Err(corrupt(format!(
            "parameter file digest {model_hash} does not match manifest {}",
            manifest.model_sha256
        )));
    }

    // Parameter init is immediately overwritten; the seed only has to
    // produce a model of the right shape.
    let mut rng = Rng::new(manifest.config.seed);
    let mut model = build_model(&manifest.config, vocab.len(), &mut rng);
    load_model_bytes(&model_bytes, &mut model)?;
    Ok(LoadedModel { model, vocab, manifest })
}

/// Parses a `history.jsonl` file back into epoch reports.
pub fn load_history(path: impl AsRef<Path>) -> Result<Vec<EpochReport>> {
    let text = fs::read_to_string(path.as_ref())?;
    let mut reports = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let report: EpochReport = serde_json::from_str(line).map_err(|e| {
            Error::data(path.as_ref(), idx + 1, format!("bad history record: {e}"))
        })?;
        reports.push(report);
    }
    Ok(reports)
}
