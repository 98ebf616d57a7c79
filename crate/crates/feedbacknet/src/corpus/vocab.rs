//! Vocabulary construction, index encoding, and fixed-length padding.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::corpus::records::{FeedbackRecord, Tag};
use crate::corpus::tokenize::{tokenize, TokenizerMode};
use crate::error::{Error, Result};

pub const PAD_INDEX: usize = 0;
pub const UNK_INDEX: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Token-to-index mapping. Index 0 is the padding token and index 1 the
/// unknown token; both exist in every vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    fn from_token_list(tokens: Vec<String>) -> Result<Vocabulary> {
        if tokens.len() < 2 || tokens[0] != PAD_TOKEN || tokens[1] != UNK_TOKEN {
            return Err(Error::Config(format!(
                "vocabulary must start with {PAD_TOKEN:?} then {UNK_TOKEN:?}"
            )));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, token) in tokens.iter().enumerate() {
            if index.insert(token.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate vocabulary token {token:?}")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    /// Number of entries, padding and unknown included.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index for `token`, falling back to the unknown index.
    pub fn index_of(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK_INDEX)
    }

    /// Exact lookup with no unknown fallback.
    pub fn lookup(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// One token per line, in index order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for token in &self.tokens {
            out.push_str(token);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Vocabulary> {
        let tokens: Vec<String> = text.lines().map(str::to_string).collect();
        Vocabulary::from_token_list(tokens)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Vocabulary> {
        let text = fs::read_to_string(path)?;
        Vocabulary::from_text(&text)
    }
}

/// Builds a vocabulary from tokenized sentences, keeping tokens that occur
/// at least `min_count` times. Kept tokens are ordered by descending
/// frequency, ties broken lexicographically, so construction is
/// deterministic.
pub fn build_vocabulary(sentences: &[Vec<String>], min_count: usize) -> Vocabulary {
    assert!(min_count >= 1, "min_count must be at least 1");
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for sentence in sentences {
        for token in sentence {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(_, n)| n >= min_count)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut tokens = Vec::with_capacity(kept.len() + 2);
    tokens.push(PAD_TOKEN.to_string());
    tokens.push(UNK_TOKEN.to_string());
    tokens.extend(kept.into_iter().map(|(t, _)| t.to_string()));
    Vocabulary::from_token_list(tokens).expect("built token list is well formed")
}

/// Longest sentence, in tokens, across `records` under `mode`.
pub fn max_token_length(records: &[FeedbackRecord], mode: TokenizerMode) -> usize {
    records
        .iter()
        .map(|r| tokenize(&r.text, mode).len())
        .max()
        .unwrap_or(0)
}

/// A sentence encoded for the models: `max_len` indices, right-padded, with
/// the unpadded length and the gold label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedExample {
    pub indices: Vec<usize>,
    pub true_length: usize,
    pub label_index: usize,
}

/// Maps tokens to indices, truncating past `max_len` and right-padding up
/// to it. Returns the padded indices and the pre-padding length.
pub fn pad_encode(tokens: &[String], vocab: &Vocabulary, max_len: usize) -> (Vec<usize>, usize) {
    assert!(max_len > 0, "max_len must be positive");
    let true_length = tokens.len().min(max_len);
    let mut indices = Vec::with_capacity(max_len);
    for token in &tokens[..true_length] {
        indices.push(vocab.index_of(token));
    }
    indices.resize(max_len, PAD_INDEX);
    (indices, true_length)
}

/// Encodes single-tag records into model-ready examples. Records must
/// already be through multi-label replication; a multi-tag record is a
/// caller bug.
pub fn encode_records(
    records: &[FeedbackRecord],
    vocab: &Vocabulary,
    mode: TokenizerMode,
    max_len: usize,
) -> Vec<EncodedExample> {
    records
        .iter()
        .map(|record| {
            assert_eq!(
                record.tags.len(),
                1,
                "record {:?} must carry exactly one tag; expand multi-label records first",
                record.id
            );
            let tag = *record.tags.iter().next().expect("one tag");
            let tokens = tokenize(&record.text, mode);
            let (indices, true_length) = pad_encode(&tokens, vocab, max_len);
            EncodedExample {
                indices,
                true_length,
                label_index: tag.index(),
            }
        })
        .collect()
}

/// A dev/test sentence: padded indices plus the full multi-label gold set.
/// Dev and test splits are never label-expanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalExample {
    pub indices: Vec<usize>,
    pub true_length: usize,
    pub gold: BTreeSet<Tag>,
}

/// Encodes records for scoring, keeping gold tag sets intact.
pub fn encode_eval_records(
    records: &[FeedbackRecord],
    vocab: &Vocabulary,
    mode: TokenizerMode,
    max_len: usize,
) -> Vec<EvalExample> {
    records
        .iter()
        .map(|record| {
            let tokens = tokenize(&record.text, mode);
            let (indices, true_length) = pad_encode(&tokens, vocab, max_len);
            EvalExample {
                indices,
                true_length,
                gold: record.tags.clone(),
            }
        })
        .collect()
}
