//! Tokenization: whitespace words with punctuation split off, or one token
//! per character for unsegmented scripts.

use serde::{Deserialize, Serialize};

/// How raw text becomes tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenizerMode {
    /// Lowercase, split on whitespace, then peel leading and trailing
    /// punctuation off each piece into tokens of their own.
    Word,
    /// One token per Unicode scalar; whitespace is dropped. Suits scripts
    /// written without word boundaries.
    Char,
}

fn is_edge_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '。' | '、' | '！' | '？' | '「' | '」' | '¿' | '¡')
}

/// Tokenizes `text` under `mode`. Never fails; unknown input just yields
/// fewer (possibly zero) tokens.
pub fn tokenize(text: &str, mode: TokenizerMode) -> Vec<String> {
    match mode {
        TokenizerMode::Word => tokenize_words(text),
        TokenizerMode::Char => text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c.to_string())
            .collect(),
    }
}

fn tokenize_words(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for piece in text.to_lowercase().split_whitespace() {
        let chars: Vec<char> = piece.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        while start < end && is_edge_punct(chars[start]) {
            start += 1;
        }
        while end > start && is_edge_punct(chars[end - 1]) {
            end -= 1;
        }
        for &c in &chars[..start] {
            tokens.push(c.to_string());
        }
        if start < end {
            tokens.push(chars[start..end].iter().collect());
        }
        for &c in &chars[end..] {
            tokens.push(c.to_string());
        }
    }
    tokens
}
