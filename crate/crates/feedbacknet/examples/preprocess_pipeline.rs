//! Walk the preprocessing pipeline: records, label replication,
//! tokenization, vocabulary, and padded index encoding.
//!
//! Multi-tag training records are replicated into one single-tag copy per
//! tag (dev/test sets are never replicated). Sentences become fixed-length
//! index rows: index 0 is the padding token and index 1 the unknown token.
//!
//! ```sh
//! cargo run --example preprocess_pipeline
//! ```

use feedbacknet::corpus::{
    build_vocabulary, expand_multilabel, pad_encode, tokenize, FeedbackRecord, Tag,
    TokenizerMode, PAD_INDEX, UNK_INDEX,
};

fn main() -> feedbacknet::Result<()> {
    let records = vec![
        FeedbackRecord::new("1", "The overlay keeps vanishing, mid-edit!", &[Tag::Bug, Tag::Comment]),
        FeedbackRecord::new("2", "please add an export button", &[Tag::Request]),
        FeedbackRecord::new("3", "checkout is slow", &[Tag::Complaint]),
    ];

    let expanded = expand_multilabel(&records)?;
    println!("{} records expand to {} single-tag instances:", records.len(), expanded.len());
    for record in &expanded {
        let tag = record.tags.iter().next().unwrap();
        println!("  id {:<2} [{tag}] {}", record.id, record.text);
    }

    // Word tokenization lowercases and splits punctuation off; the char
    // mode (used for unsegmented text) emits one token per character.
    let sample = &records[0].text;
    println!("\nword tokens: {:?}", tokenize(sample, TokenizerMode::Word));
    println!("char tokens of \"slow\": {:?}", tokenize("slow", TokenizerMode::Char));

    let sentences: Vec<Vec<String>> = expanded
        .iter()
        .map(|r| tokenize(&r.text, TokenizerMode::Word))
        .collect();
    let vocab = build_vocabulary(&sentences, 1);
    println!("\nvocabulary of {} tokens (index 0 = padding, 1 = unknown)", vocab.len());

    let max_len = 8;
    let tokens = tokenize("please add a shiny export button", TokenizerMode::Word);
    let (indices, true_length) = pad_encode(&tokens, &vocab, max_len);
    println!("\n\"please add a shiny export button\" encoded to length {max_len}:");
    for (token, &index) in tokens.iter().zip(&indices) {
        let note = if index == UNK_INDEX { "  <- unknown" } else { "" };
        println!("  {index:>3}  {token}{note}");
    }
    for &index in &indices[true_length..] {
        assert_eq!(index, PAD_INDEX);
        println!("  {index:>3}  <pad>");
    }
    Ok(())
}
