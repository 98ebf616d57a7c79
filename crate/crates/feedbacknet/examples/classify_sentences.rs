//! Train a small classifier, then classify raw sentences: most probable
//! tag, its confidence, and the full class distribution.
//!
//! Inference is deterministic (dropout is the identity outside training),
//! so the same sentence always produces the same line.
//!
//! ```sh
//! cargo run --example classify_sentences
//! ```

use feedbacknet::corpus::{generate_synthetic, pad_encode, tokenize, Tag};
use feedbacknet::models::predict;
use feedbacknet::training::{train_pipeline, TrainConfig};

fn main() -> feedbacknet::Result<()> {
    let data = generate_synthetic(7, 60, 4);
    let config = TrainConfig {
        max_epochs: 25,
        batch_size: 16,
        learning_rate: 0.1,
        seed: 7,
        embedding_dim: 24,
        filters: 8,
        region_sizes: vec![2, 3],
        ..TrainConfig::default()
    };
    let run = train_pipeline(&config, &data.train, &data.dev, None, |_| {})?;
    let model = &run.trained.best_model;

    // Mix of class keywords and filler words the vocabulary knows, plus
    // words it has never seen (they map to the unknown token).
    let sentences = [
        "the app is terrible and slow",
        "please add a way to export my data",
        "it crashed with an error on my tablet",
        "asdf qwerty blah",
        "maybe this is unclear somehow",
        "browsing the overall experience was noticed",
    ];

    println!("{:<46} {:<13} {:>10}", "sentence", "tag", "confidence");
    for sentence in sentences {
        let tokens = tokenize(sentence, run.trained.config.tokenizer);
        let (indices, _) = pad_encode(&tokens, &run.vocab, run.max_len);
        let prediction = predict(&model.infer(&indices))?;
        println!(
            "{sentence:<46} {:<13} {:>10.4}",
            prediction.label.name(),
            prediction.confidence
        );
        let cells: Vec<String> = Tag::ALL
            .iter()
            .enumerate()
            .map(|(i, tag)| format!("{tag}={:.3}", prediction.distribution.get(i)))
            .collect();
        println!("  {}", cells.join(" "));
    }
    Ok(())
}
