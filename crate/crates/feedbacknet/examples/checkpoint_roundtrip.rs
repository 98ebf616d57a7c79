//! Save a trained model, reload it bit for bit, and show that tampering
//! with any saved file is detected before the parameters are trusted.
//!
//! A model directory holds `manifest.json` (config, tag order, sha256
//! digests), `model.bin` (best-dev parameters), `final.bin`, `vocab.txt`,
//! and `history.jsonl`. Loads verify the digests first, so a single flipped
//! byte anywhere in the parameters is rejected, and an edited vocabulary is
//! reported as a hash mismatch.
//!
//! ```sh
//! cargo run --example checkpoint_roundtrip
//! ```

use std::fs;

use feedbacknet::checkpoint::{load_model_dir, save_training_run, MODEL_FILE, VOCAB_FILE};
use feedbacknet::corpus::generate_synthetic;
use feedbacknet::training::{train_pipeline, TrainConfig};

fn main() -> feedbacknet::Result<()> {
    let data = generate_synthetic(23, 10, 2);
    let config = TrainConfig {
        max_epochs: 3,
        batch_size: 8,
        seed: 23,
        embedding_dim: 12,
        filters: 4,
        region_sizes: vec![2, 3],
        ..TrainConfig::default()
    };
    let run = train_pipeline(&config, &data.train, &data.dev, None, |_| {})?;

    let dir = std::env::temp_dir().join("feedbacknet-examples/roundtrip-model");
    let manifest = save_training_run(&dir, &run)?;
    println!("saved {} model to {}", manifest.architecture, dir.display());
    println!("vocab sha256  {}", manifest.vocab_sha256);
    println!("model sha256  {}", manifest.model_sha256);

    let loaded = load_model_dir(&dir)?;
    let original = run.trained.best_model.flatten();
    let reloaded = loaded.model.flatten();
    assert_eq!(original.len(), reloaded.len());
    assert!(original.iter().zip(&reloaded).all(|(a, b)| a.to_bits() == b.to_bits()));
    println!("reloaded all {} parameters bit-exactly", original.len());

    // Flip one byte in the parameter file: the digest check rejects it.
    let model_path = dir.join(MODEL_FILE);
    let pristine = fs::read(&model_path)?;
    let mut tampered = pristine.clone();
    let mid = tampered.len() / 2;
    tampered[mid] ^= 0x01;
    fs::write(&model_path, &tampered)?;
    match load_model_dir(&dir) {
        Err(e) => println!("tampered parameters rejected: {e}"),
        Ok(_) => panic!("tampered checkpoint was accepted"),
    }
    fs::write(&model_path, &pristine)?;

    // Append a token to the vocabulary: reported as a hash mismatch.
    let vocab_path = dir.join(VOCAB_FILE);
    let vocab_text = fs::read_to_string(&vocab_path)?;
    fs::write(&vocab_path, format!("{vocab_text}stowaway\n"))?;
    match load_model_dir(&dir) {
        Err(e) => println!("edited vocabulary rejected: {e}"),
        Ok(_) => panic!("edited vocabulary was accepted"),
    }
    fs::write(&vocab_path, vocab_text)?;

    println!("directory restored; final load succeeds: {}", load_model_dir(&dir).is_ok());
    Ok(())
}
