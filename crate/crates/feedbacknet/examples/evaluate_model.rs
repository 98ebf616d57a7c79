//! Score a trained model on a held-out split and print the per-tag report.
//!
//! Evaluation keeps gold sets intact (no label replication): a prediction
//! is a true positive if it appears anywhere in the record's gold set, and
//! every other gold tag of that record counts one false negative. A tag
//! that was never predicted reports precision -1 (undefined); a tag absent
//! from all gold sets reports recall -1.
//!
//! ```sh
//! cargo run --example evaluate_model
//! ```

use feedbacknet::corpus::{encode_eval_records, generate_synthetic};
use feedbacknet::evaluation::{format_report, parse_report, score_labels};
use feedbacknet::models::predict;
use feedbacknet::training::{train_pipeline, TrainConfig};

fn main() -> feedbacknet::Result<()> {
    let data = generate_synthetic(19, 40, 3);
    let config = TrainConfig {
        max_epochs: 6,
        batch_size: 16,
        learning_rate: 0.1,
        seed: 19,
        embedding_dim: 16,
        filters: 6,
        region_sizes: vec![2, 3],
        ..TrainConfig::default()
    };
    let run = train_pipeline(&config, &data.train, &data.dev, None, |_| {})?;

    let examples = encode_eval_records(
        &data.test.records,
        &run.vocab,
        run.trained.config.tokenizer,
        run.max_len,
    );
    let mut labels = Vec::with_capacity(examples.len());
    let mut gold = Vec::with_capacity(examples.len());
    for example in &examples {
        labels.push(predict(&run.trained.best_model.infer(&example.indices))?.label);
        gold.push(example.gold.clone());
    }

    let report = score_labels(&labels, &gold)?;
    let text = format_report(&report);
    print!("{text}");

    // The text report round-trips exactly: ratios are recomputed from the
    // integer counts, not re-parsed from the rounded decimals.
    let reparsed = parse_report(&text)?;
    assert_eq!(reparsed, report);
    println!("\nreport round-trips through its text form exactly");
    Ok(())
}
