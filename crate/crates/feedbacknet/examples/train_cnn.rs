//! Train the multi-window CNN classifier on a synthetic corpus and save a
//! model directory.
//!
//! The classifier embeds each padded sentence, slides 3 banks of filters
//! (region sizes 2 and 3 here; 3/4/5 at the paper-scale defaults) over it,
//! max-pools each feature map to one value, applies inverted dropout, and
//! classifies through a dense softmax. The best-dev epoch's parameters are
//! what `model.bin` keeps.
//!
//! ```sh
//! cargo run --example train_cnn
//! ```

use feedbacknet::checkpoint::save_training_run;
use feedbacknet::corpus::{encode_eval_records, generate_synthetic};
use feedbacknet::training::{dev_exact_accuracy, train_pipeline, TrainConfig};

fn main() -> feedbacknet::Result<()> {
    let data = generate_synthetic(7, 60, 4);
    let config = TrainConfig {
        max_epochs: 10,
        batch_size: 16,
        learning_rate: 0.1,
        seed: 7,
        embedding_dim: 24,
        filters: 8,
        region_sizes: vec![2, 3],
        ..TrainConfig::default()
    };

    println!(
        "training {} on {} examples ({} dev), batch {}, lr {}",
        config.architecture,
        data.train.len(),
        data.dev.len(),
        config.batch_size,
        config.learning_rate
    );
    let run = train_pipeline(&config, &data.train, &data.dev, None, |report| {
        println!(
            "epoch {:>3}  loss {:.4}  train_acc {:.4}  dev_acc {:.4}",
            report.epoch, report.mean_train_loss, report.train_accuracy, report.dev_accuracy
        );
    })?;

    let test = encode_eval_records(
        &data.test.records,
        &run.vocab,
        run.trained.config.tokenizer,
        run.max_len,
    );
    let test_accuracy = dev_exact_accuracy(&run.trained.best_model, &test)?;
    println!(
        "\nbest epoch {} (dev {:.4}); held-out test accuracy {:.4}",
        run.trained.best_epoch, run.trained.best_dev_accuracy, test_accuracy
    );

    let dir = std::env::temp_dir().join("feedbacknet-examples/cnn-model");
    save_training_run(&dir, &run)?;
    println!("model directory written to {}", dir.display());
    Ok(())
}
