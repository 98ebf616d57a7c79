//! Train the CNN+GRU hybrid: one convolution, temporal max pooling, then a
//! bidirectional GRU whose two final states feed the classifier.
//!
//! Where the plain CNN pools each feature map down to a single value, the
//! hybrid pools non-overlapping pairs of positions (stride 2), keeping a
//! shorter timeline that the forward and backward GRUs read end to end.
//!
//! ```sh
//! cargo run --example train_cnn_gru
//! ```

use feedbacknet::checkpoint::save_training_run;
use feedbacknet::corpus::{encode_eval_records, generate_synthetic};
use feedbacknet::models::Architecture;
use feedbacknet::training::{dev_exact_accuracy, train_pipeline, TrainConfig};

fn main() -> feedbacknet::Result<()> {
    let data = generate_synthetic(7, 100, 4);
    let config = TrainConfig {
        architecture: Architecture::CnnGru,
        max_epochs: 12,
        batch_size: 16,
        learning_rate: 0.1,
        seed: 7,
        embedding_dim: 24,
        filters: 8,
        region_sizes: vec![3],
        gru_hidden: 12,
        ..TrainConfig::default()
    };

    println!(
        "training {} (conv width {}, hidden {} per direction)",
        config.architecture,
        config.hybrid_conv_width(),
        config.gru_hidden
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

    let dir = std::env::temp_dir().join("feedbacknet-examples/cnn-gru-model");
    save_training_run(&dir, &run)?;
    println!("model directory written to {}", dir.display());
    Ok(())
}
