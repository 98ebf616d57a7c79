//! Acceptance gate: nine end-to-end checks, one test per criterion.
//!
//! Each test prints a `PASS criterion N` line on success (visible with
//! `--nocapture`); the harness itself reports one pass/fail line per
//! criterion either way. Tolerances and budgets are pinned as constants
//! below. Everything is seeded, so a passing gate is reproducible bit for
//! bit.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use feedbacknet::checkpoint::{
    load_history, save_training_run, FINAL_MODEL_FILE, HISTORY_FILE, MANIFEST_FILE, MODEL_FILE,
    VOCAB_FILE,
};
use feedbacknet::corpus::{
    encode_eval_records, expand_multilabel, generate_synthetic, load_tsv, DatasetSplit, SplitRole,
    Tag,
};
use feedbacknet::evaluation::score_labels;
use feedbacknet::layers::{conv_forward, ConvLayer};
use feedbacknet::models::Architecture;
use feedbacknet::numerics::{softmax, Matrix, Rng, Vector};
use feedbacknet::training::{
    build_model, dev_exact_accuracy, gradient_check_run, train_pipeline, TrainConfig, TrainingRun,
};

const GRAD_TOLERANCE: f64 = 1e-4;
const GRAD_TIME_BUDGET: f64 = 60.0;
const CONV_ORACLE_TOLERANCE: f64 = 1e-10;
const OVERFIT_EPOCH_BUDGET: usize = 300;
const OVERFIT_LEARNING_RATE: f64 = 0.05;
const OVERFIT_TIME_BUDGET: f64 = 30.0;
const MIN_TEST_ACCURACY: f64 = 0.95;
const LEARNING_TIME_BUDGET: f64 = 600.0;
const SOFTMAX_TOLERANCE: f64 = 1e-12;
const CNN_PENULTIMATE_WIDTH: usize = 384;
const HYBRID_CLASSIFIER_WIDTH: usize = 600;

fn pass(n: usize, what: &str) {
    println!("PASS criterion {n}: {what}");
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// All splits of a generated corpus merged into one training split.
fn merged_synthetic(seed: u64, per_class: usize) -> DatasetSplit {
    let data = generate_synthetic(seed, per_class, 2);
    let mut records = data.train.records;
    records.extend(data.dev.records);
    records.extend(data.test.records);
    DatasetSplit { role: SplitRole::Train, records }
}

#[test]
fn criterion_1_gradient_fidelity_both_architectures() {
    let started = Instant::now();
    for architecture in [Architecture::Cnn, Architecture::CnnGru] {
        let report = gradient_check_run(architecture, 42).unwrap();
        assert_eq!(report.tolerance, GRAD_TOLERANCE);
        // Small preset: 24-token vocabulary at k=8, so the embedding group
        // has 192 parameters; 2 filters per size.
        let embedding = report.groups.iter().find(|g| g.group == "embedding").unwrap();
        assert_eq!(embedding.parameters, 24 * 8);
        match architecture {
            Architecture::Cnn => {
                let conv3 = report.groups.iter().find(|g| g.group == "conv3.weights").unwrap();
                assert_eq!(conv3.parameters, 2 * 3 * 8);
            }
            Architecture::CnnGru => {
                // hidden=8 per direction, so the classifier sees 16 features.
                let output = report.groups.iter().find(|g| g.group == "output.weights").unwrap();
                assert_eq!(output.parameters, 16 * 6);
            }
        }
        for group in &report.groups {
            assert!(
                group.max_relative_error < GRAD_TOLERANCE,
                "{architecture}/{}: relative error {:.3e}",
                group.group,
                group.max_relative_error
            );
        }
        assert!(report.passed());
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < GRAD_TIME_BUDGET, "gradient checks took {elapsed:.1}s");
    pass(1, "all parameter groups of both architectures within 1e-4 of the FD oracle");
}

#[test]
fn criterion_2_conv_matches_naive_sliding_window_oracle() {
    let mut rng = Rng::new(2024);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let k = 2 + rng.below(6);
        let h = 1 + rng.below(4);
        let n = h + rng.below(8);
        let filters = 1 + rng.below(5);
        let layer = ConvLayer::new(h, k, filters, &mut rng);
        let mut sentence = Matrix::zeros(n, k);
        for v in sentence.data_mut() {
            *v = rng.uniform(1.5);
        }

        let map = conv_forward(&sentence, &layer);
        assert_eq!(map.pre_activation.shape(), (n - h + 1, filters));
        for i in 0..(n - h + 1) {
            for f in 0..filters {
                let mut acc = layer.bias().get(f);
                for r in 0..h {
                    for c in 0..k {
                        acc += layer.weights().get(f, r * k + c) * sentence.get(i + r, c);
                    }
                }
                worst = worst.max((map.pre_activation.get(i, f) - acc).abs());
                let activated = if acc > 0.0 { acc } else { 0.0 };
                worst = worst.max((map.activated.get(i, f) - activated).abs());
            }
        }
    }
    assert!(worst < CONV_ORACLE_TOLERANCE, "max |delta| = {worst:e}");
    pass(2, "conv_forward equals the naive oracle on 50 random instances");
}

#[test]
fn criterion_3_small_cnn_overfits_24_examples() {
    let started = Instant::now();
    let merged = merged_synthetic(11, 4);
    assert_eq!(merged.records.len(), 24);

    let config = TrainConfig {
        max_epochs: OVERFIT_EPOCH_BUDGET,
        batch_size: 8,
        learning_rate: OVERFIT_LEARNING_RATE,
        keep_prob: 1.0,
        seed: 3,
        embedding_dim: 16,
        filters: 8,
        region_sizes: vec![2, 3],
        ..TrainConfig::default()
    };
    let run = train_pipeline(&config, &merged, &merged, None, |_| {}).unwrap();
    let first_perfect = run.trained.history.iter().find(|r| r.train_accuracy == 1.0);
    let epoch = first_perfect
        .unwrap_or_else(|| {
            panic!("never reached 100% training accuracy in {OVERFIT_EPOCH_BUDGET} epochs")
        })
        .epoch;
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < OVERFIT_TIME_BUDGET, "overfit run took {elapsed:.1}s");
    pass(3, &format!("100% training accuracy at epoch {epoch} of {OVERFIT_EPOCH_BUDGET}"));
}

/// Criteria 4 and 9 share these two full training runs; the closure runs
/// once no matter which test gets there first.
fn separable_runs() -> &'static (TrainingRun, TrainingRun, f64) {
    static RUNS: OnceLock<(TrainingRun, TrainingRun, f64)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let started = Instant::now();
        let data = generate_synthetic(7, 100, 4);
        assert_eq!(data.train.len(), 420);
        assert_eq!(data.dev.len(), 90);
        assert_eq!(data.test.len(), 90);

        let cnn_config = TrainConfig {
            max_epochs: 12,
            batch_size: 16,
            learning_rate: 0.1,
            seed: 7,
            embedding_dim: 24,
            filters: 8,
            region_sizes: vec![2, 3],
            ..TrainConfig::default()
        };
        let gru_config = TrainConfig {
            architecture: Architecture::CnnGru,
            region_sizes: vec![3],
            gru_hidden: 12,
            ..cnn_config.clone()
        };
        let cnn = train_pipeline(&cnn_config, &data.train, &data.dev, None, |_| {}).unwrap();
        let gru = train_pipeline(&gru_config, &data.train, &data.dev, None, |_| {}).unwrap();
        (cnn, gru, started.elapsed().as_secs_f64())
    })
}

#[test]
fn criterion_4_both_architectures_learn_the_separable_corpus() {
    let (cnn, gru, elapsed) = separable_runs();
    let test = generate_synthetic(7, 100, 4).test;
    for run in [cnn, gru] {
        let examples = encode_eval_records(
            &test.records,
            &run.vocab,
            run.trained.config.tokenizer,
            run.max_len,
        );
        let accuracy = dev_exact_accuracy(&run.trained.best_model, &examples).unwrap();
        assert!(
            accuracy >= MIN_TEST_ACCURACY,
            "{} best-dev checkpoint scored {accuracy:.4} on test",
            run.trained.config.architecture
        );
    }
    assert!(*elapsed < LEARNING_TIME_BUDGET, "training took {elapsed:.1}s");
    pass(4, "best-dev checkpoints of both architectures reach >= 95% test accuracy");
}

#[test]
fn criterion_5_training_is_bitwise_deterministic() {
    let data = generate_synthetic(13, 10, 2);
    let config = TrainConfig {
        max_epochs: 5,
        batch_size: 8,
        seed: 21,
        embedding_dim: 12,
        filters: 4,
        region_sizes: vec![2, 3],
        ..TrainConfig::default()
    };
    let run_a = train_pipeline(&config, &data.train, &data.dev, None, |_| {}).unwrap();
    let run_b = train_pipeline(&config, &data.train, &data.dev, None, |_| {}).unwrap();

    assert_eq!(run_a.trained.history.len(), run_b.trained.history.len());
    for (a, b) in run_a.trained.history.iter().zip(&run_b.trained.history) {
        assert_eq!(a.epoch, b.epoch);
        assert_eq!(a.mean_train_loss.to_bits(), b.mean_train_loss.to_bits());
        assert_eq!(a.train_accuracy.to_bits(), b.train_accuracy.to_bits());
        assert_eq!(a.dev_accuracy.to_bits(), b.dev_accuracy.to_bits());
    }

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    save_training_run(dir_a.path(), &run_a).unwrap();
    save_training_run(dir_b.path(), &run_b).unwrap();
    for file in [MODEL_FILE, FINAL_MODEL_FILE, VOCAB_FILE, MANIFEST_FILE] {
        let a = fs::read(dir_a.path().join(file)).unwrap();
        let b = fs::read(dir_b.path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    // The persisted history carries wall time, which legitimately differs;
    // every numeric training quantity in it must not.
    let hist_a = load_history(dir_a.path().join(HISTORY_FILE)).unwrap();
    let hist_b = load_history(dir_b.path().join(HISTORY_FILE)).unwrap();
    for (a, b) in hist_a.iter().zip(&hist_b) {
        assert_eq!(a.mean_train_loss.to_bits(), b.mean_train_loss.to_bits());
        assert_eq!(a.dev_accuracy.to_bits(), b.dev_accuracy.to_bits());
    }
    pass(5, "identical runs give bitwise-identical loss histories and checkpoints");
}

#[test]
fn criterion_6_multilabel_records_expand_one_copy_per_tag() {
    let split = load_tsv(fixture("expansion.tsv"), SplitRole::Train).unwrap();
    assert_eq!(split.len(), 10);
    let total_tags: usize = split.records.iter().map(|r| r.tags.len()).sum();
    assert_eq!(total_tags, 14);

    let expanded = expand_multilabel(&split.records).unwrap();
    assert_eq!(expanded.len(), 14);
    assert!(expanded.iter().all(|r| r.tags.len() == 1));

    // The record tagged "bug, comment" becomes two single-tag copies of the
    // same sentence, in canonical tag order.
    let copies: Vec<_> = expanded.iter().filter(|r| r.id == "2").collect();
    assert_eq!(copies.len(), 2);
    assert_eq!(copies[0].tags, [Tag::Comment].into_iter().collect::<BTreeSet<_>>());
    assert_eq!(copies[1].tags, [Tag::Bug].into_iter().collect::<BTreeSet<_>>());
    assert_eq!(copies[0].text, copies[1].text);
    pass(6, "10-record/14-tag fixture expands to exactly 14 single-tag records");
}

#[test]
fn criterion_7_score_reproduces_the_confusion_oracle() {
    let text = fs::read_to_string(fixture("predictions.tsv")).unwrap();
    let mut predicted = Vec::new();
    let mut gold: Vec<BTreeSet<Tag>> = Vec::new();
    for line in text.lines() {
        let (p, g) = line.split_once('\t').unwrap();
        predicted.push(p.parse::<Tag>().unwrap());
        gold.push(g.split(',').map(|t| t.parse::<Tag>().unwrap()).collect());
    }
    assert_eq!(predicted.len(), 20);

    let report = score_labels(&predicted, &gold).unwrap();

    for tag in Tag::ALL {
        let tp = predicted
            .iter()
            .zip(&gold)
            .filter(|(p, g)| **p == tag && g.contains(&tag))
            .count();
        let fp = predicted
            .iter()
            .zip(&gold)
            .filter(|(p, g)| **p == tag && !g.contains(&tag))
            .count();
        let fn_count = predicted
            .iter()
            .zip(&gold)
            .filter(|(p, g)| **p != tag && g.contains(&tag))
            .count();
        let row = report.for_tag(tag);
        assert_eq!((row.true_positives, row.false_positives, row.false_negatives),
                   (tp, fp, fn_count), "{tag} counts");

        let precision = if tp + fp == 0 { -1.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_count == 0 { -1.0 } else { tp as f64 / (tp + fn_count) as f64 };
        let f1 = if precision < 0.0 || recall < 0.0 || precision + recall == 0.0 {
            -1.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        assert_eq!(row.precision, precision, "{tag} precision");
        assert_eq!(row.recall, recall, "{tag} recall");
        assert_eq!(row.f1, f1, "{tag} f1");
    }

    // The never-predicted tag shows the -1 / 0 / -1 sentinel pattern.
    let request = report.for_tag(Tag::Request);
    assert_eq!(request.precision, -1.0);
    assert_eq!(request.recall, 0.0);
    assert_eq!(request.f1, -1.0);

    let correct = predicted.iter().zip(&gold).filter(|(p, g)| g.contains(p)).count();
    assert_eq!(report.exact_accuracy, correct as f64 / 20.0);
    assert_eq!(report.exact_accuracy, 0.7);
    pass(7, "20-prediction fixture matches the brute-force oracle, sentinels included");
}

#[test]
fn criterion_8_softmax_normalization_and_feature_widths() {
    let mut rng = Rng::new(88);
    for _ in 0..1000 {
        let dim = 2 + rng.below(9);
        let logits =
            Vector::from_vec((0..dim).map(|_| rng.uniform(10.0)).collect()).unwrap();
        let probs = softmax(&logits);
        assert!((probs.sum() - 1.0).abs() < SOFTMAX_TOLERANCE, "sum {}", probs.sum());
        for i in 0..probs.len() {
            let p = probs.get(i);
            assert!(p > 0.0 && p <= 1.0, "probability {p}");
        }
    }

    // Default configuration: 3 region sizes x 128 filters feed a width-384
    // penultimate layer; the hybrid's bidirectional hidden 300 feeds 600.
    let config = TrainConfig::default();
    assert_eq!(config.filters, 128);
    assert_eq!(config.region_sizes, vec![3, 4, 5]);
    assert_eq!(config.gru_hidden, 300);
    let mut rng = Rng::new(1);
    let cnn = build_model(&config, 50, &mut rng);
    let cnn_tensors = cnn.tensors();
    let output = cnn_tensors.iter().find(|t| t.name == "output.weights").unwrap();
    assert_eq!(output.rows, CNN_PENULTIMATE_WIDTH);

    let gru_config = TrainConfig { architecture: Architecture::CnnGru, ..config };
    let gru = build_model(&gru_config, 50, &mut rng);
    let gru_tensors = gru.tensors();
    let output = gru_tensors.iter().find(|t| t.name == "output.weights").unwrap();
    assert_eq!(output.rows, HYBRID_CLASSIFIER_WIDTH);
    pass(8, "softmax sums to 1 within 1e-12; widths are exactly 384 and 600");
}

#[test]
fn criterion_9_pad_row_is_exactly_zero_after_training() {
    let (cnn, gru, _) = separable_runs();
    for run in [cnn, gru] {
        for model in [&run.trained.best_model, &run.trained.model] {
            let tensors = model.tensors();
            let embedding = tensors.iter().find(|t| t.name == "embedding").unwrap();
            let pad_row = &embedding.data[..embedding.cols];
            assert!(
                pad_row.iter().all(|&v| v == 0.0),
                "{} PAD row drifted: {pad_row:?}",
                run.trained.config.architecture
            );
        }
    }
    pass(9, "PAD embedding row is exactly zero in best and final checkpoints");
}
