//! Deterministic mini-batch SGD with dev-set monitoring, plus the
//! whole-model gradient-check harness.
//!
//! One seeded [`Rng`] drives a run end to end: parameter init, epoch
//! shuffles, and dropout masks. Batches accumulate gradients in example
//! index order and apply the mean gradient, so two runs with the same
//! config and seed produce bitwise-identical parameters and histories.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::{
    build_vocabulary, encode_eval_records, encode_records, expand_multilabel, load_embeddings,
    max_token_length, tokenize, DatasetSplit, EncodedExample, EvalExample, TokenizerMode,
    Vocabulary,
};
use crate::layers::{DropoutMask, DropoutMode};
use crate::models::{
    cross_entropy_loss, predict, Architecture, CnnGruModel, CnnModel, Model, ModelGradients,
};
use crate::numerics::{finite_difference_gradient, relative_error, Rng};
use crate::{Error, Result};

/// Hyperparameters and data-handling knobs for one training run.
///
/// A config file is a flat TOML document mirroring these fields; every
/// field is optional there and falls back to the default. Unknown keys are
/// rejected rather than silently ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub architecture: Architecture,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub keep_prob: f64,
    pub seed: u64,
    pub embedding_dim: usize,
    pub filters: usize,
    /// Conv region heights for the multi-window model. The hybrid uses
    /// only the first entry for its single conv stage.
    pub region_sizes: Vec<usize>,
    pub gru_hidden: usize,
    pub tokenizer: TokenizerMode,
    /// Tokens below this training-split frequency map to the unknown index.
    pub min_count: usize,
    /// Fixed padded sentence length; `None` derives the longest training
    /// sentence (clamped up to the widest conv region either way).
    pub max_len: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            architecture: Architecture::Cnn,
            max_epochs: 100,
            batch_size: 64,
            learning_rate: 0.05,
            keep_prob: 0.5,
            seed: 1,
            embedding_dim: 300,
            filters: 128,
            region_sizes: vec![3, 4, 5],
            gru_hidden: 300,
            tokenizer: TokenizerMode::Word,
            min_count: 1,
            max_len: None,
        }
    }
}

impl TrainConfig {
    /// Per-language presets. `en`, `fr`, and `jp` train the multi-window
    /// model for 100 epochs; `es` trains the hybrid for 200. Padded
    /// lengths are the published per-language maxima, and `jp` tokenizes
    /// by character.
    pub fn preset(name: &str) -> Result<TrainConfig> {
        let mut config = TrainConfig::default();
        match name {
            "en" => config.max_len = Some(116),
            "fr" => config.max_len = Some(73),
            "es" => {
                config.architecture = Architecture::CnnGru;
                config.max_epochs = 200;
                config.max_len = Some(92);
            }
            "jp" => {
                config.tokenizer = TokenizerMode::Char;
                config.max_len = Some(7);
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown preset {other:?}; expected en, es, fr, or jp"
                )))
            }
        }
        Ok(config)
    }

    /// Parses a flat TOML config document.
    pub fn from_toml_str(text: &str) -> Result<TrainConfig> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad config file: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainConfig> {
        let text = std::fs::read_to_string(path)?;
        TrainConfig::from_toml_str(&text)
    }

    /// Conv region height used by the hybrid's single conv stage.
    pub fn hybrid_conv_width(&self) -> usize {
        self.region_sizes[0]
    }

    pub fn validate(&self) -> Result<()> {
        fn reject(message: impl Into<String>) -> Result<()> {
            Err(Error::Config(message.into()))
        }
        if self.max_epochs == 0 {
            return reject("max_epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return reject("batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return reject(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.keep_prob > 0.0 && self.keep_prob <= 1.0) {
            return reject(format!("keep_prob must be in (0, 1], got {}", self.keep_prob));
        }
        if self.embedding_dim == 0 || self.filters == 0 || self.gru_hidden == 0 {
            return reject("embedding_dim, filters, and gru_hidden must be positive");
        }
        if self.region_sizes.is_empty() {
            return reject("region_sizes must not be empty");
        }
        if self.region_sizes.contains(&0) {
            return reject("region sizes must be positive");
        }
        let mut seen = std::collections::BTreeSet::new();
        if !self.region_sizes.iter().all(|w| seen.insert(w)) {
            return reject(format!("region sizes must be distinct, got {:?}", self.region_sizes));
        }
        if self.min_count == 0 {
            return reject("min_count must be at least 1");
        }
        if self.max_len == Some(0) {
            return reject("max_len must be positive when given");
        }
        Ok(())
    }

    /// Padded rows the narrowest valid sentence needs under this config.
    fn min_padded_len(&self) -> usize {
        match self.architecture {
            Architecture::Cnn => *self.region_sizes.iter().max().expect("non-empty"),
            Architecture::CnnGru => self.hybrid_conv_width(),
        }
    }
}

/// Builds a freshly initialized model for the config.
pub fn build_model(config: &TrainConfig, vocab_len: usize, rng: &mut Rng) -> Model {
    match config.architecture {
        Architecture::Cnn => Model::Cnn(CnnModel::new(
            vocab_len,
            config.embedding_dim,
            &config.region_sizes,
            config.filters,
            config.keep_prob,
            rng,
        )),
        Architecture::CnnGru => Model::CnnGru(CnnGruModel::new(
            vocab_len,
            config.embedding_dim,
            config.hybrid_conv_width(),
            config.filters,
            config.gru_hidden,
            config.keep_prob,
            rng,
        )),
    }
}

/// One SGD update: θ ← θ − lr·ḡ where ḡ is the batch-mean gradient. No
/// weight decay, no norm clipping.
pub fn sgd_step(model: &mut Model, grads: &ModelGradients, learning_rate: f64, batch_len: usize) {
    assert!(batch_len > 0, "batch must be non-empty");
    model.apply_update(grads, -learning_rate / batch_len as f64);
}

/// Per-epoch accounting; one record per epoch lands in the history file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub mean_train_loss: f64,
    pub train_accuracy: f64,
    pub dev_accuracy: f64,
    pub seconds: f64,
}

/// Parameters past this magnitude count as diverged. Forward passes chain
/// at most four parameter factors, so capping each at 1e60 keeps every
/// intermediate product well inside f64 range; the next epoch would
/// otherwise overflow mid-forward where no recovery is possible.
pub const DIVERGENCE_LIMIT: f64 = 1e60;

fn parameters_in_range(model: &Model) -> bool {
    model
        .tensors()
        .iter()
        .all(|view| view.data.iter().all(|v| v.is_finite() && v.abs() <= DIVERGENCE_LIMIT))
}

/// Everything a finished run produces: final-epoch parameters, the
/// best-dev snapshot, and the epoch history.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub model: Model,
    pub best_model: Model,
    pub best_epoch: usize,
    pub best_dev_accuracy: f64,
    pub config: TrainConfig,
    pub history: Vec<EpochReport>,
}

fn train_exact_accuracy(model: &Model, examples: &[EncodedExample]) -> Result<f64> {
    if examples.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for ex in examples {
        let probs = model.infer(&ex.indices);
        if predict(&probs)?.label.index() == ex.label_index {
            correct += 1;
        }
    }
    Ok(correct as f64 / examples.len() as f64)
}

/// Fraction of examples whose predicted label lies in the gold set.
pub fn dev_exact_accuracy(model: &Model, examples: &[EvalExample]) -> Result<f64> {
    if examples.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for ex in examples {
        let probs = model.infer(&ex.indices);
        if ex.gold.contains(&predict(&probs)?.label) {
            correct += 1;
        }
    }
    Ok(correct as f64 / examples.len() as f64)
}

/// Runs mini-batch SGD over pre-encoded splits.
///
/// The train split must already be label-expanded and single-tag encoded;
/// the dev split keeps its multi-label gold sets. Each epoch reshuffles
/// with the run `rng`, draws a fresh dropout mask per example, applies the
/// mean gradient per batch, and scores dev exact accuracy. The best-dev
/// snapshot (ties keep the earlier epoch) rides along in the result.
/// `on_epoch` fires after each epoch, in order.
pub fn train(
    mut model: Model,
    train_set: &[EncodedExample],
    dev_set: &[EvalExample],
    config: &TrainConfig,
    rng: &mut Rng,
    mut on_epoch: impl FnMut(&EpochReport),
) -> Result<TrainedModel> {
    if train_set.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    assert!(config.batch_size > 0, "batch_size must be positive");
    assert!(
        config.learning_rate.is_finite() && config.learning_rate >= 0.0,
        "learning rate must be finite and non-negative"
    );
    let parameter_count = model.parameter_count();
    let width = model.penultimate_width();

    let mut history = Vec::with_capacity(config.max_epochs);
    let mut best_model = model.clone();
    let mut best_epoch = 0usize;
    let mut best_dev = f64::NEG_INFINITY;
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 0..config.max_epochs {
        let started = Instant::now();
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        for (batch_index, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grads = model.zero_gradients();
            for &example_index in batch {
                let example = &train_set[example_index];
                let mask = DropoutMask::sample(width, config.keep_prob, DropoutMode::Train, rng);
                let cache = model.forward(&example.indices, &mask);
                let loss = cross_entropy_loss(cache.probs(), example.label_index);
                if !loss.is_finite() {
                    return Err(Error::Diverged { epoch, batch: batch_index });
                }
                loss_sum += loss;
                model.backward(&cache, example.label_index, &mut grads);
            }
            if !grads.is_finite() {
                return Err(Error::Diverged { epoch, batch: batch_index });
            }
            sgd_step(&mut model, &grads, config.learning_rate, batch.len());
            if !parameters_in_range(&model) {
                return Err(Error::Diverged { epoch, batch: batch_index });
            }
        }
        model.embedding().assert_pad_row_zero();
        assert_eq!(model.parameter_count(), parameter_count, "parameter count drifted");

        let report = EpochReport {
            epoch,
            mean_train_loss: loss_sum / train_set.len() as f64,
            train_accuracy: train_exact_accuracy(&model, train_set)?,
            dev_accuracy: dev_exact_accuracy(&model, dev_set)?,
            seconds: started.elapsed().as_secs_f64(),
        };
        if report.dev_accuracy > best_dev {
            best_dev = report.dev_accuracy;
            best_epoch = epoch;
            best_model = model.clone();
        }
        on_epoch(&report);
        history.push(report);
    }

    Ok(TrainedModel {
        model,
        best_model,
        best_epoch,
        best_dev_accuracy: best_dev.max(0.0),
        config: config.clone(),
        history,
    })
}

/// Artifacts of a full run starting from raw records.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub trained: TrainedModel,
    pub vocab: Vocabulary,
    pub max_len: usize,
}

/// Preprocesses raw splits and trains: tokenize, build the vocabulary from
/// the training split, derive the padded length, replicate multi-label
/// training records, encode, initialize (optionally over pretrained
/// embeddings), and run SGD.
pub fn train_pipeline(
    config: &TrainConfig,
    train_split: &DatasetSplit,
    dev_split: &DatasetSplit,
    embeddings_path: Option<&Path>,
    on_epoch: impl FnMut(&EpochReport),
) -> Result<TrainingRun> {
    config.validate()?;
    if train_split.records.is_empty() {
        return Err(Error::Config("training split has no records".into()));
    }
    let mut rng = Rng::new(config.seed);

    let sentences: Vec<Vec<String>> = train_split
        .records
        .iter()
        .map(|r| tokenize(&r.text, config.tokenizer))
        .collect();
    let vocab = build_vocabulary(&sentences, config.min_count);
    let longest = max_token_length(&train_split.records, config.tokenizer);
    let max_len = config.max_len.unwrap_or(longest).max(config.min_padded_len());

    let expanded = expand_multilabel(&train_split.records)?;
    let train_examples = encode_records(&expanded, &vocab, config.tokenizer, max_len);
    let dev_examples = encode_eval_records(&dev_split.records, &vocab, config.tokenizer, max_len);

    let model = match embeddings_path {
        None => build_model(config, vocab.len(), &mut rng),
        Some(path) => {
            let table = load_embeddings(path, &vocab, &mut rng)?;
            if table.dim() != config.embedding_dim {
                return Err(Error::Config(format!(
                    "embedding file dimension {} does not match configured embedding_dim {}",
                    table.dim(),
                    config.embedding_dim
                )));
            }
            match config.architecture {
                Architecture::Cnn => Model::Cnn(CnnModel::with_embedding(
                    table,
                    &config.region_sizes,
                    config.filters,
                    config.keep_prob,
                    &mut rng,
                )),
                Architecture::CnnGru => Model::CnnGru(CnnGruModel::with_embedding(
                    table,
                    config.hybrid_conv_width(),
                    config.filters,
                    config.gru_hidden,
                    config.keep_prob,
                    &mut rng,
                )),
            }
        }
    };

    let trained = train(model, &train_examples, &dev_examples, config, &mut rng, on_epoch)?;
    Ok(TrainingRun { trained, vocab, max_len })
}

/// Gradient comparisons stay below this relative error to pass.
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-4;

const FD_EPSILON: f64 = 1e-4;

/// Worst finite-difference disagreement within one named tensor.
#[derive(Debug, Clone, Serialize)]
pub struct GroupCheck {
    pub group: String,
    pub parameters: usize,
    pub max_relative_error: f64,
    pub worst_coordinate: usize,
    pub analytic: f64,
    pub numeric: f64,
}

/// Whole-model gradient audit: one row per parameter tensor.
#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub architecture: Architecture,
    pub seed: u64,
    pub tolerance: f64,
    pub groups: Vec<GroupCheck>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.groups
            .iter()
            .all(|g| g.max_relative_error < self.tolerance)
    }

    /// The group with the largest relative error.
    pub fn worst(&self) -> &GroupCheck {
        self.groups
            .iter()
            .max_by(|a, b| a.max_relative_error.total_cmp(&b.max_relative_error))
            .expect("models have at least one tensor")
    }

    /// One aligned line per group plus a verdict line.
    pub fn format_lines(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let name_width = self
            .groups
            .iter()
            .map(|g| g.group.len())
            .max()
            .unwrap_or(0)
            .max("group".len());
        let _ = writeln!(
            out,
            "{:<name_width$} {:>10} {:>13} {:>12} {:>13} {:>13}",
            "group", "params", "max_rel_err", "worst_coord", "analytic", "numeric"
        );
        for g in &self.groups {
            let _ = writeln!(
                out,
                "{:<name_width$} {:>10} {:>13.3e} {:>12} {:>13.6e} {:>13.6e}",
                g.group, g.parameters, g.max_relative_error, g.worst_coordinate, g.analytic, g.numeric
            );
        }
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{verdict}: worst relative error {:.3e} (tolerance {:.1e})",
            self.worst().max_relative_error,
            self.tolerance
        );
        out
    }
}

/// Splits flat analytic/numeric gradients along the model's named tensors
/// and records the worst coordinate of each.
fn fd_group_checks(
    model: &Model,
    indices: &[usize],
    gold: usize,
    grads: &ModelGradients,
) -> Result<Vec<GroupCheck>> {
    let theta = model.flatten();
    let mut scratch = model.clone();
    let width = model.penultimate_width();
    let numeric = finite_difference_gradient(
        |t: &[f64]| {
            scratch.load_flat(t);
            let cache = scratch.forward(indices, &DropoutMask::identity(width));
            cross_entropy_loss(cache.probs(), gold)
        },
        &theta,
        FD_EPSILON,
    )?;
    let analytic = grads.flatten();

    let mut out = Vec::new();
    let mut offset = 0usize;
    for view in model.tensors() {
        let len = view.data.len();
        let mut check = GroupCheck {
            group: view.name,
            parameters: len,
            max_relative_error: 0.0,
            worst_coordinate: 0,
            analytic: analytic[offset],
            numeric: numeric.get(offset),
        };
        for i in 0..len {
            let a = analytic[offset + i];
            let n = numeric.get(offset + i);
            let err = relative_error(a, n);
            if err > check.max_relative_error {
                check.max_relative_error = err;
                check.worst_coordinate = i;
                check.analytic = a;
                check.numeric = n;
            }
        }
        out.push(check);
        offset += len;
    }
    Ok(out)
}

/// Small documented preset for the gradient audit: vocabulary 24,
/// embedding dim 8, two filters per region, hidden 8, twelve-token input.
fn grad_check_model(architecture: Architecture, rng: &mut Rng) -> Model {
    const VOCAB: usize = 24;
    const DIM: usize = 8;
    const FILTERS: usize = 2;
    const HIDDEN: usize = 8;
    match architecture {
        Architecture::Cnn => {
            Model::Cnn(CnnModel::new(VOCAB, DIM, &[3, 4, 5], FILTERS, 1.0, rng))
        }
        Architecture::CnnGru => {
            Model::CnnGru(CnnGruModel::new(VOCAB, DIM, 3, FILTERS, HIDDEN, 1.0, rng))
        }
    }
}

/// Audits every parameter tensor of a small model against central finite
/// differences. Failures land in the report, never as errors.
///
/// Init-scale embeddings park conv pre-activations on the ReLU hinge where
/// finite differences are meaningless, so the harness scales embeddings up
/// and redraws the input until the forward pass is smooth (clear of hinge
/// and pooling ties); the redraw loop is deterministic in `seed`.
pub fn gradient_check_run(architecture: Architecture, seed: u64) -> Result<GradCheckReport> {
    const MAX_LEN: usize = 12;
    let mut rng = Rng::new(seed);
    let (model, indices, gold) = loop {
        let mut model = grad_check_model(architecture, &mut rng);
        model.scale_embeddings(100.0);
        let indices: Vec<usize> = (0..MAX_LEN)
            .map(|_| 1 + rng.below(model.embedding().vocab_len() - 1))
            .collect();
        let gold = rng.below(crate::corpus::TAG_COUNT);
        let cache = model.forward(&indices, &DropoutMask::identity(model.penultimate_width()));
        if cache.fd_smooth() {
            break (model, indices, gold);
        }
    };

    let mut grads = model.zero_gradients();
    let cache = model.forward(&indices, &DropoutMask::identity(model.penultimate_width()));
    model.backward(&cache, gold, &mut grads);
    let groups = fd_group_checks(&model, &indices, gold, &grads)?;
    Ok(GradCheckReport {
        architecture,
        seed,
        tolerance: GRAD_CHECK_TOLERANCE,
        groups,
    })
}
