//! Command-line operations: train, evaluate, predict, gen-data, grad-check.
//!
//! Each `run_*` function performs one whole command and returns a process
//! exit code instead of calling `exit`, so the binary stays a one-liner and
//! tests can drive full commands in-process. The mapping is fixed:
//!
//! - `0`: success
//! - `1`: malformed data, I/O failure, or an unreadable checkpoint
//! - `2`: invalid configuration or a vocabulary hash mismatch
//! - `3`: numerical divergence or a failed gradient check
//!
//! Configuration precedence for `train`: command-line flags override values
//! from `--config <toml>`, which override the `--preset` baseline. Commands
//! never mutate their inputs, and rerunning any command over the same inputs
//! and seed rewrites byte-identical output files.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::checkpoint::{load_model_dir, save_training_run, LoadedModel};
use crate::corpus::{
    encode_eval_records, generate_synthetic, load_tsv, load_tsv_lenient, pad_encode, tokenize,
    write_tsv, SplitRole, Tag,
};
use crate::evaluation::{format_report, score_labels};
use crate::models::{predict, Architecture, Prediction};
use crate::training::{gradient_check_run, train_pipeline, TrainConfig};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Filler words mixed into each generated sentence by `gen-data`.
const GEN_DATA_NOISE: usize = 4;

/// Maps every library error onto the documented exit code.
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::Data { .. } | Error::Io(_) | Error::Checkpoint(_) | Error::Shape { .. } => EXIT_DATA,
        Error::Config(_) | Error::VocabMismatch { .. } => EXIT_CONFIG,
        Error::Diverged { .. } | Error::NonFinite { .. } | Error::Numeric(_) => EXIT_NUMERIC,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "feedbacknet",
    version,
    about = "Neural customer-feedback classification: CNN and CNN+GRU sentence classifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a classifier and save the model directory.
    Train(TrainArgs),
    /// Score a saved model against a labeled test TSV.
    Evaluate(EvaluateArgs),
    /// Classify sentences with a saved model.
    Predict(PredictArgs),
    /// Generate a deterministic synthetic corpus as train/dev/test TSVs.
    #[command(name = "gen-data")]
    GenData(GenDataArgs),
    /// Verify analytic gradients against the finite-difference oracle.
    #[command(name = "grad-check")]
    GradCheck(GradCheckArgs),
}

fn parse_architecture(s: &str) -> std::result::Result<Architecture, String> {
    match s {
        "cnn" => Ok(Architecture::Cnn),
        "cnn_gru" => Ok(Architecture::CnnGru),
        other => Err(format!("unknown architecture {other:?}; use cnn or cnn_gru")),
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// TOML config file overlaid on the preset (or defaults).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Training TSV: `id<TAB>text<TAB>tag[,tag...]` per line.
    #[arg(long)]
    pub train: PathBuf,
    /// Development TSV scored after every epoch.
    #[arg(long)]
    pub dev: PathBuf,
    /// Output model directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Baseline configuration: en, es, fr, or jp.
    #[arg(long)]
    pub preset: Option<String>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config architecture.
    #[arg(long, value_parser = parse_architecture)]
    pub architecture: Option<Architecture>,
    /// Pretrained embedding file: `token v1 .. vk` per line.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Model directory written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled test TSV.
    #[arg(long)]
    pub test: PathBuf,
    /// Where to write the text report (also printed to stdout).
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model directory written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Sentence(s) to classify, one per line.
    #[arg(long, conflicts_with = "file")]
    pub text: Option<String>,
    /// File of sentences, one per line. Without --text or --file, stdin.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub seed: u64,
    /// Records generated per class before the 70/15/15 split.
    #[arg(long)]
    pub per_class: usize,
    /// Output directory for train.tsv, dev.tsv, and test.tsv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradCheckArgs {
    #[arg(long, value_parser = parse_architecture)]
    pub architecture: Architecture,
    #[arg(long)]
    pub seed: u64,
}

/// Parses argv and runs one command; returns the process exit code.
pub fn run_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Train(args) => run_train(&args),
        Command::Evaluate(args) => run_evaluate(&args),
        Command::Predict(args) => run_predict(&args),
        Command::GenData(args) => run_gen_data(&args),
        Command::GradCheck(args) => run_grad_check(&args),
    }
}

fn finish(result: Result<i32>) -> i32 {
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Builds the effective config: preset (or defaults), then the config file,
/// then individual flag overrides.
fn resolve_train_config(args: &TrainArgs) -> Result<TrainConfig> {
    let mut config = match &args.preset {
        Some(name) => TrainConfig::preset(name)?,
        None => TrainConfig::default(),
    };
    if let Some(path) = &args.config {
        config = overlay_config_file(&config, path)?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(architecture) = args.architecture {
        config.architecture = architecture;
    }
    config.validate()?;
    Ok(config)
}

/// Overlays only the keys present in the TOML file onto `base`, so a partial
/// config file refines a preset instead of resetting absent fields.
fn overlay_config_file(base: &TrainConfig, path: &Path) -> Result<TrainConfig> {
    let text = fs::read_to_string(path)?;
    let overlay: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut table = toml::Table::try_from(base)
        .map_err(|e| Error::Config(format!("config is not serializable: {e}")))?;
    for (key, value) in overlay {
        table.insert(key, value);
    }
    table
        .try_into()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn run_train(args: &TrainArgs) -> i32 {
    finish(train_command(args))
}

fn train_command(args: &TrainArgs) -> Result<i32> {
    let config = resolve_train_config(args)?;
    let train_split = load_tsv(&args.train, SplitRole::Train)?;
    let dev_split = load_tsv(&args.dev, SplitRole::Dev)?;
    let run = train_pipeline(
        &config,
        &train_split,
        &dev_split,
        args.embeddings.as_deref(),
        |report| {
            println!(
                "epoch {:>4}  loss {:.6}  train_acc {:.4}  dev_acc {:.4}  ({:.2}s)",
                report.epoch,
                report.mean_train_loss,
                report.train_accuracy,
                report.dev_accuracy,
                report.seconds
            );
        },
    )?;
    let manifest = save_training_run(&args.out, &run)?;
    println!(
        "best epoch {} with dev accuracy {:.4}; model saved to {}",
        manifest.best_epoch,
        manifest.best_dev_accuracy,
        args.out.display()
    );
    Ok(EXIT_OK)
}

pub fn run_evaluate(args: &EvaluateArgs) -> i32 {
    finish(evaluate_command(args))
}

fn evaluate_command(args: &EvaluateArgs) -> Result<i32> {
    let loaded = load_model_dir(&args.model)?;
    let split = load_tsv_lenient(&args.test, SplitRole::Test)?;
    let examples = encode_eval_records(
        &split.records,
        &loaded.vocab,
        loaded.manifest.config.tokenizer,
        loaded.manifest.max_len,
    );
    let mut labels = Vec::with_capacity(examples.len());
    let mut gold: Vec<BTreeSet<Tag>> = Vec::with_capacity(examples.len());
    for example in &examples {
        labels.push(predict(&loaded.model.infer(&example.indices))?.label);
        gold.push(example.gold.clone());
    }
    let report = score_labels(&labels, &gold)?;
    let text = format_report(&report);
    print!("{text}");
    fs::write(&args.report, text)?;
    Ok(EXIT_OK)
}

pub fn run_predict(args: &PredictArgs) -> i32 {
    finish(predict_command(args))
}

fn predict_command(args: &PredictArgs) -> Result<i32> {
    let loaded = load_model_dir(&args.model)?;
    let input = match (&args.text, &args.file) {
        (Some(text), None) => text.clone(),
        (None, Some(path)) => fs::read_to_string(path)?,
        (None, None) => std::io::read_to_string(std::io::stdin())?,
        (Some(_), Some(_)) => unreachable!("clap rejects --text with --file"),
    };
    for line in input.lines() {
        let prediction = predict_line(&loaded, line)?;
        println!("{}", format_prediction(&prediction));
    }
    Ok(EXIT_OK)
}

fn predict_line(loaded: &LoadedModel, line: &str) -> Result<Prediction> {
    let tokens = tokenize(line, loaded.manifest.config.tokenizer);
    let (indices, _) = pad_encode(&tokens, &loaded.vocab, loaded.manifest.max_len);
    predict(&loaded.model.infer(&indices))
}

/// `tag<TAB>confidence<TAB>tag=prob ...` with the full distribution in
/// canonical tag order.
fn format_prediction(prediction: &Prediction) -> String {
    let mut distribution = String::new();
    for (i, tag) in Tag::ALL.iter().enumerate() {
        if i > 0 {
            distribution.push(' ');
        }
        distribution.push_str(&format!("{tag}={:.4}", prediction.distribution.get(i)));
    }
    format!("{}\t{:.4}\t{}", prediction.label, prediction.confidence, distribution)
}

pub fn run_gen_data(args: &GenDataArgs) -> i32 {
    finish(gen_data_command(args))
}

fn gen_data_command(args: &GenDataArgs) -> Result<i32> {
    if args.per_class == 0 {
        return Err(Error::Config("--per-class must be at least 1".into()));
    }
    let data = generate_synthetic(args.seed, args.per_class, GEN_DATA_NOISE);
    fs::create_dir_all(&args.out)?;
    write_tsv(args.out.join("train.tsv"), &data.train)?;
    write_tsv(args.out.join("dev.tsv"), &data.dev)?;
    write_tsv(args.out.join("test.tsv"), &data.test)?;
    println!(
        "wrote {} train / {} dev / {} test records to {}",
        data.train.len(),
        data.dev.len(),
        data.test.len(),
        args.out.display()
    );
    Ok(EXIT_OK)
}

pub fn run_grad_check(args: &GradCheckArgs) -> i32 {
    finish(grad_check_command(args))
}

fn grad_check_command(args: &GradCheckArgs) -> Result<i32> {
    let report = gradient_check_run(args.architecture, args.seed)?;
    print!("{}", report.format_lines());
    Ok(if report.passed() { EXIT_OK } else { EXIT_NUMERIC })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tsv_file(dir: &Path, name: &str, lines: &[&str]) -> PathBuf {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        path
    }

    fn quick_train_args(dir: &Path) -> TrainArgs {
        let data = generate_synthetic(3, 8, 2);
        fs::create_dir_all(dir).unwrap();
        let train = dir.join("train.tsv");
        let dev = dir.join("dev.tsv");
        write_tsv(&train, &data.train).unwrap();
        write_tsv(&dev, &data.dev).unwrap();
        let config = TrainConfig {
            max_epochs: 3,
            batch_size: 4,
            embedding_dim: 8,
            filters: 3,
            region_sizes: vec![2, 3],
            keep_prob: 1.0,
            seed: 5,
            ..TrainConfig::default()
        };
        let config_path = dir.join("config.toml");
        fs::write(&config_path, config.to_toml_string()).unwrap();
        TrainArgs {
            config: Some(config_path),
            train,
            dev,
            out: dir.join("model"),
            preset: None,
            seed: None,
            architecture: None,
            embeddings: None,
        }
    }

    #[test]
    fn flags_override_file_overrides_preset() {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("config.toml");
        fs::write(&config_path, "batch_size = 16\nseed = 40\n").unwrap();

        let args = TrainArgs {
            config: Some(config_path),
            train: PathBuf::new(),
            dev: PathBuf::new(),
            out: PathBuf::new(),
            preset: Some("es".into()),
            seed: Some(99),
            architecture: Some(Architecture::Cnn),
            embeddings: None,
        };
        let config = resolve_train_config(&args).unwrap();
        // From the preset, untouched by file or flags.
        assert_eq!(config.max_epochs, 200);
        assert_eq!(config.max_len, Some(92));
        // File overrides preset; flags override the file.
        assert_eq!(config.batch_size, 16);
        assert_eq!(config.seed, 99);
        assert_eq!(config.architecture, Architecture::Cnn);
    }

    #[test]
    fn unknown_config_key_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("config.toml");
        fs::write(&config_path, "learning_rte = 0.1\n").unwrap();
        let args = TrainArgs {
            config: Some(config_path),
            train: PathBuf::new(),
            dev: PathBuf::new(),
            out: PathBuf::new(),
            preset: None,
            seed: None,
            architecture: None,
            embeddings: None,
        };
        let err = resolve_train_config(&args).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "got {err}");
        assert!(err.to_string().contains("learning_rte"), "{err}");
    }

    #[test]
    fn exit_codes_follow_the_documented_mapping() {
        let one = [
            Error::Data { path: "x".into(), line: 3, message: "bad".into() },
            Error::Io(std::io::Error::other("io")),
            Error::Checkpoint("corrupt".into()),
            Error::Shape { op: "score", left: "1".into(), right: "2".into() },
        ];
        let two = [
            Error::Config("bad".into()),
            Error::VocabMismatch { expected: "a".into(), actual: "b".into() },
        ];
        let three = [
            Error::Diverged { epoch: 0, batch: 1 },
            Error::NonFinite { context: "loss".into() },
            Error::Numeric("probability".into()),
        ];
        for e in &one {
            assert_eq!(exit_code_for(e), EXIT_DATA, "{e}");
        }
        for e in &two {
            assert_eq!(exit_code_for(e), EXIT_CONFIG, "{e}");
        }
        for e in &three {
            assert_eq!(exit_code_for(e), EXIT_NUMERIC, "{e}");
        }
    }

    #[test]
    fn train_then_evaluate_then_predict_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let args = quick_train_args(dir.path());
        assert_eq!(run_train(&args), EXIT_OK);
        for file in ["manifest.json", "model.bin", "final.bin", "vocab.txt", "history.jsonl"] {
            assert!(args.out.join(file).exists(), "missing {file}");
        }

        let report_path = dir.path().join("report.txt");
        let eval = EvaluateArgs {
            model: args.out.clone(),
            test: args.dev.clone(),
            report: report_path.clone(),
        };
        assert_eq!(run_evaluate(&eval), EXIT_OK);
        let report = fs::read_to_string(&report_path).unwrap();
        assert!(report.contains("exact_accuracy"), "{report}");
        for tag in Tag::ALL {
            assert!(report.contains(tag.name()), "missing {tag} row:\n{report}");
        }

        let predict_args = PredictArgs {
            model: args.out.clone(),
            text: Some("the app keeps crashing with an error".into()),
            file: None,
        };
        assert_eq!(run_predict(&predict_args), EXIT_OK);
    }

    #[test]
    fn prediction_lines_carry_tag_confidence_distribution() {
        let dir = tempfile::tempdir().unwrap();
        let args = quick_train_args(dir.path());
        assert_eq!(run_train(&args), EXIT_OK);
        let loaded = load_model_dir(&args.out).unwrap();

        let prediction = predict_line(&loaded, "crash error broken").unwrap();
        let line = format_prediction(&prediction);
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 3, "{line}");
        assert_eq!(fields[0], prediction.label.name());
        let confidence: f64 = fields[1].parse().unwrap();
        assert!(confidence > 0.0 && confidence < 1.0, "{line}");
        let pairs: Vec<&str> = fields[2].split(' ').collect();
        assert_eq!(pairs.len(), 6, "{line}");
        for (pair, tag) in pairs.iter().zip(Tag::ALL) {
            assert!(pair.starts_with(&format!("{tag}=")), "{line}");
        }

        // Inference is deterministic: same sentence, same line.
        let again = format_prediction(&predict_line(&loaded, "crash error broken").unwrap());
        assert_eq!(line, again);
    }

    #[test]
    fn unknown_tag_in_training_data_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let train = tsv_file(
            dir.path(),
            "train.tsv",
            &["1\tgood app\tcomment", "2\tbroken\tpraise"],
        );
        let dev = tsv_file(dir.path(), "dev.tsv", &["3\tfine\tcomment"]);
        let args = TrainArgs {
            config: None,
            train,
            dev,
            out: dir.path().join("model"),
            preset: None,
            seed: None,
            architecture: None,
            embeddings: None,
        };
        assert_eq!(run_train(&args), EXIT_DATA);
    }

    #[test]
    fn gen_data_reruns_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let out1 = dir.path().join("a");
        let out2 = dir.path().join("b");
        for out in [&out1, &out2] {
            let args = GenDataArgs { seed: 7, per_class: 10, out: out.clone() };
            assert_eq!(run_gen_data(&args), EXIT_OK);
        }
        for name in ["train.tsv", "dev.tsv", "test.tsv"] {
            let a = fs::read(out1.join(name)).unwrap();
            let b = fs::read(out2.join(name)).unwrap();
            assert!(!a.is_empty());
            assert_eq!(a, b, "{name} differs across reruns");
        }
    }

    #[test]
    fn gen_data_splits_follow_70_15_15() {
        let dir = tempfile::tempdir().unwrap();
        let args = GenDataArgs { seed: 11, per_class: 20, out: dir.path().to_path_buf() };
        assert_eq!(run_gen_data(&args), EXIT_OK);
        let train = load_tsv(dir.path().join("train.tsv"), SplitRole::Train).unwrap();
        let dev = load_tsv(dir.path().join("dev.tsv"), SplitRole::Dev).unwrap();
        let test = load_tsv(dir.path().join("test.tsv"), SplitRole::Test).unwrap();
        assert_eq!((train.len(), dev.len(), test.len()), (84, 18, 18));
    }

    #[test]
    fn corrupted_checkpoint_fails_evaluate_with_exit_1() {
        let dir = tempfile::tempdir().unwrap();
        let args = quick_train_args(dir.path());
        assert_eq!(run_train(&args), EXIT_OK);

        let model_bin = args.out.join("model.bin");
        let mut bytes = fs::read(&model_bin).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x01;
        fs::write(&model_bin, bytes).unwrap();

        let eval = EvaluateArgs {
            model: args.out.clone(),
            test: args.dev.clone(),
            report: dir.path().join("report.txt"),
        };
        assert_eq!(run_evaluate(&eval), EXIT_DATA);
    }

    #[test]
    fn edited_vocabulary_fails_evaluate_with_exit_2() {
        let dir = tempfile::tempdir().unwrap();
        let args = quick_train_args(dir.path());
        assert_eq!(run_train(&args), EXIT_OK);

        let vocab_path = args.out.join("vocab.txt");
        let mut text = fs::read_to_string(&vocab_path).unwrap();
        text.push_str("stowaway\n");
        fs::write(&vocab_path, text).unwrap();

        let eval = EvaluateArgs {
            model: args.out.clone(),
            test: args.dev.clone(),
            report: dir.path().join("report.txt"),
        };
        assert_eq!(run_evaluate(&eval), EXIT_CONFIG);
    }

    #[test]
    fn architecture_flag_is_recorded_in_the_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut args = quick_train_args(dir.path());
        args.architecture = Some(Architecture::CnnGru);
        let mut config = TrainConfig::load(args.config.as_ref().unwrap()).unwrap();
        config.gru_hidden = 4;
        fs::write(args.config.as_ref().unwrap(), config.to_toml_string()).unwrap();

        assert_eq!(run_train(&args), EXIT_OK);
        let loaded = load_model_dir(&args.out).unwrap();
        assert_eq!(loaded.manifest.architecture, Architecture::CnnGru);
        assert_eq!(loaded.model.architecture(), Architecture::CnnGru);
    }

    #[test]
    fn argv_parsing_reaches_the_command() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("data");
        let code = run_args([
            "feedbacknet",
            "gen-data",
            "--seed",
            "3",
            "--per-class",
            "5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.join("train.tsv").exists());

        // Unknown flags are rejected by the parser, not silently ignored.
        assert_ne!(run_args(["feedbacknet", "gen-data", "--bogus", "1"]), EXIT_OK);
    }

    #[test]
    fn missing_model_directory_is_exit_1() {
        let dir = tempfile::tempdir().unwrap();
        let eval = EvaluateArgs {
            model: dir.path().join("nope"),
            test: dir.path().join("also-nope.tsv"),
            report: dir.path().join("report.txt"),
        };
        assert_eq!(run_evaluate(&eval), EXIT_DATA);
    }
}
