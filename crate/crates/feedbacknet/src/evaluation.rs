//! Scoring predictions against multi-label gold tag sets.
//!
//! A prediction is exact-correct when the predicted tag is a member of the
//! example's gold set. Per-tag counts follow one rule: the predicted tag
//! contributes a true positive (in gold) or false positive (not in gold),
//! and every gold tag other than the predicted one contributes a false
//! negative for that tag. Ratios with a zero denominator are reported as a
//! `-1` sentinel rather than being dropped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::corpus::{Tag, TAG_COUNT};
use crate::models::Prediction;
use crate::{Error, Result};

/// Sentinel reported for ratios whose denominator is zero.
pub const UNDEFINED_METRIC: f64 = -1.0;

/// Precision/recall/F1 and raw confusion counts for one tag.
///
/// `precision` is `-1` when the tag was never predicted. `recall` is `-1`
/// only when the tag never occurs in gold; an unpredicted tag that does
/// occur in gold has recall `0`. `f1` is `-1` whenever either ratio is
/// undefined or both are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TagMetrics {
    pub tag: Tag,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl TagMetrics {
    /// Derives the three ratios from raw counts, applying the sentinel rules.
    pub fn from_counts(tag: Tag, tp: usize, fp: usize, fn_count: usize) -> TagMetrics {
        let precision = if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else {
            UNDEFINED_METRIC
        };
        let recall = if tp + fn_count > 0 {
            tp as f64 / (tp + fn_count) as f64
        } else {
            UNDEFINED_METRIC
        };
        let f1 = if precision < 0.0 || recall < 0.0 || precision + recall == 0.0 {
            UNDEFINED_METRIC
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        TagMetrics {
            tag,
            precision,
            recall,
            f1,
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_count,
        }
    }
}

/// Full scoring result: one row per tag in canonical order plus exact
/// accuracy over the original (never expanded) example count.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_tag: Vec<TagMetrics>,
    pub exact_accuracy: f64,
    pub n_examples: usize,
}

impl EvalReport {
    fn from_counts(counts: &[(usize, usize, usize); TAG_COUNT], n_examples: usize) -> EvalReport {
        let per_tag = Tag::ALL
            .iter()
            .map(|&tag| {
                let (tp, fp, fn_count) = counts[tag.index()];
                TagMetrics::from_counts(tag, tp, fp, fn_count)
            })
            .collect::<Vec<_>>();
        let correct: usize = per_tag.iter().map(|m| m.true_positives).sum();
        let exact_accuracy = if n_examples > 0 {
            correct as f64 / n_examples as f64
        } else {
            0.0
        };
        EvalReport {
            per_tag,
            exact_accuracy,
            n_examples,
        }
    }

    /// Metrics row for one tag.
    pub fn for_tag(&self, tag: Tag) -> &TagMetrics {
        &self.per_tag[tag.index()]
    }
}

/// Scores predicted labels against gold tag sets.
///
/// Gold sets must be non-empty; membership in the gold set counts as an
/// exact-accuracy hit.
pub fn score_labels(predicted: &[Tag], gold: &[BTreeSet<Tag>]) -> Result<EvalReport> {
    if predicted.len() != gold.len() {
        return Err(Error::Shape {
            op: "score",
            left: format!("{} predictions", predicted.len()),
            right: format!("{} gold sets", gold.len()),
        });
    }
    let mut counts = [(0usize, 0usize, 0usize); TAG_COUNT];
    for (&label, gold_set) in predicted.iter().zip(gold) {
        assert!(!gold_set.is_empty(), "gold tag set must be non-empty");
        if gold_set.contains(&label) {
            counts[label.index()].0 += 1;
        } else {
            counts[label.index()].1 += 1;
        }
        for &gold_tag in gold_set {
            if gold_tag != label {
                counts[gold_tag.index()].2 += 1;
            }
        }
    }
    Ok(EvalReport::from_counts(&counts, predicted.len()))
}

/// Scores full predictions (only the argmax label participates).
pub fn score(predictions: &[Prediction], gold: &[BTreeSet<Tag>]) -> Result<EvalReport> {
    let labels = predictions.iter().map(|p| p.label).collect::<Vec<_>>();
    score_labels(&labels, gold)
}

fn metric_cell(value: f64) -> String {
    if value < 0.0 {
        "-1".to_string()
    } else {
        format!("{value:.4}")
    }
}

/// Renders the report as an aligned text table.
///
/// One row per tag in canonical order with precision/recall/F1 and raw
/// counts, then an `exact_accuracy` line (4 decimals) and an `n_examples`
/// line. Sentinels print as a bare `-1`.
pub fn format_report(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<13} {:>9} {:>9} {:>9} {:>5} {:>5} {:>5}",
        "tag", "precision", "recall", "f1", "tp", "fp", "fn"
    );
    for row in &report.per_tag {
        let _ = writeln!(
            out,
            "{:<13} {:>9} {:>9} {:>9} {:>5} {:>5} {:>5}",
            row.tag,
            metric_cell(row.precision),
            metric_cell(row.recall),
            metric_cell(row.f1),
            row.true_positives,
            row.false_positives,
            row.false_negatives
        );
    }
    let _ = writeln!(out, "exact_accuracy {:.4}", report.exact_accuracy);
    let _ = writeln!(out, "n_examples {}", report.n_examples);
    out
}

/// Flattens the report to one numeric value per key, e.g. `bug.precision`.
///
/// This flat form is the machine-readable contract; the text table is for
/// humans.
pub fn report_record(report: &EvalReport) -> BTreeMap<String, f64> {
    let mut record = BTreeMap::new();
    record.insert("exact_accuracy".to_string(), report.exact_accuracy);
    record.insert("n_examples".to_string(), report.n_examples as f64);
    for row in &report.per_tag {
        record.insert(format!("{}.precision", row.tag), row.precision);
        record.insert(format!("{}.recall", row.tag), row.recall);
        record.insert(format!("{}.f1", row.tag), row.f1);
        record.insert(format!("{}.tp", row.tag), row.true_positives as f64);
        record.insert(format!("{}.fp", row.tag), row.false_positives as f64);
        record.insert(format!("{}.fn", row.tag), row.false_negatives as f64);
    }
    record
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Data {
        path: "<report>".into(),
        line,
        message: message.into(),
    }
}

/// Parses a table produced by [`format_report`] back into a report.
///
/// Ratios are recomputed from the integer counts, so the round trip is
/// exact despite the 4-decimal rendering.
pub fn parse_report(text: &str) -> Result<EvalReport> {
    let mut counts = [None; TAG_COUNT];
    let mut n_examples = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let fields = raw.split_whitespace().collect::<Vec<_>>();
        match fields.as_slice() {
            [] | ["tag", ..] => {}
            ["exact_accuracy", _] => {}
            ["n_examples", value] => {
                let parsed = value
                    .parse::<usize>()
                    .map_err(|_| parse_error(line_no, format!("bad example count {value:?}")))?;
                n_examples = Some(parsed);
            }
            [name, _, _, _, tp, fp, fn_count] => {
                let tag = name
                    .parse::<Tag>()
                    .map_err(|e| parse_error(line_no, e.to_string()))?;
                let parse_count = |text: &str| {
                    text.parse::<usize>()
                        .map_err(|_| parse_error(line_no, format!("bad count {text:?}")))
                };
                counts[tag.index()] = Some((parse_count(tp)?, parse_count(fp)?, parse_count(fn_count)?));
            }
            _ => return Err(parse_error(line_no, format!("unrecognized report line {raw:?}"))),
        }
    }
    let n_examples = n_examples.ok_or_else(|| parse_error(0, "missing n_examples line"))?;
    let mut table = [(0, 0, 0); TAG_COUNT];
    for (i, entry) in counts.iter().enumerate() {
        table[i] = entry.ok_or_else(|| {
            parse_error(0, format!("missing row for tag {}", Tag::ALL[i]))
        })?;
    }
    Ok(EvalReport::from_counts(&table, n_examples))
}
