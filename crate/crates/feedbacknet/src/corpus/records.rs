//! Feedback records, the closed six-tag set, TSV loading, and multi-label
//! replication.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of feedback classes.
pub const TAG_COUNT: usize = 6;

/// The six feedback classes, in canonical index order. The order is fixed
/// so label indices stay stable across runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Comment = 0,
    Complaint = 1,
    Request = 2,
    Bug = 3,
    Meaningless = 4,
    Undetermined = 5,
}

impl Tag {
    pub const ALL: [Tag; TAG_COUNT] = [
        Tag::Comment,
        Tag::Complaint,
        Tag::Request,
        Tag::Bug,
        Tag::Meaningless,
        Tag::Undetermined,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Tag> {
        Tag::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Tag::Comment => "comment",
            Tag::Complaint => "complaint",
            Tag::Request => "request",
            Tag::Bug => "bug",
            Tag::Meaningless => "meaningless",
            Tag::Undetermined => "undetermined",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // pad, not write_str, so width/alignment specifiers work in tables.
        f.pad(self.name())
    }
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Tag, String> {
        match s {
            "comment" => Ok(Tag::Comment),
            "complaint" => Ok(Tag::Complaint),
            "request" => Ok(Tag::Request),
            "bug" => Ok(Tag::Bug),
            "meaningless" => Ok(Tag::Meaningless),
            "undetermined" => Ok(Tag::Undetermined),
            other => Err(format!("unknown tag {other:?}")),
        }
    }
}

/// One customer feedback sentence with one or more gold tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackRecord {
    pub id: String,
    pub text: String,
    pub tags: BTreeSet<Tag>,
}

impl FeedbackRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>, tags: &[Tag]) -> Self {
        FeedbackRecord {
            id: id.into(),
            text: text.into(),
            tags: tags.iter().copied().collect(),
        }
    }
}

/// Which split a set of records belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitRole {
    Train,
    Dev,
    Test,
}

impl fmt::Display for SplitRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            SplitRole::Train => "train",
            SplitRole::Dev => "dev",
            SplitRole::Test => "test",
        })
    }
}

/// A loaded dataset split. Record ids are unique within a split.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub role: SplitRole,
    pub records: Vec<FeedbackRecord>,
}

impl DatasetSplit {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Loads a dataset TSV: one `id<TAB>text<TAB>tag[,tag...]` record per line,
/// UTF-8, no header. Empty text is rejected; use [`load_tsv_lenient`] for
/// test-time data that must never crash inference.
pub fn load_tsv(path: impl AsRef<Path>, role: SplitRole) -> Result<DatasetSplit> {
    load_tsv_impl(path.as_ref(), role, false)
}

/// Like [`load_tsv`], but permits records with empty text.
pub fn load_tsv_lenient(path: impl AsRef<Path>, role: SplitRole) -> Result<DatasetSplit> {
    load_tsv_impl(path.as_ref(), role, true)
}

fn load_tsv_impl(path: &Path, role: SplitRole, lenient: bool) -> Result<DatasetSplit> {
    let content = fs::read_to_string(path)?;
    let mut records = Vec::new();
    let mut seen_ids = BTreeSet::new();
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::data(
                path,
                line_no,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let (id, text, tag_cell) = (fields[0], fields[1], fields[2]);
        if id.is_empty() {
            return Err(Error::data(path, line_no, "empty id"));
        }
        if !seen_ids.insert(id.to_string()) {
            return Err(Error::data(path, line_no, format!("duplicate id {id:?}")));
        }
        if text.is_empty() && !lenient {
            return Err(Error::data(path, line_no, "empty text"));
        }
        let mut tags = BTreeSet::new();
        for raw in tag_cell.split(',') {
            let token = raw.trim();
            if token.is_empty() {
                return Err(Error::data(path, line_no, "empty tag in tag cell"));
            }
            let tag = Tag::from_str(token).map_err(|e| Error::data(path, line_no, e))?;
            tags.insert(tag);
        }
        if tags.is_empty() {
            return Err(Error::data(path, line_no, "record has no tags"));
        }
        records.push(FeedbackRecord {
            id: id.to_string(),
            text: text.to_string(),
            tags,
        });
    }
    Ok(DatasetSplit { role, records })
}

/// Replicates each multi-tag record into one single-tag copy per tag.
///
/// Output keeps the input record order; within a record the copies follow
/// the canonical tag order. Ids and text are carried over unchanged.
pub fn expand_multilabel(records: &[FeedbackRecord]) -> Result<Vec<FeedbackRecord>> {
    let mut out = Vec::with_capacity(records.len());
    for record in records {
        if record.tags.is_empty() {
            return Err(Error::Config(format!(
                "record {:?} has an empty tag set",
                record.id
            )));
        }
        // BTreeSet iterates in Tag's canonical order.
        for &tag in &record.tags {
            out.push(FeedbackRecord {
                id: record.id.clone(),
                text: record.text.clone(),
                tags: [tag].into_iter().collect(),
            });
        }
    }
    Ok(out)
}

/// Writes a split in the TSV format [`load_tsv`] reads: one
/// `id<TAB>text<TAB>tag[,tag...]` line per record, `\n` endings.
pub fn write_tsv(path: impl AsRef<Path>, split: &DatasetSplit) -> Result<()> {
    let mut out = String::new();
    for record in &split.records {
        let tags: Vec<&str> = record.tags.iter().map(|t| t.name()).collect();
        out.push_str(&record.id);
        out.push('\t');
        out.push_str(&record.text);
        out.push('\t');
        out.push_str(&tags.join(","));
        out.push('\n');
    }
    fs::write(path.as_ref(), out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tsv_file(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        f
    }

    #[test]
    fn canonical_tag_order() {
        let names: Vec<&str> = Tag::ALL.iter().map(|t| t.name()).collect();
        assert_eq!(
            names,
            ["comment", "complaint", "request", "bug", "meaningless", "undetermined"]
        );
        for (i, tag) in Tag::ALL.iter().enumerate() {
            assert_eq!(tag.index(), i);
            assert_eq!(Tag::from_index(i), Some(*tag));
        }
        assert_eq!(Tag::from_index(6), None);
    }

    #[test]
    fn loads_single_and_multi_tag_lines() {
        let f = tsv_file(&[
            "7\tSaw advertisements through an Internet travel booking site.\tcomment",
            "8\tthe overlay keeps vanishing mid edit\tbug,comment",
            "9\tplease add an export button\tbug, comment",
        ]);
        let split = load_tsv(f.path(), SplitRole::Train).unwrap();
        assert_eq!(split.len(), 3);
        assert_eq!(
            split.records[0].tags,
            [Tag::Comment].into_iter().collect()
        );
        let both: BTreeSet<Tag> = [Tag::Bug, Tag::Comment].into_iter().collect();
        assert_eq!(split.records[1].tags, both);
        // Whitespace after the comma is tolerated.
        assert_eq!(split.records[2].tags, both);
    }

    #[test]
    fn rejects_unknown_tag_with_line_number() {
        let f = tsv_file(&["1\tok text\tcomment", "2\tbad\tpraise"]);
        let err = load_tsv(f.path(), SplitRole::Train).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":2:") && msg.contains("praise"), "{msg}");
    }

    #[test]
    fn rejects_duplicate_id() {
        let f = tsv_file(&["1\ta\tcomment", "1\tb\tbug"]);
        let err = load_tsv(f.path(), SplitRole::Train).unwrap_err();
        assert!(err.to_string().contains("duplicate id"), "{err}");
    }

    #[test]
    fn empty_text_needs_lenient_flag() {
        let f = tsv_file(&["1\t\tcomment"]);
        assert!(load_tsv(f.path(), SplitRole::Test).is_err());
        let split = load_tsv_lenient(f.path(), SplitRole::Test).unwrap();
        assert_eq!(split.records[0].text, "");
    }

    #[test]
    fn expand_replicates_in_canonical_order() {
        let record = FeedbackRecord::new("x", "t", &[Tag::Bug, Tag::Comment]);
        let out = expand_multilabel(&[record]).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].tags, [Tag::Comment].into_iter().collect());
        assert_eq!(out[1].tags, [Tag::Bug].into_iter().collect());
        assert!(out.iter().all(|r| r.id == "x" && r.text == "t"));
    }

    #[test]
    fn expand_keeps_single_tag_records() {
        let record = FeedbackRecord::new("y", "t", &[Tag::Request]);
        let out = expand_multilabel(std::slice::from_ref(&record)).unwrap();
        assert_eq!(out, vec![record]);
    }

    #[test]
    fn expand_output_count_is_total_tag_count() {
        let records = vec![
            FeedbackRecord::new("a", "1", &[Tag::Comment]),
            FeedbackRecord::new("b", "2", &[Tag::Bug, Tag::Request]),
            FeedbackRecord::new("c", "3", &[Tag::Comment, Tag::Complaint, Tag::Meaningless]),
        ];
        let out = expand_multilabel(&records).unwrap();
        assert_eq!(out.len(), 6);
        assert!(out.iter().all(|r| r.tags.len() == 1));
    }

    #[test]
    fn write_tsv_round_trips_through_load_tsv() {
        let split = DatasetSplit {
            role: SplitRole::Dev,
            records: vec![
                FeedbackRecord::new("a", "the app keeps crashing", &[Tag::Bug, Tag::Complaint]),
                FeedbackRecord::new("b", "nice layout", &[Tag::Comment]),
            ],
        };
        let f = tempfile::NamedTempFile::new().unwrap();
        write_tsv(f.path(), &split).unwrap();

        let text = std::fs::read_to_string(f.path()).unwrap();
        assert_eq!(text, "a\tthe app keeps crashing\tcomplaint,bug\nb\tnice layout\tcomment\n");

        let loaded = load_tsv(f.path(), SplitRole::Dev).unwrap();
        assert_eq!(loaded.records, split.records);
    }
}
