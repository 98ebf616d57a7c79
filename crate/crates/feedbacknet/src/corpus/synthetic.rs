//! Synthetic keyword-separable corpus for tests, demos, and benchmarks.
//!
//! Each class owns five keywords no other class (and no filler) uses, so a
//! bag-of-keywords rule labels every generated sentence perfectly. Models
//! that cannot reach high accuracy here are broken, not unlucky.

use crate::corpus::records::{DatasetSplit, FeedbackRecord, SplitRole, Tag};
use crate::corpus::tokenize::{tokenize, TokenizerMode};
use crate::numerics::Rng;

const KEYWORDS: [[&str; 5]; 6] = [
    ["overall", "experience", "visited", "browsing", "noticed"],
    ["slow", "annoying", "terrible", "frustrating", "unhappy"],
    ["please", "add", "wish", "want", "hopefully"],
    ["crash", "error", "freeze", "broken", "glitch"],
    ["asdf", "qwerty", "zzz", "blah", "lorem"],
    ["maybe", "unclear", "somehow", "unsure", "ambiguous"],
];

const FILLERS: [&str; 16] = [
    "the", "app", "it", "this", "is", "was", "and", "to", "a", "of", "in", "on", "for", "with",
    "that", "my",
];

/// The five keywords reserved for `tag`.
pub fn class_keywords(tag: Tag) -> &'static [&'static str] {
    &KEYWORDS[tag.index()]
}

/// Train, dev, and test splits produced by [`generate_synthetic`].
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub train: DatasetSplit,
    pub dev: DatasetSplit,
    pub test: DatasetSplit,
}

impl SyntheticDataset {
    pub fn splits(&self) -> [&DatasetSplit; 3] {
        [&self.train, &self.dev, &self.test]
    }
}

/// Generates `n_per_class` single-tag records per class, each sentence
/// holding 1 to 3 of its class keywords plus `vocab_noise` shared filler
/// words, shuffled. Records split 70/15/15 per class. Identical seeds give
/// identical datasets.
pub fn generate_synthetic(seed: u64, n_per_class: usize, vocab_noise: usize) -> SyntheticDataset {
    assert!(n_per_class > 0, "n_per_class must be positive");
    let mut rng = Rng::new(seed);

    let mut train = Vec::new();
    let mut dev = Vec::new();
    let mut test = Vec::new();
    for tag in Tag::ALL {
        let mut class_records = Vec::with_capacity(n_per_class);
        for i in 0..n_per_class {
            let text = synth_sentence(tag, vocab_noise, &mut rng);
            let id = format!("{}-{i:04}", tag.name());
            class_records.push(FeedbackRecord::new(id, text, &[tag]));
        }
        let n_train = n_per_class * 70 / 100;
        let n_dev = n_per_class * 15 / 100;
        let rest = class_records.split_off(n_train);
        let (dev_part, test_part) = rest.split_at(n_dev);
        train.extend(class_records);
        dev.extend(dev_part.iter().cloned());
        test.extend(test_part.iter().cloned());
    }

    SyntheticDataset {
        train: DatasetSplit { role: SplitRole::Train, records: train },
        dev: DatasetSplit { role: SplitRole::Dev, records: dev },
        test: DatasetSplit { role: SplitRole::Test, records: test },
    }
}

fn synth_sentence(tag: Tag, vocab_noise: usize, rng: &mut Rng) -> String {
    let lexicon = class_keywords(tag);
    let n_keywords = 1 + rng.below(3);
    let mut words: Vec<&str> = Vec::with_capacity(n_keywords + vocab_noise);
    for _ in 0..n_keywords {
        words.push(lexicon[rng.below(lexicon.len())]);
    }
    for _ in 0..vocab_noise {
        words.push(FILLERS[rng.below(FILLERS.len())]);
    }
    rng.shuffle(&mut words);
    words.join(" ")
}

/// Labels `text` by counting class keywords; the class with the most hits
/// wins. Returns `None` on zero hits or ties, which generated sentences
/// never produce.
pub fn keyword_rule_label(text: &str) -> Option<Tag> {
    let tokens = tokenize(text, TokenizerMode::Word);
    let mut hits = [0usize; 6];
    for token in &tokens {
        for tag in Tag::ALL {
            if class_keywords(tag).contains(&token.as_str()) {
                hits[tag.index()] += 1;
            }
        }
    }
    let best = *hits.iter().max().expect("six classes");
    if best == 0 {
        return None;
    }
    let mut winners = hits.iter().enumerate().filter(|&(_, &h)| h == best);
    let (index, _) = winners.next().expect("max exists");
    if winners.next().is_some() {
        return None;
    }
    Tag::from_index(index)
}
