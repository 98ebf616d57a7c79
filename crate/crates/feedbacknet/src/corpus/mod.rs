//! Data pipeline: records and tags, tokenization, vocabulary and padding,
//! embedding tables, and the synthetic benchmark corpus.

mod embeddings;
mod records;
mod synthetic;
mod tokenize;
mod vocab;

pub use embeddings::{load_embeddings, EmbeddingTable, EMBEDDING_INIT_SCALE};
pub use records::{
    expand_multilabel, load_tsv, load_tsv_lenient, write_tsv, DatasetSplit, FeedbackRecord,
    SplitRole, Tag, TAG_COUNT,
};
pub use synthetic::{class_keywords, generate_synthetic, keyword_rule_label, SyntheticDataset};
pub use tokenize::{tokenize, TokenizerMode};
pub use vocab::{
    build_vocabulary, encode_eval_records, encode_records, max_token_length, pad_encode,
    EncodedExample, EvalExample, Vocabulary,
    PAD_INDEX, PAD_TOKEN, UNK_INDEX, UNK_TOKEN,
};
