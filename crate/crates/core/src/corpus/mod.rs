//! Raw text ingestion: sentence splitting, tokenization, segmentation into
//! fixed-size windows, corpus statistics and dataset splits.

mod document;
mod sentences;
mod split;
mod tokenize;

pub use document::{
    compute_corpus_stats, load_corpus_dir, load_corpus_dir_with_authors, segment_document,
    AuthorStats, Corpus, CorpusStats, RawDocument, Segment,
};
pub use sentences::split_sentences;
pub use split::{split_train_validation, DatasetSplit, Vocabulary};
pub use tokenize::{tokenize, TokenizedSentence};

/// Word vocabulary cap for lexical models.
pub const MAX_VOCABULARY: usize = 50_000;
