//! Count-based baselines: n-gram features with a linear SVM.

mod ngram;
mod svm;

pub use ngram::{
    extract_ngrams, segment_symbols, NgramConfig, NgramKind, NgramVocabulary, SparseVector, BOUNDARY,
};
pub use svm::{predict_svm, train_svm_ovr, LinearSvm, NgramSvm, SvmConfig, SVM_MAGIC};
