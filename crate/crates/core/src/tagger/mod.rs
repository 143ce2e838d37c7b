//! Part-of-speech inventory, tagged sentences, and the two ways of getting
//! tags: a trainable averaged-perceptron tagger or pretagged input.

pub mod fixture;
mod perceptron;
mod pretagged;
mod sentence;
mod tagset;

pub use fixture::{fixture_tagger, tagged_fixture};
pub use perceptron::{train_tagger, PerceptronTagger, TAGGER_MAGIC};
pub use pretagged::{load_pretagged, parse_pretagged, to_pretagged, Pretagged};
pub use sentence::{pad_or_truncate, TaggedSentence, WORD_PAD, WORD_UNK};
pub use tagset::{TagSet, NUM_REAL_TAGS, PAD, TAGS, TAG_VOCAB, UNK};
