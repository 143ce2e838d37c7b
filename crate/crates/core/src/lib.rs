//! Syntactic stylometry toolkit.
//!
//! Documents are tagged with parts of speech, windowed into segments of `M`
//! sentences of `N` tags, and classified among a closed set of authors by a
//! hierarchical network: a per-sentence encoder (convolutional or
//! bidirectional LSTM) over tag embeddings, a bidirectional LSTM over
//! sentence vectors, attention pooling and a softmax classifier. Count-based
//! n-gram SVM baselines and the evaluation harness live alongside.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root pick the two concrete widths.

pub mod baselines;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod numkernel;
pub mod pipeline;
pub mod scalar;
pub mod synth;
pub mod tagger;
pub mod training;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix32 = numkernel::Matrix<f32>;
pub type Matrix64 = numkernel::Matrix<f64>;

pub type Model32 = model::SyntacticModel<f32>;
pub type Model64 = model::SyntacticModel<f64>;
