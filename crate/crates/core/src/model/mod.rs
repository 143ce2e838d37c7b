//! The hierarchical network: parameters, layer kernels, forward and
//! hand-derived backward passes, and model files.

mod attention;
mod checkpoint;
mod config;
mod conv;
mod lstm;
mod network;
mod params;
mod pretrained;

pub use attention::{attend, classify, AttentionTrace};
pub use checkpoint::{
    load_model, model_from_bytes, model_to_bytes, save_model, LoadedModel, ModelMeta, MODEL_MAGIC,
};
pub(crate) use checkpoint::write_atomic;
pub use config::{EncoderKind, Hyperparams, ModelMode, Representation};
pub use lstm::{lstm_forward, LstmTrace};
pub use network::{
    embed_sentence, encode_segment, encode_sentence_cnn, encode_sentence_lstm, sentence_ids,
    ForwardCache, SyntacticModel, INIT_STREAM, PROB_FLOOR,
};
pub use params::{
    glorot, AttentionParams, BlockKind, ClassifierParams, ConvBank, ConvLayer, LstmParams, Params,
    SentenceEncoder,
};
pub use pretrained::{load_pretrained_embeddings, read_pretrained_embeddings, WordEmbeddings};
