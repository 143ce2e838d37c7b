//! End-to-end runs: configuration, ingestion and the train, evaluate,
//! baseline, sweep and ablation drivers behind the command line.

mod config;
mod data;
mod run;

pub use config::{BaselineConfig, ModelConfig, Precision, RunConfig};
pub use data::{
    load_tagged, prepare, prepare_from, resolve_tagger, segment_corpus, tag_corpus, tokenize_corpus,
    PreparedData, TaggedDocument,
};
pub use run::{
    ablate_run, baseline_prepared, baseline_run, eval_run, export_attention_run, stats_run, sweep_run,
    tag_run, train_prepared, train_run, write_report, SweepGrid, SweepRow, TrainSummary, EMBEDDING_STREAM,
};
