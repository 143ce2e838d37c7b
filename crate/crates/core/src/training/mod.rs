//! Objective, optimizer and the training loop.

mod config;
mod loss;
mod nadam;
mod trainer;

pub use config::TrainingConfig;
pub use loss::{
    add_penalty_gradient, clip_global_norm, cross_entropy, mean_cross_entropy, penalized_values,
    penalty_value, regularized_loss, Penalty,
};
pub use nadam::{nadam_step, NadamHyper, NadamState};
pub use trainer::{
    argmax, evaluate, DivergenceGuard, fit, fit_from, history_csv, EpochRecord, Evaluation, FitOutcome, Trainer,
    CHUNK, DIVERGENCE_FACTOR, DIVERGENCE_PATIENCE, SHUFFLE_STREAM,
};
