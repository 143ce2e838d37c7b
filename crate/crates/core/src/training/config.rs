use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::loss::Penalty;
use super::nadam::NadamHyper;

mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(v.unwrap_or(f64::INFINITY))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.filter(|&c| c != f64::INFINITY))
    }
}

/// Optimization settings for [`fit`](super::fit).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Weight of the parameter penalty (`λ`).
    pub lambda: f64,
    pub penalty: Penalty,
    /// Global gradient-norm ceiling; `None` disables clipping. Written as
    /// `inf` so that a disabled ceiling survives a round trip.
    #[serde(with = "unbounded")]
    pub clip_norm: Option<f64>,
    pub seed: u64,
    pub validation_fraction: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 32,
            learning_rate: 0.002,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            lambda: 1e-4,
            penalty: Penalty::SquaredL2,
            clip_norm: Some(5.0),
            seed: 0,
            validation_fraction: 0.1,
        }
    }
}

impl TrainingConfig {
    pub fn nadam(&self) -> NadamHyper {
        NadamHyper {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.epsilon > 0.0 && self.lambda >= 0.0) {
            return bad("learning rate and epsilon must be positive, lambda non-negative");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Nadam betas must lie in [0, 1)");
        }
        if self.clip_norm.is_some_and(|c| c <= 0.0 || c.is_nan()) {
            return bad("clip norm must be positive");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad("validation fraction must lie in (0, 1)");
        }
        Ok(())
    }
}
