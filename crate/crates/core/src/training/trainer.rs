//! Minibatch training with validation-based model selection.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Segment;
use crate::error::{Error, Result};
use crate::model::{model_from_bytes, model_to_bytes, write_atomic, ModelMeta, Params, SyntacticModel};
use crate::numkernel::{Rng, RngState};
use crate::scalar::Scalar;

use super::config::TrainingConfig;
use super::loss::{add_penalty_gradient, clip_global_norm, cross_entropy};
use super::nadam::{nadam_step, NadamState};

/// Segments per gradient work item. Work items are reduced in index order,
/// so results do not depend on the number of threads.
pub const CHUNK: usize = 4;

/// Stream of the run seed used for the per-epoch shuffle.
pub const SHUFFLE_STREAM: u64 = 2;

/// Divergence: training loss above this multiple of the first epoch's ...
pub const DIVERGENCE_FACTOR: f64 = 10.0;
/// ... for this many consecutive epochs.
pub const DIVERGENCE_PATIENCE: usize = 3;

/// Tracks per-epoch training loss against the first epoch's.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DivergenceGuard {
    pub initial: Option<f64>,
    pub strikes: usize,
}

impl DivergenceGuard {
    pub fn observe(&mut self, epoch: usize, loss: f64) -> Result<()> {
        let initial = *self.initial.get_or_insert(loss);
        if !loss.is_finite() || loss > DIVERGENCE_FACTOR * initial {
            self.strikes += 1;
            if self.strikes >= DIVERGENCE_PATIENCE {
                return Err(Error::Diverged { epoch, loss, initial });
            }
        } else {
            self.strikes = 0;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
    pub seconds: f64,
}

/// `epoch,train_loss,train_acc,val_loss,val_acc,seconds`
pub fn history_csv(history: &[EpochRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in history {
        w.serialize(r)?;
    }
    if history.is_empty() {
        w.write_record(["epoch", "train_loss", "train_acc", "val_loss", "val_acc", "seconds"])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

/// Predictions over a list of segments.
#[derive(Clone, Debug)]
pub struct Evaluation<T> {
    /// Mean cross-entropy (no penalty).
    pub loss: f64,
    pub accuracy: f64,
    pub probs: Vec<Vec<T>>,
    pub alphas: Vec<Vec<T>>,
}

pub fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Forward passes over `segments` (in parallel, order preserved).
pub fn evaluate<T: Scalar>(model: &SyntacticModel<T>, segments: &[Segment]) -> Result<Evaluation<T>> {
    let out: Vec<(Vec<T>, Vec<T>)> = segments
        .par_iter()
        .map(|s| model.predict(&s.sentences))
        .collect::<Result<_>>()?;
    let mut loss = 0.0;
    let mut correct = 0usize;
    for ((p, _), s) in out.iter().zip(segments) {
        loss += cross_entropy(p, s.author_id)?.as_f64();
        correct += usize::from(argmax(p) == s.author_id);
    }
    let n = segments.len().max(1) as f64;
    let (probs, alphas) = out.into_iter().unzip();
    Ok(Evaluation {
        loss: loss / n,
        accuracy: correct as f64 / n,
        probs,
        alphas,
    })
}

/// Summed gradient, loss and correct count over a batch.
fn batch_gradient<T: Scalar>(
    model: &SyntacticModel<T>,
    batch: &[&Segment],
) -> Result<(Params<T>, f64, usize)> {
    let parts: Vec<(Params<T>, f64, usize)> = batch
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut grad = model.zero_grad();
            let mut loss = 0.0;
            let mut correct = 0;
            for seg in chunk {
                let (l, probs) = model.accumulate_gradient(&seg.sentences, seg.author_id, &mut grad)?;
                loss += l.as_f64();
                correct += usize::from(argmax(&probs) == seg.author_id);
            }
            Ok((grad, loss, correct))
        })
        .collect::<Result<_>>()?;
    let mut it = parts.into_iter();
    let (mut grad, mut loss, mut correct) = it.next().expect("batch is non-empty");
    for (g, l, c) in it {
        grad.accumulate(&g);
        loss += l;
        correct += c;
    }
    Ok((grad, loss, correct))
}

/// Serialized optimizer and bookkeeping state of a training checkpoint.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct TrainingHeader {
    config: TrainingConfig,
    config_hash: String,
    step: u64,
    epoch: usize,
    val_acc: f64,
    best_epoch: Option<usize>,
    best_val_acc: f64,
    rng: RngState,
    guard: DivergenceGuard,
    history: Vec<EpochRecord>,
}

/// A training run that can be advanced one epoch at a time and saved or
/// restored between epochs.
#[derive(Clone, Debug)]
pub struct Trainer<T> {
    pub model: SyntacticModel<T>,
    pub config: TrainingConfig,
    pub meta: ModelMeta,
    pub config_hash: String,
    pub state: NadamState<T>,
    /// Completed epochs.
    pub epoch: usize,
    pub history: Vec<EpochRecord>,
    /// Regularized objective of every minibatch of the last epoch.
    pub batch_losses: Vec<f64>,
    best: Option<(usize, f64, Params<T>)>,
    rng: Rng,
    guard: DivergenceGuard,
}

impl<T: Scalar> Trainer<T> {
    pub fn new(model: SyntacticModel<T>, config: TrainingConfig, meta: ModelMeta, config_hash: String) -> Result<Self> {
        config.validate()?;
        let state = NadamState::new(&model);
        let rng = Rng::seeded(config.seed).fork(SHUFFLE_STREAM);
        Ok(Self {
            model,
            config,
            meta,
            config_hash,
            state,
            epoch: 0,
            history: Vec::new(),
            batch_losses: Vec::new(),
            best: None,
            rng,
            guard: DivergenceGuard::default(),
        })
    }

    pub fn is_finished(&self) -> bool {
        self.epoch >= self.config.epochs
    }

    /// One optimizer step on `batch`; returns the regularized objective
    /// (before the step) and the number of correct predictions.
    pub fn step(&mut self, batch: &[&Segment]) -> Result<(f64, usize)> {
        let (mut grad, loss, correct) = batch_gradient(&self.model, batch)?;
        grad.scale(T::of(1.0 / batch.len() as f64));
        let lambda = T::of(self.config.lambda);
        let penalty = add_penalty_gradient(&self.model, lambda, self.config.penalty, &mut grad);
        clip_global_norm(&mut grad, self.config.clip_norm);
        nadam_step(&mut self.model.params, &grad, &mut self.state, &self.config.nadam())?;
        Ok((loss / batch.len() as f64 + penalty.as_f64(), correct))
    }

    /// Shuffles, trains one pass over `train`, then scores `validation`.
    pub fn run_epoch(&mut self, train: &[Segment], validation: &[Segment]) -> Result<&EpochRecord> {
        if train.is_empty() {
            return Err(Error::NoTrainingData);
        }
        if validation.is_empty() {
            return Err(Error::Config("validation split is empty".into()));
        }
        let start = Instant::now();
        let mut order: Vec<usize> = (0..train.len()).collect();
        self.rng.shuffle(&mut order);
        self.batch_losses.clear();
        let mut weighted = 0.0;
        let mut correct = 0;
        for idx in order.chunks(self.config.batch_size) {
            let batch: Vec<&Segment> = idx.iter().map(|&i| &train[i]).collect();
            let (loss, c) = self.step(&batch)?;
            self.batch_losses.push(loss);
            weighted += loss * batch.len() as f64;
            correct += c;
        }
        let train_loss = weighted / train.len() as f64;
        let val = evaluate(&self.model, validation)?;
        self.epoch += 1;

        self.guard.observe(self.epoch, train_loss)?;
        if self.best.as_ref().is_none_or(|b| val.accuracy > b.1) {
            self.best = Some((self.epoch, val.accuracy, self.model.params.clone()));
        }
        self.history.push(EpochRecord {
            epoch: self.epoch,
            train_loss,
            train_acc: correct as f64 / train.len() as f64,
            val_loss: val.loss,
            val_acc: val.accuracy,
            seconds: start.elapsed().as_secs_f64(),
        });
        log::info!(
            "epoch {:>3}  train_loss {:.4}  train_acc {:.4}  val_loss {:.4}  val_acc {:.4}",
            self.epoch,
            train_loss,
            correct as f64 / train.len() as f64,
            val.loss,
            val.accuracy
        );
        Ok(self.history.last().expect("just pushed"))
    }

    /// Epoch and validation accuracy of the best model so far.
    pub fn best(&self) -> Option<(usize, f64)> {
        self.best.as_ref().map(|b| (b.0, b.1))
    }

    /// The best model so far (the current one before any epoch completes).
    pub fn best_model(&self) -> SyntacticModel<T> {
        let mut m = self.model.clone();
        if let Some((_, _, p)) = &self.best {
            m.params = p.clone();
        }
        m
    }

    /// Full training state: parameters, Nadam moments, shuffle position,
    /// best model and history.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = TrainingHeader {
            config: self.config.clone(),
            config_hash: self.config_hash.clone(),
            step: self.state.t,
            epoch: self.epoch,
            val_acc: self.history.last().map_or(f64::NAN, |r| r.val_acc),
            best_epoch: self.best.as_ref().map(|b| b.0),
            best_val_acc: self.best.as_ref().map_or(f64::NAN, |b| b.1),
            rng: self.rng.state(),
            guard: self.guard,
            history: self.history.clone(),
        };
        let best = self.best.as_ref().map_or(&self.model.params, |b| &b.2);
        model_to_bytes(
            &self.model,
            &self.meta,
            Some(serde_json::to_value(header)?),
            &[&self.state.m, &self.state.v, best],
        )
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let loaded = model_from_bytes::<T>(bytes)?;
        let header: TrainingHeader = serde_json::from_value(
            loaded
                .training
                .ok_or_else(|| Error::BadCheckpoint("not a training checkpoint".into()))?,
        )?;
        let [m, v, best]: [Params<T>; 3] = loaded
            .extra
            .try_into()
            .map_err(|_| Error::BadCheckpoint("expected moments and best parameters".into()))?;
        let model = loaded.model;
        let fix = |p: Params<T>| if model.hyper.train_embeddings { p } else { without_embedding(p) };
        Ok(Self {
            state: NadamState {
                m: fix(m),
                v: fix(v),
                t: header.step,
            },
            best: header.best_epoch.map(|e| (e, header.best_val_acc, best)),
            model,
            config: header.config,
            meta: loaded.meta,
            config_hash: header.config_hash,
            epoch: header.epoch,
            history: header.history,
            batch_losses: Vec::new(),
            rng: Rng::from_state(&header.rng),
            guard: header.guard,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_bytes()?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn without_embedding<T: Scalar>(mut p: Params<T>) -> Params<T> {
    p.embedding = crate::numkernel::Matrix::zeros(0, 0);
    p
}

/// Result of [`fit`].
#[derive(Clone, Debug)]
pub struct FitOutcome<T> {
    pub best: SyntacticModel<T>,
    pub best_epoch: usize,
    pub best_val_acc: f64,
    pub history: Vec<EpochRecord>,
}

/// Trains for `config.epochs` epochs and returns the model with the best
/// validation segment accuracy. With `out_dir`, writes `checkpoint.stmod`
/// (resumable), `best.stmod` and `history.csv` after every epoch.
pub fn fit<T: Scalar>(
    model: SyntacticModel<T>,
    train: &[Segment],
    validation: &[Segment],
    config: &TrainingConfig,
    meta: ModelMeta,
    config_hash: String,
    out_dir: Option<&Path>,
) -> Result<FitOutcome<T>> {
    let trainer = Trainer::new(model, config.clone(), meta, config_hash)?;
    fit_from(trainer, train, validation, out_dir)
}

/// Continues a (possibly restored) trainer until its epoch budget is spent.
pub fn fit_from<T: Scalar>(
    mut trainer: Trainer<T>,
    train: &[Segment],
    validation: &[Segment],
    out_dir: Option<&Path>,
) -> Result<FitOutcome<T>> {
    while !trainer.is_finished() {
        trainer.run_epoch(train, validation)?;
        if let Some(dir) = out_dir {
            trainer.save(dir.join("checkpoint.stmod"))?;
            crate::model::save_model(dir.join("best.stmod"), &trainer.best_model(), &trainer.meta)?;
            std::fs::write(dir.join("history.csv"), history_csv(&trainer.history)?)?;
        }
    }
    let (best_epoch, best_val_acc) = trainer.best().unwrap_or((0, f64::NAN));
    Ok(FitOutcome {
        best: trainer.best_model(),
        best_epoch,
        best_val_acc,
        history: trainer.history,
    })
}
