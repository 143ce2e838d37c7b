//! The composed network: embedding → sentence encoder → segment BiLSTM →
//! attention → classifier, with the matching backward pass.

use crate::error::{Error, Result};
use crate::numkernel::{axpy, log_softmax, softmax, Matrix, Rng};
use crate::scalar::Scalar;
use crate::tagger::TaggedSentence;

use super::attention::{attend, attend_backward, classify_backward, logits, AttentionTrace};
use super::config::{Hyperparams, Representation};
use super::conv::{bank_backward, bank_forward, ConvTrace};
use super::lstm::{bilstm_states, lstm_backward, lstm_forward, LstmTrace};
use super::params::{ConvBank, LstmParams, Params, SentenceEncoder};

/// Log-probabilities are clamped here before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Ids the embedding table is indexed by for this sentence.
pub fn sentence_ids(sent: &TaggedSentence, representation: Representation) -> Result<&[u32]> {
    match representation {
        Representation::Syntactic => Ok(&sent.tag_ids),
        Representation::Lexical => sent.word_ids.as_deref().ok_or_else(|| {
            Error::Config("lexical model needs word ids; build a vocabulary first".into())
        }),
    }
}

/// `N × d` matrix whose row `t` is the embedding of id `t`.
pub fn embed_sentence<T: Scalar>(ids: &[u32], table: &Matrix<T>) -> Result<Matrix<T>> {
    let d = table.cols();
    let mut out = Matrix::zeros(ids.len(), d);
    for (t, &id) in ids.iter().enumerate() {
        let id = id as usize;
        if id >= table.rows() {
            return Err(Error::BadTokenId {
                id,
                rows: table.rows(),
            });
        }
        out.row_mut(t).copy_from_slice(table.row(id));
    }
    Ok(out)
}

/// Max-pooled feature maps of every receptive field, concatenated in
/// ascending width order.
pub fn encode_sentence_cnn<T: Scalar>(s: &Matrix<T>, banks: &[ConvBank<T>]) -> Result<Vec<T>> {
    Ok(cnn_forward(s, banks)?.0)
}

fn cnn_forward<T: Scalar>(s: &Matrix<T>, banks: &[ConvBank<T>]) -> Result<(Vec<T>, Vec<ConvTrace<T>>)> {
    let mut out = Vec::new();
    let mut traces = Vec::with_capacity(banks.len());
    for bank in banks {
        let needed = bank.layers.len() * (bank.width - 1) + 1;
        if s.rows() < needed {
            return Err(Error::SentenceTooShort {
                len: s.rows(),
                needed,
            });
        }
        let (pooled, trace) = bank_forward(bank, s);
        out.extend(pooled);
        traces.push(trace);
    }
    Ok((out, traces))
}

/// Sum over the first `true_length` positions of `[→h_t; ←h_t]`. The
/// backward direction starts at the last real token; PAD positions never
/// enter either direction. A filler sentence encodes to zero.
pub fn encode_sentence_lstm<T: Scalar>(
    s: &Matrix<T>,
    fwd: &LstmParams<T>,
    bwd: &LstmParams<T>,
    true_length: usize,
) -> Vec<T> {
    lstm_sentence_forward(s, fwd, bwd, true_length).0
}

fn lstm_sentence_forward<T: Scalar>(
    s: &Matrix<T>,
    fwd: &LstmParams<T>,
    bwd: &LstmParams<T>,
    true_length: usize,
) -> (Vec<T>, Option<(LstmTrace<T>, LstmTrace<T>)>) {
    let d = fwd.hidden();
    let len = true_length.min(s.rows());
    let mut out = vec![T::zero(); 2 * d];
    if len == 0 {
        return (out, None);
    }
    let tf = lstm_forward(fwd, len, false, |t| s.row(t));
    let tb = lstm_forward(bwd, len, true, |t| s.row(t));
    for t in 0..len {
        axpy(T::one(), tf.hidden_at(t, d), &mut out[..d]);
        axpy(T::one(), tb.hidden_at(t, d), &mut out[d..]);
    }
    (out, Some((tf, tb)))
}

/// Bidirectional LSTM over sentence vectors; row `i` is `[→h_i; ←h_i]`.
pub fn encode_segment<T: Scalar>(
    sentences: &Matrix<T>,
    fwd: &LstmParams<T>,
    bwd: &LstmParams<T>,
) -> Matrix<T> {
    let m = sentences.rows();
    let tf = lstm_forward(fwd, m, false, |i| sentences.row(i));
    let tb = lstm_forward(bwd, m, true, |i| sentences.row(i));
    bilstm_states(&tf, &tb, fwd.hidden())
}

#[derive(Clone, Debug)]
enum SentenceTrace<T> {
    Cnn(Vec<ConvTrace<T>>),
    Lstm(Option<(LstmTrace<T>, LstmTrace<T>)>),
}

/// Everything the backward pass needs for one segment.
#[derive(Clone, Debug)]
pub struct ForwardCache<T> {
    ids: Vec<Vec<u32>>,
    lengths: Vec<usize>,
    embedded: Vec<Matrix<T>>,
    sentences: Vec<SentenceTrace<T>>,
    sentence_vectors: Matrix<T>,
    segment: (LstmTrace<T>, LstmTrace<T>),
    states: Matrix<T>,
    attention: AttentionTrace<T>,
    v: Vec<T>,
    logits: Vec<T>,
    probs: Vec<T>,
}

impl<T: Scalar> ForwardCache<T> {
    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Attention weight of each sentence.
    pub fn alpha(&self) -> &[T] {
        &self.attention.alpha
    }

    /// Segment vector `V`.
    pub fn segment_vector(&self) -> &[T] {
        &self.v
    }
}

fn check(layer: &'static str, values: &[impl Scalar]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericOverflow(layer))
    }
}

/// Parameters plus the architecture that shaped them.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntacticModel<T> {
    pub hyper: Hyperparams,
    pub params: Params<T>,
}

impl<T: Scalar> SyntacticModel<T> {
    /// Fresh model; initialization draws from its own stream of `seed`.
    pub fn new(hyper: Hyperparams, seed: u64) -> Result<Self> {
        hyper.validate()?;
        let mut rng = Rng::seeded(seed).fork(INIT_STREAM);
        let params = Params::init(&hyper, &mut rng);
        Ok(Self { hyper, params })
    }

    pub fn parameter_count(&self) -> usize {
        self.params.count()
    }

    /// Zeroed gradient buffers. The embedding block is empty when frozen.
    pub fn zero_grad(&self) -> Params<T> {
        self.params.zeros_like(self.hyper.train_embeddings)
    }

    pub fn forward(&self, sentences: &[TaggedSentence]) -> Result<ForwardCache<T>> {
        if sentences.is_empty() {
            return Err(Error::Config("segment has no sentences".into()));
        }
        let p = &self.params;
        let rep = self.hyper.mode.representation;
        let width = self.hyper.sentence_dim();
        let mut ids = Vec::with_capacity(sentences.len());
        let mut lengths = Vec::with_capacity(sentences.len());
        let mut embedded = Vec::with_capacity(sentences.len());
        let mut traces = Vec::with_capacity(sentences.len());
        let mut sentence_vectors = Matrix::zeros(sentences.len(), width);
        for (i, sent) in sentences.iter().enumerate() {
            let id = sentence_ids(sent, rep)?;
            let x = embed_sentence(id, &p.embedding)?;
            let (vec, trace) = match &p.sentence {
                SentenceEncoder::Cnn(banks) => {
                    let (v, t) = cnn_forward(&x, banks)?;
                    (v, SentenceTrace::Cnn(t))
                }
                SentenceEncoder::Lstm { fwd, bwd } => {
                    let (v, t) = lstm_sentence_forward(&x, fwd, bwd, sent.true_length);
                    (v, SentenceTrace::Lstm(t))
                }
            };
            check("sentence_encoder", &vec)?;
            sentence_vectors.row_mut(i).copy_from_slice(&vec);
            ids.push(id.to_vec());
            lengths.push(sent.true_length.min(id.len()));
            embedded.push(x);
            traces.push(trace);
        }
        let m = sentences.len();
        let sv = &sentence_vectors;
        let tf = lstm_forward(&p.segment_fwd, m, false, |i| sv.row(i));
        let tb = lstm_forward(&p.segment_bwd, m, true, |i| sv.row(i));
        let states = bilstm_states(&tf, &tb, self.hyper.hidden);
        check("segment_encoder", states.data())?;
        let (v, attention) = attend(&states, &p.attention);
        check("attention", &v)?;
        let logits = logits(&v, &p.classifier);
        check("classifier", &logits)?;
        let probs = softmax(&logits);
        Ok(ForwardCache {
            ids,
            lengths,
            embedded,
            sentences: traces,
            sentence_vectors,
            segment: (tf, tb),
            states,
            attention,
            v,
            logits,
            probs,
        })
    }

    /// Class probabilities and attention weights.
    pub fn predict(&self, sentences: &[TaggedSentence]) -> Result<(Vec<T>, Vec<T>)> {
        let cache = self.forward(sentences)?;
        Ok((cache.probs, cache.attention.alpha))
    }

    /// Cross-entropy of `label` under the cached prediction.
    pub fn loss(&self, cache: &ForwardCache<T>, label: usize) -> Result<T> {
        let c = cache.probs.len();
        if label >= c {
            return Err(Error::BadLabel { label, classes: c });
        }
        // −ln max(p, floor), taken from the logits for accuracy
        let nll = -log_softmax(&cache.logits)[label];
        Ok(nll.min(-T::of(PROB_FLOOR).ln()))
    }

    /// Accumulates the gradient of the cross-entropy of `label` into `grad`
    /// and returns the loss.
    pub fn backward(&self, cache: &ForwardCache<T>, label: usize, grad: &mut Params<T>) -> Result<T> {
        let loss = self.loss(cache, label)?;
        if cache.probs[label] < T::of(PROB_FLOOR) {
            // clamped region: the loss is locally constant
            return Ok(loss);
        }
        let p = &self.params;
        let d = self.hyper.hidden;
        let mut dlogits = cache.probs.clone();
        dlogits[label] -= T::one();
        let dv = classify_backward(&cache.v, &p.classifier, &dlogits, &mut grad.classifier);
        let dstates = attend_backward(&cache.states, &p.attention, &cache.attention, &dv, &mut grad.attention);

        let sv = &cache.sentence_vectors;
        let mut dsv = sv.zeros_like();
        let dh_f = |i: usize| &dstates.row(i)[..d];
        let dh_b = |i: usize| &dstates.row(i)[d..];
        {
            let mut sink = |i: usize, row: &[T]| axpy(T::one(), row, dsv.row_mut(i));
            lstm_backward(&p.segment_fwd, &cache.segment.0, |i| sv.row(i), dh_f, &mut grad.segment_fwd, Some(&mut sink));
        }
        {
            let mut sink = |i: usize, row: &[T]| axpy(T::one(), row, dsv.row_mut(i));
            lstm_backward(&p.segment_bwd, &cache.segment.1, |i| sv.row(i), dh_b, &mut grad.segment_bwd, Some(&mut sink));
        }

        let train_embedding = !grad.embedding.is_empty();
        let pad = self.hyper.pad_row() as u32;
        for (i, trace) in cache.sentences.iter().enumerate() {
            let x = &cache.embedded[i];
            let ds = dsv.row(i);
            let dx = match (trace, &p.sentence, &mut grad.sentence) {
                (SentenceTrace::Cnn(traces), SentenceEncoder::Cnn(banks), SentenceEncoder::Cnn(gbanks)) => {
                    let mut dx = x.zeros_like();
                    let mut offset = 0;
                    for ((bank, t), gbank) in banks.iter().zip(traces).zip(gbanks.iter_mut()) {
                        let k = bank.filters();
                        let g = bank_backward(bank, x, t, &ds[offset..offset + k], gbank);
                        dx.add_assign(&g)?;
                        offset += k;
                    }
                    Some(dx)
                }
                (
                    SentenceTrace::Lstm(Some((tf, tb))),
                    SentenceEncoder::Lstm { fwd, bwd },
                    SentenceEncoder::Lstm { fwd: gf, bwd: gb },
                ) => {
                    // every position contributes its state to the sum once
                    let (df, db) = ds.split_at(d);
                    let mut dx = x.zeros_like();
                    {
                        let mut sink = |t: usize, row: &[T]| axpy(T::one(), row, dx.row_mut(t));
                        let sink: Option<&mut dyn FnMut(usize, &[T])> =
                            if train_embedding { Some(&mut sink) } else { None };
                        lstm_backward(fwd, tf, |t| x.row(t), |_| df, gf, sink);
                    }
                    {
                        let mut sink = |t: usize, row: &[T]| axpy(T::one(), row, dx.row_mut(t));
                        let sink: Option<&mut dyn FnMut(usize, &[T])> =
                            if train_embedding { Some(&mut sink) } else { None };
                        lstm_backward(bwd, tb, |t| x.row(t), |_| db, gb, sink);
                    }
                    Some(dx)
                }
                (SentenceTrace::Lstm(None), _, _) => None,
                _ => unreachable!("gradient buffers match the encoder"),
            };
            if let (true, Some(dx)) = (train_embedding, dx) {
                let rows = match trace {
                    SentenceTrace::Cnn(_) => cache.ids[i].len(),
                    SentenceTrace::Lstm(_) => cache.lengths[i],
                };
                for (t, &id) in cache.ids[i][..rows].iter().enumerate() {
                    if id != pad {
                        axpy(T::one(), dx.row(t), grad.embedding.row_mut(id as usize));
                    }
                }
            }
        }
        Ok(loss)
    }

    /// Forward plus backward for one labelled segment.
    pub fn accumulate_gradient(
        &self,
        sentences: &[TaggedSentence],
        label: usize,
        grad: &mut Params<T>,
    ) -> Result<(T, Vec<T>)> {
        let cache = self.forward(sentences)?;
        let loss = self.backward(&cache, label, grad)?;
        Ok((loss, cache.probs))
    }

    pub fn cast<U: Scalar>(&self) -> SyntacticModel<U> {
        SyntacticModel {
            hyper: self.hyper.clone(),
            params: self.params.cast(),
        }
    }
}

/// Stream of the run seed reserved for parameter initialization.
pub const INIT_STREAM: u64 = 1;
