//! Parameter blocks of the hierarchical network. Gradients and optimizer
//! moments reuse the same [`Params`] type so every block lines up by index.

use crate::numkernel::{Matrix, Rng};
use crate::scalar::Scalar;

use super::config::{EncoderKind, Hyperparams};

/// How a block is treated by regularization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Embedding,
    Weight,
    Bias,
}

/// One LSTM direction. Gates are laid out `[input, forget, candidate, output]`
/// along the columns; inputs multiply on the left (`x · W`).
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams<T> {
    pub w_x: Matrix<T>,
    pub w_h: Matrix<T>,
    pub b: Matrix<T>,
}

impl<T: Scalar> LstmParams<T> {
    pub fn init(input: usize, hidden: usize, rng: &mut Rng) -> Self {
        let mut b = Matrix::zeros(1, 4 * hidden);
        b.data_mut()[hidden..2 * hidden].fill(T::one());
        Self {
            w_x: glorot(input, 4 * hidden, rng),
            w_h: glorot(hidden, 4 * hidden, rng),
            b,
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_h.rows()
    }

    pub fn input(&self) -> usize {
        self.w_x.rows()
    }

    fn zeros_like(&self) -> Self {
        Self {
            w_x: self.w_x.zeros_like(),
            w_h: self.w_h.zeros_like(),
            b: self.b.zeros_like(),
        }
    }
}

/// A valid (unpadded) 1-d convolution of width `width` over rows.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer<T> {
    /// `(width · in) × out`
    pub w: Matrix<T>,
    pub b: Matrix<T>,
}

/// The stacked conv layers sharing one receptive field size.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvBank<T> {
    pub width: usize,
    pub layers: Vec<ConvLayer<T>>,
}

impl<T: Scalar> ConvBank<T> {
    pub fn filters(&self) -> usize {
        self.layers.last().map_or(0, |l| l.w.cols())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SentenceEncoder<T> {
    Cnn(Vec<ConvBank<T>>),
    Lstm { fwd: LstmParams<T>, bwd: LstmParams<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttentionParams<T> {
    /// `2d × a`
    pub w: Matrix<T>,
    pub b: Matrix<T>,
    /// Sentence-level context vector `u_s`, `1 × a`.
    pub context: Matrix<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierParams<T> {
    /// `2d × C`
    pub w: Matrix<T>,
    pub b: Matrix<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Params<T> {
    pub embedding: Matrix<T>,
    pub sentence: SentenceEncoder<T>,
    pub segment_fwd: LstmParams<T>,
    pub segment_bwd: LstmParams<T>,
    pub attention: AttentionParams<T>,
    pub classifier: ClassifierParams<T>,
}

/// Uniform in `±sqrt(6 / (fan_in + fan_out))`.
pub fn glorot<T: Scalar>(rows: usize, cols: usize, rng: &mut Rng) -> Matrix<T> {
    let s = (6.0 / (rows + cols) as f64).sqrt();
    Matrix::from_fn(rows, cols, |_, _| rng.uniform(-s, s))
}

impl<T: Scalar> Params<T> {
    pub fn init(h: &Hyperparams, rng: &mut Rng) -> Self {
        let mut embedding = glorot(h.vocab_rows, h.embed_dim, rng);
        embedding.row_mut(h.pad_row()).fill(T::zero());
        let sentence = match h.mode.encoder {
            EncoderKind::Cnn => {
                let k = h.filters_per_window();
                SentenceEncoder::Cnn(
                    h.windows
                        .iter()
                        .map(|&r| ConvBank {
                            width: r,
                            layers: (0..h.conv_layers)
                                .map(|l| {
                                    let input = if l == 0 { h.embed_dim } else { k };
                                    ConvLayer {
                                        w: glorot(r * input, k, rng),
                                        b: Matrix::zeros(1, k),
                                    }
                                })
                                .collect(),
                        })
                        .collect(),
                )
            }
            EncoderKind::Lstm => SentenceEncoder::Lstm {
                fwd: LstmParams::init(h.embed_dim, h.hidden, rng),
                bwd: LstmParams::init(h.embed_dim, h.hidden, rng),
            },
        };
        let s = h.sentence_dim();
        let two_d = h.segment_dim();
        Self {
            embedding,
            sentence,
            segment_fwd: LstmParams::init(s, h.hidden, rng),
            segment_bwd: LstmParams::init(s, h.hidden, rng),
            attention: AttentionParams {
                w: glorot(two_d, h.attention, rng),
                b: Matrix::zeros(1, h.attention),
                context: glorot(1, h.attention, rng),
            },
            classifier: ClassifierParams {
                w: glorot(two_d, h.classes, rng),
                b: Matrix::zeros(1, h.classes),
            },
        }
    }

    /// Zero-filled blocks of the same shapes. With `with_embedding == false`
    /// the embedding block is left empty, which marks it frozen.
    pub fn zeros_like(&self, with_embedding: bool) -> Self {
        Self {
            embedding: if with_embedding {
                self.embedding.zeros_like()
            } else {
                Matrix::zeros(0, 0)
            },
            sentence: match &self.sentence {
                SentenceEncoder::Cnn(banks) => SentenceEncoder::Cnn(
                    banks
                        .iter()
                        .map(|b| ConvBank {
                            width: b.width,
                            layers: b
                                .layers
                                .iter()
                                .map(|l| ConvLayer {
                                    w: l.w.zeros_like(),
                                    b: l.b.zeros_like(),
                                })
                                .collect(),
                        })
                        .collect(),
                ),
                SentenceEncoder::Lstm { fwd, bwd } => SentenceEncoder::Lstm {
                    fwd: fwd.zeros_like(),
                    bwd: bwd.zeros_like(),
                },
            },
            segment_fwd: self.segment_fwd.zeros_like(),
            segment_bwd: self.segment_bwd.zeros_like(),
            attention: AttentionParams {
                w: self.attention.w.zeros_like(),
                b: self.attention.b.zeros_like(),
                context: self.attention.context.zeros_like(),
            },
            classifier: ClassifierParams {
                w: self.classifier.w.zeros_like(),
                b: self.classifier.b.zeros_like(),
            },
        }
    }

    /// Block names and kinds in serialization order.
    pub fn layout(&self) -> Vec<(String, BlockKind)> {
        use BlockKind::*;
        let mut out = vec![("embedding".to_string(), Embedding)];
        let lstm = |out: &mut Vec<(String, BlockKind)>, name: &str| {
            out.push((format!("{name}.w_x"), Weight));
            out.push((format!("{name}.w_h"), Weight));
            out.push((format!("{name}.b"), Bias));
        };
        match &self.sentence {
            SentenceEncoder::Cnn(banks) => {
                for bank in banks {
                    for l in 0..bank.layers.len() {
                        out.push((format!("conv{}.{l}.w", bank.width), Weight));
                        out.push((format!("conv{}.{l}.b", bank.width), Bias));
                    }
                }
            }
            SentenceEncoder::Lstm { .. } => {
                lstm(&mut out, "sentence_fwd");
                lstm(&mut out, "sentence_bwd");
            }
        }
        lstm(&mut out, "segment_fwd");
        lstm(&mut out, "segment_bwd");
        out.push(("attention.w".into(), Weight));
        out.push(("attention.b".into(), Bias));
        out.push(("attention.context".into(), Weight));
        out.push(("classifier.w".into(), Weight));
        out.push(("classifier.b".into(), Bias));
        out
    }

    /// Every block, in [`Params::layout`] order.
    pub fn matrices(&self) -> Vec<&Matrix<T>> {
        let mut out = vec![&self.embedding];
        match &self.sentence {
            SentenceEncoder::Cnn(banks) => {
                for l in banks.iter().flat_map(|b| &b.layers) {
                    out.push(&l.w);
                    out.push(&l.b);
                }
            }
            SentenceEncoder::Lstm { fwd, bwd } => {
                out.extend([&fwd.w_x, &fwd.w_h, &fwd.b, &bwd.w_x, &bwd.w_h, &bwd.b]);
            }
        }
        let (f, b) = (&self.segment_fwd, &self.segment_bwd);
        out.extend([&f.w_x, &f.w_h, &f.b, &b.w_x, &b.w_h, &b.b]);
        out.extend([&self.attention.w, &self.attention.b, &self.attention.context]);
        out.extend([&self.classifier.w, &self.classifier.b]);
        out
    }

    /// Every block mutably, in [`Params::layout`] order.
    pub fn matrices_mut(&mut self) -> Vec<&mut Matrix<T>> {
        let mut out = vec![&mut self.embedding];
        match &mut self.sentence {
            SentenceEncoder::Cnn(banks) => {
                for l in banks.iter_mut().flat_map(|b| &mut b.layers) {
                    out.push(&mut l.w);
                    out.push(&mut l.b);
                }
            }
            SentenceEncoder::Lstm { fwd, bwd } => {
                out.extend([
                    &mut fwd.w_x,
                    &mut fwd.w_h,
                    &mut fwd.b,
                    &mut bwd.w_x,
                    &mut bwd.w_h,
                    &mut bwd.b,
                ]);
            }
        }
        let (f, b) = (&mut self.segment_fwd, &mut self.segment_bwd);
        out.extend([
            &mut f.w_x,
            &mut f.w_h,
            &mut f.b,
            &mut b.w_x,
            &mut b.w_h,
            &mut b.b,
        ]);
        let a = &mut self.attention;
        out.extend([&mut a.w, &mut a.b, &mut a.context]);
        let c = &mut self.classifier;
        out.extend([&mut c.w, &mut c.b]);
        out
    }

    pub fn count(&self) -> usize {
        self.matrices().iter().map(|m| m.len()).sum()
    }

    /// Elementwise `self += other`; empty blocks on either side are skipped.
    pub fn accumulate(&mut self, other: &Self) {
        for (a, b) in self.matrices_mut().into_iter().zip(other.matrices()) {
            if !a.is_empty() && a.shape() == b.shape() {
                a.add_assign(b).expect("shapes checked");
            }
        }
    }

    pub fn scale(&mut self, s: T) {
        for m in self.matrices_mut() {
            m.scale(s);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.matrices().iter().all(|m| m.is_finite())
    }

    pub fn flatten(&self) -> Vec<T> {
        self.matrices()
            .iter()
            .flat_map(|m| m.data().iter().copied())
            .collect()
    }

    /// Overwrites every block from a vector produced by [`Params::flatten`].
    pub fn assign_flat(&mut self, flat: &[T]) {
        let mut offset = 0;
        for m in self.matrices_mut() {
            let n = m.len();
            m.data_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        assert_eq!(offset, flat.len(), "flat parameter vector has the wrong length");
    }

    pub fn cast<U: Scalar>(&self) -> Params<U> {
        let mut out = Params::<U> {
            embedding: Matrix::zeros(0, 0),
            sentence: match &self.sentence {
                SentenceEncoder::Cnn(banks) => SentenceEncoder::Cnn(
                    banks
                        .iter()
                        .map(|b| ConvBank {
                            width: b.width,
                            layers: b
                                .layers
                                .iter()
                                .map(|l| ConvLayer {
                                    w: l.w.cast(),
                                    b: l.b.cast(),
                                })
                                .collect(),
                        })
                        .collect(),
                ),
                SentenceEncoder::Lstm { fwd, bwd } => SentenceEncoder::Lstm {
                    fwd: cast_lstm(fwd),
                    bwd: cast_lstm(bwd),
                },
            },
            segment_fwd: cast_lstm(&self.segment_fwd),
            segment_bwd: cast_lstm(&self.segment_bwd),
            attention: AttentionParams {
                w: self.attention.w.cast(),
                b: self.attention.b.cast(),
                context: self.attention.context.cast(),
            },
            classifier: ClassifierParams {
                w: self.classifier.w.cast(),
                b: self.classifier.b.cast(),
            },
        };
        out.embedding = self.embedding.cast();
        out
    }
}

fn cast_lstm<T: Scalar, U: Scalar>(p: &LstmParams<T>) -> LstmParams<U> {
    LstmParams {
        w_x: p.w_x.cast(),
        w_h: p.w_h.cast(),
        b: p.b.cast(),
    }
}
