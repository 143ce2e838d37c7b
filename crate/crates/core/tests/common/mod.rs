#![allow(dead_code)]

pub mod dd;
pub mod oracles;

use stylo::model::{EncoderKind, Hyperparams, Params, SyntacticModel};
use stylo::numkernel::{finite_difference_gradient, relative_error, Rng};
use stylo::Scalar;
use stylo::tagger::{pad_or_truncate, TaggedSentence, NUM_REAL_TAGS, UNK};

/// d_p=4, d_l=5, K=6, Z={2,3}, M=3, N=6, C=3.
pub fn tiny_hyper(encoder: EncoderKind) -> Hyperparams {
    Hyperparams {
        segment_len: 3,
        sentence_len: 6,
        embed_dim: 4,
        hidden: 5,
        filters: 6,
        windows: vec![2, 3],
        conv_layers: 1,
        attention: 10,
        ..Hyperparams::syntactic(encoder, 3)
    }
}

/// Random sentence of `n` slots with a random true length; real positions
/// draw any tag including UNK.
pub fn random_sentence(rng: &mut Rng, n: usize, allow_filler: bool) -> TaggedSentence {
    let len = if allow_filler && rng.below(5) == 0 {
        0
    } else {
        1 + rng.below(n)
    };
    if len == 0 {
        return TaggedSentence::filler(n, false);
    }
    let tags: Vec<u32> = (0..len)
        .map(|_| {
            let t = rng.below(NUM_REAL_TAGS + 1) as u32;
            if t == NUM_REAL_TAGS as u32 {
                UNK
            } else {
                t
            }
        })
        .collect();
    let tokens = (0..len).map(|i| format!("w{i}")).collect();
    pad_or_truncate(&TaggedSentence::new(tokens, tags), n)
}

pub fn random_segment(rng: &mut Rng, h: &Hyperparams) -> Vec<TaggedSentence> {
    (0..h.segment_len)
        .map(|i| random_sentence(rng, h.sentence_len, i > 0))
        .collect()
}

/// Redraws every parameter, biases included, from U(-0.5, 0.5). The PAD
/// embedding row stays zero.
pub fn randomize(model: &mut SyntacticModel<f64>, rng: &mut Rng) {
    let pad = model.hyper.pad_row();
    for m in model.params.matrices_mut() {
        m.data_mut().iter_mut().for_each(|x| *x = rng.uniform(-0.5, 0.5));
    }
    model.params.embedding.row_mut(pad).fill(0.0);
}

/// Central differences of the segment loss, evaluated in double-double
/// arithmetic so that f64 rounding in the forward pass does not swamp small
/// gradient entries.
pub fn numeric_gradient_dd(
    model: &SyntacticModel<f64>,
    segment: &[TaggedSentence],
    label: usize,
    eps: f64,
) -> Vec<f64> {
    let mut probe = model.cast::<dd::DD>();
    let theta = probe.params.flatten();
    finite_difference_gradient(
        |t: &[dd::DD]| {
            probe.params.assign_flat(t);
            let cache = probe.forward(segment).unwrap();
            probe.loss(&cache, label).unwrap()
        },
        &theta,
        dd::DD::new(eps),
    )
    .unwrap()
    .into_iter()
    .map(|g| g.as_f64())
    .collect()
}

/// The same estimate carried out in plain f64.
pub fn numeric_gradient_f64(
    model: &SyntacticModel<f64>,
    segment: &[TaggedSentence],
    label: usize,
    eps: f64,
) -> Vec<f64> {
    let mut probe = model.clone();
    let theta = probe.params.flatten();
    finite_difference_gradient(
        |t: &[f64]| {
            probe.params.assign_flat(t);
            let cache = probe.forward(segment).unwrap();
            probe.loss(&cache, label).unwrap()
        },
        &theta,
        eps,
    )
    .unwrap()
}

/// Worst relative error between the analytic gradient and `numeric` over
/// every trainable coordinate, with the coordinate it occurs at.
pub fn compare_gradients(model: &SyntacticModel<f64>, analytic: &Params<f64>, numeric: &[f64]) -> (f64, String) {
    let pad = model.hyper.pad_row();
    let mut worst = (0.0, String::new());
    let mut offset = 0;
    for ((name, _), g) in model.params.layout().iter().zip(analytic.matrices()) {
        for k in 0..g.len() {
            let frozen = name == "embedding" && k / g.cols() == pad;
            if !frozen {
                let e = relative_error(g.data()[k], numeric[offset + k]);
                if e > worst.0 {
                    worst = (e, format!("{name}[{k}]"));
                }
            }
        }
        offset += g.len();
    }
    worst
}

pub fn analytic_gradient(model: &SyntacticModel<f64>, segment: &[TaggedSentence], label: usize) -> Params<f64> {
    let mut grad = model.params.zeros_like(true);
    model.accumulate_gradient(segment, label, &mut grad).unwrap();
    grad
}

/// Worst relative error against double-double central differences.
pub fn gradient_check(
    model: &SyntacticModel<f64>,
    segment: &[TaggedSentence],
    label: usize,
    eps: f64,
) -> (f64, String) {
    let analytic = analytic_gradient(model, segment, label);
    compare_gradients(model, &analytic, &numeric_gradient_dd(model, segment, label, eps))
}
