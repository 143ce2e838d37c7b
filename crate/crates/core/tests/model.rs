mod common;

use common::{gradient_check, random_segment, randomize, tiny_hyper};
use proptest::prelude::*;
use stylo::model::{
    attend, embed_sentence, encode_segment, encode_sentence_lstm, lstm_forward, EncoderKind,
    LstmParams, SyntacticModel,
};
use stylo::numkernel::{Matrix, Rng};
use stylo::tagger::{TaggedSentence, PAD, TAG_VOCAB};

#[test]
fn gradients_match_finite_differences() {
    for enc in [EncoderKind::Cnn, EncoderKind::Lstm] {
        for seed in 0..3 {
            let mut rng = Rng::seeded(seed);
            let mut model = SyntacticModel::<f64>::new(tiny_hyper(enc), seed).unwrap();
            randomize(&mut model, &mut rng);
            let seg = random_segment(&mut rng, &model.hyper);
            let (err, at) = gradient_check(&model, &seg, rng.below(3), 1e-6);
            assert!(err <= 1e-4, "{enc:?} seed {seed}: {err:e} at {at}");
        }
    }
}

#[test]
fn stacked_conv_layers_backpropagate() {
    let mut h = tiny_hyper(EncoderKind::Cnn);
    h.conv_layers = 2;
    h.sentence_len = 8;
    let mut rng = Rng::seeded(40);
    let mut model = SyntacticModel::<f64>::new(h, 1).unwrap();
    randomize(&mut model, &mut rng);
    let seg = random_segment(&mut rng, &model.hyper);
    let (err, at) = gradient_check(&model, &seg, 2, 1e-6);
    assert!(err <= 1e-4, "{err:e} at {at}");
}

#[test]
fn uniform_prediction_costs_ln_c() {
    for enc in [EncoderKind::Cnn, EncoderKind::Lstm] {
        let mut model = SyntacticModel::<f64>::new(tiny_hyper(enc), 0).unwrap();
        model.params.classifier.w.fill(0.0);
        model.params.classifier.b.fill(0.0);
        let seg = random_segment(&mut Rng::seeded(1), &model.hyper);
        let cache = model.forward(&seg).unwrap();
        assert!((model.loss(&cache, 1).unwrap() - 3f64.ln()).abs() < 1e-12);
    }
}

#[test]
fn identical_segments_identical_predictions() {
    let model = SyntacticModel::<f64>::new(tiny_hyper(EncoderKind::Cnn), 3).unwrap();
    let seg = random_segment(&mut Rng::seeded(2), &model.hyper);
    let copy = seg.clone();
    assert_eq!(model.predict(&seg).unwrap(), model.predict(&copy).unwrap());
}

#[test]
fn bad_label_and_bad_id_are_rejected() {
    let model = SyntacticModel::<f64>::new(tiny_hyper(EncoderKind::Lstm), 3).unwrap();
    let seg = random_segment(&mut Rng::seeded(2), &model.hyper);
    let cache = model.forward(&seg).unwrap();
    assert!(matches!(model.loss(&cache, 3), Err(stylo::Error::BadLabel { label: 3, classes: 3 })));
    let mut bad = seg.clone();
    bad[0].tag_ids[0] = TAG_VOCAB as u32;
    assert!(matches!(model.forward(&bad), Err(stylo::Error::BadTokenId { .. })));
}

#[test]
fn overflowing_activation_names_the_layer() {
    let mut model = SyntacticModel::<f64>::new(tiny_hyper(EncoderKind::Cnn), 3).unwrap();
    model.params.classifier.b.set(0, 0, f64::NAN);
    let seg = random_segment(&mut Rng::seeded(2), &model.hyper);
    assert!(matches!(model.forward(&seg), Err(stylo::Error::NumericOverflow("classifier"))));
}

#[test]
fn embedding_lookup() {
    let pad = TaggedSentence::filler(6, false);
    let table = Matrix::<f64>::from_fn(TAG_VOCAB, 4, |i, j| if i == PAD as usize { 0.0 } else { (i * 4 + j) as f64 });
    let s = embed_sentence(&pad.tag_ids, &table).unwrap();
    assert_eq!(s.shape(), (6, 4));
    assert!(s.data().iter().all(|&x| x == 0.0));

    let eye = Matrix::<f64>::identity(TAG_VOCAB);
    let s = embed_sentence(&[3, 0, 17], &eye).unwrap();
    for (t, &id) in [3usize, 0, 17].iter().enumerate() {
        for j in 0..TAG_VOCAB {
            assert_eq!(s.get(t, j), if j == id { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn lstm_sentence_of_one_token_is_its_concat_state() {
    let mut rng = Rng::seeded(5);
    let fwd = LstmParams::<f64>::init(4, 5, &mut rng);
    let bwd = LstmParams::<f64>::init(4, 5, &mut rng);
    let s = Matrix::from_fn(6, 4, |i, j| if i == 0 { (j as f64) * 0.3 - 0.4 } else { 0.0 });
    let h = encode_sentence_lstm(&s, &fwd, &bwd, 1);
    let f = lstm_forward(&fwd, 1, false, |t| s.row(t));
    let b = lstm_forward(&bwd, 1, true, |t| s.row(t));
    assert_eq!(&h[..5], f.hidden_at(0, 5));
    assert_eq!(&h[5..], b.hidden_at(0, 5));
}

#[test]
fn zero_lstm_parameters_give_zero_vectors() {
    let zero = |i: usize| LstmParams::<f64> {
        w_x: Matrix::zeros(i, 8),
        w_h: Matrix::zeros(2, 8),
        b: Matrix::zeros(1, 8),
    };
    let s = Matrix::from_fn(3, 4, |i, j| (i + j) as f64);
    assert!(encode_sentence_lstm(&s, &zero(4), &zero(4), 3).iter().all(|&x| x == 0.0));
    let h = encode_segment(&s, &zero(4), &zero(4));
    assert_eq!(h.shape(), (3, 4));
    assert!(h.data().iter().all(|&x| x == 0.0));
}

#[test]
fn segment_of_one_sentence() {
    let mut rng = Rng::seeded(6);
    let fwd = LstmParams::<f64>::init(3, 2, &mut rng);
    let bwd = LstmParams::<f64>::init(3, 2, &mut rng);
    let s = Matrix::from_rows(&[vec![0.1, -0.2, 0.3]]).unwrap();
    let h = encode_segment(&s, &fwd, &bwd);
    let f = lstm_forward(&fwd, 1, false, |t| s.row(t));
    let b = lstm_forward(&bwd, 1, false, |t| s.row(t));
    assert_eq!(h.row(0)[..2], *f.hidden_at(0, 2));
    assert_eq!(h.row(0)[2..], *b.hidden_at(0, 2));
}

/// Scalar oracle: a bidirectional recurrence written out per coordinate.
fn scalar_bilstm(fwd: &LstmParams<f64>, bwd: &LstmParams<f64>, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    fn run(p: &LstmParams<f64>, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let d = p.w_h.rows();
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let (mut h, mut c) = (vec![0.0; d], vec![0.0; d]);
        let mut out = vec![];
        for x in xs {
            let pre = |g: usize, j: usize, h: &[f64]| {
                let col = g * d + j;
                p.b.get(0, col)
                    + x.iter().enumerate().map(|(k, v)| v * p.w_x.get(k, col)).sum::<f64>()
                    + h.iter().enumerate().map(|(k, v)| v * p.w_h.get(k, col)).sum::<f64>()
            };
            let mut nh = vec![0.0; d];
            for j in 0..d {
                let (i, f, g, o) = (sig(pre(0, j, &h)), sig(pre(1, j, &h)), pre(2, j, &h).tanh(), sig(pre(3, j, &h)));
                c[j] = f * c[j] + i * g;
                nh[j] = o * c[j].tanh();
            }
            h = nh;
            out.push(h.clone());
        }
        out
    }
    let f = run(fwd, xs);
    let rev: Vec<Vec<f64>> = xs.iter().rev().cloned().collect();
    let mut b = run(bwd, &rev);
    b.reverse();
    f.into_iter().zip(b).map(|(mut a, b)| { a.extend(b); a }).collect()
}

#[test]
fn segment_encoder_matches_scalar_recurrence() {
    let mut rng = Rng::seeded(8);
    let fwd = LstmParams::<f64>::init(4, 2, &mut rng);
    let bwd = LstmParams::<f64>::init(4, 2, &mut rng);
    let xs: Vec<Vec<f64>> = (0..3).map(|_| (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect()).collect();
    let h = encode_segment(&Matrix::from_rows(&xs).unwrap(), &fwd, &bwd);
    let want = scalar_bilstm(&fwd, &bwd, &xs);
    for i in 0..3 {
        for j in 0..4 {
            assert!((h.get(i, j) - want[i][j]).abs() < 1e-14);
        }
    }
}

#[test]
fn sentence_encoder_matches_scalar_recurrence() {
    let mut rng = Rng::seeded(9);
    let fwd = LstmParams::<f64>::init(3, 2, &mut rng);
    let bwd = LstmParams::<f64>::init(3, 2, &mut rng);
    let mut s = Matrix::<f64>::zeros(5, 3);
    for i in 0..3 {
        for j in 0..3 {
            s.set(i, j, rng.uniform(-1.0, 1.0));
        }
    }
    let xs: Vec<Vec<f64>> = (0..3).map(|i| s.row(i).to_vec()).collect();
    let states = scalar_bilstm(&fwd, &bwd, &xs);
    let got = encode_sentence_lstm(&s, &fwd, &bwd, 3);
    for j in 0..4 {
        let want: f64 = states.iter().map(|st| st[j]).sum();
        assert!((got[j] - want).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pad_beyond_true_length_is_neutral(seed in 0u64..1000, len in 1usize..6, extra in 1usize..8) {
        let mut rng = Rng::seeded(seed);
        let fwd = LstmParams::<f64>::init(4, 3, &mut rng);
        let bwd = LstmParams::<f64>::init(4, 3, &mut rng);
        let short = Matrix::from_fn(len, 4, |_, _| rng.uniform(-1.0, 1.0));
        let mut long = Matrix::zeros(len + extra, 4);
        long.data_mut()[..len * 4].copy_from_slice(short.data());
        prop_assert_eq!(
            encode_sentence_lstm(&short, &fwd, &bwd, len),
            encode_sentence_lstm(&long, &fwd, &bwd, len)
        );
    }

    #[test]
    fn attention_is_a_convex_combination(seed in 0u64..10_000, m in 1usize..8) {
        let mut rng = Rng::seeded(seed);
        let h = Matrix::from_fn(m, 6, |_, _| rng.uniform(-3.0, 3.0));
        let p = stylo::model::AttentionParams {
            w: Matrix::from_fn(6, 5, |_, _| rng.uniform(-2.0, 2.0)),
            b: Matrix::from_fn(1, 5, |_, _| rng.uniform(-1.0, 1.0)),
            context: Matrix::from_fn(1, 5, |_, _| rng.uniform(-2.0, 2.0)),
        };
        let (v, t) = attend(&h, &p);
        prop_assert!((t.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        for j in 0..6 {
            let lo = (0..m).map(|i| h.get(i, j)).fold(f64::INFINITY, f64::min);
            let hi = (0..m).map(|i| h.get(i, j)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v[j] >= lo - 1e-12 && v[j] <= hi + 1e-12);
        }
    }
}
