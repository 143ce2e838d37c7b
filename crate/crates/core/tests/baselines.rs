mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use stylo::baselines::{
    extract_ngrams, predict_svm, segment_symbols, train_svm_ovr, LinearSvm, NgramConfig, NgramKind, NgramSvm,
    NgramVocabulary, SparseVector, SvmConfig, BOUNDARY,
};
use stylo::corpus::Segment;
use stylo::numkernel::Rng;
use stylo::tagger::{pad_or_truncate, TagSet, TaggedSentence};
use stylo::Error;

use common::oracles::{brute_force_ngrams, random_sequence};

#[test]
fn ngram_counts_match_brute_force() {
    let mut rng = Rng::seeded(11);
    for _ in 0..100 {
        let alphabet = 1 + rng.below(6);
        let seq = random_sequence(&mut rng, alphabet);
        let (lo, hi) = (1 + rng.below(3), 1 + rng.below(4));
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let got: HashMap<Vec<String>, usize> = extract_ngrams(&seq, lo, hi)
            .into_iter()
            .map(|(k, v)| (k.split(' ').map(String::from).collect(), v))
            .collect();
        assert_eq!(got, brute_force_ngrams(&seq, lo, hi));
    }
}

#[test]
fn segment_symbols_skip_fillers_and_padding() {
    let ts = TagSet::standard();
    let tags = |t: &[&str]| t.iter().map(|x| ts.id(x).unwrap()).collect::<Vec<_>>();
    let s1 = pad_or_truncate(&TaggedSentence::new(vec!["The".into(), "dog".into()], tags(&["DT", "NN"])), 4);
    let s2 = pad_or_truncate(&TaggedSentence::new(vec!["Ran".into()], tags(&["VBD"])), 4);
    let seg = Segment {
        sentences: vec![s1, s2, TaggedSentence::filler(4, false)],
        author_id: 0,
        source_doc: "d".into(),
        position: 0,
    };
    assert_eq!(segment_symbols(&seg, NgramKind::Pos), ["DT", "NN", BOUNDARY, "VBD"]);
    assert_eq!(segment_symbols(&seg, NgramKind::Word), ["the", "dog", BOUNDARY, "ran"]);
}

proptest! {
    #[test]
    fn featurizer_is_permutation_covariant(seed in 0u64..1000) {
        let mut rng = Rng::seeded(seed);
        let seqs: Vec<Vec<String>> = (0..8).map(|_| random_sequence(&mut rng, 4)).collect();
        let vocab = NgramVocabulary::fit(&seqs, NgramConfig::default()).unwrap();
        let mut perm: Vec<usize> = (0..vocab.len()).collect();
        rng.shuffle(&mut perm);
        let mut permuted = vocab.clone();
        for (old, &new) in perm.iter().enumerate() {
            permuted.grams[new] = vocab.grams[old].clone();
            permuted.document_frequency[new] = vocab.document_frequency[old];
        }
        permuted.reindex();
        for s in &seqs {
            let a = vocab.featurize(s).to_dense();
            let b = permuted.featurize(s).to_dense();
            for (old, &new) in perm.iter().enumerate() {
                prop_assert_eq!(a[old], b[new]);
            }
        }
    }

    #[test]
    fn argmax_invariant_to_positive_rescaling(seed in 0u64..1000, k in 0.01f64..100.0) {
        let mut rng = Rng::seeded(seed);
        let model = LinearSvm {
            weights: (0..4).map(|_| (0..6).map(|_| rng.uniform(-1.0, 1.0)).collect()).collect(),
            bias: (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect(),
            config: SvmConfig::default(),
        };
        let mut scaled = model.clone();
        scaled.weights.iter_mut().flatten().for_each(|w| *w *= k);
        scaled.bias.iter_mut().for_each(|b| *b *= k);
        let x = SparseVector::from_dense(&(0..6).map(|_| rng.uniform(-1.0, 1.0)).collect::<Vec<_>>());
        prop_assert_eq!(predict_svm(&model, &x).unwrap().0, predict_svm(&scaled, &x).unwrap().0);
    }
}

#[test]
fn separable_toy_is_learned() {
    let xs = vec![
        SparseVector::from_dense(&[1.0, 0.0]),
        SparseVector::from_dense(&[0.0, 1.0]),
    ];
    let features: Vec<SparseVector> = (0..20).map(|i| xs[i % 2].clone()).collect();
    let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
    let model = train_svm_ovr(&features, &labels, 2, &SvmConfig::default()).unwrap();
    for (x, &y) in features.iter().zip(&labels) {
        assert_eq!(predict_svm(&model, x).unwrap().0, y);
    }
}

#[test]
fn shuffled_labels_are_at_chance() {
    let mut rng = Rng::seeded(5);
    let n = 600;
    let features: Vec<SparseVector> = (0..n)
        .map(|_| SparseVector::from_dense(&(0..20).map(|_| rng.normal()).collect::<Vec<_>>()))
        .collect();
    let mut labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    rng.shuffle(&mut labels);
    let (train, test) = features.split_at(400);
    let model = train_svm_ovr(train, &labels[..400], 3, &SvmConfig::default()).unwrap();
    let correct = test
        .iter()
        .zip(&labels[400..])
        .filter(|(x, &y)| predict_svm(&model, x).unwrap().0 == y)
        .count();
    let acc = correct as f64 / test.len() as f64;
    assert!((acc - 1.0 / 3.0).abs() <= 0.1, "{acc}");
}

/// Coarse exhaustive search over (w₁, w₂, b) for the same primal objective.
fn grid_search(xs: &[[f64; 2]], ys: &[f64], lambda: f64) -> ([f64; 2], f64) {
    let objective = |w: [f64; 2], b: f64| {
        let hinge: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (1.0 - y * (w[0] * x[0] + w[1] * x[1] + b)).max(0.0))
            .sum();
        lambda / 2.0 * (w[0] * w[0] + w[1] * w[1]) + hinge / xs.len() as f64
    };
    let mut best = ([0.0, 0.0], 0.0, f64::INFINITY);
    let steps: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.25).collect();
    for &w0 in &steps {
        for &w1 in &steps {
            for &b in &steps {
                let o = objective([w0, w1], b);
                if o < best.2 {
                    best = ([w0, w1], b, o);
                }
            }
        }
    }
    (best.0, best.1)
}

#[test]
fn agrees_with_grid_search_oracle() {
    let mut rng = Rng::seeded(21);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..200 {
        let (cx, cy, y) = if i % 2 == 0 { (1.0, 0.5, 1.0) } else { (-1.0, -0.5, -1.0) };
        xs.push([cx + 0.8 * rng.normal(), cy + 0.8 * rng.normal()]);
        ys.push(y);
    }
    let lambda = 0.01;
    let (w, b) = grid_search(&xs, &ys, lambda);
    let features: Vec<SparseVector> = xs.iter().map(|x| SparseVector::from_dense(x)).collect();
    let labels: Vec<usize> = ys.iter().map(|&y| usize::from(y > 0.0)).collect();
    let cfg = SvmConfig {
        lambda,
        epochs: 50,
        seed: 0,
    };
    let model = train_svm_ovr(&features, &labels, 2, &cfg).unwrap();
    let agree = xs
        .iter()
        .zip(&features)
        .filter(|(x, f)| {
            let oracle = usize::from(w[0] * x[0] + w[1] * x[1] + b > 0.0);
            predict_svm(&model, f).unwrap().0 == oracle
        })
        .count();
    assert!(agree >= 196, "agreement {agree}/200");
}

#[test]
fn degenerate_and_malformed_inputs() {
    let x = SparseVector::from_dense(&[1.0, 2.0]);
    assert!(matches!(
        train_svm_ovr(&[x.clone(), x.clone()], &[1, 1], 2, &SvmConfig::default()),
        Err(Error::DegenerateLabels)
    ));
    let model = LinearSvm {
        weights: vec![vec![0.5, 0.0], vec![0.0, 0.5], vec![0.1, 0.1]],
        bias: vec![0.0, 0.3, -0.2],
        config: SvmConfig::default(),
    };
    assert_eq!(predict_svm(&model, &SparseVector::from_dense(&[0.0, 0.0])).unwrap().0, 1);
    assert!(matches!(
        predict_svm(&model, &SparseVector::from_dense(&[1.0, 2.0, 3.0])),
        Err(Error::ShapeMismatch { .. })
    ));
}

#[test]
fn svm_file_round_trip() {
    let seqs: Vec<Vec<String>> = vec![
        vec!["DT".into(), "NN".into(), "VBD".into()],
        vec!["PRP".into(), "VBD".into(), "RB".into()],
    ];
    let vocabulary = NgramVocabulary::fit(&seqs, NgramConfig::default()).unwrap();
    let features = vocabulary.featurize_all(&seqs);
    let svm = train_svm_ovr(&features, &[0, 1], 2, &SvmConfig::default()).unwrap();
    let model = NgramSvm {
        kind: NgramKind::Pos,
        vocabulary,
        svm,
        authors: vec!["a".into(), "b".into()],
    };
    let bytes = model.to_bytes().unwrap();
    assert_eq!(&bytes[..6], b"STSVM1");
    let back = NgramSvm::from_bytes(&bytes).unwrap();
    assert_eq!(back, model);
    assert_eq!(back.vocabulary.column("DT NN"), model.vocabulary.column("DT NN"));
    assert!(NgramSvm::from_bytes(&bytes[..bytes.len() - 3]).is_err());
}
