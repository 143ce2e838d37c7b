mod common;

use proptest::prelude::*;
use stylo::corpus::Segment;
use stylo::eval::{
    ablation_csv, attention_csv, confusion, export_attention, leading_fraction, length_ablation, majority_vote,
    report, SegmentPrediction,
};
use stylo::model::{EncoderKind, SyntacticModel};
use stylo::numkernel::Rng;
use stylo::Error;

use common::oracles::{brute_force_vote, random_probs};
use common::{random_segment, tiny_hyper};

fn random_predictions(rng: &mut Rng, docs: usize, classes: usize) -> Vec<SegmentPrediction> {
    let mut out = Vec::new();
    for d in 0..docs {
        let label = rng.below(classes);
        for p in 0..1 + rng.below(6) {
            out.push(SegmentPrediction::new(format!("doc{d}"), p, label, random_probs(rng, classes)));
        }
    }
    out
}

#[test]
fn vote_matches_brute_force() {
    let mut rng = Rng::seeded(7);
    for _ in 0..1000 {
        let classes = 2 + rng.below(4);
        let preds: Vec<_> = (0..1 + rng.below(7))
            .map(|i| SegmentPrediction::new("d", i, 0, random_probs(&mut rng, classes)))
            .collect();
        assert_eq!(majority_vote(&preds).unwrap(), brute_force_vote(&preds));
    }
    assert!(matches!(majority_vote(&[]), Err(Error::NoSegments)));
}

#[test]
fn confusion_matches_tally() {
    let mut rng = Rng::seeded(8);
    for _ in 0..50 {
        let classes = 2 + rng.below(5);
        let preds = random_predictions(&mut rng, 10, classes);
        let cm = confusion(&preds, classes).unwrap();
        for i in 0..classes {
            for j in 0..classes {
                let n = preds.iter().filter(|p| p.label == i && p.predicted == j).count();
                assert_eq!(cm.counts[i][j], n);
            }
            let row: usize = cm.counts[i].iter().sum();
            assert_eq!(row, preds.iter().filter(|p| p.label == i).count());
        }
        let streaming = preds.iter().filter(|p| p.label == p.predicted).count() as f64 / preds.len() as f64;
        let names: Vec<String> = (0..classes).map(|c| format!("a{c}")).collect();
        let r = report(&preds, &names).unwrap();
        assert_eq!(r.segment_accuracy, streaming);
        assert_eq!(r.segment_accuracy, cm.trace() as f64 / cm.total() as f64);
        assert_eq!(r.document_accuracy, r.documents_correct as f64 / r.documents_total as f64);
    }
}

#[test]
fn report_aggregates_per_document_reports() {
    let mut rng = Rng::seeded(9);
    let names: Vec<String> = (0..3).map(|c| format!("a{c}")).collect();
    let preds = random_predictions(&mut rng, 12, 3);
    let whole = report(&preds, &names).unwrap();
    let mut correct = 0;
    let mut counts = vec![vec![0; 3]; 3];
    for d in 0..12 {
        let part: Vec<_> = preds.iter().filter(|p| p.source_doc == format!("doc{d}")).cloned().collect();
        let r = report(&part, &names).unwrap();
        correct += r.documents_correct;
        for i in 0..3 {
            for j in 0..3 {
                counts[i][j] += r.confusion.counts[i][j];
            }
        }
    }
    assert_eq!(whole.documents_correct, correct);
    assert_eq!(whole.confusion.counts, counts);
    assert_eq!(whole.documents, format!("{correct}/12"));
}

proptest! {
    #[test]
    fn strict_majority_ignores_order(seed in 0u64..10_000) {
        let mut rng = Rng::seeded(seed);
        let mut preds: Vec<_> = (0..1 + rng.below(9))
            .map(|i| SegmentPrediction::new("d", i, 0, random_probs(&mut rng, 3)))
            .collect();
        let winner = majority_vote(&preds).unwrap();
        let strict = 2 * preds.iter().filter(|p| p.predicted == winner).count() > preds.len();
        rng.shuffle(&mut preds);
        if strict {
            prop_assert_eq!(majority_vote(&preds).unwrap(), winner);
        }
    }
}

fn segments_for(docs: &[(usize, usize)]) -> Vec<Segment> {
    let h = tiny_hyper(EncoderKind::Cnn);
    let mut rng = Rng::seeded(1);
    let mut out = Vec::new();
    for (d, &(author, n)) in docs.iter().enumerate() {
        for p in 0..n {
            out.push(Segment {
                sentences: random_segment(&mut rng, &h),
                author_id: author,
                source_doc: format!("doc{d}"),
                position: p,
            });
        }
    }
    out
}

#[test]
fn ablation_fractions() {
    let segs = segments_for(&[(0, 10), (1, 4), (1, 5)]);
    assert_eq!(leading_fraction(&segs, 1.0, 2).unwrap(), segs);
    let half = leading_fraction(&segs, 0.5, 2).unwrap();
    assert_eq!(half.len(), 5 + 2 + 2);
    assert!(half.iter().all(|s| s.position < 5));
    assert!(matches!(leading_fraction(&segs, 0.001, 2), Err(Error::InsufficientData(0))));
    assert!(leading_fraction(&segs, 0.0, 2).is_err());

    let gapped: Vec<_> = segs.iter().filter(|s| s.position % 3 != 1).cloned().collect();
    assert_eq!(leading_fraction(&gapped, 1.0, 2).unwrap(), gapped);
    let first_half = leading_fraction(&gapped, 0.5, 2).unwrap();
    let doc0 = first_half.iter().filter(|s| s.source_doc == gapped[0].source_doc).count();
    let total0 = gapped.iter().filter(|s| s.source_doc == gapped[0].source_doc).count();
    assert_eq!(doc0, total0 / 2);

    let points = length_ablation(&[0.5, 1.0], &segs, 2, |f, sub| Ok((f, sub.len() as f64))).unwrap();
    assert_eq!(points[1].train_segments, 19);
    let csv = ablation_csv(&points).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "fraction,train_segments,segment_accuracy,document_accuracy");
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn attention_export_sums_to_one() {
    let segs = segments_for(&[(0, 30)]);
    let model = SyntacticModel::<f64>::new(tiny_hyper(EncoderKind::Lstm), 3).unwrap();
    for s in &segs {
        let rows = export_attention(&model, s).unwrap();
        assert_eq!(rows.len(), 3);
        let total: f64 = rows.iter().map(|r| r.alpha).sum();
        assert!((total - 1.0).abs() <= 1e-6);
    }
    let mut h = tiny_hyper(EncoderKind::Cnn);
    h.segment_len = 1;
    let model = SyntacticModel::<f64>::new(h.clone(), 0).unwrap();
    let seg = Segment {
        sentences: random_segment(&mut Rng::seeded(2), &h),
        author_id: 0,
        source_doc: "x".into(),
        position: 4,
    };
    let rows = export_attention(&model, &seg).unwrap();
    assert_eq!(rows[0].alpha, 1.0);
    let csv = attention_csv(&rows).unwrap();
    assert!(csv.starts_with("doc,segment,sentence_index,alpha,text\nx,4,0,1.0,"));
}
