use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Segment;
use crate::error::{Error, Result};

/// The first `⌊fraction · n⌋` of the `n` segments each document has in
/// `segments`, ordered by position.
pub fn leading_fraction(segments: &[Segment], fraction: f64, classes: usize) -> Result<Vec<Segment>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("ablation fraction {fraction} is outside (0, 1]")));
    }
    let mut per_doc: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for s in segments {
        per_doc.entry(&s.source_doc).or_default().push(s.position);
    }
    let mut cutoff: BTreeMap<&str, usize> = BTreeMap::new();
    for (doc, mut positions) in per_doc {
        positions.sort_unstable();
        let n = (fraction * positions.len() as f64).floor() as usize;
        cutoff.insert(doc, if n == 0 { 0 } else { positions[n - 1] + 1 });
    }
    let keep: Vec<Segment> = segments
        .iter()
        .filter(|s| s.position < cutoff[s.source_doc.as_str()])
        .cloned()
        .collect();
    for author in 0..classes {
        let present = segments.iter().any(|s| s.author_id == author);
        if present && !keep.iter().any(|s| s.author_id == author) {
            return Err(Error::InsufficientData(author));
        }
    }
    Ok(keep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationPoint {
    pub fraction: f64,
    pub train_segments: usize,
    pub segment_accuracy: f64,
    pub document_accuracy: f64,
}

/// Runs `train_and_test` on the leading fraction of the training segments
/// for every grid point. The closure returns (segment, document) accuracy on
/// the full test set.
pub fn length_ablation<F>(fractions: &[f64], train: &[Segment], classes: usize, mut train_and_test: F) -> Result<Vec<AblationPoint>>
where
    F: FnMut(f64, &[Segment]) -> Result<(f64, f64)>,
{
    let mut out = Vec::with_capacity(fractions.len());
    for &f in fractions {
        let subset = leading_fraction(train, f, classes)?;
        let (segment_accuracy, document_accuracy) = train_and_test(f, &subset)?;
        out.push(AblationPoint {
            fraction: f,
            train_segments: subset.len(),
            segment_accuracy,
            document_accuracy,
        });
    }
    Ok(out)
}

/// `fraction,train_segments,segment_accuracy,document_accuracy`
pub fn ablation_csv(points: &[AblationPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(p)?;
    }
    if points.is_empty() {
        w.write_record(["fraction", "train_segments", "segment_accuracy", "document_accuracy"])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}
