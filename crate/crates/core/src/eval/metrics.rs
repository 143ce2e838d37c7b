use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One classified segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentPrediction {
    pub source_doc: String,
    pub position: usize,
    pub label: usize,
    pub predicted: usize,
    pub probs: Vec<f64>,
}

impl SegmentPrediction {
    /// Predicted class is the arg-max of `probs`, lowest index on ties.
    pub fn new(source_doc: impl Into<String>, position: usize, label: usize, probs: Vec<f64>) -> Self {
        let mut predicted = 0;
        for (c, &p) in probs.iter().enumerate() {
            if p > probs[predicted] {
                predicted = c;
            }
        }
        Self {
            source_doc: source_doc.into(),
            position,
            label,
            predicted,
            probs,
        }
    }
}

/// Document label from its segments: the most frequent prediction; ties go
/// to the larger summed probability, then to the lower class index.
pub fn majority_vote(predictions: &[SegmentPrediction]) -> Result<usize> {
    let first = predictions.first().ok_or(Error::NoSegments)?;
    let classes = predictions
        .iter()
        .map(|p| p.probs.len().max(p.predicted + 1))
        .max()
        .unwrap_or(first.probs.len());
    let mut votes = vec![0usize; classes];
    let mut mass = vec![0.0f64; classes];
    for p in predictions {
        votes[p.predicted] += 1;
        for (m, &x) in mass.iter_mut().zip(&p.probs) {
            *m += x;
        }
    }
    let mut best = 0;
    for c in 1..classes {
        if votes[c] > votes[best] || (votes[c] == votes[best] && mass[c] > mass[best]) {
            best = c;
        }
    }
    Ok(best)
}

/// `counts[i][j]`: segments of author `i` predicted as `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.classes()).map(|i| self.counts[i][i]).sum()
    }

    /// Per-class recall; NaN for a class with no segments.
    pub fn recall(&self) -> Vec<f64> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, row)| row[i] as f64 / row.iter().sum::<usize>() as f64)
            .collect()
    }

    /// Header row of class labels, then one row per true class.
    pub fn to_csv(&self, labels: &[String]) -> Result<String> {
        let name = |i: usize| labels.get(i).cloned().unwrap_or_else(|| i.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["author".to_string()];
        header.extend((0..self.classes()).map(name));
        w.write_record(&header)?;
        for (i, row) in self.counts.iter().enumerate() {
            let mut rec = vec![name(i)];
            rec.extend(row.iter().map(usize::to_string));
            w.write_record(&rec)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }
}

pub fn confusion(predictions: &[SegmentPrediction], classes: usize) -> Result<ConfusionMatrix> {
    let mut counts = vec![vec![0; classes]; classes];
    for p in predictions {
        if p.label >= classes || p.predicted >= classes {
            return Err(Error::BadLabel {
                label: p.label.max(p.predicted),
                classes,
            });
        }
        counts[p.label][p.predicted] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocumentResult {
    pub doc: String,
    pub label: usize,
    pub predicted: usize,
    pub segments: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub authors: Vec<String>,
    pub segments: usize,
    pub segment_accuracy: f64,
    pub documents_correct: usize,
    pub documents_total: usize,
    pub document_accuracy: f64,
    /// Percentages to two decimals, e.g. `"78.76"`.
    pub segment_accuracy_pct: String,
    pub document_accuracy_pct: String,
    /// `"k/n"`.
    pub documents: String,
    pub per_class_recall: Vec<Option<f64>>,
    pub confusion: ConfusionMatrix,
    pub document_results: Vec<DocumentResult>,
}

/// Groups segment predictions by source document, in document-id order.
pub fn by_document(predictions: &[SegmentPrediction]) -> BTreeMap<&str, Vec<SegmentPrediction>> {
    let mut docs: BTreeMap<&str, Vec<SegmentPrediction>> = BTreeMap::new();
    for p in predictions {
        docs.entry(&p.source_doc).or_default().push(p.clone());
    }
    docs
}

pub fn report(predictions: &[SegmentPrediction], authors: &[String]) -> Result<MetricsReport> {
    let classes = authors.len();
    let confusion = confusion(predictions, classes)?;
    let mut document_results = Vec::new();
    for (doc, preds) in by_document(predictions) {
        document_results.push(DocumentResult {
            doc: doc.to_string(),
            label: preds[0].label,
            predicted: majority_vote(&preds)?,
            segments: preds.len(),
        });
    }
    let documents_total = document_results.len();
    let documents_correct = document_results.iter().filter(|d| d.label == d.predicted).count();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let segment_accuracy = ratio(confusion.trace(), confusion.total());
    let document_accuracy = ratio(documents_correct, documents_total);
    Ok(MetricsReport {
        authors: authors.to_vec(),
        segments: predictions.len(),
        segment_accuracy,
        documents_correct,
        documents_total,
        document_accuracy,
        segment_accuracy_pct: format!("{:.2}", 100.0 * segment_accuracy),
        document_accuracy_pct: format!("{:.2}", 100.0 * document_accuracy),
        documents: format!("{documents_correct}/{documents_total}"),
        per_class_recall: confusion.recall().into_iter().map(|r| r.is_finite().then_some(r)).collect(),
        confusion,
        document_results,
    })
}
