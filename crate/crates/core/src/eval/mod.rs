//! Segment and document metrics, the length ablation and attention export.

mod ablation;
mod attention;
mod metrics;

pub use ablation::{ablation_csv, leading_fraction, length_ablation, AblationPoint};
pub use attention::{attention_csv, export_attention, AttentionRow};
pub use metrics::{
    by_document, confusion, majority_vote, report, ConfusionMatrix, DocumentResult, MetricsReport,
    SegmentPrediction,
};

use crate::corpus::Segment;
use crate::error::Result;
use crate::model::SyntacticModel;
use crate::scalar::Scalar;
use crate::training::evaluate;

/// Classifies every segment with `model`.
pub fn predict_segments<T: Scalar>(model: &SyntacticModel<T>, segments: &[Segment]) -> Result<Vec<SegmentPrediction>> {
    let ev = evaluate(model, segments)?;
    Ok(segments
        .iter()
        .zip(ev.probs)
        .map(|(s, p)| SegmentPrediction::new(s.source_doc.clone(), s.position, s.author_id, p.iter().map(|x| x.as_f64()).collect()))
        .collect())
}
