use serde::{Deserialize, Serialize};

use crate::corpus::Segment;
use crate::error::Result;
use crate::model::SyntacticModel;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionRow {
    pub doc: String,
    pub segment: usize,
    pub sentence_index: usize,
    pub alpha: f64,
    pub text: String,
}

/// Attention weight of every sentence of `segment`, with its surface text.
pub fn export_attention<T: Scalar>(model: &SyntacticModel<T>, segment: &Segment) -> Result<Vec<AttentionRow>> {
    let (_, alpha) = model.predict(&segment.sentences)?;
    Ok(alpha
        .iter()
        .zip(&segment.sentences)
        .enumerate()
        .map(|(i, (&a, s))| AttentionRow {
            doc: segment.source_doc.clone(),
            segment: segment.position,
            sentence_index: i,
            alpha: a.as_f64(),
            text: s.text(),
        })
        .collect())
}

/// `doc,segment,sentence_index,alpha,text`
pub fn attention_csv(rows: &[AttentionRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["doc", "segment", "sentence_index", "alpha", "text"])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}
