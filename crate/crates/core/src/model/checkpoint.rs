//! Binary model files.
//!
//! ```text
//! "STMOD1"  u64 LE header length  JSON header  f32 LE blocks
//! ```
//!
//! Blocks follow [`Params::layout`](super::Params::layout) order, first for
//! the model and then for each extra parameter set (optimizer moments in a
//! training checkpoint). Shapes of every block are listed in the header.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{Matrix, RNG_ALGORITHM};
use crate::scalar::Scalar;
use crate::tagger::TagSet;

use super::config::Hyperparams;
use super::network::SyntacticModel;
use super::params::Params;

pub const MODEL_MAGIC: &[u8; 6] = b"STMOD1";

/// Descriptive metadata carried alongside the weights.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub seed: u64,
    /// Author names in class-id order.
    pub authors: Vec<String>,
    /// Word list of a lexical model, ids starting at 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocabulary: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Header {
    hyper: Hyperparams,
    tagset: String,
    rng_algorithm: String,
    meta: ModelMeta,
    /// `(name, rows, cols)` for every stored block.
    blocks: Vec<(String, usize, usize)>,
    extra_sets: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    training: Option<serde_json::Value>,
}

/// A model read back from disk.
#[derive(Clone, Debug)]
pub struct LoadedModel<T> {
    pub model: SyntacticModel<T>,
    pub meta: ModelMeta,
    pub training: Option<serde_json::Value>,
    pub extra: Vec<Params<T>>,
}

pub fn model_to_bytes<T: Scalar>(
    model: &SyntacticModel<T>,
    meta: &ModelMeta,
    training: Option<serde_json::Value>,
    extra: &[&Params<T>],
) -> Result<Vec<u8>> {
    let mut blocks = Vec::new();
    let mut data: Vec<&Matrix<T>> = Vec::new();
    let sets = std::iter::once(&model.params).chain(extra.iter().copied());
    for (set, params) in sets.enumerate() {
        for ((name, _), m) in params.layout().into_iter().zip(params.matrices()) {
            let name = if set == 0 { name } else { format!("extra{set}.{name}") };
            blocks.push((name, m.rows(), m.cols()));
            data.push(m);
        }
    }
    let header = Header {
        hyper: model.hyper.clone(),
        tagset: TagSet::standard().hash(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        meta: meta.clone(),
        blocks,
        extra_sets: extra.len(),
        training,
    };
    let json = serde_json::to_vec(&header)?;
    let floats: usize = data.iter().map(|m| m.len()).sum();
    let mut out = Vec::with_capacity(MODEL_MAGIC.len() + 8 + json.len() + 4 * floats);
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for m in data {
        for &v in m.data() {
            out.extend_from_slice(&v.to_f32().unwrap_or(f32::NAN).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn model_from_bytes<T: Scalar>(bytes: &[u8]) -> Result<LoadedModel<T>> {
    let bad = |m: &str| Error::BadCheckpoint(m.to_string());
    let rest = bytes
        .strip_prefix(MODEL_MAGIC.as_slice())
        .ok_or_else(|| bad("missing STMOD1 magic"))?;
    if rest.len() < 8 {
        return Err(bad("truncated header length"));
    }
    let (len, rest) = rest.split_at(8);
    let len = u64::from_le_bytes(len.try_into().expect("8 bytes")) as usize;
    if rest.len() < len {
        return Err(bad("truncated header"));
    }
    let (json, mut body) = rest.split_at(len);
    let header: Header = serde_json::from_slice(json)?;
    if header.tagset != TagSet::standard().hash() {
        return Err(bad("tag inventory differs from this build"));
    }
    if header.rng_algorithm != RNG_ALGORITHM {
        return Err(bad("unknown RNG algorithm"));
    }
    header.hyper.validate()?;
    let mut model = SyntacticModel::<T>::new(header.hyper.clone(), 0)?;
    let mut extra: Vec<Params<T>> = (0..header.extra_sets)
        .map(|_| model.params.zeros_like(true))
        .collect();
    let mut shapes = header.blocks.iter();
    for params in std::iter::once(&mut model.params).chain(extra.iter_mut()) {
        for m in params.matrices_mut() {
            let &(ref name, rows, cols) = shapes.next().ok_or_else(|| bad("too few blocks"))?;
            let n = rows * cols;
            if body.len() < 4 * n {
                return Err(bad("truncated block data"));
            }
            let values = body[..4 * n]
                .chunks_exact(4)
                .map(|c| T::of(f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64))
                .collect();
            body = &body[4 * n..];
            if (rows, cols) != m.shape() && n != 0 {
                return Err(Error::BadCheckpoint(format!(
                    "block {name} is {rows}x{cols}, expected {:?}",
                    m.shape()
                )));
            }
            *m = Matrix::new(rows, cols, values)?;
        }
    }
    if shapes.next().is_some() || !body.is_empty() {
        return Err(bad("trailing data"));
    }
    Ok(LoadedModel {
        model,
        meta: header.meta,
        training: header.training,
        extra,
    })
}

pub fn save_model<T: Scalar>(
    path: impl AsRef<Path>,
    model: &SyntacticModel<T>,
    meta: &ModelMeta,
) -> Result<()> {
    write_atomic(path.as_ref(), &model_to_bytes(model, meta, None, &[])?)
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<LoadedModel<T>> {
    model_from_bytes(&std::fs::read(path)?)
}

/// Writes through a sibling temp file so a crash never leaves half a file.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
