//! Loading pretrained word vectors (GloVe-style text) into an embedding table.

use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::numkernel::{Matrix, Rng};
use crate::scalar::Scalar;
use crate::tagger::WORD_PAD;

use super::params::glorot;

/// Embedding table filled from pretrained vectors.
#[derive(Clone, Debug)]
pub struct WordEmbeddings<T> {
    pub table: Matrix<T>,
    /// Fraction of vocabulary words found in the file.
    pub coverage: f64,
}

/// Reads `word v1 … v_dim` lines. Rows of vocabulary words found in the file
/// are copied in; misses and UNK keep a scaled-uniform draw; PAD is zero.
/// A leading `count dim` line (word2vec text format) is skipped.
pub fn read_pretrained_embeddings<T: Scalar>(
    reader: impl BufRead,
    vocab: &Vocabulary,
    dim: usize,
    rng: &mut Rng,
) -> Result<WordEmbeddings<T>> {
    let mut table: Matrix<T> = glorot(vocab.table_rows(), dim, rng);
    table.row_mut(WORD_PAD as usize).fill(T::zero());
    let mut filled = vec![false; vocab.table_rows()];
    let mut hits = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let values: Vec<&str> = fields.collect();
        if i == 0 && values.len() == 1 && word.parse::<usize>().is_ok() && values[0].parse::<usize>().is_ok() {
            continue;
        }
        if values.len() != dim {
            return Err(Error::EmbeddingDimMismatch {
                line: i + 1,
                expected: dim,
                found: values.len(),
            });
        }
        let id = vocab.id(word) as usize;
        if id < 2 || filled[id] {
            continue;
        }
        let row = table.row_mut(id);
        for (slot, v) in row.iter_mut().zip(&values) {
            let v: f64 = v.parse().map_err(|_| Error::EmbeddingDimMismatch {
                line: i + 1,
                expected: dim,
                found: values.len(),
            })?;
            *slot = T::of(v);
        }
        filled[id] = true;
        hits += 1;
    }
    let coverage = if vocab.words.is_empty() {
        0.0
    } else {
        hits as f64 / vocab.words.len() as f64
    };
    log::info!("pretrained embeddings cover {:.2}% of the vocabulary", 100.0 * coverage);
    Ok(WordEmbeddings { table, coverage })
}

pub fn load_pretrained_embeddings<T: Scalar>(
    path: impl AsRef<Path>,
    vocab: &Vocabulary,
    dim: usize,
    rng: &mut Rng,
) -> Result<WordEmbeddings<T>> {
    let f = std::fs::File::open(path)?;
    read_pretrained_embeddings(BufReader::new(f), vocab, dim, rng)
}
