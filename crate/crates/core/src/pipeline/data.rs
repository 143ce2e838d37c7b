use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{
    load_corpus_dir, load_corpus_dir_with_authors, segment_document, split_sentences, split_train_validation,
    tokenize, Corpus, DatasetSplit, Segment, TokenizedSentence, Vocabulary,
};
use crate::error::{Error, Result};
use crate::model::Representation;
use crate::tagger::{pad_or_truncate, parse_pretagged, fixture_tagger, PerceptronTagger, TaggedSentence};

use super::config::RunConfig;

/// A document as tagged, unpadded sentences.
#[derive(Clone, Debug)]
pub struct TaggedDocument {
    pub author_id: usize,
    pub doc_id: String,
    pub sentences: Vec<TaggedSentence>,
}

/// Tokenized sentences of every raw document, unchanged order.
pub fn tokenize_corpus(corpus: &Corpus) -> Vec<Vec<TokenizedSentence>> {
    corpus
        .documents
        .par_iter()
        .map(|d| {
            split_sentences(&d.text)
                .iter()
                .filter_map(|s| tokenize(s).ok())
                .collect()
        })
        .collect()
}

/// The configured tagger, or one trained on the built-in fixture grammar.
pub fn resolve_tagger(cfg: &RunConfig) -> Result<PerceptronTagger> {
    match &cfg.tagger {
        Some(path) => PerceptronTagger::load(path),
        None => {
            log::warn!("no tagger given; using one trained on the built-in fixture grammar");
            fixture_tagger()
        }
    }
}

pub fn tag_corpus(corpus: &Corpus, cfg: &RunConfig, tagger: Option<&PerceptronTagger>) -> Result<Vec<TaggedDocument>> {
    let docs: Vec<Vec<TaggedSentence>> = if cfg.pretagged {
        corpus
            .documents
            .par_iter()
            .map(|d| parse_pretagged(&d.text).map(|p| p.sentences))
            .collect::<Result<_>>()?
    } else {
        let owned;
        let tagger = match tagger {
            Some(t) => t,
            None => {
                owned = resolve_tagger(cfg)?;
                &owned
            }
        };
        tokenize_corpus(corpus)
            .into_par_iter()
            .map(|sents| sents.iter().map(|s| tagger.tag_sentence(&s.tokens)).collect())
            .collect()
    };
    Ok(corpus
        .documents
        .iter()
        .zip(docs)
        .map(|(d, sentences)| TaggedDocument {
            author_id: d.author_id,
            doc_id: d.doc_id.clone(),
            sentences,
        })
        .collect())
}

/// Padded `M`-sentence segments of every document with at least one
/// sentence. Word ids are assigned first when `vocab` is given.
pub fn segment_corpus(docs: &[TaggedDocument], m: usize, n: usize, vocab: Option<&Vocabulary>) -> Result<Vec<Segment>> {
    let per_doc: Vec<Vec<Segment>> = docs
        .par_iter()
        .filter(|d| !d.sentences.is_empty())
        .map(|d| {
            let padded: Vec<TaggedSentence> = d
                .sentences
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    if let Some(v) = vocab {
                        v.assign(&mut s);
                    }
                    pad_or_truncate(&s, n)
                })
                .collect();
            segment_document(&d.doc_id, d.author_id, &padded, m)
        })
        .collect::<Result<_>>()?;
    Ok(per_doc.into_iter().flatten().collect())
}

/// Tagged documents plus the split, ready for training.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub authors: Vec<String>,
    pub train_docs: Vec<TaggedDocument>,
    pub test_docs: Option<Vec<TaggedDocument>>,
    pub vocabulary: Option<Vocabulary>,
    pub split: DatasetSplit,
}

pub fn load_tagged(cfg: &RunConfig, path: &Path, authors: Option<&[String]>) -> Result<(Vec<String>, Vec<TaggedDocument>)> {
    let corpus = match authors {
        Some(a) => load_corpus_dir_with_authors(path, a)?,
        None => load_corpus_dir(path)?,
    };
    if corpus.num_authors() < 2 {
        return Err(Error::Config(format!("{} has fewer than two author directories", path.display())));
    }
    let tagger = if cfg.pretagged { None } else { Some(resolve_tagger(cfg)?) };
    let docs = tag_corpus(&corpus, cfg, tagger.as_ref())?;
    Ok((corpus.authors, docs))
}

/// Ingests the training (and test) corpus and splits off validation.
pub fn prepare(cfg: &RunConfig) -> Result<PreparedData> {
    let path = cfg
        .corpus
        .as_deref()
        .ok_or_else(|| Error::Config("no corpus given (--corpus)".into()))?;
    let (authors, train_docs) = load_tagged(cfg, path, None)?;
    let test_docs = match &cfg.test_corpus {
        Some(p) => Some(load_tagged(cfg, p, Some(&authors))?.1),
        None => None,
    };
    prepare_from(cfg, authors, train_docs, test_docs)
}

pub fn prepare_from(
    cfg: &RunConfig,
    authors: Vec<String>,
    train_docs: Vec<TaggedDocument>,
    test_docs: Option<Vec<TaggedDocument>>,
) -> Result<PreparedData> {
    let vocabulary = (cfg.model.mode.representation == Representation::Lexical).then(|| {
        Vocabulary::build(
            train_docs.iter().flat_map(|d| d.sentences.iter().flat_map(|s| s.tokens.iter().map(String::as_str))),
            cfg.model.vocabulary_cap,
        )
    });
    let (m, n) = (cfg.model.segment_len, cfg.model.sentence_len);
    let train = segment_corpus(&train_docs, m, n, vocabulary.as_ref())?;
    if train.is_empty() {
        return Err(Error::NoTrainingData);
    }
    let test = match &test_docs {
        Some(d) => segment_corpus(d, m, n, vocabulary.as_ref())?,
        None => Vec::new(),
    };
    let split = split_train_validation(train, test, cfg.training.validation_fraction, cfg.training.seed);
    Ok(PreparedData {
        authors,
        train_docs,
        test_docs,
        vocabulary,
        split,
    })
}

impl PreparedData {
    /// The scored set: the test corpus if one was given, else validation.
    pub fn evaluation_segments(&self) -> &[Segment] {
        if self.test_docs.is_some() {
            &self.split.test
        } else {
            &self.split.validation
        }
    }
}
