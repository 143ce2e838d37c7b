use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::tagger::TaggedSentence;

use super::tokenize::TokenizedSentence;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub author_id: usize,
    pub doc_id: String,
    pub text: String,
}

/// Documents read from `root/<author>/<doc>.txt`. Author ids are the
/// positions of the sorted directory names.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub authors: Vec<String>,
    pub documents: Vec<RawDocument>,
}

impl Corpus {
    pub fn num_authors(&self) -> usize {
        self.authors.len()
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut entries: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    Ok(entries)
}

/// Loads a corpus directory, NFC-normalizing every document. Empty files
/// are skipped.
pub fn load_corpus_dir(root: impl AsRef<Path>) -> Result<Corpus> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::MissingCorpus(root.to_path_buf()));
    }
    let authors: Vec<String> = sorted_entries(root)?
        .into_iter()
        .filter(|p| p.is_dir())
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    load_with_authors(root, &authors)
}

/// Loads a corpus whose author directories must be a subset of `authors`
/// (a test corpus labelled against a training corpus).
pub fn load_corpus_dir_with_authors(root: impl AsRef<Path>, authors: &[String]) -> Result<Corpus> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::MissingCorpus(root.to_path_buf()));
    }
    for p in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        if !authors.contains(&name) {
            return Err(Error::Config(format!(
                "author directory `{name}` in {} is not a training author",
                root.display()
            )));
        }
    }
    load_with_authors(root, authors)
}

fn load_with_authors(root: &Path, authors: &[String]) -> Result<Corpus> {
    let mut documents = Vec::new();
    for (author_id, name) in authors.iter().enumerate() {
        let dir = root.join(name);
        if !dir.is_dir() {
            continue;
        }
        for path in sorted_entries(&dir)? {
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let raw = fs::read_to_string(&path)?;
            let text: String = raw.nfc().collect();
            if text.trim().is_empty() {
                log::warn!("skipping empty document {}", path.display());
                continue;
            }
            let stem = path.file_stem().unwrap().to_string_lossy();
            documents.push(RawDocument {
                author_id,
                doc_id: format!("{name}/{stem}"),
                text,
            });
        }
    }
    if documents.is_empty() {
        return Err(Error::MissingCorpus(root.to_path_buf()));
    }
    Ok(Corpus {
        authors: authors.to_vec(),
        documents,
    })
}

/// `M` consecutive sentences of one document: the unit of classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub sentences: Vec<TaggedSentence>,
    pub author_id: usize,
    pub source_doc: String,
    pub position: usize,
}

impl Segment {
    pub fn real_sentences(&self) -> usize {
        self.sentences.iter().filter(|s| !s.is_filler()).count()
    }
}

/// Non-overlapping windows of `m` padded sentences. A trailing remainder of
/// at least `⌈m/2⌉` sentences is filled with all-PAD sentences and kept; a
/// shorter one is dropped.
pub fn segment_document(
    doc_id: &str,
    author_id: usize,
    sentences: &[TaggedSentence],
    m: usize,
) -> Result<Vec<Segment>> {
    assert!(m >= 1, "segment length must be positive");
    let first = sentences
        .first()
        .ok_or_else(|| Error::EmptyDocument(doc_id.to_string()))?;
    let width = first.slots();
    let with_words = first.word_ids.is_some();
    let mut out = Vec::new();
    for (position, chunk) in sentences.chunks(m).enumerate() {
        if chunk.len() < m && chunk.len() < m.div_ceil(2) {
            break;
        }
        let mut sents = chunk.to_vec();
        sents.resize_with(m, || TaggedSentence::filler(width, with_words));
        out.push(Segment {
            sentences: sents,
            author_id,
            source_doc: doc_id.to_string(),
            position,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthorStats {
    pub author: String,
    pub word_count: usize,
    pub sentence_count: usize,
}

impl AuthorStats {
    /// Words per sentence; unrounded.
    pub fn mean_sentence_length(&self) -> f64 {
        if self.sentence_count == 0 {
            0.0
        } else {
            self.word_count as f64 / self.sentence_count as f64
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub authors: Vec<AuthorStats>,
}

/// Exact per-author token and sentence counts. Word count is the sum of the
/// pre-truncation sentence lengths.
pub fn compute_corpus_stats<'a>(
    authors: &[String],
    docs: impl IntoIterator<Item = (usize, &'a [TokenizedSentence])>,
) -> CorpusStats {
    let mut acc: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (author, sentences) in docs {
        let e = acc.entry(author).or_default();
        e.0 += sentences.iter().map(|s| s.length).sum::<usize>();
        e.1 += sentences.len();
    }
    CorpusStats {
        authors: acc
            .into_iter()
            .map(|(a, (word_count, sentence_count))| AuthorStats {
                author: authors.get(a).cloned().unwrap_or_else(|| a.to_string()),
                word_count,
                sentence_count,
            })
            .collect(),
    }
}

impl CorpusStats {
    /// `author,word_count,mean_sentence_length`
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["author", "word_count", "mean_sentence_length"])?;
        for a in &self.authors {
            w.write_record([
                a.author.clone(),
                a.word_count.to_string(),
                format!("{:.2}", a.mean_sentence_length()),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagger::pad_or_truncate;

    fn doc(n: usize) -> Vec<TaggedSentence> {
        (0..n)
            .map(|i| {
                pad_or_truncate(
                    &TaggedSentence::new(vec![format!("w{i}")], vec![(i % 40) as u32]),
                    4,
                )
            })
            .collect()
    }

    #[test]
    fn remainder_at_half_is_kept() {
        let segs = segment_document("d", 0, &doc(250), 100).unwrap();
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[2].real_sentences(), 50);
        assert_eq!(segs[2].sentences.len(), 100);
        assert!(segs[2].sentences[50..].iter().all(|s| s.is_filler() && s.slots() == 4));
    }

    #[test]
    fn exact_fit() {
        assert_eq!(segment_document("d", 0, &doc(100), 100).unwrap().len(), 1);
    }

    #[test]
    fn short_remainder_is_dropped() {
        let segs = segment_document("d", 0, &doc(149), 100).unwrap();
        assert_eq!(segs.len(), 1);
    }

    #[test]
    fn empty_document_errors() {
        assert!(matches!(
            segment_document("d", 0, &[], 10),
            Err(Error::EmptyDocument(_))
        ));
    }

    #[test]
    fn segmentation_is_lossless_up_to_dropped_tail() {
        for n in 1..60 {
            for m in 1..12 {
                let segs = segment_document("d", 3, &doc(n), m).unwrap();
                let kept: usize = segs.iter().map(Segment::real_sentences).sum();
                let tail = n % m;
                let dropped = if tail > 0 && tail < m.div_ceil(2) { tail } else { 0 };
                assert_eq!(kept + dropped, n, "n={n} m={m}");
                assert!(segs.iter().all(|s| s.author_id == 3 && s.sentences.len() == m));
                for (i, s) in segs.iter().enumerate() {
                    assert_eq!(s.position, i);
                }
            }
        }
    }

    fn tok(n: usize) -> TokenizedSentence {
        TokenizedSentence {
            tokens: (0..n).map(|i| i.to_string()).collect(),
            length: n,
        }
    }

    #[test]
    fn stats_single_and_pair() {
        let authors = vec!["a".to_string()];
        let one = [tok(5)];
        let s = compute_corpus_stats(&authors, [(0, &one[..])]);
        assert_eq!(s.authors[0].word_count, 5);
        assert_eq!(s.authors[0].mean_sentence_length(), 5.0);

        let two = [tok(3), tok(5)];
        let s = compute_corpus_stats(&authors, [(0, &two[..])]);
        assert_eq!(s.authors[0].word_count, 8);
        assert_eq!(s.authors[0].mean_sentence_length(), 4.0);
        assert_eq!(s.to_csv().unwrap(), "author,word_count,mean_sentence_length\na,8,4.00\n");
    }

    #[test]
    fn corpus_dir_layout() {
        let dir = tempfile::tempdir().unwrap();
        for (a, d, t) in [("bronte", "one", "It was. A day."), ("austen", "x", "Yes."), ("austen", "y", "")] {
            fs::create_dir_all(dir.path().join(a)).unwrap();
            fs::write(dir.path().join(a).join(format!("{d}.txt")), t).unwrap();
        }
        let c = load_corpus_dir(dir.path()).unwrap();
        assert_eq!(c.authors, vec!["austen", "bronte"]);
        assert_eq!(c.documents.len(), 2);
        assert_eq!(c.documents[0].author_id, 0);
        assert_eq!(c.documents[0].doc_id, "austen/x");
        assert_eq!(c.documents[1].author_id, 1);

        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(load_corpus_dir(empty.path()), Err(Error::MissingCorpus(_))));
        assert!(matches!(load_corpus_dir("/definitely/not/here"), Err(Error::MissingCorpus(_))));
    }

    #[test]
    fn text_is_nfc_normalized() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("a")).unwrap();
        fs::write(dir.path().join("a/d.txt"), "Cafe\u{301}.").unwrap();
        let c = load_corpus_dir(dir.path()).unwrap();
        assert_eq!(c.documents[0].text, "Caf\u{e9}.");
    }
}
