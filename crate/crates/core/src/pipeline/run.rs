use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    predict_svm, segment_symbols, train_svm_ovr, NgramKind, NgramSvm, NgramVocabulary,
};
use crate::corpus::{compute_corpus_stats, load_corpus_dir, CorpusStats, Segment, TokenizedSentence, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::{
    ablation_csv, attention_csv, export_attention, leading_fraction, predict_segments, report, AblationPoint,
    AttentionRow, MetricsReport, SegmentPrediction,
};
use crate::model::{load_model, load_pretrained_embeddings, ModelMeta, Representation, SyntacticModel};
use crate::numkernel::{softmax, Rng};
use crate::scalar::Scalar;
use crate::tagger::{to_pretagged, TAG_VOCAB};
use crate::training::{fit, fit_from, Trainer};

use super::config::{Precision, RunConfig};
use super::data::{load_tagged, prepare, prepare_from, segment_corpus, tokenize_corpus, PreparedData};

/// Stream of the run seed used to fill word vectors missing from the
/// pretrained file.
pub const EMBEDDING_STREAM: u64 = 3;

/// Writes `metrics.json`, `confusion.csv` and `predictions.csv`.
pub fn write_report(out: &Path, report: &MetricsReport, predictions: &[SegmentPrediction]) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("metrics.json"), serde_json::to_string_pretty(report)? + "\n")?;
    fs::write(out.join("confusion.csv"), report.confusion.to_csv(&report.authors)?)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["doc", "position", "label", "predicted", "confidence"])?;
    for p in predictions {
        w.write_record([
            p.source_doc.clone(),
            p.position.to_string(),
            p.label.to_string(),
            p.predicted.to_string(),
            format!("{:.6}", p.probs.get(p.predicted).copied().unwrap_or(f64::NAN)),
        ])?;
    }
    fs::write(out.join("predictions.csv"), w.into_inner().map_err(|e| e.into_error())?)?;
    Ok(())
}

fn build_model<T: Scalar>(cfg: &RunConfig, data: &PreparedData) -> Result<SyntacticModel<T>> {
    let lexical = cfg.model.mode.representation == Representation::Lexical;
    let vocab_rows = data.vocabulary.as_ref().map_or(TAG_VOCAB, Vocabulary::table_rows);
    let pretrained = lexical && cfg.embeddings.is_some();
    let hyper = cfg.model.hyperparams(data.authors.len(), vocab_rows, pretrained);
    let mut model = SyntacticModel::<T>::new(hyper, cfg.training.seed)?;
    if let (true, Some(path), Some(vocab)) = (lexical, &cfg.embeddings, &data.vocabulary) {
        let mut rng = Rng::seeded(cfg.training.seed).fork(EMBEDDING_STREAM);
        model.params.embedding = load_pretrained_embeddings(path, vocab, cfg.model.word_dim, &mut rng)?.table;
    } else if lexical {
        log::warn!("lexical model without pretrained vectors: word embeddings start random and are trained");
    }
    Ok(model)
}

fn meta(cfg: &RunConfig, data: &PreparedData) -> ModelMeta {
    ModelMeta {
        seed: cfg.training.seed,
        authors: data.authors.clone(),
        vocabulary: data.vocabulary.as_ref().map(|v| v.words.clone()),
    }
}

/// Summary of a training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub report: MetricsReport,
    pub best_epoch: usize,
    pub best_val_acc: f64,
}

fn train_typed<T: Scalar>(cfg: &RunConfig, data: &PreparedData, out: Option<&Path>, resume: bool) -> Result<TrainSummary> {
    let hash = cfg.hash()?;
    let checkpoint = out.map(|o| o.join("checkpoint.stmod"));
    let outcome = match checkpoint.filter(|c| resume && c.exists()) {
        Some(path) => {
            let trainer = Trainer::<T>::load(&path)?;
            if trainer.config_hash != hash {
                return Err(Error::Config(format!("{} was written by a different configuration", path.display())));
            }
            log::info!("resuming after epoch {}", trainer.epoch);
            fit_from(trainer, &data.split.train, &data.split.validation, out)?
        }
        None => fit(
            build_model::<T>(cfg, data)?,
            &data.split.train,
            &data.split.validation,
            &cfg.training,
            meta(cfg, data),
            hash,
            out,
        )?,
    };
    let predictions = predict_segments(&outcome.best, data.evaluation_segments())?;
    let report = report(&predictions, &data.authors)?;
    if let Some(out) = out {
        write_report(out, &report, &predictions)?;
    }
    Ok(TrainSummary {
        report,
        best_epoch: outcome.best_epoch,
        best_val_acc: outcome.best_val_acc,
    })
}

/// Fits and scores a model on already prepared data.
pub fn train_prepared(cfg: &RunConfig, data: &PreparedData, out: Option<&Path>, resume: bool) -> Result<TrainSummary> {
    cfg.validate()?;
    if let Some(out) = out {
        fs::create_dir_all(out)?;
        fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    }
    match cfg.precision {
        Precision::F32 => train_typed::<f32>(cfg, data, out, resume),
        Precision::F64 => train_typed::<f64>(cfg, data, out, resume),
    }
}

/// Ingest, tag, segment, fit and evaluate. The run directory receives the
/// resolved `config.toml`, checkpoints, `history.csv` and the reports.
pub fn train_run(cfg: &RunConfig, out: &Path, resume: bool) -> Result<TrainSummary> {
    cfg.validate()?;
    let data = prepare(cfg)?;
    train_prepared(cfg, &data, Some(out), resume)
}

fn eval_typed<T: Scalar>(cfg: &RunConfig, model_path: &Path, corpus: &Path, out: &Path) -> Result<MetricsReport> {
    let loaded = load_model::<T>(model_path)?;
    let (model, meta) = (loaded.model, loaded.meta);
    let (_, docs) = load_tagged(cfg, corpus, Some(&meta.authors))?;
    let vocab = meta.vocabulary.clone().map(Vocabulary::from_words);
    let segments = segment_corpus(&docs, model.hyper.segment_len, model.hyper.sentence_len, vocab.as_ref())?;
    if segments.is_empty() {
        return Err(Error::NoSegments);
    }
    let predictions = predict_segments(&model, &segments)?;
    let report = report(&predictions, &meta.authors)?;
    write_report(out, &report, &predictions)?;
    Ok(report)
}

/// Scores a saved model on a labelled corpus.
pub fn eval_run(cfg: &RunConfig, model_path: &Path, corpus: &Path, out: &Path) -> Result<MetricsReport> {
    match cfg.precision {
        Precision::F32 => eval_typed::<f32>(cfg, model_path, corpus, out),
        Precision::F64 => eval_typed::<f64>(cfg, model_path, corpus, out),
    }
}

/// Per-class softmax of the SVM scores, used only to break vote ties.
fn svm_predictions(model: &NgramSvm, segments: &[Segment]) -> Result<Vec<SegmentPrediction>> {
    segments
        .par_iter()
        .map(|s| {
            let x = model.vocabulary.featurize(&segment_symbols(s, model.kind));
            let (_, scores) = predict_svm(&model.svm, &x)?;
            Ok(SegmentPrediction::new(s.source_doc.clone(), s.position, s.author_id, softmax(&scores)))
        })
        .collect()
}

/// Fits an n-gram SVM on prepared data. With a test corpus the validation
/// split is folded back into training.
pub fn baseline_prepared(cfg: &RunConfig, data: &PreparedData, kind: NgramKind, out: Option<&Path>) -> Result<MetricsReport> {
    let mut train: Vec<&Segment> = data.split.train.iter().collect();
    if data.test_docs.is_some() {
        train.extend(&data.split.validation);
    }
    let sequences: Vec<Vec<String>> = train.par_iter().map(|s| segment_symbols(s, kind)).collect();
    let vocabulary = NgramVocabulary::fit(&sequences, cfg.baseline.ngram.clone())?;
    let features = vocabulary.featurize_all(&sequences);
    let labels: Vec<usize> = train.iter().map(|s| s.author_id).collect();
    let svm = train_svm_ovr(&features, &labels, data.authors.len(), &cfg.baseline.svm)?;
    let model = NgramSvm {
        kind,
        vocabulary,
        svm,
        authors: data.authors.clone(),
    };
    let predictions = svm_predictions(&model, data.evaluation_segments())?;
    let report = report(&predictions, &data.authors)?;
    if let Some(out) = out {
        fs::create_dir_all(out)?;
        fs::write(out.join("config.toml"), cfg.to_toml()?)?;
        model.save(out.join("baseline.stsvm"))?;
        write_report(out, &report, &predictions)?;
    }
    Ok(report)
}

pub fn baseline_run(cfg: &RunConfig, kind: NgramKind, out: &Path) -> Result<MetricsReport> {
    let data = prepare(cfg)?;
    baseline_prepared(cfg, &data, kind, Some(out))
}

/// Grid of a sweep; every combination is run once per seed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub windows: Vec<Vec<usize>>,
    pub conv_layers: Vec<usize>,
    pub sentence_len: Vec<usize>,
    pub segment_len: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl SweepGrid {
    /// Every configuration × seed; an empty axis keeps the base value.
    pub fn cells(&self, base: &RunConfig) -> Vec<RunConfig> {
        fn axis<T: Clone>(v: &[T], base: T) -> Vec<T> {
            if v.is_empty() {
                vec![base]
            } else {
                v.to_vec()
            }
        }
        let mut out = Vec::new();
        for w in axis(&self.windows, base.model.windows.clone()) {
            for &l in &axis(&self.conv_layers, base.model.conv_layers) {
                for &n in &axis(&self.sentence_len, base.model.sentence_len) {
                    for &m in &axis(&self.segment_len, base.model.segment_len) {
                        for &s in &axis(&self.seeds, base.training.seed) {
                            let mut c = base.clone();
                            c.model.windows = w.clone();
                            c.model.conv_layers = l;
                            c.model.sentence_len = n;
                            c.model.segment_len = m;
                            c.training.seed = s;
                            out.push(c);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: usize,
    pub windows: String,
    pub conv_layers: usize,
    pub sentence_len: usize,
    pub segment_len: usize,
    pub seed: u64,
    pub segment_accuracy: Option<f64>,
    pub document_accuracy: Option<f64>,
    /// Mean segment accuracy over the successful seeds of this configuration.
    pub mean_segment_accuracy: Option<f64>,
    pub status: String,
}

fn windows_label(w: &[usize]) -> String {
    w.iter().map(usize::to_string).collect::<Vec<_>>().join("+")
}

/// Runs every grid cell (up to `jobs` at a time) into `out/cell-NNN`. A
/// failing cell is recorded and the sweep continues.
pub fn sweep_run(base: &RunConfig, grid: &SweepGrid, out: &Path, jobs: usize) -> Result<Vec<SweepRow>> {
    let cells = grid.cells(base);
    if cells.is_empty() {
        return Err(Error::Config("empty sweep grid".into()));
    }
    fs::create_dir_all(out)?;
    let path = base
        .corpus
        .as_deref()
        .ok_or_else(|| Error::Config("no corpus given (--corpus)".into()))?;
    let (authors, train_docs) = load_tagged(base, path, None)?;
    let test_docs = match &base.test_corpus {
        Some(p) => Some(load_tagged(base, p, Some(&authors))?.1),
        None => None,
    };
    let run_cell = |(i, cfg): (usize, &RunConfig)| -> SweepRow {
        let result = prepare_from(cfg, authors.clone(), train_docs.clone(), test_docs.clone())
            .and_then(|data| train_prepared(cfg, &data, Some(&out.join(format!("cell-{i:03}"))), false));
        let (seg, doc, status) = match result {
            Ok(s) => (Some(s.report.segment_accuracy), Some(s.report.document_accuracy), "ok".to_string()),
            Err(e) => {
                log::error!("sweep cell {i} failed: {e}");
                (None, None, format!("error: {e}"))
            }
        };
        SweepRow {
            cell: i,
            windows: windows_label(&cfg.model.windows),
            conv_layers: cfg.model.conv_layers,
            sentence_len: cfg.model.sentence_len,
            segment_len: cfg.model.segment_len,
            seed: cfg.training.seed,
            segment_accuracy: seg,
            document_accuracy: doc,
            mean_segment_accuracy: None,
            status,
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut rows: Vec<SweepRow> = if jobs <= 1 {
        cells.iter().enumerate().map(run_cell).collect()
    } else {
        pool.install(|| cells.par_iter().enumerate().with_max_len(1).map(run_cell).collect())
    };
    let key = |r: &SweepRow| (r.windows.clone(), r.conv_layers, r.sentence_len, r.segment_len);
    let means: Vec<Option<f64>> = rows
        .iter()
        .map(|r| {
            let accs: Vec<f64> = rows
                .iter()
                .filter(|o| key(o) == key(r))
                .filter_map(|o| o.segment_accuracy)
                .collect();
            (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64)
        })
        .collect();
    for (r, m) in rows.iter_mut().zip(means) {
        r.mean_segment_accuracy = m;
    }
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}

/// Document-length ablation: for each fraction, trains on the leading
/// segments of every training document and scores the full evaluation set.
pub fn ablate_run(cfg: &RunConfig, fractions: &[f64], out: &Path) -> Result<Vec<AblationPoint>> {
    if fractions.is_empty() {
        return Err(Error::Config("empty fraction grid".into()));
    }
    fs::create_dir_all(out)?;
    fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    let data = prepare(cfg)?;
    let classes = data.authors.len();
    let mut points = Vec::new();
    for &f in fractions {
        let subset = leading_fraction(&data.split.train, f, classes)?;
        let mut part = data.clone();
        part.split.train = subset;
        let summary = train_prepared(cfg, &part, Some(&out.join(format!("fraction-{f}"))), false)?;
        points.push(AblationPoint {
            fraction: f,
            train_segments: part.split.train.len(),
            segment_accuracy: summary.report.segment_accuracy,
            document_accuracy: summary.report.document_accuracy,
        });
    }
    fs::write(out.join("ablation.csv"), ablation_csv(&points)?)?;
    Ok(points)
}

/// Attention weights of every segment of `corpus` under a saved model.
pub fn export_attention_run(cfg: &RunConfig, model_path: &Path, corpus: &Path, out: &Path) -> Result<Vec<AttentionRow>> {
    let loaded = load_model::<f64>(model_path)?;
    let (model, meta) = (loaded.model, loaded.meta);
    let (_, docs) = load_tagged(cfg, corpus, Some(&meta.authors))?;
    let vocab = meta.vocabulary.clone().map(Vocabulary::from_words);
    let segments = segment_corpus(&docs, model.hyper.segment_len, model.hyper.sentence_len, vocab.as_ref())?;
    let rows: Vec<Vec<AttentionRow>> = segments
        .par_iter()
        .map(|s| export_attention(&model, s))
        .collect::<Result<_>>()?;
    let rows: Vec<AttentionRow> = rows.into_iter().flatten().collect();
    if let Some(dir) = out.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(out, attention_csv(&rows)?)?;
    Ok(rows)
}

/// Word and sentence counts per author.
pub fn stats_run(cfg: &RunConfig, corpus: &Path) -> Result<CorpusStats> {
    let c = load_corpus_dir(corpus)?;
    let docs: Vec<Vec<TokenizedSentence>> = if cfg.pretagged {
        c.documents
            .iter()
            .map(|d| {
                Ok(crate::tagger::parse_pretagged(&d.text)?
                    .sentences
                    .into_iter()
                    .map(|s| TokenizedSentence {
                        length: s.tokens.len(),
                        tokens: s.tokens,
                    })
                    .collect())
            })
            .collect::<Result<_>>()?
    } else {
        tokenize_corpus(&c)
    };
    Ok(compute_corpus_stats(
        &c.authors,
        c.documents.iter().zip(&docs).map(|(d, s)| (d.author_id, s.as_slice())),
    ))
}

/// Tags a raw corpus into `out/<author>/<doc>.txt` in `token/TAG` form.
pub fn tag_run(cfg: &RunConfig, corpus: &Path, tagger: &crate::tagger::PerceptronTagger, out: &Path) -> Result<usize> {
    let c = load_corpus_dir(corpus)?;
    let raw = RunConfig {
        pretagged: false,
        ..cfg.clone()
    };
    let docs = super::data::tag_corpus(&c, &raw, Some(tagger))?;
    for d in &docs {
        let path = out.join(format!("{}.txt", d.doc_id));
        fs::create_dir_all(path.parent().expect("doc ids carry the author directory"))?;
        fs::write(path, to_pretagged(&d.sentences))?;
    }
    Ok(docs.len())
}
