use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stylo::baselines::NgramKind;
use stylo::model::ModelMode;
use stylo::pipeline::{
    ablate_run, baseline_run, eval_run, export_attention_run, stats_run, sweep_run, tag_run, train_run,
    Precision, RunConfig, SweepGrid,
};
use stylo::synth::{generate, SynthConfig};
use stylo::tagger::{load_pretagged, train_tagger, TagSet};
use stylo::training::Penalty;
use stylo::Error;

#[derive(Parser)]
#[command(name = "stylo", version, about = "Authorship attribution from part-of-speech sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-author word counts and mean sentence lengths.
    Stats {
        #[command(flatten)]
        input: InputArgs,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tag a raw corpus into `token/TAG` files.
    Tag {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: PathBuf,
        /// Train the tagger on a `token/TAG` file instead of loading one.
        #[arg(long, conflicts_with = "tagger")]
        train_tagger: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        tagger_epochs: usize,
        /// Save the tagger used.
        #[arg(long)]
        save_tagger: Option<PathBuf>,
    },
    /// Train a neural model and score it.
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Continue from `checkpoint.stmod` in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Score a saved model on a labelled corpus.
    Eval {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        precision: Option<PrecisionArg>,
    },
    /// Train and score an n-gram SVM baseline.
    Baseline {
        #[command(flatten)]
        run: RunArgs,
        /// `pos` or `word` n-grams.
        #[arg(long, default_value = "pos")]
        kind: String,
        #[arg(long)]
        ngram_min: Option<usize>,
        #[arg(long)]
        ngram_max: Option<usize>,
        #[arg(long)]
        max_features: Option<usize>,
        #[arg(long)]
        idf: bool,
        #[arg(long)]
        svm_lambda: Option<f64>,
        #[arg(long)]
        svm_epochs: Option<usize>,
    },
    /// Train every configuration of a grid, once per seed.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// TOML grid file (`windows`, `conv_layers`, `sentence_len`,
        /// `segment_len`, `seeds`).
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Receptive-field sets, e.g. `3,5;2,3,4`.
        #[arg(long)]
        grid_windows: Option<String>,
        #[arg(long)]
        grid_layers: Option<String>,
        #[arg(long = "grid-N")]
        grid_n: Option<String>,
        #[arg(long = "grid-M")]
        grid_m: Option<String>,
        /// Seeds as a list (`1,2,3`) or a half-open range (`0..10`).
        #[arg(long)]
        seeds: Option<String>,
        /// Cells run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Accuracy as a function of the training fraction of each document.
    Ablate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")]
        fractions: String,
    },
    /// Per-sentence attention weights of a saved model.
    ExportAttention {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        model: PathBuf,
        /// CSV output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic pretagged corpus of Markov-chain authors.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        authors: usize,
        #[arg(long, default_value_t = 10)]
        docs: usize,
        #[arg(long, default_value_t = 400)]
        sentences: usize,
        #[arg(long, default_value_t = 1.0)]
        strength: f64,
        #[arg(long, default_value_t = 4)]
        min_len: usize,
        #[arg(long, default_value_t = 20)]
        max_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Clone, Default)]
struct InputArgs {
    /// TOML run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Files are `token/TAG` lines.
    #[arg(long)]
    pretagged: bool,
    /// Tagger checkpoint for raw text.
    #[arg(long)]
    tagger: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    test_corpus: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// `{syntactic,lexical}-{cnn,lstm}`
    #[arg(long)]
    mode: Option<String>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    dp: Option<usize>,
    #[arg(long)]
    dl: Option<usize>,
    /// Total filters across receptive fields.
    #[arg(long)]
    filters: Option<usize>,
    /// Receptive fields, e.g. `3,5`.
    #[arg(long)]
    windows: Option<String>,
    #[arg(long)]
    conv_layers: Option<usize>,
    #[arg(long)]
    attention: Option<usize>,
    #[arg(long)]
    train_embeddings: Option<bool>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// `squared-l2` or `l2`.
    #[arg(long)]
    penalty: Option<String>,
    /// Gradient-norm ceiling; `inf` disables clipping.
    #[arg(long)]
    clip: Option<f64>,
    #[arg(long)]
    validation_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum PrecisionArg {
    F32,
    F64,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::F32 => Precision::F32,
            PrecisionArg::F64 => Precision::F64,
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Error> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| Error::Config(format!("bad {what} `{x}`"))))
        .collect()
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Error> {
    match s.split_once("..") {
        Some((a, b)) => {
            let bad = || Error::Config(format!("bad seed range `{s}`"));
            let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            Ok((a..b).collect())
        }
        None => parse_list(s, "seed"),
    }
}

impl InputArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if self.corpus.is_some() {
            c.corpus = self.corpus.clone();
        }
        c.pretagged |= self.pretagged;
        if self.tagger.is_some() {
            c.tagger = self.tagger.clone();
        }
        Ok(c)
    }

    fn corpus(&self, c: &RunConfig) -> Result<PathBuf, Error> {
        c.corpus.clone().ok_or_else(|| Error::Config("no corpus given (--corpus)".into()))
    }
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut c = self.input.config()?;
        if self.test_corpus.is_some() {
            c.test_corpus = self.test_corpus.clone();
        }
        if self.embeddings.is_some() {
            c.embeddings = self.embeddings.clone();
        }
        if let Some(m) = &self.mode {
            c.model.mode = m.parse::<ModelMode>()?;
        }
        let m = &mut c.model;
        m.segment_len = self.m.unwrap_or(m.segment_len);
        m.sentence_len = self.n.unwrap_or(m.sentence_len);
        m.dp = self.dp.unwrap_or(m.dp);
        m.dl = self.dl.unwrap_or(m.dl);
        m.filters = self.filters.unwrap_or(m.filters);
        if let Some(w) = &self.windows {
            m.windows = parse_list(w, "window")?;
        }
        m.conv_layers = self.conv_layers.unwrap_or(m.conv_layers);
        if self.attention.is_some() {
            m.attention = self.attention;
        }
        if self.train_embeddings.is_some() {
            m.train_embeddings = self.train_embeddings;
        }
        let t = &mut c.training;
        t.epochs = self.epochs.unwrap_or(t.epochs);
        t.batch_size = self.batch.unwrap_or(t.batch_size);
        t.learning_rate = self.lr.unwrap_or(t.learning_rate);
        t.lambda = self.lambda.unwrap_or(t.lambda);
        if let Some(p) = &self.penalty {
            t.penalty = p.parse::<Penalty>()?;
        }
        if let Some(clip) = self.clip {
            t.clip_norm = clip.is_finite().then_some(clip);
        }
        t.validation_fraction = self.validation_fraction.unwrap_or(t.validation_fraction);
        t.seed = self.seed.unwrap_or(t.seed);
        if let Some(p) = self.precision {
            c.precision = p.into();
        }
        Ok(c)
    }
}

fn print_report(r: &stylo::eval::MetricsReport) {
    println!(
        "segment accuracy {}% ({} segments)  document accuracy {}% ({})",
        r.segment_accuracy_pct, r.segments, r.document_accuracy_pct, r.documents
    );
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Stats { input, out } => {
            let c = input.config()?;
            let stats = stats_run(&c, &input.corpus(&c)?)?;
            let csv = stats.to_csv()?;
            match out {
                Some(p) => std::fs::write(p, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Tag {
            input,
            out,
            train_tagger: gold,
            tagger_epochs,
            save_tagger,
        } => {
            let c = input.config()?;
            let tagger = match gold {
                Some(path) => {
                    let ts = TagSet::standard();
                    let pairs: Vec<(Vec<String>, Vec<String>)> = load_pretagged(path)?
                        .into_iter()
                        .map(|s| {
                            let tags = s.tag_ids.iter().map(|&t| ts.name(t).to_string()).collect();
                            (s.tokens, tags)
                        })
                        .collect();
                    train_tagger(&pairs, tagger_epochs, 0)?
                }
                None => stylo::pipeline::resolve_tagger(&c)?,
            };
            if let Some(p) = save_tagger {
                tagger.save(p)?;
            }
            let n = tag_run(&c, &input.corpus(&c)?, &tagger, &out)?;
            println!("tagged {n} documents into {}", out.display());
        }
        Command::Train { run, resume } => {
            let c = run.config()?;
            let s = train_run(&c, &run.out, resume)?;
            println!("best epoch {} (validation accuracy {:.4})", s.best_epoch, s.best_val_acc);
            print_report(&s.report);
        }
        Command::Eval {
            input,
            model,
            out,
            precision,
        } => {
            let mut c = input.config()?;
            if let Some(p) = precision {
                c.precision = p.into();
            }
            let r = eval_run(&c, &model, &input.corpus(&c)?, &out)?;
            print_report(&r);
        }
        Command::Baseline {
            run,
            kind,
            ngram_min,
            ngram_max,
            max_features,
            idf,
            svm_lambda,
            svm_epochs,
        } => {
            let mut c = run.config()?;
            let b = &mut c.baseline;
            b.ngram.n_min = ngram_min.unwrap_or(b.ngram.n_min);
            b.ngram.n_max = ngram_max.unwrap_or(b.ngram.n_max);
            b.ngram.max_features = max_features.unwrap_or(b.ngram.max_features);
            b.ngram.idf |= idf;
            b.svm.lambda = svm_lambda.unwrap_or(b.svm.lambda);
            b.svm.epochs = svm_epochs.unwrap_or(b.svm.epochs);
            b.svm.seed = c.training.seed;
            let r = baseline_run(&c, kind.parse::<NgramKind>()?, &run.out)?;
            print_report(&r);
        }
        Command::Sweep {
            run,
            grid,
            grid_windows,
            grid_layers,
            grid_n,
            grid_m,
            seeds,
            jobs,
        } => {
            let c = run.config()?;
            let mut g = match grid {
                Some(p) => toml::from_str::<SweepGrid>(&std::fs::read_to_string(p)?)
                    .map_err(|e| Error::Config(e.to_string()))?,
                None => SweepGrid::default(),
            };
            if let Some(w) = grid_windows {
                g.windows = w.split(';').map(|s| parse_list(s, "window")).collect::<Result<_, _>>()?;
            }
            if let Some(l) = grid_layers {
                g.conv_layers = parse_list(&l, "layer count")?;
            }
            if let Some(n) = grid_n {
                g.sentence_len = parse_list(&n, "N")?;
            }
            if let Some(m) = grid_m {
                g.segment_len = parse_list(&m, "M")?;
            }
            if let Some(s) = seeds {
                g.seeds = parse_seeds(&s)?;
            }
            let rows = sweep_run(&c, &g, &run.out, jobs)?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            println!(
                "{} cells, {failed} failed; results in {}",
                rows.len(),
                run.out.join("sweep.csv").display()
            );
        }
        Command::Ablate { run, fractions } => {
            let c = run.config()?;
            let points = ablate_run(&c, &parse_list(&fractions, "fraction")?, &run.out)?;
            for p in points {
                println!(
                    "fraction {:.2}: {} training segments, segment accuracy {:.4}",
                    p.fraction, p.train_segments, p.segment_accuracy
                );
            }
        }
        Command::ExportAttention { input, model, out } => {
            let c = input.config()?;
            let rows = export_attention_run(&c, &model, &input.corpus(&c)?, &out)?;
            println!("{} sentence weights written to {}", rows.len(), out.display());
        }
        Command::Synth {
            out,
            authors,
            docs,
            sentences,
            strength,
            min_len,
            max_len,
            seed,
        } => {
            let corpus = generate(&SynthConfig {
                authors,
                documents_per_author: docs,
                sentences_per_document: sentences,
                strength,
                min_len,
                max_len,
                seed,
            })?;
            corpus.write_dir(&out)?;
            println!("{} documents written to {}", corpus.documents.len(), out.display());
        }
    }
    Ok(())
}

fn init_threads() {
    let Ok(v) = std::env::var("STYLO_THREADS") else { return };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the worker pool: {e}");
            }
        }
        _ => log::warn!("ignoring STYLO_THREADS={v:?}"),
    }
}

/// 0 success, 2 input error, 3 numeric failure.
fn exit_code(e: &Error) -> u8 {
    if e.is_numeric() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    init_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
