use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use areatopics::formats;
use areatopics::pipeline::{self, PipelineError};
use areatopics_core::embedding::TrainingConfig;

#[derive(Parser)]
#[command(
    name = "areatopics",
    version,
    about = "Extract the top-k most representative topics of an area from a knowledge base"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a lexicon TSV from a plain-text title list (one title per line).
    IngestTitles {
        /// Title list to read.
        #[arg(long)]
        input: PathBuf,
        /// Lexicon TSV to write.
        #[arg(long)]
        output: PathBuf,
    },
    /// Clean a raw category edge file against a lexicon.
    IngestCategories {
        /// Lexicon TSV the edges must resolve against.
        #[arg(long)]
        lexicon: PathBuf,
        /// Raw `parent <TAB> child` edge file.
        #[arg(long)]
        input: PathBuf,
        /// Cleaned edge TSV to write.
        #[arg(long)]
        output: PathBuf,
    },
    /// Tokenize raw documents (one per line) into topic sequences.
    TokenizeCorpus {
        #[arg(long)]
        lexicon: PathBuf,
        /// Raw document file, one document per line.
        #[arg(long)]
        input: PathBuf,
        /// Tokenized corpus file to write.
        #[arg(long)]
        output: PathBuf,
        /// Where to write the lexicon with corpus frequencies filled in
        /// (defaults to overwriting --lexicon).
        #[arg(long)]
        lexicon_out: Option<PathBuf>,
        /// Drop documents with fewer tokens than this.
        #[arg(long, default_value_t = 2)]
        min_sentence_length: usize,
        /// Longest phrase (in words) the tokenizer tries to match.
        #[arg(long, default_value_t = 6)]
        max_phrase_words: usize,
    },
    /// Train topic embeddings (skip-gram with negative sampling).
    Train {
        /// Lexicon with corpus frequencies (from tokenize-corpus).
        #[arg(long)]
        lexicon: PathBuf,
        /// Tokenized corpus file.
        #[arg(long)]
        corpus: PathBuf,
        /// FKTE embedding binary to write.
        #[arg(long)]
        output: PathBuf,
        /// Pruned lexicon matching the embedding rows (defaults to
        /// `<output>.lexicon.tsv`).
        #[arg(long)]
        lexicon_out: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        dim: usize,
        #[arg(long, default_value_t = 10)]
        window: usize,
        #[arg(long, default_value_t = 5)]
        negatives: usize,
        #[arg(long, default_value_t = 2)]
        min_count: u64,
        /// Subsampling threshold delta.
        #[arg(long, default_value_t = 1e-4)]
        subsample: f64,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        /// Initial step size; decays linearly to 1/100 of this.
        #[arg(long, default_value_t = 0.025)]
        step_size: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Parallel workers with racy shared updates (not reproducible).
        #[arg(long, default_value_t = 1, conflicts_with = "deterministic")]
        workers: usize,
        /// Single worker, fixed ordering: bit-identical output per seed.
        #[arg(long)]
        deterministic: bool,
    },
    /// Extract the top-k topics for an area.
    Extract {
        /// FKTE embedding binary.
        #[arg(long)]
        embeddings: PathBuf,
        /// Lexicon TSV matching the embedding rows.
        #[arg(long)]
        lexicon: PathBuf,
        /// Category edge TSV.
        #[arg(long)]
        categories: PathBuf,
        /// Area name, raw ("Artificial Intelligence") or normalized
        /// ("artificial_intelligence").
        #[arg(long)]
        area: String,
        #[arg(long, default_value_t = 15)]
        k: usize,
        /// Candidate depth: topics within this BFS depth can be selected.
        #[arg(long, default_value_t = 3)]
        d1: u32,
        /// Contributive depth: topics within this depth are scored against.
        #[arg(long, default_value_t = 1)]
        d2: u32,
        /// Offset a in the general weight g(n) = exp(a - n).
        #[arg(long, default_value_t = 4.0)]
        weight_offset: f64,
        /// Result TSV (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Suppress timing output so runs are byte-identical.
        #[arg(long)]
        deterministic: bool,
    },
    /// Score prediction files against a gold list.
    Eval {
        /// Gold TSV: `area <TAB> rank <TAB> topic`.
        #[arg(long)]
        gold: PathBuf,
        /// Result TSV to score; repeat together with --area.
        #[arg(long, required = true)]
        predictions: Vec<PathBuf>,
        /// Area for the prediction file at the same position.
        #[arg(long, required = true)]
        area: Vec<String>,
        #[arg(long, default_value_t = 15)]
        k: usize,
        /// Optional `phrase <TAB> canonical` alias TSV for near-duplicates.
        #[arg(long)]
        aliases: Option<PathBuf>,
        /// Dataset label for the report.
        #[arg(long, default_value = "default")]
        dataset: String,
        /// Method label for the report.
        #[arg(long, default_value = "areatopics")]
        method: String,
        /// Report TSV (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Rank an area's candidates with a classical baseline.
    Baseline {
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        lexicon: PathBuf,
        /// Tokenized corpus file.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        categories: PathBuf,
        #[arg(long)]
        area: String,
        #[arg(long, default_value_t = 15)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        d1: u32,
        /// TextRank co-occurrence window.
        #[arg(long, default_value_t = 2)]
        window: usize,
        /// Result TSV (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Suppress timing output so runs are byte-identical.
        #[arg(long)]
        deterministic: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Tfidf,
    Textrank,
}

impl From<MethodArg> for pipeline::BaselineMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Tfidf => pipeline::BaselineMethod::Tfidf,
            MethodArg::Textrank => pipeline::BaselineMethod::Textrank,
        }
    }
}

fn out_writer(path: Option<&Path>) -> Result<Box<dyn Write>, PipelineError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout()),
    })
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::IngestTitles { input, output } => {
            let stats = pipeline::ingest_titles(&input, &output)?;
            println!(
                "titles read: {}, accepted: {}, duplicates: {}, rejected: {}",
                stats.titles_read, stats.accepted, stats.duplicates, stats.rejected
            );
        }
        Command::IngestCategories { lexicon, input, output } => {
            let s = pipeline::ingest_categories(&lexicon, &input, &output)?;
            println!(
                "edges read: {}, kept: {}, self loops dropped: {}, duplicates dropped: {}, \
                 unknown skipped: {}",
                s.rows_read, s.kept, s.self_loops, s.duplicates, s.unknown_skipped
            );
        }
        Command::TokenizeCorpus {
            lexicon,
            input,
            output,
            lexicon_out,
            min_sentence_length,
            max_phrase_words,
        } => {
            eprintln!(
                "# tokenize-corpus min_sentence_length={min_sentence_length} \
                 max_phrase_words={max_phrase_words}"
            );
            let lexicon_out = lexicon_out.unwrap_or_else(|| lexicon.clone());
            let stats = pipeline::tokenize_corpus(
                &lexicon,
                &input,
                &output,
                &lexicon_out,
                min_sentence_length,
                max_phrase_words,
            )?;
            println!(
                "documents read: {}, kept: {}, dropped: {}, tokens: {}",
                stats.documents_read, stats.documents_kept, stats.documents_dropped,
                stats.tokens_emitted
            );
        }
        Command::Train {
            lexicon,
            corpus,
            output,
            lexicon_out,
            dim,
            window,
            negatives,
            min_count,
            subsample,
            epochs,
            step_size,
            seed,
            workers,
            deterministic,
        } => {
            let workers = if deterministic { 1 } else { workers };
            eprintln!(
                "# train dim={dim} window={window} negatives={negatives} min_count={min_count} \
                 subsample={subsample} epochs={epochs} step={step_size} seed={seed} \
                 workers={workers}"
            );
            let config = TrainingConfig {
                dim,
                window,
                negatives,
                min_count,
                subsample_threshold: subsample,
                epochs,
                initial_step_size: step_size,
                seed,
            };
            let lexicon_out = lexicon_out.unwrap_or_else(|| {
                let mut name = output.as_os_str().to_owned();
                name.push(".lexicon.tsv");
                PathBuf::from(name)
            });
            let outcome =
                pipeline::train(&lexicon, &corpus, &output, &lexicon_out, &config, workers)?;
            if !deterministic {
                eprintln!("# train_seconds {}", outcome.seconds);
            }
            println!(
                "vocabulary: {} (pruned {}), documents: {}, tokens: {}",
                outcome.vocabulary, outcome.pruned_out, outcome.documents, outcome.tokens
            );
        }
        Command::Extract {
            embeddings,
            lexicon,
            categories,
            area,
            k,
            d1,
            d2,
            weight_offset,
            output,
            deterministic,
        } => {
            eprintln!("# extract area={area} k={k} d1={d1} d2={d2} g_offset={weight_offset}");
            let outcome = pipeline::extract(&pipeline::ExtractParams {
                embeddings: &embeddings,
                lexicon: &lexicon,
                categories: &categories,
                area: &area,
                k,
                d1,
                d2,
                weight_offset,
            })?;
            eprintln!(
                "# candidates={} contributive={} evaluations={}",
                outcome.candidates, outcome.contributive, outcome.evaluations
            );
            if outcome.unknown_edge_phrases > 0 {
                eprintln!(
                    "warning: {} edge rows referenced topics outside the lexicon",
                    outcome.unknown_edge_phrases
                );
            }
            if outcome.skipped_unembedded > 0 {
                eprintln!(
                    "warning: {} candidates lack embeddings and were skipped",
                    outcome.skipped_unembedded
                );
            }
            if outcome.truncated {
                eprintln!("warning: only {} candidates available for k={k}", outcome.rows.len());
            }
            if !deterministic {
                eprintln!("# load_seconds {}", outcome.load_seconds);
            }
            let elapsed = (!deterministic).then_some(outcome.rank_seconds);
            formats::write_result(out_writer(output.as_deref())?, &outcome.rows, elapsed)?;
        }
        Command::Eval { gold, predictions, area, k, aliases, dataset, method, output } => {
            if predictions.len() != area.len() {
                return Err(anyhow!(
                    "{} --predictions but {} --area flags; give one area per prediction file",
                    predictions.len(),
                    area.len()
                )
                .into());
            }
            eprintln!("# eval k={k} dataset={dataset} method={method}");
            let pairs = area
                .iter()
                .cloned()
                .zip(predictions.iter().map(|p| p.as_path()))
                .collect();
            let outcome = pipeline::eval(&pipeline::EvalParams {
                gold: &gold,
                predictions: pairs,
                k,
                aliases: aliases.as_deref(),
                dataset: &dataset,
                method: &method,
            })?;
            formats::write_report(out_writer(output.as_deref())?, &outcome.rows, Some(outcome.map))?;
        }
        Command::Baseline {
            method,
            lexicon,
            corpus,
            categories,
            area,
            k,
            d1,
            window,
            output,
            deterministic,
        } => {
            let method = pipeline::BaselineMethod::from(method);
            eprintln!("# baseline method={} area={area} k={k} d1={d1}", method.name());
            let outcome = pipeline::baseline(&pipeline::BaselineParams {
                method,
                lexicon: &lexicon,
                corpus: &corpus,
                categories: &categories,
                area: &area,
                k,
                d1,
                window,
            })?;
            if outcome.truncated {
                eprintln!("warning: only {} candidates available for k={k}", outcome.rows.len());
            }
            if !deterministic {
                eprintln!("# load_seconds {}", outcome.load_seconds);
            }
            let elapsed = (!deterministic).then_some(outcome.rank_seconds);
            formats::write_result(out_writer(output.as_deref())?, &outcome.rows, elapsed)?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        match &err {
            PipelineError::Input(inner) => eprintln!("error: {inner:#}"),
            other => eprintln!("error: {other}"),
        }
        std::process::exit(err.exit_code());
    }
}
