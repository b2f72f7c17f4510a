//! The pipeline behind each CLI command: file wiring around the core
//! algorithms, with phase timings and a stable error-to-exit-code mapping.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context};

use areatopics_core::embedding::{train_parallel, TrainingConfig};
use areatopics_core::eval::{
    average_precision, baseline_textrank, baseline_tfidf, precision_at_k, AreaEval, EvalReport,
    GoldList,
};
use areatopics_core::extract::{extract_topk_additive, ExtractError, ScoredTopic};
use areatopics_core::graph::{CategoryGraph, WeightFunction, WeightMap};
use areatopics_core::lexicon::{
    build_corpus, build_lexicon, normalize_title, CorpusStats, IngestStats, TopicLexicon,
};
use areatopics_core::TopicId;

use crate::formats::{self, ReportRow, ResultRow};

/// Command failures with their CLI exit codes: 2 for input problems, 3 for
/// an unknown area, 4 for an area with no candidates.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Input(#[from] anyhow::Error),
    #[error("unknown area `{0}`")]
    UnknownArea(String),
    #[error("area `{area}` has no candidate topics within depth {d1}")]
    EmptyCandidates { area: String, d1: u32 },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Input(_) => 2,
            PipelineError::UnknownArea(_) => 3,
            PipelineError::EmptyCandidates { .. } => 4,
        }
    }
}

pub type PipelineResult<T> = Result<T, PipelineError>;

/// Build a lexicon TSV from a plain-text title list (one title per line;
/// blank lines skipped).
pub fn ingest_titles(input: &Path, output: &Path) -> PipelineResult<IngestStats> {
    let text = fs::read_to_string(input)
        .with_context(|| format!("reading titles {}", input.display()))?;
    let (lexicon, stats) = build_lexicon(text.lines().filter(|l| !l.trim().is_empty()));
    formats::write_lexicon(output, &lexicon)?;
    Ok(stats)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CategoryIngest {
    pub rows_read: u64,
    pub kept: u64,
    pub self_loops: u64,
    pub unknown_skipped: u64,
    pub duplicates: u64,
}

/// Clean a raw `parent \t child` edge file against a lexicon: normalize both
/// phrases, skip rows mentioning unknown topics, drop self-loops and
/// duplicate edges, and write the surviving rows in input order.
pub fn ingest_categories(
    lexicon_path: &Path,
    input: &Path,
    output: &Path,
) -> PipelineResult<CategoryIngest> {
    let lexicon = formats::read_lexicon(lexicon_path)?;
    let raw = formats::read_edges(input)?;
    let mut summary = CategoryIngest::default();
    let mut seen: HashSet<(TopicId, TopicId)> = HashSet::new();
    let mut kept = Vec::new();
    for (parent, child) in raw {
        summary.rows_read += 1;
        let normalized = normalize_title(&parent).zip(normalize_title(&child));
        let ids = normalized
            .as_ref()
            .and_then(|(p, c)| lexicon.id(p).zip(lexicon.id(c)));
        let (Some((p, c)), Some((pid, cid))) = (normalized, ids) else {
            summary.unknown_skipped += 1;
            continue;
        };
        if pid == cid {
            summary.self_loops += 1;
            continue;
        }
        if !seen.insert((pid, cid)) {
            summary.duplicates += 1;
            continue;
        }
        summary.kept += 1;
        kept.push((p, c));
    }
    formats::write_edges(output, &kept)?;
    Ok(summary)
}

/// Load an edge file into a graph over `lexicon` ids.  Rows whose phrases
/// are missing from the lexicon are skipped (counted), since min-count
/// pruning legitimately removes rare titles between ingest and extract.
pub fn load_graph(lexicon: &TopicLexicon, path: &Path) -> PipelineResult<(CategoryGraph, u64)> {
    let mut graph = CategoryGraph::new();
    let mut skipped = 0;
    for (parent, child) in formats::read_edges(path)? {
        let pair = normalize_title(&parent)
            .zip(normalize_title(&child))
            .and_then(|(p, c)| lexicon.id(&p).zip(lexicon.id(&c)));
        match pair {
            Some((pid, cid)) => {
                graph.add_edge(pid, cid);
            }
            None => skipped += 1,
        }
    }
    Ok((graph, skipped))
}

/// Tokenize raw documents (one per line) against a lexicon; writes the
/// corpus file and a lexicon copy whose frequencies reflect this corpus.
pub fn tokenize_corpus(
    lexicon_path: &Path,
    input: &Path,
    corpus_out: &Path,
    lexicon_out: &Path,
    min_sentence_length: usize,
    max_phrase_words: usize,
) -> PipelineResult<CorpusStats> {
    // Frequencies restart from zero so re-runs do not double-count.
    let rows: Vec<(String, u64)> = formats::read_lexicon(lexicon_path)?
        .entries()
        .map(|(_, phrase, _)| (phrase.to_string(), 0))
        .collect();
    let mut lexicon = TopicLexicon::from_rows(rows).expect("lexicon file was already valid");
    let text = fs::read_to_string(input)
        .with_context(|| format!("reading documents {}", input.display()))?;
    let (corpus, stats) =
        build_corpus(&mut lexicon, text.lines(), min_sentence_length, max_phrase_words);
    formats::write_corpus(corpus_out, &corpus, &lexicon)?;
    formats::write_lexicon(lexicon_out, &lexicon)?;
    Ok(stats)
}

#[derive(Debug, Clone, Copy)]
pub struct TrainOutcome {
    /// Rows in the trained vocabulary (after min-count pruning).
    pub vocabulary: usize,
    /// Lexicon rows dropped by pruning.
    pub pruned_out: usize,
    pub documents: usize,
    pub tokens: u64,
    pub seconds: f64,
}

/// Train embeddings from a tokenized corpus; writes the FKTE binary and the
/// pruned lexicon whose row order matches it.
pub fn train(
    lexicon_path: &Path,
    corpus_path: &Path,
    embeddings_out: &Path,
    lexicon_out: &Path,
    config: &TrainingConfig,
    workers: usize,
) -> PipelineResult<TrainOutcome> {
    let lexicon = formats::read_lexicon(lexicon_path)?;
    let corpus = formats::read_corpus(corpus_path, &lexicon)?;
    let start = Instant::now();
    let model = train_parallel(&corpus, &lexicon, config, workers)
        .map_err(|e| anyhow!(e).context("training failed"))?;
    let seconds = start.elapsed().as_secs_f64();
    formats::write_embeddings(embeddings_out, &model.matrix)?;
    formats::write_lexicon(lexicon_out, &model.lexicon)?;
    Ok(TrainOutcome {
        vocabulary: model.lexicon.len(),
        pruned_out: lexicon.len() - model.lexicon.len(),
        documents: corpus.len(),
        tokens: corpus.total_tokens(),
        seconds,
    })
}

#[derive(Debug, Clone)]
pub struct ExtractParams<'a> {
    pub embeddings: &'a Path,
    pub lexicon: &'a Path,
    pub categories: &'a Path,
    /// Raw or normalized area phrase; normalized internally.
    pub area: &'a str,
    pub k: usize,
    pub d1: u32,
    pub d2: u32,
    pub weight_offset: f64,
}

#[derive(Debug, Clone)]
pub struct ExtractOutcome {
    pub rows: Vec<ResultRow>,
    pub truncated: bool,
    pub skipped_unembedded: usize,
    pub unknown_edge_phrases: u64,
    pub candidates: usize,
    pub contributive: usize,
    pub evaluations: u64,
    /// Time reading lexicon + embeddings + graph from disk.
    pub load_seconds: f64,
    /// Everything after load: BFS, weights, ranking, row assembly.
    pub rank_seconds: f64,
}

fn resolve_area(lexicon: &TopicLexicon, raw: &str) -> PipelineResult<(TopicId, String)> {
    let phrase =
        normalize_title(raw).ok_or_else(|| PipelineError::UnknownArea(raw.to_string()))?;
    match lexicon.id(&phrase) {
        Some(id) => Ok((id, phrase)),
        None => Err(PipelineError::UnknownArea(phrase)),
    }
}

/// Top-k extraction for one area using the additive objective's fast path.
pub fn extract(params: &ExtractParams<'_>) -> PipelineResult<ExtractOutcome> {
    let load_start = Instant::now();
    let lexicon = formats::read_lexicon(params.lexicon)?;
    let matrix = formats::read_embeddings(params.embeddings)?;
    if matrix.rows() != lexicon.len() {
        return Err(anyhow!(
            "embedding file has {} rows but the lexicon has {} (wrong lexicon for this model?)",
            matrix.rows(),
            lexicon.len()
        )
        .into());
    }
    let (graph, unknown_edge_phrases) = load_graph(&lexicon, params.categories)?;
    let load_seconds = load_start.elapsed().as_secs_f64();

    let rank_start = Instant::now();
    let (area, area_phrase) = resolve_area(&lexicon, params.area)?;
    let depths = graph.bfs_depths(area, Some(params.d1.max(params.d2)));
    let candidates = depths.candidates_within(params.d1);
    if candidates.is_empty() {
        return Err(PipelineError::EmptyCandidates { area: area_phrase, d1: params.d1 });
    }
    let contributive = depths.contributive_within(params.d2);
    let weights = WeightMap::from_depths(&depths, &WeightFunction { offset: params.weight_offset });
    let ranking =
        extract_topk_additive(area, params.k, &candidates, &contributive, &weights, &matrix)
            .map_err(|e| match e {
                ExtractError::EmptyCandidates => {
                    PipelineError::EmptyCandidates { area: area_phrase.clone(), d1: params.d1 }
                }
                other => anyhow!(other).context("extraction failed").into(),
            })?;
    let rows = scored_rows(&ranking.entries, &lexicon)?;
    let rank_seconds = rank_start.elapsed().as_secs_f64();
    Ok(ExtractOutcome {
        rows,
        truncated: ranking.truncated,
        skipped_unembedded: ranking.skipped_unembedded,
        unknown_edge_phrases,
        candidates: candidates.len(),
        contributive: contributive.len(),
        evaluations: ranking.evaluations,
        load_seconds,
        rank_seconds,
    })
}

fn scored_rows(
    entries: &[ScoredTopic],
    lexicon: &TopicLexicon,
) -> PipelineResult<Vec<ResultRow>> {
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let phrase = lexicon
                .phrase(e.topic)
                .with_context(|| format!("ranked topic {} missing from the lexicon", e.topic))?;
            Ok(ResultRow { rank: i as u64 + 1, phrase: phrase.to_string(), score: e.score })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Tfidf,
    Textrank,
}

impl BaselineMethod {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Tfidf => "tfidf",
            BaselineMethod::Textrank => "textrank",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BaselineParams<'a> {
    pub method: BaselineMethod,
    pub lexicon: &'a Path,
    pub corpus: &'a Path,
    pub categories: &'a Path,
    pub area: &'a str,
    pub k: usize,
    pub d1: u32,
    /// Co-occurrence window for TextRank; ignored by TFIDF.
    pub window: usize,
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub rows: Vec<ResultRow>,
    pub truncated: bool,
    pub candidates: usize,
    pub load_seconds: f64,
    pub rank_seconds: f64,
}

/// Rank the same depth-d1 candidate pool with a classical baseline instead
/// of embeddings.
pub fn baseline(params: &BaselineParams<'_>) -> PipelineResult<BaselineOutcome> {
    let load_start = Instant::now();
    let lexicon = formats::read_lexicon(params.lexicon)?;
    let corpus = formats::read_corpus(params.corpus, &lexicon)?;
    let (graph, _) = load_graph(&lexicon, params.categories)?;
    let load_seconds = load_start.elapsed().as_secs_f64();

    let rank_start = Instant::now();
    let (area, area_phrase) = resolve_area(&lexicon, params.area)?;
    let depths = graph.bfs_depths(area, Some(params.d1));
    let candidates = depths.candidates_within(params.d1);
    if candidates.is_empty() {
        return Err(PipelineError::EmptyCandidates { area: area_phrase, d1: params.d1 });
    }
    let ranked = match params.method {
        BaselineMethod::Tfidf => baseline_tfidf(&candidates, &corpus),
        BaselineMethod::Textrank => baseline_textrank(&candidates, &corpus, params.window),
    };
    let take = params.k.min(ranked.len());
    let rows = scored_rows(&ranked[..take], &lexicon)?;
    let rank_seconds = rank_start.elapsed().as_secs_f64();
    Ok(BaselineOutcome {
        rows,
        truncated: take < params.k,
        candidates: candidates.len(),
        load_seconds,
        rank_seconds,
    })
}

#[derive(Debug, Clone)]
pub struct EvalParams<'a> {
    pub gold: &'a Path,
    /// One `(area, predictions file)` pair per evaluated list.
    pub predictions: Vec<(String, &'a Path)>,
    pub k: usize,
    pub aliases: Option<&'a Path>,
    pub dataset: &'a str,
    pub method: &'a str,
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub rows: Vec<ReportRow>,
    /// Mean of the per-area APs above.
    pub map: f64,
}

/// Phrase-level interning for evaluation: predictions and gold lists are
/// matched by canonical phrase, so gold topics the model never saw still
/// count as misses.
struct Matcher {
    aliases: HashMap<String, String>,
    ids: HashMap<String, TopicId>,
}

impl Matcher {
    fn new(aliases: Vec<(String, String)>) -> PipelineResult<Self> {
        let mut map = HashMap::new();
        for (phrase, canonical) in aliases {
            let phrase = normalize_title(&phrase)
                .ok_or_else(|| anyhow!("alias phrase `{phrase}` normalizes to nothing"))?;
            let canonical = normalize_title(&canonical)
                .ok_or_else(|| anyhow!("alias target `{canonical}` normalizes to nothing"))?;
            map.insert(phrase, canonical);
        }
        Ok(Self { aliases: map, ids: HashMap::new() })
    }

    /// Normalize, apply aliases, intern.
    fn intern(&mut self, raw: &str) -> PipelineResult<TopicId> {
        let phrase = normalize_title(raw)
            .ok_or_else(|| anyhow!("phrase `{raw}` normalizes to nothing"))?;
        let canonical = self.aliases.get(&phrase).cloned().unwrap_or(phrase);
        let next = TopicId(self.ids.len() as u32);
        Ok(*self.ids.entry(canonical).or_insert(next))
    }
}

/// Score prediction files against a gold list: Precision@k and AP per area,
/// MAP across areas.
pub fn eval(params: &EvalParams<'_>) -> PipelineResult<EvalOutcome> {
    let gold_rows = formats::read_gold(params.gold)?;
    let aliases = match params.aliases {
        Some(path) => formats::read_aliases(path)?,
        None => Vec::new(),
    };
    let mut matcher = Matcher::new(aliases)?;
    let mut report = EvalReport::new();
    let mut rows = Vec::new();
    for (area_raw, path) in &params.predictions {
        let area = matcher.intern(area_raw)?;
        let area_phrase = normalize_title(area_raw).expect("interned above");

        let mut gold_for_area: Vec<(u64, TopicId)> = Vec::new();
        for row in &gold_rows {
            if matcher.intern(&row.area)? == area {
                gold_for_area.push((row.rank, matcher.intern(&row.topic)?));
            }
        }
        if gold_for_area.is_empty() {
            return Err(PipelineError::UnknownArea(area_phrase));
        }
        gold_for_area.sort_by_key(|&(rank, _)| rank);
        let gold = GoldList::new(area, gold_for_area.into_iter().map(|(_, t)| t).collect())
            .map_err(|e| anyhow!("gold list for `{area_phrase}`: {e}"))?;

        let (predicted_rows, _) = formats::read_result(path)?;
        let mut predicted = Vec::with_capacity(predicted_rows.len());
        for row in &predicted_rows {
            predicted.push(matcher.intern(&row.phrase)?);
        }

        let p_at_k = precision_at_k(&predicted, &gold, params.k)
            .map_err(|e| anyhow!("{}: {e}", path.display()))?;
        let ap = average_precision(&predicted, &gold)
            .map_err(|e| anyhow!("{}: {e}", path.display()))?;
        report.push(AreaEval { area, precision_at_k: p_at_k, average_precision: ap });
        rows.push(ReportRow {
            dataset: params.dataset.to_string(),
            area: area_phrase,
            method: params.method.to_string(),
            precision_at_k: p_at_k,
            average_precision: ap,
        });
    }
    let map = report.mean_average_precision().context("no prediction files given")?;
    Ok(EvalOutcome { rows, map })
}
