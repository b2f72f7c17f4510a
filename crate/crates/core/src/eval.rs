//! Ranking metrics (Precision@k, average precision, MAP) and the two
//! classical baselines extraction gets compared against: corpus-wide TFIDF
//! and per-article TextRank.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use crate::extract::ScoredTopic;
use crate::lexicon::TokenizedCorpus;
use crate::TopicId;

pub const TEXTRANK_DAMPING: f64 = 0.85;
pub const TEXTRANK_CONVERGENCE: f64 = 1e-6;
pub const TEXTRANK_MAX_ITERATIONS: usize = 100;
pub const DEFAULT_TEXTRANK_WINDOW: usize = 2;

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("k must be >= 1")]
    InvalidK,
    #[error("k = {k} exceeds the {len} available predictions")]
    KExceedsPredictions { k: usize, len: usize },
    #[error("gold list is empty")]
    EmptyGold,
    #[error("prediction list is empty")]
    EmptyPredictions,
    #[error("duplicate topic {0} in gold list")]
    DuplicateGold(TopicId),
}

/// Expert-ranked reference topics for one area.
#[derive(Debug, Clone)]
pub struct GoldList {
    area: TopicId,
    topics: Vec<TopicId>,
}

impl GoldList {
    /// Topics must be unique; an empty list is allowed (it only rules out
    /// average precision).
    pub fn new(area: TopicId, topics: Vec<TopicId>) -> Result<Self, EvalError> {
        let mut seen = BTreeSet::new();
        for &t in &topics {
            if !seen.insert(t) {
                return Err(EvalError::DuplicateGold(t));
            }
        }
        Ok(Self { area, topics })
    }

    pub fn area(&self) -> TopicId {
        self.area
    }

    pub fn topics(&self) -> &[TopicId] {
        &self.topics
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }
}

/// Fraction of the first `k` predictions that appear in the gold set.
///
/// Only the top-k membership matters, so any permutation of those k
/// predictions scores the same.
pub fn precision_at_k(predicted: &[TopicId], gold: &GoldList, k: usize) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    if k > predicted.len() {
        return Err(EvalError::KExceedsPredictions { k, len: predicted.len() });
    }
    let gold_set: BTreeSet<TopicId> = gold.topics.iter().copied().collect();
    let hits = predicted[..k].iter().filter(|t| gold_set.contains(t)).count();
    Ok(hits as f64 / k as f64)
}

/// Average precision of the full prediction list against the gold set:
/// `sum_k P(k) / min(m, n)` where `P(k)` is the precision of the first k
/// predictions when the k-th is correct and 0 otherwise, `n` predictions,
/// `m` gold topics.
pub fn average_precision(predicted: &[TopicId], gold: &GoldList) -> Result<f64, EvalError> {
    if predicted.is_empty() {
        return Err(EvalError::EmptyPredictions);
    }
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let gold_set: BTreeSet<TopicId> = gold.topics.iter().copied().collect();
    let mut hits = 0u64;
    let mut sum = 0.0;
    for (i, t) in predicted.iter().enumerate() {
        if gold_set.contains(t) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / gold.len().min(predicted.len()) as f64)
}

/// Per-area metrics for one evaluation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaEval {
    pub area: TopicId,
    pub precision_at_k: f64,
    pub average_precision: f64,
}

/// Collected per-area rows plus the cross-area mean AP.
#[derive(Debug, Clone, Default)]
pub struct EvalReport {
    rows: Vec<AreaEval>,
}

impl EvalReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: AreaEval) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[AreaEval] {
        &self.rows
    }

    /// Arithmetic mean of the per-area average precisions; `None` with no
    /// rows.
    pub fn mean_average_precision(&self) -> Option<f64> {
        if self.rows.is_empty() {
            return None;
        }
        Some(self.rows.iter().map(|r| r.average_precision).sum::<f64>() / self.rows.len() as f64)
    }
}

fn ranked_desc(mut entries: Vec<ScoredTopic>) -> Vec<ScoredTopic> {
    entries.sort_by(|a, b| match b.score.partial_cmp(&a.score) {
        Some(core::cmp::Ordering::Equal) | None => a.topic.cmp(&b.topic),
        Some(order) => order,
    });
    entries
}

/// Rank candidates by corpus-wide TFIDF: `sum_d tf(t, d) * ln(|D| / df(t))`.
///
/// Candidates absent from the corpus score 0, as do candidates present in
/// every document (their idf vanishes).  Ties break to the smaller id.
pub fn baseline_tfidf(candidates: &[TopicId], corpus: &TokenizedCorpus) -> Vec<ScoredTopic> {
    let wanted: HashSet<u32> = candidates.iter().map(|t| t.0).collect();
    let n_docs = corpus.len() as f64;
    // Pass 1: per-document term counts (candidates only) and document
    // frequencies.
    let mut df: HashMap<u32, u64> = HashMap::new();
    let mut doc_counts: Vec<Vec<(u32, u64)>> = Vec::with_capacity(corpus.len());
    let mut counts: HashMap<u32, u64> = HashMap::new();
    for document in corpus.documents() {
        counts.clear();
        for t in document {
            if wanted.contains(&t.0) {
                *counts.entry(t.0).or_insert(0) += 1;
            }
        }
        let mut row: Vec<(u32, u64)> = counts.iter().map(|(&t, &c)| (t, c)).collect();
        row.sort_unstable();
        for &(t, _) in &row {
            *df.entry(t).or_insert(0) += 1;
        }
        doc_counts.push(row);
    }
    // Pass 2: accumulate tf * idf per candidate.
    let mut scores: BTreeMap<u32, f64> = candidates.iter().map(|t| (t.0, 0.0)).collect();
    for row in &doc_counts {
        for &(t, tf) in row {
            let idf = libm::log(n_docs / df[&t] as f64);
            *scores.get_mut(&t).expect("candidate") += tf as f64 * idf;
        }
    }
    ranked_desc(
        scores
            .into_iter()
            .map(|(t, score)| ScoredTopic { topic: TopicId(t), score })
            .collect(),
    )
}

/// Rank candidates by TextRank summed over articles.
///
/// Per article, candidate tokens are kept in order and co-occurrences within
/// `window` positions of the filtered sequence become undirected weighted
/// edges; the damped update `s_i = (1 - d) + d * sum_j w_ij / strength_j * s_j`
/// runs until the largest change drops under [`TEXTRANK_CONVERGENCE`] or
/// [`TEXTRANK_MAX_ITERATIONS`] passes.  A candidate isolated in an article
/// contributes the fixed point `1 - d` for that article.
pub fn baseline_textrank(
    candidates: &[TopicId],
    corpus: &TokenizedCorpus,
    window: usize,
) -> Vec<ScoredTopic> {
    let wanted: HashSet<u32> = candidates.iter().map(|t| t.0).collect();
    let window = window.max(1);
    let mut totals: BTreeMap<u32, f64> = candidates.iter().map(|t| (t.0, 0.0)).collect();
    let mut filtered: Vec<u32> = Vec::new();
    for document in corpus.documents() {
        filtered.clear();
        filtered.extend(document.iter().map(|t| t.0).filter(|t| wanted.contains(t)));
        if filtered.is_empty() {
            continue;
        }
        // Local node table in ascending id order keeps the arithmetic
        // deterministic.
        let mut nodes: Vec<u32> = filtered.clone();
        nodes.sort_unstable();
        nodes.dedup();
        let index = |t: u32| nodes.binary_search(&t).expect("present");
        let n = nodes.len();
        let mut weight: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for i in 0..filtered.len() {
            for j in (i + 1)..filtered.len().min(i + window) {
                if filtered[i] == filtered[j] {
                    continue;
                }
                let a = index(filtered[i]);
                let b = index(filtered[j]);
                *weight[a].entry(b).or_insert(0.0) += 1.0;
                *weight[b].entry(a).or_insert(0.0) += 1.0;
            }
        }
        let strength: Vec<f64> = weight.iter().map(|w| w.values().sum()).collect();
        let mut scores = vec![1.0; n];
        let mut next = vec![0.0; n];
        for _ in 0..TEXTRANK_MAX_ITERATIONS {
            let mut delta = 0.0f64;
            for i in 0..n {
                let mut acc = 0.0;
                for (&j, &w) in &weight[i] {
                    acc += w / strength[j] * scores[j];
                }
                next[i] = (1.0 - TEXTRANK_DAMPING) + TEXTRANK_DAMPING * acc;
                delta = delta.max((next[i] - scores[i]).abs());
            }
            core::mem::swap(&mut scores, &mut next);
            if delta < TEXTRANK_CONVERGENCE {
                break;
            }
        }
        for (i, &t) in nodes.iter().enumerate() {
            *totals.get_mut(&t).expect("candidate") += scores[i];
        }
    }
    ranked_desc(
        totals
            .into_iter()
            .map(|(t, score)| ScoredTopic { topic: TopicId(t), score })
            .collect(),
    )
}
