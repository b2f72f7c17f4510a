//! Greedy top-k extraction of representative topics.
//!
//! Candidates (subcategories within depth d1 of the area) are ranked by how
//! well they represent the contributive set (depth <= d2, area included),
//! where each contributive topic counts with its generality weight.  The
//! greedy loop adds whichever candidate has the largest marginal gain; for
//! monotone submodular objectives that is the classic (1 - 1/e)
//! approximation, checkable against [`extract_topk_exhaustive`] on small
//! instances.
//!
//! The additive objective makes gains independent of what is already
//! selected, so [`extract_topk_additive`] hoists the scoring out of the loop
//! and just sorts -- same output, one pass.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use core::cell::Cell;
use core::cmp::Ordering;

use crate::embedding::EmbeddingMatrix;
use crate::graph::WeightMap;
use crate::TopicId;

/// Enumeration cap for [`extract_topk_exhaustive`].
pub const MAX_EXHAUSTIVE_CANDIDATES: usize = 12;
/// Subset-size cap for [`extract_topk_exhaustive`].
pub const MAX_EXHAUSTIVE_K: usize = 4;

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("k must be >= 1")]
    InvalidK,
    #[error("candidate set is empty after dropping unembedded topics")]
    EmptyCandidates,
    #[error(
        "exhaustive search handles at most {MAX_EXHAUSTIVE_CANDIDATES} candidates with \
         k <= {MAX_EXHAUSTIVE_K}; got {candidates} candidates, k = {k}"
    )]
    InstanceTooLarge { candidates: usize, k: usize },
}

/// Shared read-only state for objective evaluation, plus the inner-loop
/// counter: every `(candidate, contributive topic)` pair inspected bumps it
/// once, which is what the k * |C_d1| * |C_d2| complexity claim counts.
pub struct EvalContext<'a> {
    contributive: &'a [TopicId],
    weights: &'a WeightMap,
    embeddings: &'a EmbeddingMatrix,
    evaluations: Cell<u64>,
}

impl<'a> EvalContext<'a> {
    pub fn new(
        contributive: &'a [TopicId],
        weights: &'a WeightMap,
        embeddings: &'a EmbeddingMatrix,
    ) -> Self {
        Self { contributive, weights, embeddings, evaluations: Cell::new(0) }
    }

    pub fn contributive(&self) -> &[TopicId] {
        self.contributive
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.get()
    }

    fn tally(&self, pairs: u64) {
        self.evaluations.set(self.evaluations.get() + pairs);
    }

    fn unit(&self, t: TopicId) -> Option<&[f64]> {
        self.embeddings.unit_vector(t)
    }

    /// Weighted similarity of one candidate to the whole contributive set:
    /// `sum_j w_j * cos(candidate, t_j)`.  Contributive topics without an
    /// embedding contribute nothing.
    fn additive_score(&self, candidate: TopicId) -> f64 {
        self.tally(self.contributive.len() as u64);
        let Some(cu) = self.unit(candidate) else { return 0.0 };
        let mut score = 0.0;
        for &j in self.contributive {
            let Some(ju) = self.unit(j) else { continue };
            score += self.weights.get(j) * dot(cu, ju);
        }
        score
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// A set function over selections of candidate topics.  Implementations are
/// expected to be non-negative, monotone and submodular on their admissible
/// inputs; the greedy bound only means something when they are.
pub trait Objective {
    /// `D(selected + candidate) - D(selected)`.
    fn marginal_gain(&self, selected: &[TopicId], candidate: TopicId, ctx: &EvalContext<'_>)
        -> f64;

    /// Full objective value of a set, used by the exhaustive oracle.
    fn value(&self, set: &[TopicId], ctx: &EvalContext<'_>) -> f64;
}

/// `D(T) = sum_{t in T} sum_j w_j * cos(t, t_j)` -- a plain sum of static
/// per-candidate scores.  Gains do not depend on the selection at all, which
/// is exactly why the fast path below exists.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdditiveObjective;

impl Objective for AdditiveObjective {
    fn marginal_gain(
        &self,
        _selected: &[TopicId],
        candidate: TopicId,
        ctx: &EvalContext<'_>,
    ) -> f64 {
        ctx.additive_score(candidate)
    }

    fn value(&self, set: &[TopicId], ctx: &EvalContext<'_>) -> f64 {
        set.iter().map(|&t| ctx.additive_score(t)).sum()
    }
}

/// `D(T) = sum_j w_j * max_{t in T} max(0, cos(t, t_j))`: each contributive
/// topic is represented by its best selected match, negative similarity
/// counts as no coverage.  Genuinely selection-dependent, monotone and
/// submodular.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoverageObjective;

impl CoverageObjective {
    fn covered(&self, set: &[TopicId], j: TopicId, ctx: &EvalContext<'_>) -> f64 {
        let Some(ju) = ctx.unit(j) else { return 0.0 };
        let mut best = 0.0;
        for &t in set {
            if let Some(tu) = ctx.unit(t) {
                let c = dot(tu, ju);
                if c > best {
                    best = c;
                }
            }
        }
        best
    }
}

impl Objective for CoverageObjective {
    fn marginal_gain(
        &self,
        selected: &[TopicId],
        candidate: TopicId,
        ctx: &EvalContext<'_>,
    ) -> f64 {
        ctx.tally(ctx.contributive.len() as u64);
        let mut gain = 0.0;
        for &j in ctx.contributive {
            let before = self.covered(selected, j, ctx);
            let with = self.covered(&[candidate], j, ctx).max(before);
            gain += ctx.weights.get(j) * (with - before);
        }
        gain
    }

    fn value(&self, set: &[TopicId], ctx: &EvalContext<'_>) -> f64 {
        ctx.tally(ctx.contributive.len() as u64);
        let mut total = 0.0;
        for &j in ctx.contributive {
            total += ctx.weights.get(j) * self.covered(set, j, ctx);
        }
        total
    }
}

/// One extracted topic with the marginal gain it was picked at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredTopic {
    pub topic: TopicId,
    pub score: f64,
}

/// Result of a top-k extraction.
#[derive(Debug, Clone)]
pub struct Ranking {
    pub area: TopicId,
    /// Pick order; scores are marginal gains at selection time, so they are
    /// non-increasing for submodular objectives.
    pub entries: Vec<ScoredTopic>,
    /// Candidates ran out before k picks.
    pub truncated: bool,
    /// Inner-loop `(candidate, contributive)` evaluations performed.
    pub evaluations: u64,
    /// Candidates dropped for lacking an embedding row.
    pub skipped_unembedded: usize,
}

impl Ranking {
    pub fn topics(&self) -> Vec<TopicId> {
        self.entries.iter().map(|e| e.topic).collect()
    }
}

fn embedded_candidates(
    candidates: &[TopicId],
    embeddings: &EmbeddingMatrix,
) -> (Vec<TopicId>, usize) {
    let mut kept = Vec::with_capacity(candidates.len());
    let mut skipped = 0;
    for &t in candidates {
        if t.index() < embeddings.rows() {
            kept.push(t);
        } else {
            skipped += 1;
        }
    }
    (kept, skipped)
}

/// Greedy argmax-of-marginal-gain selection, ties to the smaller topic id.
///
/// Returns fewer than `k` entries (flagged `truncated`) when candidates run
/// out.  Candidates without an embedding row are dropped up front; if none
/// survive that is an error.
pub fn extract_topk<O: Objective>(
    area: TopicId,
    k: usize,
    candidates: &[TopicId],
    contributive: &[TopicId],
    weights: &WeightMap,
    embeddings: &EmbeddingMatrix,
    objective: &O,
) -> Result<Ranking, ExtractError> {
    if k == 0 {
        return Err(ExtractError::InvalidK);
    }
    let (pool, skipped_unembedded) = embedded_candidates(candidates, embeddings);
    if pool.is_empty() {
        return Err(ExtractError::EmptyCandidates);
    }
    let ctx = EvalContext::new(contributive, weights, embeddings);
    let mut selected: Vec<TopicId> = Vec::with_capacity(k.min(pool.len()));
    let mut taken: BTreeSet<TopicId> = BTreeSet::new();
    let mut entries = Vec::with_capacity(k.min(pool.len()));
    while entries.len() < k {
        let mut best: Option<ScoredTopic> = None;
        for &t in &pool {
            if taken.contains(&t) {
                continue;
            }
            let gain = objective.marginal_gain(&selected, t, &ctx);
            let better = match &best {
                None => true,
                Some(b) => gain > b.score || (gain == b.score && t < b.topic),
            };
            if better {
                best = Some(ScoredTopic { topic: t, score: gain });
            }
        }
        let Some(pick) = best else { break };
        taken.insert(pick.topic);
        selected.push(pick.topic);
        entries.push(pick);
    }
    let truncated = entries.len() < k;
    Ok(Ranking {
        area,
        entries,
        truncated,
        evaluations: ctx.evaluations(),
        skipped_unembedded,
    })
}

/// Weighted static score of every embedded candidate:
/// `score(t) = sum_j w_j * cos(t, t_j)`.
pub fn static_scores(
    candidates: &[TopicId],
    contributive: &[TopicId],
    weights: &WeightMap,
    embeddings: &EmbeddingMatrix,
) -> BTreeMap<TopicId, f64> {
    let ctx = EvalContext::new(contributive, weights, embeddings);
    let (pool, _) = embedded_candidates(candidates, embeddings);
    pool.into_iter().map(|t| (t, ctx.additive_score(t))).collect()
}

/// Additive-objective extraction without the greedy loop: score once, sort
/// descending (ties to smaller id), take k.  Produces exactly what
/// [`extract_topk`] with [`AdditiveObjective`] produces, in one pass over
/// the candidates.
pub fn extract_topk_additive(
    area: TopicId,
    k: usize,
    candidates: &[TopicId],
    contributive: &[TopicId],
    weights: &WeightMap,
    embeddings: &EmbeddingMatrix,
) -> Result<Ranking, ExtractError> {
    if k == 0 {
        return Err(ExtractError::InvalidK);
    }
    let (pool, skipped_unembedded) = embedded_candidates(candidates, embeddings);
    if pool.is_empty() {
        return Err(ExtractError::EmptyCandidates);
    }
    let ctx = EvalContext::new(contributive, weights, embeddings);
    let mut entries: Vec<ScoredTopic> = pool
        .into_iter()
        .map(|t| ScoredTopic { topic: t, score: ctx.additive_score(t) })
        .collect();
    entries.sort_by(|a, b| match b.score.partial_cmp(&a.score) {
        Some(Ordering::Equal) | None => a.topic.cmp(&b.topic),
        Some(order) => order,
    });
    let truncated = entries.len() < k;
    entries.truncate(k);
    Ok(Ranking {
        area,
        entries,
        truncated,
        evaluations: ctx.evaluations(),
        skipped_unembedded,
    })
}

/// Best k-subset by full objective value.
#[derive(Debug, Clone)]
pub struct ExhaustiveResult {
    pub best_value: f64,
    /// Ascending ids; ties go to the lexicographically smallest subset.
    pub best_set: Vec<TopicId>,
}

/// Enumerate every k-subset of the candidates and keep the best -- the
/// ground-truth oracle the greedy bound is checked against.  Refuses
/// instances beyond [`MAX_EXHAUSTIVE_CANDIDATES`] / [`MAX_EXHAUSTIVE_K`].
pub fn extract_topk_exhaustive<O: Objective>(
    k: usize,
    candidates: &[TopicId],
    contributive: &[TopicId],
    weights: &WeightMap,
    embeddings: &EmbeddingMatrix,
    objective: &O,
) -> Result<ExhaustiveResult, ExtractError> {
    if k == 0 {
        return Err(ExtractError::InvalidK);
    }
    let (pool, _) = embedded_candidates(candidates, embeddings);
    if pool.is_empty() {
        return Err(ExtractError::EmptyCandidates);
    }
    if pool.len() > MAX_EXHAUSTIVE_CANDIDATES || k > MAX_EXHAUSTIVE_K {
        return Err(ExtractError::InstanceTooLarge { candidates: pool.len(), k });
    }
    let ctx = EvalContext::new(contributive, weights, embeddings);
    let n = pool.len();
    let kk = k.min(n);
    let mut indices: Vec<usize> = (0..kk).collect();
    let mut subset = Vec::with_capacity(kk);
    let mut best: Option<ExhaustiveResult> = None;
    loop {
        subset.clear();
        subset.extend(indices.iter().map(|&i| pool[i]));
        let value = objective.value(&subset, &ctx);
        if best.as_ref().is_none_or(|b| value > b.best_value) {
            best = Some(ExhaustiveResult { best_value: value, best_set: subset.clone() });
        }
        // Next combination in lexicographic order.
        let mut i = kk;
        let advanced = loop {
            if i == 0 {
                break false;
            }
            i -= 1;
            if indices[i] != i + n - kk {
                indices[i] += 1;
                for j in i + 1..kk {
                    indices[j] = indices[j - 1] + 1;
                }
                break true;
            }
        };
        if !advanced {
            break;
        }
    }
    Ok(best.expect("at least one subset evaluated"))
}
