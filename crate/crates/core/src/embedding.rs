//! Skip-gram topic embeddings trained with negative sampling.
//!
//! Topics are words: each retained topic gets an input vector and an output
//! (context) vector.  For every surviving center token and each context token
//! inside a dynamic window, one positive pair and a handful of noise
//! negatives are pushed through a sigmoid SGD update.  Frequent topics are
//! down-sampled; the step size decays linearly over the scheduled token
//! count.
//!
//! The single-worker path is bit-for-bit deterministic for a fixed seed.
//! With the `std` feature, [`train_parallel`] shards documents over threads
//! that update the shared matrices without synchronization -- the usual
//! lock-free approximation, which trades determinism for throughput.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use core::cell::Cell;
use core::sync::atomic::{AtomicU64, Ordering::Relaxed};

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lexicon::{TokenizedCorpus, TopicLexicon};
use crate::TopicId;

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum EmbeddingError {
    #[error("invalid training config: {0}")]
    InvalidConfig(&'static str),
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("no topic meets min_count; trained vocabulary would be empty")]
    EmptyVocabulary,
    #[error("topic id {0} is out of range for this matrix")]
    UnknownTopic(TopicId),
    #[error("frequency fraction must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("noise distribution needs at least one positive frequency")]
    NoPositiveFrequency,
    #[error("vector buffer length {len} is not a multiple of dim {dim}")]
    BadShape { len: usize, dim: usize },
}

/// Hyper-parameters for [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    /// Vector dimensionality.
    pub dim: usize,
    /// Maximum context window; the effective radius per center token is
    /// drawn uniformly from `1..=window`.
    pub window: usize,
    /// Noise samples per positive pair.
    pub negatives: usize,
    /// Topics rarer than this are dropped from the trained vocabulary.
    pub min_count: u64,
    /// Subsampling threshold; tokens with frequency fraction `f` are kept
    /// with probability `min(1, sqrt(threshold / f))`.
    pub subsample_threshold: f64,
    pub epochs: usize,
    /// Starting SGD step size; decays linearly to 1/100 of itself.
    pub initial_step_size: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            dim: 200,
            window: 10,
            negatives: 5,
            min_count: 2,
            subsample_threshold: 1e-4,
            epochs: 5,
            initial_step_size: 0.025,
            seed: 1,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        if self.dim < 1 {
            return Err(EmbeddingError::InvalidConfig("dim must be >= 1"));
        }
        if self.window < 1 {
            return Err(EmbeddingError::InvalidConfig("window must be >= 1"));
        }
        if self.negatives < 1 {
            return Err(EmbeddingError::InvalidConfig("negatives must be >= 1"));
        }
        if !(self.subsample_threshold > 0.0) || !self.subsample_threshold.is_finite() {
            return Err(EmbeddingError::InvalidConfig("subsample_threshold must be > 0"));
        }
        if self.epochs < 1 {
            return Err(EmbeddingError::InvalidConfig("epochs must be >= 1"));
        }
        if !(self.initial_step_size > 0.0) || !self.initial_step_size.is_finite() {
            return Err(EmbeddingError::InvalidConfig("initial_step_size must be > 0"));
        }
        Ok(())
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Probability of *keeping* one occurrence of a topic whose corpus frequency
/// fraction is `frequency_fraction`: `min(1, sqrt(threshold / fraction))`.
///
/// Rare topics (fraction <= threshold) are never discarded.
pub fn subsample_keep_probability(
    frequency_fraction: f64,
    threshold: f64,
) -> Result<f64, EmbeddingError> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(EmbeddingError::InvalidConfig("subsample_threshold must be > 0"));
    }
    if !(frequency_fraction > 0.0) {
        return Err(EmbeddingError::NonPositiveFrequency(frequency_fraction));
    }
    let p = libm::sqrt(threshold / frequency_fraction);
    Ok(if p < 1.0 { p } else { 1.0 })
}

/// Unigram noise distribution over topic rows, weighted by `frequency^0.75`.
///
/// Zero-frequency rows are never drawn.
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    dist: WeightedIndex<f64>,
}

impl NoiseSampler {
    pub fn from_frequencies(frequencies: &[u64]) -> Result<Self, EmbeddingError> {
        let weights = frequencies.iter().map(|&f| libm::pow(f as f64, 0.75));
        let dist = WeightedIndex::new(weights).map_err(|_| EmbeddingError::NoPositiveFrequency)?;
        Ok(Self { dist })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TopicId {
        TopicId(self.dist.sample(rng) as u32)
    }
}

/// Analytic gradients of the negative-sampling objective at the current
/// parameters, as produced by [`EmbeddingMatrix::neg_gradients`].
#[derive(Debug, Clone)]
pub struct NegGradients {
    /// d objective / d input_vector(center).
    pub wrt_center: Vec<f64>,
    /// d objective / d output_vector(row), summed over every appearance of
    /// the row as the context or a negative.
    pub wrt_output: BTreeMap<TopicId, Vec<f64>>,
}

/// Input, output (context) and unit-normalized vectors for a trained
/// vocabulary; row index == topic id of the accompanying lexicon.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    dim: usize,
    rows: usize,
    input: Vec<f64>,
    output: Vec<f64>,
    unit: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeroed(rows: usize, dim: usize) -> Self {
        Self {
            dim,
            rows,
            input: vec![0.0; rows * dim],
            output: vec![0.0; rows * dim],
            unit: vec![0.0; rows * dim],
        }
    }

    /// Build from a flat row-major input buffer; output vectors start at
    /// zero, unit vectors are derived immediately.
    pub fn from_input_vectors(dim: usize, input: Vec<f64>) -> Result<Self, EmbeddingError> {
        if dim == 0 || input.len() % dim != 0 {
            return Err(EmbeddingError::BadShape { len: input.len(), dim });
        }
        let rows = input.len() / dim;
        let mut m = Self {
            dim,
            rows,
            input,
            output: vec![0.0; rows * dim],
            unit: vec![0.0; rows * dim],
        };
        m.rebuild_unit_vectors();
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    fn check(&self, t: TopicId) -> Result<usize, EmbeddingError> {
        if t.index() < self.rows {
            Ok(t.index() * self.dim)
        } else {
            Err(EmbeddingError::UnknownTopic(t))
        }
    }

    pub fn input_vector(&self, t: TopicId) -> Option<&[f64]> {
        (t.index() < self.rows).then(|| &self.input[t.index() * self.dim..][..self.dim])
    }

    pub fn input_vector_mut(&mut self, t: TopicId) -> Option<&mut [f64]> {
        (t.index() < self.rows).then(|| &mut self.input[t.index() * self.dim..][..self.dim])
    }

    pub fn output_vector(&self, t: TopicId) -> Option<&[f64]> {
        (t.index() < self.rows).then(|| &self.output[t.index() * self.dim..][..self.dim])
    }

    pub fn output_vector_mut(&mut self, t: TopicId) -> Option<&mut [f64]> {
        (t.index() < self.rows).then(|| &mut self.output[t.index() * self.dim..][..self.dim])
    }

    /// Unit-normalized input row; all-zero rows stay all-zero.
    pub fn unit_vector(&self, t: TopicId) -> Option<&[f64]> {
        (t.index() < self.rows).then(|| &self.unit[t.index() * self.dim..][..self.dim])
    }

    /// Flat row-major input buffer (what gets serialized).
    pub fn input_rows(&self) -> &[f64] {
        &self.input
    }

    /// Refresh the unit-normalized view after mutating input vectors.
    pub fn rebuild_unit_vectors(&mut self) {
        for r in 0..self.rows {
            let row = &self.input[r * self.dim..][..self.dim];
            let norm = libm::sqrt(row.iter().map(|x| x * x).sum());
            let out = &mut self.unit[r * self.dim..][..self.dim];
            if norm > 0.0 {
                for (o, x) in out.iter_mut().zip(row) {
                    *o = x / norm;
                }
            } else {
                out.fill(0.0);
            }
        }
    }

    /// Cosine similarity via the precomputed unit vectors; 0 whenever either
    /// vector is all-zero.
    pub fn cosine(&self, a: TopicId, b: TopicId) -> Result<f64, EmbeddingError> {
        let ai = self.check(a)?;
        let bi = self.check(b)?;
        let mut dot = 0.0;
        for c in 0..self.dim {
            dot += self.unit[ai + c] * self.unit[bi + c];
        }
        Ok(dot)
    }

    /// Negative-sampling objective for one `(center, context, negatives)`
    /// sample: `log s(v_ctx . v_c) + sum_i log s(-v_neg_i . v_c)` where the
    /// center uses its input vector and context/negatives their output
    /// vectors.
    pub fn neg_objective(
        &self,
        center: TopicId,
        context: TopicId,
        negatives: &[TopicId],
    ) -> Result<f64, EmbeddingError> {
        let ci = self.check(center)?;
        let mut value = libm::log(sigmoid(self.dot_io(ci, self.check(context)?)));
        for &n in negatives {
            value += libm::log(sigmoid(-self.dot_io(ci, self.check(n)?)));
        }
        Ok(value)
    }

    fn dot_io(&self, input_offset: usize, output_offset: usize) -> f64 {
        let mut dot = 0.0;
        for c in 0..self.dim {
            dot += self.input[input_offset + c] * self.output[output_offset + c];
        }
        dot
    }

    /// Analytic gradients of [`Self::neg_objective`] at the current
    /// parameters; nothing is updated.
    pub fn neg_gradients(
        &self,
        center: TopicId,
        context: TopicId,
        negatives: &[TopicId],
    ) -> Result<NegGradients, EmbeddingError> {
        let ci = self.check(center)?;
        let mut wrt_center = vec![0.0; self.dim];
        let mut wrt_output: BTreeMap<TopicId, Vec<f64>> = BTreeMap::new();
        let mut accumulate = |row: TopicId, label: f64| -> Result<(), EmbeddingError> {
            let oi = self.check(row)?;
            let g = label - sigmoid(self.dot_io(ci, oi));
            for c in 0..self.dim {
                wrt_center[c] += g * self.output[oi + c];
            }
            let slot = wrt_output.entry(row).or_insert_with(|| vec![0.0; self.dim]);
            for c in 0..self.dim {
                slot[c] += g * self.input[ci + c];
            }
            Ok(())
        };
        accumulate(context, 1.0)?;
        for &n in negatives {
            accumulate(n, 0.0)?;
        }
        Ok(NegGradients { wrt_center, wrt_output })
    }

    /// One negative-sampling SGD step: ascend the sample objective with the
    /// given step size.  Output vectors move while the center's input
    /// gradient accumulates against the pre-step values, then the center
    /// moves once.
    pub fn sgd_step(
        &mut self,
        center: TopicId,
        context: TopicId,
        negatives: &[TopicId],
        step: f64,
    ) -> Result<(), EmbeddingError> {
        self.check(center)?;
        self.check(context)?;
        let mut negs = Vec::with_capacity(negatives.len());
        for &n in negatives {
            self.check(n)?;
            negs.push(n.0);
        }
        let mut grad = vec![0.0; self.dim];
        let input = CellSlice(Cell::from_mut(self.input.as_mut_slice()).as_slice_of_cells());
        let output = CellSlice(Cell::from_mut(self.output.as_mut_slice()).as_slice_of_cells());
        sgd_pair(&input, &output, self.dim, center.0, context.0, &negs, step, &mut grad);
        Ok(())
    }
}

/// A trained vocabulary: the pruned lexicon (dense re-assigned ids, corpus
/// frequencies) and its embedding matrix, row-aligned.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub lexicon: TopicLexicon,
    pub matrix: EmbeddingMatrix,
}

/// Mutable parameter storage the SGD kernel writes through: plain cells on
/// the deterministic path, relaxed atomics on the racy parallel path.
trait ParamStore {
    fn get(&self, i: usize) -> f64;
    fn add(&self, i: usize, delta: f64);
}

struct CellSlice<'a>(&'a [Cell<f64>]);

impl ParamStore for CellSlice<'_> {
    #[inline]
    fn get(&self, i: usize) -> f64 {
        self.0[i].get()
    }

    #[inline]
    fn add(&self, i: usize, delta: f64) {
        self.0[i].set(self.0[i].get() + delta);
    }
}

#[cfg(feature = "std")]
struct AtomicSlice<'a>(&'a [AtomicU64]);

#[cfg(feature = "std")]
impl ParamStore for AtomicSlice<'_> {
    #[inline]
    fn get(&self, i: usize) -> f64 {
        f64::from_bits(self.0[i].load(Relaxed))
    }

    // Read-modify-write without a CAS loop: concurrent updates may clobber
    // each other, which is the accepted approximation on the parallel path.
    #[inline]
    fn add(&self, i: usize, delta: f64) {
        self.0[i].store((self.get(i) + delta).to_bits(), Relaxed);
    }
}

/// View a float buffer as atomics so threads can share it.  Same size, and
/// the alignment check keeps this off any target where it would not hold.
#[cfg(feature = "std")]
fn atomic_view(values: &mut [f64]) -> &[AtomicU64] {
    const {
        assert!(core::mem::size_of::<f64>() == core::mem::size_of::<AtomicU64>());
        assert!(core::mem::align_of::<f64>() == core::mem::align_of::<AtomicU64>());
    }
    unsafe { &*(values as *mut [f64] as *const [AtomicU64]) }
}

/// Positive pair + negatives update for one `(center, context)` sample.
///
/// `grad` is scratch of length `dim`.  All output-side reads happen before
/// the matching writes and the center row moves last, so the applied deltas
/// equal `step` times the analytic gradients at the pre-step point (when the
/// negatives are distinct).
#[allow(clippy::too_many_arguments)]
fn sgd_pair<S: ParamStore>(
    input: &S,
    output: &S,
    dim: usize,
    center: u32,
    context: u32,
    negatives: &[u32],
    step: f64,
    grad: &mut [f64],
) {
    let ci = center as usize * dim;
    grad[..dim].fill(0.0);
    pair_term(input, output, dim, ci, context as usize * dim, 1.0, step, grad);
    for &n in negatives {
        pair_term(input, output, dim, ci, n as usize * dim, 0.0, step, grad);
    }
    for (c, g) in grad[..dim].iter().enumerate() {
        input.add(ci + c, *g);
    }
}

#[allow(clippy::too_many_arguments)]
fn pair_term<S: ParamStore>(
    input: &S,
    output: &S,
    dim: usize,
    ci: usize,
    oi: usize,
    label: f64,
    step: f64,
    grad: &mut [f64],
) {
    let mut dot = 0.0;
    for c in 0..dim {
        dot += input.get(ci + c) * output.get(oi + c);
    }
    let g = (label - sigmoid(dot)) * step;
    for c in 0..dim {
        grad[c] += g * output.get(oi + c);
        output.add(oi + c, g * input.get(ci + c));
    }
}

/// Everything derived from the corpus before the SGD sweeps start.
struct TrainingPlan {
    pruned: TopicLexicon,
    documents: Vec<Vec<u32>>,
    keep_probability: Vec<f64>,
    noise: NoiseSampler,
    total_tokens: u64,
}

impl TrainingPlan {
    fn prepare(
        corpus: &TokenizedCorpus,
        lexicon: &TopicLexicon,
        config: &TrainingConfig,
    ) -> Result<Self, EmbeddingError> {
        // Fresh counts from the corpus itself; the trained vocabulary keeps
        // ids in original order but re-numbered densely.
        let mut counts = vec![0u64; lexicon.len()];
        for document in corpus.documents() {
            for &t in document {
                *counts
                    .get_mut(t.index())
                    .ok_or(EmbeddingError::UnknownTopic(t))? += 1;
            }
        }
        let mut old_to_new = vec![u32::MAX; lexicon.len()];
        let mut rows = Vec::new();
        for (old, &count) in counts.iter().enumerate() {
            if count >= config.min_count {
                old_to_new[old] = rows.len() as u32;
                let phrase = lexicon.phrase(TopicId(old as u32)).expect("dense ids");
                rows.push((alloc::string::String::from(phrase), count));
            }
        }
        if rows.is_empty() {
            return Err(EmbeddingError::EmptyVocabulary);
        }
        let pruned = TopicLexicon::from_rows(rows).expect("pruning preserves validity");

        // Pruned tokens vanish before windowing, so surviving neighbors
        // become adjacent (the usual skip-gram convention).
        let mut documents = Vec::with_capacity(corpus.len());
        let mut total_tokens = 0u64;
        for document in corpus.documents() {
            let remapped: Vec<u32> = document
                .iter()
                .map(|t| old_to_new[t.index()])
                .filter(|&n| n != u32::MAX)
                .collect();
            if !remapped.is_empty() {
                total_tokens += remapped.len() as u64;
                documents.push(remapped);
            }
        }

        let frequencies = pruned.frequencies();
        let mut keep_probability = Vec::with_capacity(frequencies.len());
        for &f in frequencies {
            if f == 0 || total_tokens == 0 {
                // Never occurs in the corpus, so the value is moot.
                keep_probability.push(1.0);
            } else {
                let fraction = f as f64 / total_tokens as f64;
                keep_probability.push(subsample_keep_probability(
                    fraction,
                    config.subsample_threshold,
                )?);
            }
        }
        let noise = NoiseSampler::from_frequencies(frequencies)?;
        Ok(Self { pruned, documents, keep_probability, noise, total_tokens })
    }

    /// Input rows uniform in `[-0.5/dim, 0.5/dim]`, output rows zero.
    fn init_matrix(&self, config: &TrainingConfig, rng: &mut ChaCha8Rng) -> EmbeddingMatrix {
        let mut matrix = EmbeddingMatrix::zeroed(self.pruned.len(), config.dim);
        for x in &mut matrix.input {
            *x = (rng.random::<f64>() - 0.5) / config.dim as f64;
        }
        matrix
    }

    fn scheduled_tokens(&self, config: &TrainingConfig) -> u64 {
        (self.total_tokens * config.epochs as u64).max(1)
    }
}

struct SgdParams<'a> {
    dim: usize,
    window: usize,
    negatives: usize,
    initial_step: f64,
    scheduled_tokens: u64,
    keep_probability: &'a [f64],
    noise: &'a NoiseSampler,
}

impl SgdParams<'_> {
    /// Linear decay from the initial step to 1/100 of it.
    fn step_at(&self, processed: u64) -> f64 {
        let remaining = 1.0 - processed as f64 / self.scheduled_tokens as f64;
        self.initial_step * remaining.max(0.01)
    }
}

/// Run `epochs` sweeps over the shard `offset, offset+stride, ...` of
/// `documents`.  `processed` is the shared scanned-token counter driving the
/// step-size schedule.
#[allow(clippy::too_many_arguments)]
fn train_documents<S: ParamStore>(
    p: &SgdParams<'_>,
    input: &S,
    output: &S,
    documents: &[Vec<u32>],
    stride: usize,
    offset: usize,
    epochs: usize,
    rng: &mut ChaCha8Rng,
    processed: &AtomicU64,
) {
    let mut sentence: Vec<u32> = Vec::new();
    let mut negatives: Vec<u32> = Vec::new();
    let mut grad = vec![0.0; p.dim];
    for _ in 0..epochs {
        for document in documents.iter().skip(offset).step_by(stride) {
            sentence.clear();
            for &token in document {
                processed.fetch_add(1, Relaxed);
                let u: f64 = rng.random();
                if u < p.keep_probability[token as usize] {
                    sentence.push(token);
                }
            }
            for pos in 0..sentence.len() {
                let center = sentence[pos];
                let radius = rng.random_range(1..=p.window);
                let step = p.step_at(processed.load(Relaxed));
                let lo = pos.saturating_sub(radius);
                let hi = (pos + radius).min(sentence.len() - 1);
                for q in lo..=hi {
                    if q == pos {
                        continue;
                    }
                    let context = sentence[q];
                    negatives.clear();
                    for _ in 0..p.negatives {
                        let n = p.noise.sample(rng).0;
                        // A noise draw that hits the positive target would
                        // cancel it; skip those draws.
                        if n != context {
                            negatives.push(n);
                        }
                    }
                    sgd_pair(input, output, p.dim, center, context, &negatives, step, &mut grad);
                }
            }
        }
    }
}

/// Deterministic single-worker training: same corpus, same config, same seed
/// => bit-identical matrices.
pub fn train(
    corpus: &TokenizedCorpus,
    lexicon: &TopicLexicon,
    config: &TrainingConfig,
) -> Result<TrainedModel, EmbeddingError> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(EmbeddingError::EmptyCorpus);
    }
    let plan = TrainingPlan::prepare(corpus, lexicon, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut matrix = plan.init_matrix(config, &mut rng);
    let params = SgdParams {
        dim: config.dim,
        window: config.window,
        negatives: config.negatives,
        initial_step: config.initial_step_size,
        scheduled_tokens: plan.scheduled_tokens(config),
        keep_probability: &plan.keep_probability,
        noise: &plan.noise,
    };
    let processed = AtomicU64::new(0);
    {
        let input = CellSlice(Cell::from_mut(matrix.input.as_mut_slice()).as_slice_of_cells());
        let output = CellSlice(Cell::from_mut(matrix.output.as_mut_slice()).as_slice_of_cells());
        train_documents(
            &params,
            &input,
            &output,
            &plan.documents,
            1,
            0,
            config.epochs,
            &mut rng,
            &processed,
        );
    }
    matrix.rebuild_unit_vectors();
    Ok(TrainedModel { lexicon: plan.pruned, matrix })
}

/// Multi-worker training over round-robin document shards with racy shared
/// updates.  Falls back to the deterministic path for `workers <= 1`; with
/// more workers the result varies run to run.
#[cfg(feature = "std")]
pub fn train_parallel(
    corpus: &TokenizedCorpus,
    lexicon: &TopicLexicon,
    config: &TrainingConfig,
    workers: usize,
) -> Result<TrainedModel, EmbeddingError> {
    if workers <= 1 {
        return train(corpus, lexicon, config);
    }
    config.validate()?;
    if corpus.is_empty() {
        return Err(EmbeddingError::EmptyCorpus);
    }
    let plan = TrainingPlan::prepare(corpus, lexicon, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut matrix = plan.init_matrix(config, &mut rng);
    let params = SgdParams {
        dim: config.dim,
        window: config.window,
        negatives: config.negatives,
        initial_step: config.initial_step_size,
        scheduled_tokens: plan.scheduled_tokens(config),
        keep_probability: &plan.keep_probability,
        noise: &plan.noise,
    };
    let processed = AtomicU64::new(0);
    {
        let input = atomic_view(matrix.input.as_mut_slice());
        let output = atomic_view(matrix.output.as_mut_slice());
        std::thread::scope(|scope| {
            for w in 0..workers {
                let params = &params;
                let plan = &plan;
                let processed = &processed;
                let mut rng = ChaCha8Rng::seed_from_u64(
                    config.seed.wrapping_add((w as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                );
                scope.spawn(move || {
                    train_documents(
                        params,
                        &AtomicSlice(input),
                        &AtomicSlice(output),
                        &plan.documents,
                        workers,
                        w,
                        config.epochs,
                        &mut rng,
                        processed,
                    );
                });
            }
        });
    }
    matrix.rebuild_unit_vectors();
    Ok(TrainedModel { lexicon: plan.pruned, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::build_corpus;

    fn two_row_matrix(input0: [f64; 2], output1: [f64; 2]) -> EmbeddingMatrix {
        let mut m = EmbeddingMatrix::zeroed(2, 2);
        m.input_vector_mut(TopicId(0)).unwrap().copy_from_slice(&input0);
        m.output_vector_mut(TopicId(1)).unwrap().copy_from_slice(&output1);
        m.rebuild_unit_vectors();
        m
    }

    #[test]
    fn default_config_matches_the_documented_values() {
        let c = TrainingConfig::default();
        assert_eq!(c.dim, 200);
        assert_eq!(c.window, 10);
        assert_eq!(c.negatives, 5);
        assert_eq!(c.min_count, 2);
        assert_eq!(c.subsample_threshold, 1e-4);
        assert_eq!(c.epochs, 5);
        assert_eq!(c.initial_step_size, 0.025);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn subsample_matches_hand_values() {
        let d = 1e-4;
        assert_eq!(subsample_keep_probability(1e-4, d).unwrap(), 1.0);
        assert!((subsample_keep_probability(0.01, d).unwrap() - 0.1).abs() < 1e-12);
        assert!((subsample_keep_probability(4e-4, d).unwrap() - 0.5).abs() < 1e-12);
        assert!((subsample_keep_probability(1.0, d).unwrap() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn subsample_never_discards_rare_topics() {
        for f in [1e-9, 1e-6, 1e-5, 9.9e-5, 1e-4] {
            assert_eq!(subsample_keep_probability(f, 1e-4).unwrap(), 1.0);
        }
    }

    #[test]
    fn subsample_rejects_nonpositive_fractions() {
        assert_eq!(
            subsample_keep_probability(0.0, 1e-4),
            Err(EmbeddingError::NonPositiveFrequency(0.0))
        );
        assert!(subsample_keep_probability(-0.5, 1e-4).is_err());
    }

    #[test]
    fn noise_sampler_follows_the_three_quarter_power() {
        // frequencies [16, 1] -> weights [8, 1] -> probabilities [8/9, 1/9].
        let sampler = NoiseSampler::from_frequencies(&[16, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 100_000;
        let mut hits = 0u32;
        for _ in 0..draws {
            if sampler.sample(&mut rng) == TopicId(0) {
                hits += 1;
            }
        }
        let fraction = hits as f64 / draws as f64;
        assert!((fraction - 8.0 / 9.0).abs() < 0.01, "fraction {fraction}");
    }

    #[test]
    fn noise_sampler_is_uniform_for_equal_frequencies() {
        let sampler = NoiseSampler::from_frequencies(&[5, 5, 5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 100_000;
        let mut counts = [0u32; 3];
        for _ in 0..draws {
            counts[sampler.sample(&mut rng).index()] += 1;
        }
        for c in counts {
            let fraction = c as f64 / draws as f64;
            assert!((fraction - 1.0 / 3.0).abs() < 0.02, "fraction {fraction}");
        }
    }

    #[test]
    fn noise_sampler_needs_a_positive_frequency() {
        assert_eq!(
            NoiseSampler::from_frequencies(&[0, 0]).unwrap_err(),
            EmbeddingError::NoPositiveFrequency
        );
        // Zero-weight rows exist but are never drawn.
        let sampler = NoiseSampler::from_frequencies(&[0, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(sampler.sample(&mut rng), TopicId(1));
        }
    }

    #[test]
    fn cosine_matches_hand_values() {
        let mut m = EmbeddingMatrix::zeroed(3, 2);
        m.input_vector_mut(TopicId(0)).unwrap().copy_from_slice(&[1.0, 0.0]);
        m.input_vector_mut(TopicId(1)).unwrap().copy_from_slice(&[1.0, 1.0]);
        m.rebuild_unit_vectors();
        assert!((m.cosine(TopicId(0), TopicId(1)).unwrap() - 0.7071067811865475).abs() < 1e-8);
        assert!((m.cosine(TopicId(0), TopicId(0)).unwrap() - 1.0).abs() < 1e-12);
        // Row 2 is all-zero: similarity involving it is 0.
        assert_eq!(m.cosine(TopicId(0), TopicId(2)).unwrap(), 0.0);
        assert_eq!(
            m.cosine(TopicId(0), TopicId(9)).unwrap_err(),
            EmbeddingError::UnknownTopic(TopicId(9))
        );
    }

    #[test]
    fn scaling_an_input_row_leaves_cosines_unchanged() {
        let mut m = EmbeddingMatrix::zeroed(2, 3);
        m.input_vector_mut(TopicId(0)).unwrap().copy_from_slice(&[0.3, -0.2, 0.9]);
        m.input_vector_mut(TopicId(1)).unwrap().copy_from_slice(&[-0.5, 0.4, 0.1]);
        m.rebuild_unit_vectors();
        let before = m.cosine(TopicId(0), TopicId(1)).unwrap();
        for x in m.input_vector_mut(TopicId(0)).unwrap() {
            *x *= 3.0;
        }
        m.rebuild_unit_vectors();
        let after = m.cosine(TopicId(0), TopicId(1)).unwrap();
        assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn neg_objective_matches_hand_value() {
        let m = two_row_matrix([1.0, 0.0], [1.0, 0.0]);
        // dot = 1, sigmoid(1) = 0.7310585786300049, ln of it below.
        let value = m.neg_objective(TopicId(0), TopicId(1), &[]).unwrap();
        assert!((value - (-0.31326168751822286)).abs() < 1e-12);
    }

    #[test]
    fn sgd_step_matches_hand_trace() {
        let mut m = two_row_matrix([1.0, 0.0], [1.0, 0.0]);
        m.sgd_step(TopicId(0), TopicId(1), &[], 0.1).unwrap();
        // g = 0.1 * (1 - sigmoid(1)) = 0.02689414213699951; both moved rows
        // gain g along the other's old direction.
        let expected = 1.0268941421369995;
        assert!((m.input_vector(TopicId(0)).unwrap()[0] - expected).abs() < 1e-12);
        assert!((m.input_vector(TopicId(0)).unwrap()[1] - 0.0).abs() < 1e-12);
        assert!((m.output_vector(TopicId(1)).unwrap()[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn small_sgd_steps_do_not_decrease_the_sample_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let rows = 6;
            let dim = 5;
            let mut m = EmbeddingMatrix::zeroed(rows, dim);
            for r in 0..rows {
                let t = TopicId(r as u32);
                for x in m.input_vector_mut(t).unwrap() {
                    *x = rng.random::<f64>() - 0.5;
                }
                for x in m.output_vector_mut(t).unwrap() {
                    *x = rng.random::<f64>() - 0.5;
                }
            }
            let center = TopicId(rng.random_range(0..rows) as u32);
            let context = TopicId(rng.random_range(0..rows) as u32);
            let negatives: Vec<TopicId> =
                (0..3).map(|_| TopicId(rng.random_range(0..rows) as u32)).collect();
            let before = m.neg_objective(center, context, &negatives).unwrap();
            m.sgd_step(center, context, &negatives, 1e-4).unwrap();
            let after = m.neg_objective(center, context, &negatives).unwrap();
            assert!(
                after >= before - 1e-12,
                "objective decreased: {before} -> {after}"
            );
        }
    }

    #[test]
    fn analytic_gradients_match_central_differences_on_a_fixed_instance() {
        let mut m = EmbeddingMatrix::zeroed(4, 3);
        let values = [
            [0.31, -0.22, 0.05],
            [-0.17, 0.44, -0.08],
            [0.12, 0.09, -0.33],
            [-0.25, -0.11, 0.28],
        ];
        for (r, row) in values.iter().enumerate() {
            m.input_vector_mut(TopicId(r as u32)).unwrap().copy_from_slice(row);
            let shifted: Vec<f64> = row.iter().map(|x| -x * 0.7 + 0.05).collect();
            m.output_vector_mut(TopicId(r as u32)).unwrap().copy_from_slice(&shifted);
        }
        let center = TopicId(0);
        let context = TopicId(1);
        let negatives = [TopicId(2), TopicId(3)];
        let grads = m.neg_gradients(center, context, &negatives).unwrap();
        let h = 1e-5;

        for c in 0..3 {
            let mut plus = m.clone();
            plus.input_vector_mut(center).unwrap()[c] += h;
            let mut minus = m.clone();
            minus.input_vector_mut(center).unwrap()[c] -= h;
            let fd = (plus.neg_objective(center, context, &negatives).unwrap()
                - minus.neg_objective(center, context, &negatives).unwrap())
                / (2.0 * h);
            let an = grads.wrt_center[c];
            assert!((an - fd).abs() / an.abs().max(fd.abs()).max(1e-5) < 1e-4);
        }
        for (&row, grad) in &grads.wrt_output {
            for c in 0..3 {
                let mut plus = m.clone();
                plus.output_vector_mut(row).unwrap()[c] += h;
                let mut minus = m.clone();
                minus.output_vector_mut(row).unwrap()[c] -= h;
                let fd = (plus.neg_objective(center, context, &negatives).unwrap()
                    - minus.neg_objective(center, context, &negatives).unwrap())
                    / (2.0 * h);
                let an = grad[c];
                assert!((an - fd).abs() / an.abs().max(fd.abs()).max(1e-5) < 1e-4);
            }
        }
    }

    /// Corpus over two disjoint pairs of topics; co-occurrence should pull
    /// each pair together.
    fn clustered_fixture() -> (TopicLexicon, TokenizedCorpus) {
        let mut lexicon = crate::lexicon::build_lexicon(["aa", "ab", "ba", "bb"]).0;
        let mut docs = Vec::new();
        for i in 0..200 {
            if i % 2 == 0 {
                docs.push("aa ab aa ab aa");
            } else {
                docs.push("ba bb ba bb bb");
            }
        }
        let (corpus, _) = build_corpus(&mut lexicon, docs, 2, 6);
        (lexicon, corpus)
    }

    fn small_config(seed: u64) -> TrainingConfig {
        TrainingConfig {
            dim: 16,
            window: 3,
            negatives: 4,
            min_count: 2,
            // Tiny vocabulary: every topic is frequent, so an aggressive
            // threshold would throw away nearly all tokens.
            subsample_threshold: 0.5,
            epochs: 8,
            initial_step_size: 0.025,
            seed,
        }
    }

    #[test]
    fn training_separates_simple_clusters() {
        let (lexicon, corpus) = clustered_fixture();
        let model = train(&corpus, &lexicon, &small_config(5)).unwrap();
        let id = |p: &str| model.lexicon.id(p).unwrap();
        let intra = model.matrix.cosine(id("aa"), id("ab")).unwrap();
        let inter = model.matrix.cosine(id("aa"), id("ba")).unwrap();
        assert!(
            intra > inter,
            "co-occurring topics should be closer: intra {intra} vs inter {inter}"
        );
    }

    #[test]
    fn training_is_bit_identical_for_a_fixed_seed() {
        let (lexicon, corpus) = clustered_fixture();
        let a = train(&corpus, &lexicon, &small_config(9)).unwrap();
        let b = train(&corpus, &lexicon, &small_config(9)).unwrap();
        assert_eq!(a.matrix.rows(), b.matrix.rows());
        for (x, y) in a.matrix.input_rows().iter().zip(b.matrix.input_rows()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        // And a different seed actually changes something.
        let c = train(&corpus, &lexicon, &small_config(10)).unwrap();
        assert!(
            a.matrix
                .input_rows()
                .iter()
                .zip(c.matrix.input_rows())
                .any(|(x, y)| x.to_bits() != y.to_bits())
        );
    }

    #[test]
    fn min_count_prunes_and_renumbers() {
        let mut lexicon = crate::lexicon::build_lexicon(["common", "rare", "other"]).0;
        let (corpus, _) =
            build_corpus(&mut lexicon, ["common other common other", "common other rare"], 2, 6);
        let config = TrainingConfig { min_count: 2, ..small_config(1) };
        let model = train(&corpus, &lexicon, &config).unwrap();
        assert_eq!(model.lexicon.len(), 2);
        assert_eq!(model.lexicon.id("common"), Some(TopicId(0)));
        assert_eq!(model.lexicon.id("other"), Some(TopicId(1)));
        assert_eq!(model.lexicon.id("rare"), None);
        assert_eq!(model.matrix.rows(), 2);
        assert_eq!(model.lexicon.frequency(TopicId(0)), 3);
    }

    #[test]
    fn train_rejects_empty_corpus_and_empty_vocabulary() {
        let lexicon = crate::lexicon::build_lexicon(["a"]).0;
        let empty = TokenizedCorpus::default();
        assert_eq!(
            train(&empty, &lexicon, &small_config(1)).unwrap_err(),
            EmbeddingError::EmptyCorpus
        );
        let corpus = TokenizedCorpus::from_documents(vec![vec![TopicId(0), TopicId(0)]]);
        let config = TrainingConfig { min_count: 100, ..small_config(1) };
        assert_eq!(
            train(&corpus, &lexicon, &config).unwrap_err(),
            EmbeddingError::EmptyVocabulary
        );
    }

    #[test]
    fn config_validation_catches_bad_values() {
        for broken in [
            TrainingConfig { dim: 0, ..Default::default() },
            TrainingConfig { window: 0, ..Default::default() },
            TrainingConfig { negatives: 0, ..Default::default() },
            TrainingConfig { subsample_threshold: 0.0, ..Default::default() },
            TrainingConfig { epochs: 0, ..Default::default() },
            TrainingConfig { initial_step_size: 0.0, ..Default::default() },
        ] {
            assert!(broken.validate().is_err());
        }
    }

    #[cfg(feature = "std")]
    #[test]
    fn parallel_training_produces_a_usable_model() {
        let (lexicon, corpus) = clustered_fixture();
        let model = train_parallel(&corpus, &lexicon, &small_config(5), 3).unwrap();
        assert_eq!(model.matrix.rows(), 4);
        assert!(model.matrix.input_rows().iter().all(|x| x.is_finite()));
        // Some training happened: vectors left the tiny init range.
        let max = model.matrix.input_rows().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(max > 0.5 / 16.0, "vectors look untrained, max |x| = {max}");
    }
}
