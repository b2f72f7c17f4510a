//! Topic lexicon: normalized phrase <-> id bijection plus corpus tokenization.
//!
//! Titles are normalized to lowercase underscore-joined phrases
//! (`"Artificial Intelligence"` -> `artificial_intelligence`), deduplicated,
//! and assigned dense ids in first-seen order.  Documents are tokenized by
//! greedy longest phrase matching so multi-word topics survive as single
//! tokens.

use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::TopicId;

/// Longest phrase (in words) the tokenizer will try to match.
pub const DEFAULT_MAX_PHRASE_WORDS: usize = 6;

/// Documents shorter than this many tokens are dropped from the corpus.
pub const DEFAULT_MIN_SENTENCE_LENGTH: usize = 2;

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("phrase `{0}` is not in normalized form")]
    NotNormalized(String),
    #[error("duplicate phrase `{0}`")]
    DuplicatePhrase(String),
}

/// Canonicalize a raw title into lexicon form, or reject it.
///
/// Lowercases, collapses runs of whitespace/underscores into single
/// underscores, and trims separators at the ends.  Returns `None` for titles
/// that come out empty or consist solely of Unicode punctuation.  The result
/// is a fixed point: normalizing it again changes nothing.
pub fn normalize_title(raw: &str) -> Option<String> {
    let lowered = raw.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.split(|c: char| c.is_whitespace() || c == '_') {
        if word.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push('_');
        }
        out.push_str(word);
    }
    if out.is_empty() || out.chars().all(is_punctuation) {
        return None;
    }
    Some(out)
}

fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// What happened to one inserted title.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TitleOutcome {
    /// Fresh phrase, assigned this id.
    Added(TopicId),
    /// Normalized to a phrase we already have.
    Duplicate(TopicId),
    /// Empty or punctuation-only after normalization.
    Rejected,
}

/// Counters reported by [`build_lexicon`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub titles_read: u64,
    pub accepted: u64,
    pub duplicates: u64,
    pub rejected: u64,
}

/// Bijection between normalized topic phrases and dense ids, with per-topic
/// corpus frequencies.
///
/// Ids run 0..len in insertion order, so they index directly into frequency
/// tables and embedding matrices.
#[derive(Debug, Clone, Default)]
pub struct TopicLexicon {
    phrase_to_id: HashMap<String, TopicId>,
    phrases: Vec<String>,
    frequencies: Vec<u64>,
}

impl TopicLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuild from already-normalized `(phrase, frequency)` rows, e.g. a
    /// lexicon file.  Ids are assigned in row order.  Rejects rows whose
    /// phrase is not its own normalized form, and duplicate phrases.
    pub fn from_rows<I>(rows: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut lexicon = Self::new();
        for (phrase, frequency) in rows {
            if normalize_title(&phrase).as_deref() != Some(phrase.as_str()) {
                return Err(LexiconError::NotNormalized(phrase));
            }
            if lexicon.phrase_to_id.contains_key(&phrase) {
                return Err(LexiconError::DuplicatePhrase(phrase));
            }
            let id = TopicId(lexicon.phrases.len() as u32);
            lexicon.phrase_to_id.insert(phrase.clone(), id);
            lexicon.phrases.push(phrase);
            lexicon.frequencies.push(frequency);
        }
        Ok(lexicon)
    }

    /// Normalize `raw` and insert it if new.
    pub fn insert_title(&mut self, raw: &str) -> TitleOutcome {
        let Some(phrase) = normalize_title(raw) else {
            return TitleOutcome::Rejected;
        };
        if let Some(&id) = self.phrase_to_id.get(phrase.as_str()) {
            return TitleOutcome::Duplicate(id);
        }
        let id = TopicId(self.phrases.len() as u32);
        self.phrase_to_id.insert(phrase.clone(), id);
        self.phrases.push(phrase);
        self.frequencies.push(0);
        TitleOutcome::Added(id)
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Id of an already-normalized phrase.
    pub fn id(&self, phrase: &str) -> Option<TopicId> {
        self.phrase_to_id.get(phrase).copied()
    }

    pub fn phrase(&self, t: TopicId) -> Option<&str> {
        self.phrases.get(t.index()).map(String::as_str)
    }

    /// Corpus frequency of `t`.  `t` must come from this lexicon.
    pub fn frequency(&self, t: TopicId) -> u64 {
        self.frequencies[t.index()]
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.frequencies
    }

    pub fn add_frequency(&mut self, t: TopicId, by: u64) {
        self.frequencies[t.index()] += by;
    }

    /// `(id, phrase, frequency)` rows in id order.
    pub fn entries(&self) -> impl Iterator<Item = (TopicId, &str, u64)> {
        self.phrases
            .iter()
            .zip(self.frequencies.iter())
            .enumerate()
            .map(|(i, (p, &f))| (TopicId(i as u32), p.as_str(), f))
    }

    /// Greedy longest-match tokenization of a word sequence.
    ///
    /// At each position the longest matching phrase of at most
    /// `max_phrase_words` words wins and the cursor jumps past it, so matches
    /// never overlap.  Words that start no phrase are dropped.  Words are
    /// expected to be lowercased and punctuation-stripped already.
    pub fn tokenize_words(&self, words: &[&str], max_phrase_words: usize) -> Vec<TopicId> {
        let mut out = Vec::new();
        let mut buf = String::new();
        let mut i = 0;
        while i < words.len() {
            let limit = max_phrase_words.max(1).min(words.len() - i);
            let mut matched = None;
            for len in (1..=limit).rev() {
                buf.clear();
                for (j, w) in words[i..i + len].iter().enumerate() {
                    if j > 0 {
                        buf.push('_');
                    }
                    buf.push_str(w);
                }
                if let Some(&id) = self.phrase_to_id.get(buf.as_str()) {
                    matched = Some((id, len));
                    break;
                }
            }
            match matched {
                Some((id, len)) => {
                    out.push(id);
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }

    /// Tokenize one document and count each emitted token into the lexicon
    /// frequencies.
    pub fn tokenize_document(&mut self, words: &[&str], max_phrase_words: usize) -> Vec<TopicId> {
        let tokens = self.tokenize_words(words, max_phrase_words);
        for &t in &tokens {
            self.frequencies[t.index()] += 1;
        }
        tokens
    }
}

/// Build a lexicon from a stream of raw titles, reporting what was kept.
pub fn build_lexicon<I, S>(titles: I) -> (TopicLexicon, IngestStats)
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut lexicon = TopicLexicon::new();
    let mut stats = IngestStats::default();
    for title in titles {
        stats.titles_read += 1;
        match lexicon.insert_title(title.as_ref()) {
            TitleOutcome::Added(_) => stats.accepted += 1,
            TitleOutcome::Duplicate(_) => stats.duplicates += 1,
            TitleOutcome::Rejected => stats.rejected += 1,
        }
    }
    (lexicon, stats)
}

/// Token sequences of the retained documents, in input order.
#[derive(Debug, Clone, Default)]
pub struct TokenizedCorpus {
    documents: Vec<Vec<TopicId>>,
}

impl TokenizedCorpus {
    pub fn from_documents(documents: Vec<Vec<TopicId>>) -> Self {
        Self { documents }
    }

    pub fn documents(&self) -> &[Vec<TopicId>] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn total_tokens(&self) -> u64 {
        self.documents.iter().map(|d| d.len() as u64).sum()
    }
}

/// Counters reported by [`build_corpus`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub documents_read: u64,
    pub documents_kept: u64,
    pub documents_dropped: u64,
    pub tokens_emitted: u64,
}

/// Tokenize a stream of documents (one string of whitespace-separated words
/// each), dropping those shorter than `min_sentence_length` tokens.
///
/// Lexicon frequencies are incremented only for tokens of retained documents,
/// so afterwards the frequency sum added here equals the corpus token count.
pub fn build_corpus<D, S>(
    lexicon: &mut TopicLexicon,
    documents: D,
    min_sentence_length: usize,
    max_phrase_words: usize,
) -> (TokenizedCorpus, CorpusStats)
where
    D: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut corpus = Vec::new();
    let mut stats = CorpusStats::default();
    for document in documents {
        stats.documents_read += 1;
        let words: Vec<&str> = document.as_ref().split_whitespace().collect();
        let tokens = lexicon.tokenize_words(&words, max_phrase_words);
        if tokens.len() < min_sentence_length {
            stats.documents_dropped += 1;
            continue;
        }
        for &t in &tokens {
            lexicon.add_frequency(t, 1);
        }
        stats.documents_kept += 1;
        stats.tokens_emitted += tokens.len() as u64;
        corpus.push(tokens);
    }
    (TokenizedCorpus::from_documents(corpus), stats)
}
