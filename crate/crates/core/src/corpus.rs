//! Text ingestion: tokenization, vocabulary, context windows, negative
//! sampling and frequent-word subsampling.
//!
//! A corpus is UTF-8 text with one sentence per line. Tokens are lowercased,
//! stripped of punctuation and split on whitespace; they are assumed to be
//! lemmas already.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::io;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorpusError {
    #[error("token stream is empty")]
    EmptyStream,
    #[error("no token reaches min_count {0}")]
    EmptyVocabulary(u64),
    #[error("corpus has no in-vocabulary tokens")]
    EmptyCorpus,
    #[error("subsampling threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("sampling power must be finite, got {0}")]
    InvalidPower(f64),
}

/// Lowercases, removes punctuation and splits on whitespace.
pub fn tokenize(line: &str) -> Vec<String> {
    let cleaned: String = line
        .chars()
        .filter(|c| !c.is_ascii_punctuation() && !is_unicode_punctuation(*c))
        .flat_map(char::to_lowercase)
        .collect();
    cleaned.split_whitespace().map(str::to_string).collect()
}

fn is_unicode_punctuation(c: char) -> bool {
    matches!(
        c,
        '‘' | '’' | '“' | '”' | '–' | '—' | '…' | '«' | '»' | '¿' | '¡'
    )
}

/// Reads a corpus file into tokenized sentences, dropping empty lines.
pub fn read_sentences(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = io::read_to_string(path)?;
    Ok(text
        .lines()
        .map(tokenize)
        .filter(|s| !s.is_empty())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabEntry {
    pub token: String,
    pub count: u64,
}

/// Token ↔ dense id map ordered by descending count, ties by token.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, u32>,
    total: u64,
}

impl Vocabulary {
    pub fn build<I, S>(tokens: I, min_count: u64) -> std::result::Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut seen = false;
        for t in tokens {
            seen = true;
            *counts.entry(t.as_ref().to_string()).or_default() += 1;
        }
        if !seen {
            return Err(CorpusError::EmptyStream);
        }
        Self::from_counts(counts, min_count)
    }

    pub fn from_counts(
        counts: impl IntoIterator<Item = (String, u64)>,
        min_count: u64,
    ) -> std::result::Result<Self, CorpusError> {
        let mut entries: Vec<VocabEntry> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count && *c > 0)
            .map(|(token, count)| VocabEntry { token, count })
            .collect();
        if entries.is_empty() {
            return Err(CorpusError::EmptyVocabulary(min_count));
        }
        entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.token.cmp(&b.token)));
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.token.clone(), i as u32))
            .collect();
        let total = entries.iter().map(|e| e.count).sum();
        Ok(Self {
            entries,
            index,
            total,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.entries[id as usize].token
    }

    pub fn count(&self, id: u32) -> u64 {
        self.entries[id as usize].count
    }

    /// Sum of the counts of retained tokens.
    pub fn total_count(&self) -> u64 {
        self.total
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.token.as_str())
    }

    /// `token<TAB>count` lines in id order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}", e.token, e.count);
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, self.to_tsv().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = io::read_to_string(path)?;
        let mut counts = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (token, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected `token<TAB>count`"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, i + 1, format!("invalid count `{count}`")))?;
            counts.push((token.to_string(), count));
        }
        Ok(Self::from_counts(counts, 0)?)
    }
}

/// A corpus encoded as vocabulary ids; out-of-vocabulary tokens are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    sentences: Vec<Vec<u32>>,
}

impl Corpus {
    pub fn encode(sentences: &[Vec<String>], vocab: &Vocabulary) -> Self {
        let sentences = sentences
            .iter()
            .map(|s| s.iter().filter_map(|t| vocab.id(t)).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect();
        Self { sentences }
    }

    pub fn from_ids(sentences: Vec<Vec<u32>>) -> Self {
        Self { sentences }
    }

    pub fn sentences(&self) -> &[Vec<u32>] {
        &self.sentences
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }
}

/// A target position and the ids of the words within the window around it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextPair {
    pub position: usize,
    pub target: u32,
    pub context: Vec<u32>,
}

/// One pair per position; windows are truncated at the sentence boundaries.
pub fn context_windows(sentence: &[u32], window: usize) -> Vec<ContextPair> {
    assert!(window >= 1, "window must be at least 1");
    (0..sentence.len())
        .map(|pos| ContextPair {
            position: pos,
            target: sentence[pos],
            context: window_around(sentence, pos, window).collect(),
        })
        .collect()
}

pub(crate) fn window_around(
    sentence: &[u32],
    pos: usize,
    window: usize,
) -> impl Iterator<Item = u32> + '_ {
    let lo = pos.saturating_sub(window);
    let hi = (pos + window + 1).min(sentence.len());
    (lo..hi)
        .filter(move |&i| i != pos)
        .map(move |i| sentence[i])
}

/// Noise distribution `P(i) ∝ count(i)^power` for negative sampling.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    probs: Vec<f64>,
    dist: WeightedIndex<f64>,
}

impl NegativeSampler {
    pub fn new(vocab: &Vocabulary, power: f64) -> std::result::Result<Self, CorpusError> {
        if vocab.is_empty() {
            return Err(CorpusError::EmptyVocabulary(0));
        }
        if !power.is_finite() {
            return Err(CorpusError::InvalidPower(power));
        }
        let weights: Vec<f64> = vocab
            .entries()
            .iter()
            .map(|e| (e.count as f64).powf(power))
            .collect();
        let total: f64 = weights.iter().sum();
        let probs = weights.iter().map(|w| w / total).collect();
        let dist = WeightedIndex::new(&weights).map_err(|_| CorpusError::InvalidPower(power))?;
        Ok(Self { probs, dist })
    }

    pub fn probability(&self, id: u32) -> f64 {
        self.probs[id as usize]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.dist.sample(rng) as u32
    }
}

/// Frequent-word subsampling: keep a token with probability `min(1, √(t/f))`.
#[derive(Debug, Clone)]
pub struct Subsampler {
    keep: Vec<f64>,
}

impl Subsampler {
    pub fn new(vocab: &Vocabulary, threshold: f64) -> std::result::Result<Self, CorpusError> {
        if !(threshold > 0.0) {
            return Err(CorpusError::InvalidThreshold(threshold));
        }
        let total = vocab.total_count() as f64;
        let keep = vocab
            .entries()
            .iter()
            .map(|e| {
                let f = e.count as f64 / total;
                (threshold / f).sqrt().min(1.0)
            })
            .collect();
        Ok(Self { keep })
    }

    pub fn keep_probability(&self, id: u32) -> f64 {
        self.keep[id as usize]
    }

    pub fn keep<R: Rng + ?Sized>(&self, id: u32, rng: &mut R) -> bool {
        let p = self.keep[id as usize];
        p >= 1.0 || rng.random::<f64>() < p
    }
}
