//! Corpora of words with counts, word-boundary training, the
//! non-iterative trainer and file formats.

pub mod io;
mod nonit;

pub use nonit::{train_non_iterative, NonIterativeResult};

use indexmap::IndexMap;
use serde::Serialize;

use crate::error::Result;
use crate::greedy::TrainStep;
use crate::merge::{MergeId, MergeSequence, MergeTable, Symbol, TokenStream};
use crate::pair_stats::{compare_pair_yields, pair_frequencies};

pub const DEFAULT_BOUNDARY: Symbol = ' ';

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusMode {
    /// The whole text is one pseudo-word.
    #[default]
    Raw,
    /// Whitespace-separated words; merges never cross a boundary.
    WordBoundary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    /// Words with counts, in order of first appearance.
    pub words: IndexMap<String, u64>,
    pub total_tokens: u64,
    pub mode: CorpusMode,
    pub boundary: Symbol,
}

impl Corpus {
    pub fn empty(mode: CorpusMode, boundary: Symbol) -> Self {
        Corpus { words: IndexMap::new(), total_tokens: 0, mode, boundary }
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn add(&mut self, word: &str, count: u64) {
        if count == 0 {
            return;
        }
        *self.words.entry(word.to_string()).or_insert(0) += count;
        self.total_tokens += count;
    }

    /// Alphabet of all words, plus the boundary in word mode.
    pub fn alphabet(&self) -> Vec<Symbol> {
        let mut symbols: Vec<Symbol> = self.words.keys().flat_map(|w| w.chars()).collect();
        if self.mode == CorpusMode::WordBoundary {
            symbols.push(self.boundary);
        }
        symbols.sort_unstable();
        symbols.dedup();
        symbols
    }

    /// Words joined by the boundary, each repeated by its count, in
    /// insertion order. Equals the normalized source text when every word
    /// occurrence was adjacent to its repeats; used for comparisons only.
    pub fn text(&self) -> String {
        let sep = self.boundary.to_string();
        let parts: Vec<&str> = self
            .words
            .iter()
            .flat_map(|(w, &c)| std::iter::repeat(w.as_str()).take(c as usize))
            .collect();
        parts.join(&sep)
    }
}

/// Replaces every run of whitespace by one `boundary` and trims the ends.
pub fn normalize_boundaries(text: &str, boundary: Symbol) -> String {
    let sep = boundary.to_string();
    text.split_whitespace().collect::<Vec<_>>().join(&sep)
}

pub fn ingest(text: &str, mode: CorpusMode) -> Corpus {
    ingest_with(text, mode, DEFAULT_BOUNDARY)
}

/// Raw mode keeps the text as one pseudo-word; word mode splits on
/// whitespace runs and on `boundary`.
pub fn ingest_with(text: &str, mode: CorpusMode, boundary: Symbol) -> Corpus {
    let mut corpus = Corpus::empty(mode, boundary);
    match mode {
        CorpusMode::Raw => {
            if !text.is_empty() {
                corpus.add(text, 1);
            }
        }
        CorpusMode::WordBoundary => {
            for word in text.split(|c: char| c.is_whitespace() || c == boundary).filter(|w| !w.is_empty()) {
                corpus.add(word, 1);
            }
        }
    }
    corpus
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordEncoding {
    pub word: String,
    pub count: u64,
    pub stream: TokenStream,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusTrainResult {
    pub table: MergeTable,
    pub sequence: MergeSequence,
    /// `replacements` and `gain` are weighted by word counts.
    pub steps: Vec<TrainStep>,
    pub words: Vec<WordEncoding>,
}

impl CorpusTrainResult {
    /// Weighted compression utility over the corpus.
    pub fn utility(&self) -> u64 {
        self.words.iter().map(|w| w.count * w.stream.utility() as u64).sum()
    }
}

#[derive(Clone, Copy, Debug)]
struct WeightedStat {
    count: u64,
    word: usize,
    pos: usize,
}

/// Greedy training over unique words: a pair's count is the sum over words
/// of its in-word non-overlapping count times the word count. Ties go to the
/// pair occurring in the earliest word, then at the earliest in-word
/// position, then to the smaller concatenated yield.
pub fn train_greedy_weighted(corpus: &Corpus, merge_count: usize) -> Result<CorpusTrainResult> {
    let mut table = MergeTable::new(corpus.alphabet());
    let mut streams: Vec<Vec<MergeId>> = corpus
        .words
        .keys()
        .map(|w| table.lift(w).map(TokenStream::into_tokens))
        .collect::<Result<_>>()?;
    let counts: Vec<u64> = corpus.words.values().copied().collect();
    let mut sequence = MergeSequence::new();
    let mut steps = Vec::new();
    for _ in 0..merge_count {
        let mut stats: rustc_hash::FxHashMap<(MergeId, MergeId), WeightedStat> = Default::default();
        for (word, tokens) in streams.iter().enumerate() {
            for (pair, stat) in pair_frequencies(tokens).iter() {
                stats
                    .entry(pair)
                    .and_modify(|s| s.count += stat.count as u64 * counts[word])
                    .or_insert(WeightedStat { count: stat.count as u64 * counts[word], word, pos: stat.first_pos });
            }
        }
        let Some((&(left, right), _)) = stats.iter().min_by(|a, b| {
            b.1.count
                .cmp(&a.1.count)
                .then(a.1.word.cmp(&b.1.word))
                .then(a.1.pos.cmp(&b.1.pos))
                .then_with(|| compare_pair_yields(&table, *a.0, *b.0))
        }) else {
            break;
        };
        let merge = table.intern(left, right)?;
        let mut weighted = 0;
        for (tokens, &c) in streams.iter_mut().zip(&counts) {
            weighted += crate::merge::replace_pair(tokens, left, right, merge) as u64 * c;
        }
        sequence.push(merge);
        let r = weighted as usize;
        steps.push(TrainStep { merge, replacements: r, gain: r });
    }
    let words = corpus
        .words
        .iter()
        .zip(streams)
        .map(|((w, &count), tokens)| WordEncoding {
            word: w.clone(),
            count,
            stream: TokenStream::from_parts(tokens, w.chars().count()),
        })
        .collect();
    Ok(CorpusTrainResult { table, sequence, steps, words })
}
