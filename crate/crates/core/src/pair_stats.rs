//! Non-overlapping adjacent pair counts and deterministic top-pair selection.
//!
//! Counts are taken in one left-to-right pass. An occurrence is skipped when
//! it overlaps the occurrence of the same pair counted at the previous
//! position, which makes the count of a pair equal to the number of
//! replacements the corresponding merge performs (`aaa` counts `aa` once,
//! `aaaa` counts it twice).
//!
//! Ties on the count are broken by the position of the first counted
//! occurrence (earlier wins) and then by the concatenated yield
//! (lexicographically smaller wins). Trained vocabularies depend on this
//! order.

use std::cmp::Ordering;

use rustc_hash::FxHashMap;

use crate::error::{BpeError, Result};
use crate::merge::{MergeId, MergeTable, Pair};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairStat {
    /// Non-overlapping occurrence count.
    pub count: usize,
    /// Stream index of the first counted occurrence.
    pub first_pos: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairFreqTable {
    stats: FxHashMap<Pair, PairStat>,
}

impl PairFreqTable {
    pub fn get(&self, pair: Pair) -> Option<PairStat> {
        self.stats.get(&pair).copied()
    }

    pub fn count(&self, pair: Pair) -> usize {
        self.stats.get(&pair).map_or(0, |s| s.count)
    }

    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pair, PairStat)> + '_ {
        self.stats.iter().map(|(&p, &s)| (p, s))
    }

    /// The best pair under the documented order.
    pub fn top_pair(&self, table: &MergeTable) -> Result<Pair> {
        self.iter()
            .min_by(|a, b| rank_order(table, *a, *b))
            .map(|(p, _)| p)
            .ok_or(BpeError::NoPair)
    }

    /// All pairs, best first.
    pub fn ranked(&self, table: &MergeTable) -> Vec<(Pair, PairStat)> {
        let mut all: Vec<_> = self.iter().collect();
        all.sort_by(|a, b| rank_order(table, *a, *b));
        all
    }
}

/// `Less` means `a` ranks before `b`.
pub fn rank_order(table: &MergeTable, a: (Pair, PairStat), b: (Pair, PairStat)) -> Ordering {
    b.1.count
        .cmp(&a.1.count)
        .then(a.1.first_pos.cmp(&b.1.first_pos))
        .then_with(|| compare_pair_yields(table, a.0, b.0))
}

/// Lexicographic order of the concatenated yields of two pairs.
pub fn compare_pair_yields(table: &MergeTable, a: Pair, b: Pair) -> Ordering {
    let ya = table.yield_of(a.0).chars().chain(table.yield_of(a.1).chars());
    let yb = table.yield_of(b.0).chars().chain(table.yield_of(b.1).chars());
    ya.cmp(yb).then(a.cmp(&b))
}

/// Overlap-adjusted pair counts of a token stream.
pub fn pair_frequencies(tokens: &[MergeId]) -> PairFreqTable {
    pair_frequencies_where(tokens, |_| true)
}

/// Like [`pair_frequencies`], ignoring every pair that contains a token for
/// which `mergeable` is false.
pub fn pair_frequencies_where(tokens: &[MergeId], mergeable: impl Fn(MergeId) -> bool) -> PairFreqTable {
    let mut stats: FxHashMap<Pair, PairStat> = FxHashMap::default();
    let mut prev: Option<Pair> = None;
    for (i, w) in tokens.windows(2).enumerate() {
        let pair = (w[0], w[1]);
        if !mergeable(pair.0) || !mergeable(pair.1) {
            prev = None;
            continue;
        }
        if prev == Some(pair) {
            // overlaps the occurrence counted one position earlier
            prev = None;
            continue;
        }
        stats
            .entry(pair)
            .and_modify(|s| s.count += 1)
            .or_insert(PairStat { count: 1, first_pos: i });
        prev = Some(pair);
    }
    PairFreqTable { stats }
}

/// Raw bigram counts that admit overlaps. For comparison only, never used by
/// the trainers.
pub fn overlapping_pair_frequencies(tokens: &[MergeId]) -> PairFreqTable {
    let mut stats: FxHashMap<Pair, PairStat> = FxHashMap::default();
    for (i, w) in tokens.windows(2).enumerate() {
        stats
            .entry((w[0], w[1]))
            .and_modify(|s| s.count += 1)
            .or_insert(PairStat { count: 1, first_pos: i });
    }
    PairFreqTable { stats }
}

/// Best pair of a frequency table; see the module docs for the order.
pub fn top_pair(freqs: &PairFreqTable, table: &MergeTable) -> Result<Pair> {
    freqs.top_pair(table)
}
