//! Exact BPE by depth-first search over merge sequences.
//!
//! Every state is a token stream; its children apply one distinct adjacent
//! pair of the stream. With [`Pruning::Independent`], a child merge that is
//! independent of the previous merge and precedes it in
//! [`canonical_order`] is skipped: swapping adjacent independent merges
//! never changes Apply, so every effective sequence has a reordering in
//! which no such step occurs, and the optimum is kept.
//!
//! [`Pruning::MergeOrder`] uses the ⋗ relation as the guard instead. It is
//! kept for comparison only; it can miss the optimum (on `aba` with two
//! merges it finds utility 1 instead of 2).

mod order;

pub use order::{
    canonical_order, conflicts, independent, is_safe_permutation, is_safe_transposition, merge_order, overlaps,
    sequences_equivalent, EquivalenceCheck, DEFAULT_MAX_EQUIVALENCE_LEN,
};

use std::cmp::Ordering;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::error::Result;
use crate::merge::{replace_pair, MergeId, MergeSequence, MergeTable, TokenStream};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pruning {
    /// Expand every child.
    None,
    /// Skip children that could be swapped before the previous merge.
    #[default]
    Independent,
    /// Expand a child only if it is ⋗ the previous merge.
    MergeOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactOptions {
    pub merge_count: usize,
    pub pruning: Pruning,
    /// Skip states whose stream (and previous merge, when pruning) was
    /// already expanded with at least as many merges left.
    pub memo: bool,
    /// Number of optimal sequences to collect.
    pub max_optima: usize,
}

impl ExactOptions {
    pub fn new(merge_count: usize) -> Self {
        Self { merge_count, pruning: Pruning::Independent, memo: false, max_optima: 1 }
    }

    pub fn brute(mut self) -> Self {
        self.pruning = Pruning::None;
        self
    }

    pub fn pruning(mut self, pruning: Pruning) -> Self {
        self.pruning = pruning;
        self
    }

    pub fn memo(mut self, memo: bool) -> Self {
        self.memo = memo;
        self
    }

    pub fn max_optima(mut self, n: usize) -> Self {
        self.max_optima = n.max(1);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    pub table: MergeTable,
    /// First optimal sequence in DFS order.
    pub best_sequence: MergeSequence,
    pub best_utility: usize,
    pub best_stream: TokenStream,
    /// Optimal sequences in DFS order, up to `max_optima`.
    pub optima: Vec<MergeSequence>,
    pub states_visited: usize,
    /// Children skipped by the guard.
    pub pruned: usize,
    /// States skipped by memoization.
    pub memo_hits: usize,
}

/// Exact search with the default guard, or brute force when `pruned` is false.
pub fn train_exact(x: &str, merge_count: usize, pruned: bool) -> Result<SearchReport> {
    let opts = ExactOptions::new(merge_count);
    train_exact_with(x, if pruned { opts } else { opts.brute() })
}

pub fn train_exact_with(x: &str, opts: ExactOptions) -> Result<SearchReport> {
    train_exact_on(MergeTable::from_text(x), x, opts)
}

/// Exact search on a caller supplied table; merges are interned into it.
pub fn train_exact_on(table: MergeTable, x: &str, opts: ExactOptions) -> Result<SearchReport> {
    let root = table.lift(x)?;
    let mut search = Search {
        table,
        opts,
        source_len: root.source_len(),
        seq: Vec::new(),
        best_len: root.len(),
        best_stream: root.tokens().to_vec(),
        optima: vec![Vec::new()],
        states_visited: 0,
        pruned: 0,
        memo_hits: 0,
        memo: FxHashMap::default(),
    };
    search.visit(root.tokens().to_vec())?;
    let best_sequence = MergeSequence::from(search.optima[0].clone());
    Ok(SearchReport {
        best_utility: search.source_len - search.best_len,
        best_stream: TokenStream::from_parts(search.best_stream, search.source_len),
        best_sequence,
        optima: search.optima.into_iter().map(MergeSequence::from).collect(),
        states_visited: search.states_visited,
        pruned: search.pruned,
        memo_hits: search.memo_hits,
        table: search.table,
    })
}

struct Search {
    table: MergeTable,
    opts: ExactOptions,
    source_len: usize,
    seq: Vec<MergeId>,
    best_len: usize,
    best_stream: Vec<MergeId>,
    optima: Vec<Vec<MergeId>>,
    states_visited: usize,
    pruned: usize,
    memo_hits: usize,
    memo: FxHashMap<(Vec<MergeId>, Option<MergeId>), usize>,
}

impl Search {
    fn visit(&mut self, tokens: Vec<MergeId>) -> Result<()> {
        self.states_visited += 1;
        match tokens.len().cmp(&self.best_len) {
            Ordering::Less => {
                self.best_len = tokens.len();
                self.best_stream = tokens.clone();
                self.optima = vec![self.seq.clone()];
            }
            Ordering::Equal if !self.seq.is_empty() && self.optima.len() < self.opts.max_optima => {
                self.optima.push(self.seq.clone());
            }
            _ => {}
        }
        let remaining = self.opts.merge_count - self.seq.len();
        if remaining == 0 || tokens.len() < 2 {
            return Ok(());
        }
        if self.opts.memo {
            let last = match self.opts.pruning {
                Pruning::None => None,
                _ => self.seq.last().copied(),
            };
            let key = (tokens.clone(), last);
            match self.memo.get(&key) {
                Some(&seen) if seen >= remaining => {
                    self.memo_hits += 1;
                    return Ok(());
                }
                _ => {
                    self.memo.insert(key, remaining);
                }
            }
        }
        let mut seen = FxHashSet::default();
        for w in tokens.windows(2) {
            let (left, right) = (w[0], w[1]);
            if !seen.insert((left, right)) {
                continue;
            }
            let merge = self.table.intern(left, right)?;
            if !self.expands(merge) {
                self.pruned += 1;
                continue;
            }
            let mut child = tokens.clone();
            replace_pair(&mut child, left, right, merge);
            self.seq.push(merge);
            self.visit(child)?;
            self.seq.pop();
        }
        Ok(())
    }

    fn expands(&self, merge: MergeId) -> bool {
        let Some(&last) = self.seq.last() else {
            return true;
        };
        match self.opts.pruning {
            Pruning::None => true,
            Pruning::Independent => {
                !(independent(&self.table, merge, last) && canonical_order(&self.table, merge, last) == Ordering::Less)
            }
            Pruning::MergeOrder => merge_order(&self.table, merge, last),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merge::compression_utility;

    #[test]
    fn greedy_suboptimal_instance() {
        for pruned in [false, true] {
            let r = train_exact("abaabbaa", 2, pruned).unwrap();
            assert_eq!(r.best_utility, 4);
            assert_eq!(compression_utility(&r.table, "abaabbaa", &r.best_sequence).unwrap(), 4);
        }
    }

    #[test]
    fn run_of_four() {
        let r = train_exact("aaaa", 1, true).unwrap();
        assert_eq!(r.best_utility, 2);
        assert_eq!(r.best_sequence.render(&r.table), vec!["['a' 'a']"]);
    }

    #[test]
    fn zero_merges() {
        let r = train_exact("abcabc", 0, true).unwrap();
        assert_eq!(r.best_utility, 0);
        assert!(r.best_sequence.is_empty());
        assert_eq!(r.states_visited, 1);
    }

    #[test]
    fn merge_order_guard_misses_the_optimum() {
        let brute = train_exact("aba", 2, false).unwrap();
        let literal = train_exact_with("aba", ExactOptions::new(2).pruning(Pruning::MergeOrder)).unwrap();
        let sound = train_exact("aba", 2, true).unwrap();
        assert_eq!(brute.best_utility, 2);
        assert_eq!(sound.best_utility, 2);
        assert_eq!(literal.best_utility, 1);
    }

    #[test]
    fn memo_keeps_the_optimum() {
        for x in ["abaabbaa", "abcabcabcab", "aabbaabbab"] {
            for m in 1..=4 {
                let plain = train_exact(x, m, true).unwrap();
                let memo = train_exact_with(x, ExactOptions::new(m).memo(true)).unwrap();
                let brute_memo = train_exact_with(x, ExactOptions::new(m).brute().memo(true)).unwrap();
                assert_eq!(plain.best_utility, memo.best_utility);
                assert_eq!(plain.best_utility, brute_memo.best_utility);
                assert!(memo.states_visited <= plain.states_visited);
            }
        }
    }

    #[test]
    fn optima_are_collected_in_dfs_order() {
        let r = train_exact_with("abab", ExactOptions::new(1).brute().max_optima(8)).unwrap();
        assert_eq!(r.best_utility, 2);
        assert_eq!(r.optima.len(), 1);
        let r = train_exact_with("abcab", ExactOptions::new(1).brute().max_optima(8)).unwrap();
        assert_eq!(r.best_utility, 2);
        assert_eq!(r.optima[0], r.best_sequence);
        let r = train_exact_with("abc", ExactOptions::new(1).brute().max_optima(8)).unwrap();
        assert_eq!(r.optima.iter().map(|s| s.render(&r.table)).collect::<Vec<_>>(), vec![
            vec!["['a' 'b']".to_string()],
            vec!["['b' 'c']".to_string()],
        ]);
    }
}
