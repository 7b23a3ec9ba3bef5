//! Greedy BPE training.
//!
//! [`train_greedy_slow`] recounts every pair over the whole stream at each
//! step. [`train_greedy_fast`] keeps the stream as a linked list with a
//! position index per pair and a lazily invalidated max-heap, so a step only
//! touches the neighbourhoods of its replacements. Both share the pair
//! ranking of [`crate::pair_stats`] and return identical results.

mod index;

pub use index::PairIndex;

use crate::error::Result;
use crate::merge::{MergeId, MergeSequence, MergeTable, Symbol, TokenStream};
use crate::pair_stats::pair_frequencies_where;

/// One applied merge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainStep {
    pub merge: MergeId,
    /// Replacements made by this merge (`R_t`).
    pub replacements: usize,
    /// Increase of the compression utility.
    pub gain: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainResult {
    pub table: MergeTable,
    pub sequence: MergeSequence,
    pub stream: TokenStream,
    pub steps: Vec<TrainStep>,
}

impl TrainResult {
    pub fn utility(&self) -> usize {
        self.stream.utility()
    }

    /// Compression utility after each step.
    pub fn utility_curve(&self) -> Vec<usize> {
        self.steps
            .iter()
            .scan(0, |acc, s| {
                *acc += s.gain;
                Some(*acc)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrainOptions {
    pub merge_count: usize,
    /// Symbol that never takes part in a merge (word boundary).
    pub barrier: Option<Symbol>,
}

impl TrainOptions {
    pub fn new(merge_count: usize) -> Self {
        Self { merge_count, barrier: None }
    }

    pub fn with_barrier(mut self, barrier: Symbol) -> Self {
        self.barrier = Some(barrier);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Slow,
    Fast,
}

pub fn train_greedy(x: &str, opts: TrainOptions, algo: Algorithm) -> Result<TrainResult> {
    let table = table_for(x, opts.barrier);
    match algo {
        Algorithm::Slow => train_greedy_slow_with(table, x, opts),
        Algorithm::Fast => train_greedy_fast_with(table, x, opts),
    }
}

fn table_for(x: &str, barrier: Option<Symbol>) -> MergeTable {
    MergeTable::new(x.chars().chain(barrier))
}

/// Reference trainer: `merge_count` rounds of count, pick, apply.
pub fn train_greedy_slow(x: &str, merge_count: usize) -> Result<TrainResult> {
    train_greedy(x, TrainOptions::new(merge_count), Algorithm::Slow)
}

/// Fast trainer over a linked list with a pair position index.
pub fn train_greedy_fast(x: &str, merge_count: usize) -> Result<TrainResult> {
    train_greedy(x, TrainOptions::new(merge_count), Algorithm::Fast)
}

/// Slow trainer on a caller supplied table; the alphabet must cover `x`.
pub fn train_greedy_slow_with(mut table: MergeTable, x: &str, opts: TrainOptions) -> Result<TrainResult> {
    let mut stream = table.lift(x)?;
    let barrier = opts.barrier.and_then(|c| table.symbol_id(c));
    let mut sequence = MergeSequence::new();
    let mut steps = Vec::new();
    for _ in 0..opts.merge_count {
        let freqs = pair_frequencies_where(stream.tokens(), |id| Some(id) != barrier);
        if freqs.is_empty() {
            break;
        }
        let (left, right) = freqs.top_pair(&table)?;
        let merge = table.intern(left, right)?;
        let replacements = stream.apply_in_place(&table, merge)?;
        sequence.push(merge);
        steps.push(TrainStep { merge, replacements, gain: replacements });
    }
    Ok(TrainResult { table, sequence, stream, steps })
}

/// Fast trainer on a caller supplied table.
pub fn train_greedy_fast_with(table: MergeTable, x: &str, opts: TrainOptions) -> Result<TrainResult> {
    let (result, _) = train_greedy_fast_instrumented(table, x, opts)?;
    Ok(result)
}

/// Fast trainer that also reports the index work done at each step
/// (list splices, position-set updates, heap operations and rescans).
pub fn train_greedy_fast_instrumented(
    mut table: MergeTable,
    x: &str,
    opts: TrainOptions,
) -> Result<(TrainResult, Vec<usize>)> {
    let stream = table.lift(x)?;
    let barrier = opts.barrier.and_then(|c| table.symbol_id(c));
    let source_len = stream.source_len();
    let mut index = PairIndex::new(stream.tokens(), barrier);
    let mut sequence = MergeSequence::new();
    let mut steps = Vec::new();
    let mut work = Vec::new();
    for _ in 0..opts.merge_count {
        let before = index.work();
        let Some(((left, right), _count)) = index.pop_best(&table) else {
            break;
        };
        let merge = table.intern(left, right)?;
        let replacements = index.merge_pair((left, right), merge);
        debug_assert_eq!(replacements, _count);
        sequence.push(merge);
        steps.push(TrainStep { merge, replacements, gain: replacements });
        work.push(index.work() - before);
    }
    let stream = TokenStream::from_parts(index.tokens(), source_len);
    Ok((TrainResult { table, sequence, stream, steps }, work))
}
