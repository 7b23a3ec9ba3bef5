//! Depth-first walk over merge sequences whose merges act on the stream.

use std::cmp::Ordering;

use rustc_hash::FxHashSet;

use crate::error::Result;
use crate::exact::{canonical_order, independent};
use crate::merge::{replace_pair, MergeId, MergeTable};

/// One node of the walk: the sequence so far and the stream after each of
/// its prefixes (`streams[0]` is the root, `streams[k]` the stream after the
/// first `k` merges).
pub struct Path<'a> {
    pub seq: &'a [MergeId],
    pub streams: &'a [Vec<MergeId>],
}

impl Path<'_> {
    pub fn tokens(&self) -> &[MergeId] {
        self.streams.last().expect("root stream")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WalkOptions {
    pub max_depth: usize,
    /// Skip a merge that is independent of the previous one and precedes it
    /// in the canonical order. Every stream reachable in `k` steps is still
    /// reached in `k` steps.
    pub canonical: bool,
}

/// Visits the root and every sequence of up to `max_depth` merges in which
/// each merge is a distinct adjacent pair of the current stream or one of
/// `extra` (applied whether or not it occurs).
pub fn walk(
    table: &mut MergeTable,
    root: Vec<MergeId>,
    extra: &[MergeId],
    opts: WalkOptions,
    visit: &mut dyn FnMut(&MergeTable, &Path<'_>),
) -> Result<()> {
    let mut seq = Vec::with_capacity(opts.max_depth);
    let mut streams = vec![root];
    step(table, extra, opts, &mut seq, &mut streams, visit)
}

fn step(
    table: &mut MergeTable,
    extra: &[MergeId],
    opts: WalkOptions,
    seq: &mut Vec<MergeId>,
    streams: &mut Vec<Vec<MergeId>>,
    visit: &mut dyn FnMut(&MergeTable, &Path<'_>),
) -> Result<()> {
    visit(table, &Path { seq, streams });
    if seq.len() == opts.max_depth {
        return Ok(());
    }
    let tokens = streams.last().expect("root stream").clone();
    let mut children = Vec::new();
    let mut seen = FxHashSet::default();
    for w in tokens.windows(2) {
        let merge = table.intern(w[0], w[1])?;
        if seen.insert(merge) {
            children.push(merge);
        }
    }
    for &merge in extra {
        if seen.insert(merge) {
            children.push(merge);
        }
    }
    for merge in children {
        if opts.canonical {
            if let Some(&last) = seq.last() {
                if independent(table, merge, last) && canonical_order(table, merge, last) == Ordering::Less {
                    continue;
                }
            }
        }
        let (left, right) = table.parts(merge).expect("composite");
        let mut child = tokens.clone();
        replace_pair(&mut child, left, right, merge);
        seq.push(merge);
        streams.push(child);
        step(table, extra, opts, seq, streams, visit)?;
        streams.pop();
        seq.pop();
    }
    Ok(())
}

/// Applies `seq` to `tokens` without validity checks.
pub fn apply_unchecked(table: &MergeTable, tokens: &[MergeId], seq: &[MergeId]) -> Vec<MergeId> {
    let mut out = tokens.to_vec();
    for &m in seq {
        if let Some((l, r)) = table.parts(m) {
            replace_pair(&mut out, l, r, m);
        }
    }
    out
}
