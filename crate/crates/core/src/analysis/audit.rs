//! Exhaustive property audit over a grid of strings.
//!
//! Sequences are enumerated as walks in which every merge acts on the
//! current stream. The gain of a single merge after a sequence is its
//! non-overlapping pair count in the resulting stream, so gains are read off
//! pair counts and stream lengths instead of re-applying sequences.

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use super::enumerate::{walk, Path, WalkOptions};
use super::grid::GridSpec;
use super::PropertyViolation;
use crate::error::Result;
use crate::merge::{MergeId, MergeTable};
use crate::pair_stats::pair_frequencies;

/// Violations kept per property in a report.
const KEPT_VIOLATIONS: usize = 20;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PropertyTally {
    pub checked: u64,
    pub violations: u64,
    pub examples: Vec<PropertyViolation>,
}

impl PropertyTally {
    fn record(&mut self, holds: bool, violation: impl FnOnce() -> PropertyViolation) {
        self.checked += 1;
        if !holds {
            self.violations += 1;
            if self.examples.len() < KEPT_VIOLATIONS {
                self.examples.push(violation());
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyAudit {
    pub grid: GridSpec,
    pub strings: usize,
    pub sequences: u64,
    pub monotonicity: PropertyTally,
    pub submodularity: PropertyTally,
    pub hierarchical: PropertyTally,
    pub average_gain: PropertyTally,
}

impl PropertyAudit {
    pub fn total_violations(&self) -> u64 {
        self.monotonicity.violations
            + self.submodularity.violations
            + self.hierarchical.violations
            + self.average_gain.violations
    }
}

fn render(table: &MergeTable, seq: &[MergeId]) -> Vec<String> {
    seq.iter().map(|&m| table.render(m)).collect()
}

/// Checks monotonicity, submodularity, hierarchical submodularity and the
/// average-gain lemma on every string of the grid, for sequences of up to
/// `grid.max_merges` merges.
pub fn property_audit(grid: &GridSpec) -> Result<PropertyAudit> {
    let strings = grid.strings();
    let limit = grid.max_strings.unwrap_or(usize::MAX);
    let mut audit = PropertyAudit {
        grid: grid.clone(),
        strings: 0,
        sequences: 0,
        monotonicity: PropertyTally::default(),
        submodularity: PropertyTally::default(),
        hierarchical: PropertyTally::default(),
        average_gain: PropertyTally::default(),
    };
    for x in strings.iter().take(limit) {
        audit.strings += 1;
        audit_string(x, grid.max_merges, &mut audit)?;
    }
    Ok(audit)
}

fn audit_string(x: &str, depth: usize, audit: &mut PropertyAudit) -> Result<()> {
    let mut table = MergeTable::from_text(x);
    let root = table.lift(x)?.into_tokens();

    // Sequence properties along every path of the full walk; distinct
    // (merge set, stream) states feed the lemma check.
    let mut bases: Vec<(Vec<MergeId>, Vec<MergeId>)> = Vec::new();
    let mut seen_bases: FxHashSet<(Vec<MergeId>, Vec<MergeId>)> = FxHashSet::default();
    {
        let audit = &mut *audit;
        walk(&mut table, root.clone(), &[], WalkOptions { max_depth: depth, canonical: false }, &mut |table, path| {
            audit.sequences += 1;
            sequence_properties(x, table, path, audit);
            let mut set = path.seq.to_vec();
            set.sort_unstable();
            set.dedup();
            let key = (set, path.tokens().to_vec());
            if seen_bases.insert(key) {
                bases.push((path.seq.to_vec(), path.tokens().to_vec()));
            }
        })?;
    }

    for (base_seq, base_tokens) in bases {
        lemma_after(x, &mut table, &base_seq, base_tokens, depth, &mut audit.average_gain)?;
    }
    Ok(())
}

fn sequence_properties(x: &str, table: &MergeTable, path: &Path<'_>, audit: &mut PropertyAudit) {
    let d = path.seq.len();
    if d == 0 {
        return;
    }
    let lens: Vec<usize> = path.streams.iter().map(Vec::len).collect();
    let n = lens[0];

    // κ(seq_{<d}) ≤ κ(seq_{≤d})
    audit.monotonicity.record(lens[d] <= lens[d - 1], || PropertyViolation {
        property: "monotonicity".into(),
        x: x.to_string(),
        sequences: vec![render(table, path.seq)],
        lhs: n - lens[d],
        rhs: n - lens[d - 1],
    });

    // Submodularity: every ν present after the full sequence whose
    // constituents are available after a prefix gains at least as much
    // there.
    let full_counts = pair_frequencies(path.tokens());
    for k in 0..d {
        let prefix = &path.seq[..k];
        let prefix_counts = pair_frequencies(&path.streams[k]);
        for ((l, r), stat) in full_counts.iter() {
            let available = |c: MergeId| table.is_trivial(c) || prefix.contains(&c);
            if !available(l) || !available(r) {
                continue;
            }
            let before = prefix_counts.count((l, r));
            audit.submodularity.record(before >= stat.count, || {
                let nu = table.lookup(l, r).map(|m| table.render(m)).unwrap_or_default();
                PropertyViolation {
                    property: "submodularity".into(),
                    x: x.to_string(),
                    sequences: vec![render(table, prefix), render(table, path.seq), vec![nu]],
                    lhs: before,
                    rhs: stat.count,
                }
            });
        }
    }

    // Hierarchical: the last merge against every earlier submerge of it.
    let last = path.seq[d - 1];
    let gain_last = lens[d - 1] - lens[d];
    for i in 0..d - 1 {
        let earlier = path.seq[i];
        if earlier == last || table.is_submerge(earlier, last) {
            let gain_earlier = lens[i] - lens[i + 1];
            audit.hierarchical.record(gain_earlier >= gain_last, || PropertyViolation {
                property: "hierarchical".into(),
                x: x.to_string(),
                sequences: vec![render(table, &path.seq[..=i]), render(table, path.seq)],
                lhs: gain_earlier,
                rhs: gain_last,
            });
        }
    }
}

/// Lemma check for one base sequence `m′` against every `m` of length up to
/// `depth` that acts on the stream after `m′`. Merges of `m′` may reappear
/// in `m` (as no-ops) since they can be needed for `m` to be valid on its
/// own.
fn lemma_after(
    x: &str,
    table: &mut MergeTable,
    base_seq: &[MergeId],
    base_tokens: Vec<MergeId>,
    depth: usize,
    tally: &mut PropertyTally,
) -> Result<()> {
    let base_counts = pair_frequencies(&base_tokens);
    let available: FxHashSet<MergeId> = base_seq.iter().copied().collect();
    let base_len = base_tokens.len();
    let mut extra: Vec<MergeId> = base_seq.to_vec();
    extra.sort_unstable();
    extra.dedup();
    let mut single_gain: FxHashMap<MergeId, usize> = FxHashMap::default();
    walk(table, base_tokens, &extra, WalkOptions { max_depth: depth, canonical: true }, &mut |table, path| {
        let m = path.seq;
        if m.is_empty() || !valid_alone(table, m) {
            return;
        }
        let total = base_len - path.tokens().len();
        if total == 0 {
            return;
        }
        let best = m
            .iter()
            .filter(|&&nu| {
                let (l, r) = table.parts(nu).expect("composite");
                (table.is_trivial(l) || available.contains(&l)) && (table.is_trivial(r) || available.contains(&r))
            })
            .map(|&nu| {
                *single_gain.entry(nu).or_insert_with(|| {
                    let (l, r) = table.parts(nu).expect("composite");
                    base_counts.count((l, r))
                })
            })
            .max()
            .unwrap_or(0);
        tally.record(best * m.len() >= total, || PropertyViolation {
            property: "average_gain".into(),
            x: x.to_string(),
            sequences: vec![render(table, base_seq), render(table, m)],
            lhs: best * m.len(),
            rhs: total,
        });
    })?;
    Ok(())
}

fn valid_alone(table: &MergeTable, seq: &[MergeId]) -> bool {
    seq.iter().enumerate().all(|(i, &m)| {
        let (l, r) = table.parts(m).expect("composite");
        [l, r].iter().all(|c| table.is_trivial(*c) || seq[..i].contains(c))
    })
}
