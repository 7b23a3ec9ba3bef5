//! Executable checks of the structural properties of the compression
//! utility (monotonicity, submodularity over valid sequences, hierarchical
//! submodularity, the average-gain lemma), total backward curvature and the
//! greedy approximation bound.

mod audit;
mod curvature;
mod enumerate;
mod grid;

pub use audit::{property_audit, PropertyAudit, PropertyTally};
pub use curvature::{
    audit_grid, bound_from_sigma, estimate_sigma, estimate_sigma_prime, greedy_ratio_audit, instance_reports,
    CurvatureReport, CurvatureWitness, GridAudit, InstanceReport, RatioRow,
};
pub use grid::{canonical_form, canonical_strings, text_substrings, GridSource, GridSpec, DEFAULT_MAX_OPTIMA};

use serde::Serialize;

use crate::error::Result;
use crate::merge::{compression_gain, MergeId, MergeSequence, MergeTable};

/// A strict failure of a claimed inequality `lhs >= rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyViolation {
    pub property: String,
    pub x: String,
    /// Rendered merges of the sequences involved.
    pub sequences: Vec<Vec<String>>,
    pub lhs: usize,
    pub rhs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    Holds,
    Violated(PropertyViolation),
    /// The instance does not meet the property's preconditions.
    Skipped(&'static str),
}

impl CheckOutcome {
    pub fn is_violation(&self) -> bool {
        matches!(self, CheckOutcome::Violated(_))
    }
}

fn with(seq: &MergeSequence, merge: MergeId) -> MergeSequence {
    let mut out = seq.clone();
    out.push(merge);
    out
}

fn outcome(property: &str, x: &str, table: &MergeTable, seqs: &[&MergeSequence], lhs: usize, rhs: usize) -> CheckOutcome {
    if lhs >= rhs {
        return CheckOutcome::Holds;
    }
    CheckOutcome::Violated(PropertyViolation {
        property: property.to_string(),
        x: x.to_string(),
        sequences: seqs.iter().map(|s| s.render(table)).collect(),
        lhs,
        rhs,
    })
}

/// `κ(ν | prefix) ≥ κ(ν | full)` for `prefix ≼ full` with both extensions
/// valid.
pub fn check_submodularity(
    table: &MergeTable,
    x: &str,
    prefix: &MergeSequence,
    full: &MergeSequence,
    nu: MergeId,
) -> Result<CheckOutcome> {
    if !prefix.is_prefix_of(full) {
        return Ok(CheckOutcome::Skipped("prefix is not a prefix of full"));
    }
    if !with(full, nu).is_valid(table) || !with(prefix, nu).is_valid(table) {
        return Ok(CheckOutcome::Skipped("extension is not a valid sequence"));
    }
    let single = MergeSequence::from(vec![nu]);
    let lhs = compression_gain(table, x, &single, prefix)?;
    let rhs = compression_gain(table, x, &single, full)?;
    Ok(outcome("submodularity", x, table, &[prefix, full, &single], lhs, rhs))
}

/// `κ(ν₁ | m₁) ≥ κ(ν₂ | m₁ ν₁ m₂)` when `ν₁` is a submerge of `ν₂` and
/// `m₁ ν₁ m₂ ν₂` is valid.
pub fn check_hierarchical(
    table: &MergeTable,
    x: &str,
    m1: &MergeSequence,
    nu1: MergeId,
    m2: &MergeSequence,
    nu2: MergeId,
) -> Result<CheckOutcome> {
    if nu1 != nu2 && !table.is_submerge(nu1, nu2) {
        return Ok(CheckOutcome::Skipped("first merge is not a submerge of the second"));
    }
    let before = with(m1, nu1).concat(m2);
    if !with(&before, nu2).is_valid(table) {
        return Ok(CheckOutcome::Skipped("sequence is not valid"));
    }
    let lhs = compression_gain(table, x, &MergeSequence::from(vec![nu1]), m1)?;
    let rhs = compression_gain(table, x, &MergeSequence::from(vec![nu2]), &before)?;
    Ok(outcome("hierarchical", x, table, &[m1, &with(&before, nu2)], lhs, rhs))
}

/// Some `ν` in `m` with `m′ ν` valid gains at least the average gain
/// `κ(m | m′)/|m|`.
pub fn check_avg_gain_lemma(
    table: &MergeTable,
    x: &str,
    m_prime: &MergeSequence,
    m: &MergeSequence,
) -> Result<CheckOutcome> {
    if m.is_empty() {
        return Ok(CheckOutcome::Skipped("empty sequence"));
    }
    if !m_prime.is_valid(table) || !m.is_valid(table) {
        return Ok(CheckOutcome::Skipped("sequence is not valid"));
    }
    let total = compression_gain(table, x, m, m_prime)?;
    let mut best = 0;
    for nu in m.iter() {
        if m_prime.admits(table, nu) {
            best = best.max(compression_gain(table, x, &MergeSequence::from(vec![nu]), m_prime)?);
        }
    }
    Ok(outcome("average_gain", x, table, &[m_prime, m], best * m.len(), total))
}
