//! Conflicts between merges, the merge partial order, safe permutations and
//! sequence equivalence.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BpeError, Result};
use crate::merge::{apply_sequence, MergeId, MergeSequence, MergeTable};

/// Largest sequence length accepted by [`sequences_equivalent`].
pub const DEFAULT_MAX_EQUIVALENCE_LEN: usize = 8;

const RANDOM_PROBES: usize = 100;
const RANDOM_PROBE_MAX_LEN: usize = 12;

/// Directional conflict: the last symbol of `a`'s yield is the first symbol
/// of `b`'s yield.
pub fn conflicts(table: &MergeTable, a: MergeId, b: MergeId) -> bool {
    table.last_symbol(a) == table.first_symbol(b)
}

/// `a ⋗ b`: no conflict from `a` to `b`, `a`'s yield is not shorter, and not
/// lexicographically smaller.
pub fn merge_order(table: &MergeTable, a: MergeId, b: MergeId) -> bool {
    !conflicts(table, a, b)
        && table.yield_len(a) >= table.yield_len(b)
        && table.yield_of(a) >= table.yield_of(b)
}

/// True when a nonempty suffix of `a`'s yield is a prefix of `b`'s yield.
pub fn overlaps(table: &MergeTable, a: MergeId, b: MergeId) -> bool {
    let ya = table.yield_of(a);
    let yb = table.yield_of(b);
    (1..=ya.len().min(yb.len()))
        .filter(|&k| ya.is_char_boundary(ya.len() - k) && yb.is_char_boundary(k))
        .any(|k| ya[ya.len() - k..] == yb[..k])
}

/// Merges whose adjacent order never matters: their replacement sites can
/// not share a token in either order, and neither builds on the other.
/// Swapping two adjacent independent merges leaves Apply unchanged on every
/// string.
pub fn independent(table: &MergeTable, a: MergeId, b: MergeId) -> bool {
    a != b
        && !overlaps(table, a, b)
        && !overlaps(table, b, a)
        && !table.is_submerge(a, b)
        && !table.is_submerge(b, a)
}

/// Total order used to canonicalize the order of independent merges: yield
/// length, then yield, then handle.
pub fn canonical_order(table: &MergeTable, a: MergeId, b: MergeId) -> Ordering {
    table
        .yield_len(a)
        .cmp(&table.yield_len(b))
        .then_with(|| table.yield_of(a).cmp(table.yield_of(b)))
        .then(a.cmp(&b))
}

/// The transposition `(i, j)` (0-based) of a sequence is safe when no merge
/// before position `j` conflicts with the merge at `j`, and no merge after
/// position `i` conflicts with the merge at `i`.
pub fn is_safe_transposition(table: &MergeTable, seq: &[MergeId], i: usize, j: usize) -> bool {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if i == j {
        return true;
    }
    let mj = seq[j];
    let mi = seq[i];
    seq[..j].iter().all(|&k| !conflicts(table, k, mj)) && seq[i + 1..].iter().all(|&k| !conflicts(table, k, mi))
}

/// Checks that `perm` is a bijection on `0..n`.
fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(BpeError::MalformedPermutation(format!("length {} for a sequence of {}", perm.len(), n)));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(BpeError::MalformedPermutation(format!("{perm:?} is not a bijection on 0..{n}")));
        }
    }
    Ok(())
}

/// Decomposes `perm` (the permuted sequence takes `seq[perm[k]]` at position
/// `k`) into transpositions, selection-sort style, and checks each one on the
/// sequence it is applied to. The permuted sequence must also be valid.
pub fn is_safe_permutation(table: &MergeTable, seq: &MergeSequence, perm: &[usize]) -> Result<bool> {
    check_permutation(perm, seq.len())?;
    let mut current: Vec<MergeId> = seq.items().to_vec();
    // at[k]: current position of original item k
    let mut at: Vec<usize> = (0..seq.len()).collect();
    let mut origin: Vec<usize> = (0..seq.len()).collect();
    for k in 0..perm.len() {
        let from = at[perm[k]];
        if from != k {
            if !is_safe_transposition(table, &current, k, from) {
                return Ok(false);
            }
            current.swap(k, from);
            origin.swap(k, from);
            at[origin[k]] = k;
            at[origin[from]] = from;
        }
    }
    Ok(MergeSequence::from(current).is_valid(table))
}

/// Result of [`sequences_equivalent`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceCheck {
    /// A safe permutation mapping the first sequence onto the second.
    pub safe_permutation: Option<Vec<usize>>,
    /// A probe string on which the two sequences apply differently.
    pub counterexample: Option<String>,
}

impl EquivalenceCheck {
    pub fn equivalent(&self) -> bool {
        self.safe_permutation.is_some() && self.counterexample.is_none()
    }
}

/// Searches for a safe permutation from `a` to `b`, then compares Apply on
/// probe strings: concatenations and overlaps of merge yields and seeded
/// random strings. A found counterexample means the safe-permutation
/// criterion and Apply disagree.
pub fn sequences_equivalent(
    table: &MergeTable,
    a: &MergeSequence,
    b: &MergeSequence,
    max_len: usize,
) -> Result<EquivalenceCheck> {
    for s in [a, b] {
        if s.len() > max_len {
            return Err(BpeError::Capacity { len: s.len(), max: max_len });
        }
    }
    let safe_permutation = if a.len() == b.len() { find_safe_permutation(table, a, b)? } else { None };
    let counterexample = probe_strings(table, a, b).into_iter().find(|x| apply_differs(table, a, b, x));
    Ok(EquivalenceCheck { safe_permutation, counterexample })
}

fn find_safe_permutation(table: &MergeTable, a: &MergeSequence, b: &MergeSequence) -> Result<Option<Vec<usize>>> {
    let n = a.len();
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut found = None;
    extend_permutation(table, a, b, &mut perm, &mut used, &mut found)?;
    Ok(found)
}

fn extend_permutation(
    table: &MergeTable,
    a: &MergeSequence,
    b: &MergeSequence,
    perm: &mut Vec<usize>,
    used: &mut [bool],
    found: &mut Option<Vec<usize>>,
) -> Result<()> {
    if found.is_some() {
        return Ok(());
    }
    let k = perm.len();
    if k == a.len() {
        if is_safe_permutation(table, a, perm)? {
            *found = Some(perm.clone());
        }
        return Ok(());
    }
    for src in 0..a.len() {
        if !used[src] && a.items()[src] == b.items()[k] {
            used[src] = true;
            perm.push(src);
            extend_permutation(table, a, b, perm, used, found)?;
            perm.pop();
            used[src] = false;
        }
    }
    Ok(())
}

fn apply_differs(table: &MergeTable, a: &MergeSequence, b: &MergeSequence, x: &str) -> bool {
    let Ok(stream) = table.lift(x) else {
        return false;
    };
    match (apply_sequence(table, &stream, a), apply_sequence(table, &stream, b)) {
        (Ok(sa), Ok(sb)) => sa != sb,
        (sa, sb) => sa.is_ok() != sb.is_ok(),
    }
}

fn probe_strings(table: &MergeTable, a: &MergeSequence, b: &MergeSequence) -> Vec<String> {
    let mut merges: Vec<MergeId> = a.iter().chain(b.iter()).collect();
    merges.sort_unstable();
    merges.dedup();
    let yields: Vec<&str> = merges.iter().map(|&m| table.yield_of(m)).collect();
    let mut probes = Vec::new();
    for &y1 in &yields {
        probes.push(y1.to_string());
        for &y2 in &yields {
            probes.push(format!("{y1}{y2}"));
            for (k, _) in y2.char_indices().skip(1) {
                if y1.ends_with(&y2[..k]) {
                    probes.push(format!("{y1}{}", &y2[k..]));
                }
            }
        }
    }
    let mut symbols: Vec<char> = yields.iter().flat_map(|y| y.chars()).collect();
    symbols.sort_unstable();
    symbols.dedup();
    if !symbols.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..RANDOM_PROBES {
            let len = rng.gen_range(1..=RANDOM_PROBE_MAX_LEN);
            probes.push((0..len).map(|_| symbols[rng.gen_range(0..symbols.len())]).collect());
        }
    }
    probes
}
