//! Non-iterative BPE: rank every bracketing of every short substring by
//! frequency and keep the top `M`.

use rustc_hash::FxHashMap;

use super::Corpus;
use crate::error::{BpeError, Result};
use crate::merge::{replace_pair, MergeId, MergeSequence, MergeTable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonIterativeResult {
    pub table: MergeTable,
    /// Chosen merges, most frequent first.
    pub sequence: MergeSequence,
    /// Weighted non-overlapping frequency of each chosen merge's yield.
    pub frequencies: Vec<u64>,
    pub candidates: usize,
}

impl NonIterativeResult {
    /// Weighted compression utility of applying the vocabulary in order.
    pub fn utility(&self, corpus: &Corpus) -> Result<u64> {
        let mut total = 0;
        for (word, &count) in &corpus.words {
            let mut tokens = self.table.lift(word)?.into_tokens();
            let n = tokens.len();
            for m in self.sequence.iter() {
                let (l, r) = self.table.parts(m).expect("composite");
                replace_pair(&mut tokens, l, r, m);
            }
            total += (n - tokens.len()) as u64 * count;
        }
        Ok(total)
    }
}

/// Candidates are all bracketings of every substring of width `2..=max_width`
/// within a word. A candidate's frequency is the weighted leftmost
/// non-overlapping count of its yield. Ranking: frequency, then shorter
/// yield, then yield, then bracketing.
pub fn train_non_iterative(corpus: &Corpus, merge_count: usize, max_width: usize) -> Result<NonIterativeResult> {
    if max_width < 2 {
        return Err(BpeError::Domain(format!("maximum width must be at least 2, got {max_width}")));
    }
    let mut table = MergeTable::new(corpus.alphabet());
    let mut freq: FxHashMap<String, u64> = FxHashMap::default();
    for (word, &count) in &corpus.words {
        let chars: Vec<(usize, char)> = word.char_indices().collect();
        let mut local: FxHashMap<&str, u64> = FxHashMap::default();
        for i in 0..chars.len() {
            for w in 2..=max_width.min(chars.len() - i) {
                let start = chars[i].0;
                let end = chars.get(i + w).map_or(word.len(), |c| c.0);
                let sub = &word[start..end];
                if !local.contains_key(sub) {
                    local.insert(sub, word.matches(sub).count() as u64);
                }
            }
        }
        for (sub, n) in local {
            *freq.entry(sub.to_string()).or_insert(0) += n * count;
        }
    }

    let mut built: FxHashMap<String, Vec<MergeId>> = FxHashMap::default();
    let mut candidates: Vec<(MergeId, u64)> = Vec::new();
    let mut yields: Vec<&String> = freq.keys().collect();
    yields.sort_by_key(|y| (y.chars().count(), (*y).clone()));
    for y in yields {
        for m in bracketings(&mut table, y, &mut built)? {
            candidates.push((m, freq[y]));
        }
    }
    let rendered: FxHashMap<MergeId, String> = candidates.iter().map(|&(m, _)| (m, table.render(m))).collect();
    candidates.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(table.yield_len(a.0).cmp(&table.yield_len(b.0)))
            .then_with(|| table.yield_of(a.0).cmp(table.yield_of(b.0)))
            .then_with(|| rendered[&a.0].cmp(&rendered[&b.0]))
    });
    let total = candidates.len();
    candidates.truncate(merge_count);
    Ok(NonIterativeResult {
        sequence: candidates.iter().map(|&(m, _)| m).collect(),
        frequencies: candidates.iter().map(|&(_, f)| f).collect(),
        candidates: total,
        table,
    })
}

/// Every binary bracketing of `y` (length at least 2) as interned merges.
fn bracketings(table: &mut MergeTable, y: &str, memo: &mut FxHashMap<String, Vec<MergeId>>) -> Result<Vec<MergeId>> {
    if let Some(found) = memo.get(y) {
        return Ok(found.clone());
    }
    let chars: Vec<char> = y.chars().collect();
    let out = if chars.len() == 1 {
        vec![table.symbol_id(chars[0]).ok_or(BpeError::UnknownSymbol(chars[0]))?]
    } else {
        let mut out = Vec::new();
        for split in 1..chars.len() {
            let left: String = chars[..split].iter().collect();
            let right: String = chars[split..].iter().collect();
            let ls = bracketings(table, &left, memo)?;
            let rs = bracketings(table, &right, memo)?;
            for &l in &ls {
                for &r in &rs {
                    out.push(table.intern(l, r)?);
                }
            }
        }
        out
    };
    memo.insert(y.to_string(), out.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest, CorpusMode};

    #[test]
    fn candidates_include_both_bracketings() {
        let c = ingest("abcabcd", CorpusMode::Raw);
        let r = train_non_iterative(&c, 100, 3).unwrap();
        let rendered = r.sequence.render(&r.table);
        for want in ["['a' 'b']", "[['a' 'b'] 'c']", "['b' 'c']", "['a' ['b' 'c']]"] {
            assert!(rendered.contains(&want.to_string()), "{want} missing from {rendered:?}");
        }
        assert!(r.sequence.is_valid(&r.table));
        assert_eq!(&rendered[..2], &["['a' 'b']", "['b' 'c']"]);
    }

    #[test]
    fn zero_merges() {
        let c = ingest("abcabcd", CorpusMode::Raw);
        let r = train_non_iterative(&c, 0, 3).unwrap();
        assert!(r.sequence.is_empty());
        assert_eq!(r.utility(&c).unwrap(), 0);
    }

    #[test]
    fn width_must_allow_pairs() {
        let c = ingest("abc", CorpusMode::Raw);
        assert!(matches!(train_non_iterative(&c, 3, 1), Err(BpeError::Domain(_))));
    }

    #[test]
    fn frequencies_are_non_overlapping() {
        let c = ingest("aaaa", CorpusMode::Raw);
        let r = train_non_iterative(&c, 1, 2).unwrap();
        assert_eq!(r.frequencies, vec![2]);
        assert_eq!(r.utility(&c).unwrap(), 2);
    }
}
