//! The merge calculus: alphabets, interned merge trees, merge sequences,
//! token streams, application of merges and the compression utility.
//!
//! A merge is either a single alphabet symbol (a *trivial* merge) or an
//! ordered pair of two earlier merges. Merges are interned in a
//! [`MergeTable`], so a merge is identified by its [`MergeId`] and two
//! merges with the same constituents always share a handle.

use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{BpeError, Result};

/// One atomic alphabet unit.
pub type Symbol = char;

/// Dense handle into a [`MergeTable`].
///
/// Handles `0..alphabet_len` are the trivial merges, larger handles are
/// composite merges in interning order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MergeId(pub u32);

impl MergeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for MergeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// An adjacent pair of tokens, i.e. the constituents of a candidate merge.
pub type Pair = (MergeId, MergeId);

#[derive(Clone, Debug, PartialEq, Eq)]
enum Node {
    Symbol(Symbol),
    Composite { left: MergeId, right: MergeId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Entry {
    node: Node,
    yield_: String,
    yield_len: usize,
    first: Symbol,
    last: Symbol,
}

/// Append-only interned store of merge trees over a fixed alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MergeTable {
    alphabet: Vec<Symbol>,
    entries: Vec<Entry>,
    symbols: FxHashMap<Symbol, MergeId>,
    pairs: FxHashMap<Pair, MergeId>,
}

impl MergeTable {
    /// Builds a table whose trivial merges are the given symbols, sorted and
    /// deduplicated.
    pub fn new<I: IntoIterator<Item = Symbol>>(alphabet: I) -> Self {
        let mut alphabet: Vec<Symbol> = alphabet.into_iter().collect();
        alphabet.sort_unstable();
        alphabet.dedup();
        Self::with_ordered_alphabet(alphabet)
    }

    /// Builds a table keeping the alphabet order as given. Duplicates are an
    /// error.
    pub fn with_alphabet_order(alphabet: Vec<Symbol>) -> Result<Self> {
        let mut seen = rustc_hash::FxHashSet::default();
        for &c in &alphabet {
            if !seen.insert(c) {
                return Err(BpeError::Domain(format!("duplicate alphabet symbol {c:?}")));
            }
        }
        Ok(Self::with_ordered_alphabet(alphabet))
    }

    fn with_ordered_alphabet(alphabet: Vec<Symbol>) -> Self {
        let mut table = MergeTable {
            alphabet: Vec::with_capacity(alphabet.len()),
            entries: Vec::with_capacity(alphabet.len()),
            symbols: FxHashMap::default(),
            pairs: FxHashMap::default(),
        };
        for c in alphabet {
            let id = MergeId(table.entries.len() as u32);
            table.alphabet.push(c);
            table.symbols.insert(c, id);
            table.entries.push(Entry {
                node: Node::Symbol(c),
                yield_: c.to_string(),
                yield_len: 1,
                first: c,
                last: c,
            });
        }
        table
    }

    /// The alphabet of all symbols occurring in `text`.
    pub fn from_text(text: &str) -> Self {
        Self::new(text.chars())
    }

    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    /// Number of interned merges, trivial ones included.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: MergeId) -> bool {
        id.index() < self.entries.len()
    }

    pub fn is_trivial(&self, id: MergeId) -> bool {
        id.index() < self.alphabet.len()
    }

    pub fn symbol_id(&self, symbol: Symbol) -> Option<MergeId> {
        self.symbols.get(&symbol).copied()
    }

    pub fn symbol(&self, id: MergeId) -> Option<Symbol> {
        match self.entries.get(id.index())?.node {
            Node::Symbol(c) => Some(c),
            Node::Composite { .. } => None,
        }
    }

    /// Constituents of a composite merge.
    pub fn parts(&self, id: MergeId) -> Option<Pair> {
        match self.entries.get(id.index())?.node {
            Node::Symbol(_) => None,
            Node::Composite { left, right } => Some((left, right)),
        }
    }

    /// Handle of `[left right]` if it was interned before.
    pub fn lookup(&self, left: MergeId, right: MergeId) -> Option<MergeId> {
        self.pairs.get(&(left, right)).copied()
    }

    /// Interns the composite merge `[left right]`. Idempotent.
    pub fn intern(&mut self, left: MergeId, right: MergeId) -> Result<MergeId> {
        if let Some(id) = self.lookup(left, right) {
            return Ok(id);
        }
        let (l, r) = (self.entry(left)?, self.entry(right)?);
        let mut yield_ = String::with_capacity(l.yield_.len() + r.yield_.len());
        yield_.push_str(&l.yield_);
        yield_.push_str(&r.yield_);
        let entry = Entry {
            node: Node::Composite { left, right },
            yield_len: l.yield_len + r.yield_len,
            first: l.first,
            last: r.last,
            yield_,
        };
        let id = MergeId(self.entries.len() as u32);
        self.entries.push(entry);
        self.pairs.insert((left, right), id);
        Ok(id)
    }

    fn entry(&self, id: MergeId) -> Result<&Entry> {
        self.entries.get(id.index()).ok_or(BpeError::InvalidHandle(id.0))
    }

    /// Flat symbol string of a merge. Panics on an unknown handle.
    pub fn yield_of(&self, id: MergeId) -> &str {
        &self.entries[id.index()].yield_
    }

    /// Length of the yield in symbols.
    pub fn yield_len(&self, id: MergeId) -> usize {
        self.entries[id.index()].yield_len
    }

    pub fn first_symbol(&self, id: MergeId) -> Symbol {
        self.entries[id.index()].first
    }

    pub fn last_symbol(&self, id: MergeId) -> Symbol {
        self.entries[id.index()].last
    }

    /// True iff `sub` occurs strictly inside the tree of `sup`.
    pub fn is_submerge(&self, sub: MergeId, sup: MergeId) -> bool {
        match self.parts(sup) {
            None => false,
            Some((l, r)) => {
                l == sub || r == sub || self.is_submerge(sub, l) || self.is_submerge(sub, r)
            }
        }
    }

    /// Unambiguous bracketed rendering, e.g. `[['a' 'b'] 'c']`.
    pub fn render(&self, id: MergeId) -> String {
        let mut out = String::new();
        self.render_into(id, &mut out);
        out
    }

    fn render_into(&self, id: MergeId, out: &mut String) {
        match self.entries[id.index()].node {
            Node::Symbol(c) => out.push_str(&format!("{c:?}")),
            Node::Composite { left, right } => {
                out.push('[');
                self.render_into(left, out);
                out.push(' ');
                self.render_into(right, out);
                out.push(']');
            }
        }
    }

    /// Re-interns the tree of `id` from `other` into `self`.
    pub fn import(&mut self, other: &MergeTable, id: MergeId) -> Result<MergeId> {
        match other.entry(id)?.node {
            Node::Symbol(c) => self.symbol_id(c).ok_or(BpeError::UnknownSymbol(c)),
            Node::Composite { left, right } => {
                let l = self.import(other, left)?;
                let r = self.import(other, right)?;
                self.intern(l, r)
            }
        }
    }

    /// Lifts a string to the stream of its trivial merges.
    pub fn lift(&self, text: &str) -> Result<TokenStream> {
        let tokens = text
            .chars()
            .map(|c| self.symbol_id(c).ok_or(BpeError::UnknownSymbol(c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(TokenStream::from_tokens(tokens))
    }

    /// Composite merges in interning order.
    pub fn composites(&self) -> impl Iterator<Item = (MergeId, Pair)> + '_ {
        self.entries.iter().enumerate().filter_map(|(i, e)| match e.node {
            Node::Composite { left, right } => Some((MergeId(i as u32), (left, right))),
            Node::Symbol(_) => None,
        })
    }
}

/// Ordered list of composite merges.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MergeSequence(Vec<MergeId>);

impl MergeSequence {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn items(&self) -> &[MergeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, id: MergeId) {
        self.0.push(id);
    }

    pub fn last(&self) -> Option<MergeId> {
        self.0.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = MergeId> + '_ {
        self.0.iter().copied()
    }

    /// The first `n` merges, written `seq_{<n+1}` in set notation.
    pub fn prefix(&self, n: usize) -> MergeSequence {
        MergeSequence(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn concat(&self, other: &MergeSequence) -> MergeSequence {
        let mut items = self.0.clone();
        items.extend_from_slice(&other.0);
        MergeSequence(items)
    }

    pub fn is_prefix_of(&self, other: &MergeSequence) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Position of the first item breaking validity, if any.
    pub fn first_invalid(&self, table: &MergeTable) -> Option<usize> {
        let mut seen = rustc_hash::FxHashSet::default();
        for (i, &id) in self.0.iter().enumerate() {
            if !table.contains(id) {
                return Some(i);
            }
            let Some((l, r)) = table.parts(id) else {
                return Some(i);
            };
            let ok = |c: MergeId| table.is_trivial(c) || seen.contains(&c);
            if !ok(l) || !ok(r) {
                return Some(i);
            }
            seen.insert(id);
        }
        None
    }

    /// Every constituent of every item is a symbol or an earlier item.
    pub fn is_valid(&self, table: &MergeTable) -> bool {
        self.first_invalid(table).is_none()
    }

    /// Whether appending `merge` keeps a valid sequence valid.
    pub fn admits(&self, table: &MergeTable, merge: MergeId) -> bool {
        match table.parts(merge) {
            None => false,
            Some((l, r)) => {
                let ok = |c: MergeId| table.is_trivial(c) || self.0.contains(&c);
                ok(l) && ok(r)
            }
        }
    }

    pub fn render(&self, table: &MergeTable) -> Vec<String> {
        self.0.iter().map(|&id| table.render(id)).collect()
    }

    fn check_valid(&self, table: &MergeTable) -> Result<()> {
        match self.first_invalid(table) {
            None => Ok(()),
            Some(position) => Err(BpeError::InvalidSequence { position }),
        }
    }
}

impl From<Vec<MergeId>> for MergeSequence {
    fn from(items: Vec<MergeId>) -> Self {
        Self(items)
    }
}

impl FromIterator<MergeId> for MergeSequence {
    fn from_iter<T: IntoIterator<Item = MergeId>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Current partial bracketing of a string: the roots of its merge forest.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TokenStream {
    tokens: Vec<MergeId>,
    source_len: usize,
}

impl TokenStream {
    /// A stream of unmerged symbols.
    pub fn from_tokens(tokens: Vec<MergeId>) -> Self {
        let source_len = tokens.len();
        Self { tokens, source_len }
    }

    pub fn from_parts(tokens: Vec<MergeId>, source_len: usize) -> Self {
        Self { tokens, source_len }
    }

    pub fn tokens(&self) -> &[MergeId] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<MergeId> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Length of the original string in symbols.
    pub fn source_len(&self) -> usize {
        self.source_len
    }

    /// Compression utility of whatever produced this stream.
    pub fn utility(&self) -> usize {
        self.source_len - self.tokens.len()
    }

    pub fn yields<'t>(&self, table: &'t MergeTable) -> Vec<&'t str> {
        self.tokens.iter().map(|&t| table.yield_of(t)).collect()
    }

    /// Concatenated yields, i.e. the original string.
    pub fn text(&self, table: &MergeTable) -> String {
        self.tokens.iter().map(|&t| table.yield_of(t)).collect()
    }

    /// Applies one merge in place and returns the number of replacements.
    pub fn apply_in_place(&mut self, table: &MergeTable, merge: MergeId) -> Result<usize> {
        let (left, right) = composite_parts(table, merge)?;
        Ok(replace_pair(&mut self.tokens, left, right, merge))
    }
}

fn composite_parts(table: &MergeTable, merge: MergeId) -> Result<Pair> {
    if !table.contains(merge) {
        return Err(BpeError::InvalidHandle(merge.0));
    }
    table.parts(merge).ok_or(BpeError::NotComposite(merge.0))
}

/// Single left-to-right pass replacing `left right` by `merged`. Scanning
/// resumes after each replacement, so occurrences never overlap.
pub fn replace_pair(tokens: &mut Vec<MergeId>, left: MergeId, right: MergeId, merged: MergeId) -> usize {
    let n = tokens.len();
    let mut read = 0;
    let mut write = 0;
    let mut replaced = 0;
    while read < n {
        if read + 1 < n && tokens[read] == left && tokens[read + 1] == right {
            tokens[write] = merged;
            read += 2;
            replaced += 1;
        } else {
            tokens[write] = tokens[read];
            read += 1;
        }
        write += 1;
    }
    tokens.truncate(write);
    replaced
}

/// Interns `[left right]`.
pub fn intern_merge(table: &mut MergeTable, left: MergeId, right: MergeId) -> Result<MergeId> {
    table.intern(left, right)
}

/// Lifts `text` into a stream of trivial merges.
pub fn lift_string(table: &MergeTable, text: &str) -> Result<TokenStream> {
    table.lift(text)
}

/// Applies a single composite merge; returns the new stream and the number of
/// replacements made.
pub fn apply_merge(table: &MergeTable, stream: &TokenStream, merge: MergeId) -> Result<(TokenStream, usize)> {
    let mut out = stream.clone();
    let replaced = out.apply_in_place(table, merge)?;
    Ok((out, replaced))
}

/// Folds [`apply_merge`] over a valid sequence.
pub fn apply_sequence(table: &MergeTable, stream: &TokenStream, seq: &MergeSequence) -> Result<TokenStream> {
    seq.check_valid(table)?;
    let mut out = stream.clone();
    for merge in seq.iter() {
        out.apply_in_place(table, merge)?;
    }
    Ok(out)
}

/// `|x| - |Apply_seq(x)|`.
pub fn compression_utility(table: &MergeTable, x: &str, seq: &MergeSequence) -> Result<usize> {
    let stream = table.lift(x)?;
    Ok(apply_sequence(table, &stream, seq)?.utility())
}

/// `κ(base ++ addition) - κ(base)`.
pub fn compression_gain(
    table: &MergeTable,
    x: &str,
    addition: &MergeSequence,
    base: &MergeSequence,
) -> Result<usize> {
    let joined = base.concat(addition);
    joined.check_valid(table)?;
    let stream = table.lift(x)?;
    let after_base = apply_sequence(table, &stream, base)?;
    let mut after_all = after_base.clone();
    for merge in addition.iter() {
        after_all.apply_in_place(table, merge)?;
    }
    Ok(after_base.len() - after_all.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> MergeTable {
        MergeTable::new("abcde".chars())
    }

    fn id(t: &MergeTable, c: char) -> MergeId {
        t.symbol_id(c).unwrap()
    }

    #[test]
    fn interning_is_idempotent() {
        let mut t = abc();
        let (a, b) = (id(&t, 'a'), id(&t, 'b'));
        let first = t.intern(a, b).unwrap();
        let second = t.intern(a, b).unwrap();
        assert_eq!(first, second);
        assert_eq!(t.len(), 6);
    }

    #[test]
    fn nested_yields() {
        let mut t = abc();
        let (a, b, c) = (id(&t, 'a'), id(&t, 'b'), id(&t, 'c'));
        let aa = t.intern(a, a).unwrap();
        let cb = t.intern(c, b).unwrap();
        let cbc = t.intern(cb, c).unwrap();
        let m = t.intern(aa, cbc).unwrap();
        assert_eq!(t.yield_of(m), "aacbc");
        assert_eq!(t.yield_len(m), 5);

        let ab = t.intern(a, b).unwrap();
        let aba = t.intern(ab, a).unwrap();
        assert_eq!(t.yield_of(aba), "aba");
    }

    #[test]
    fn unknown_handle_is_rejected() {
        let mut t = abc();
        assert!(matches!(t.intern(MergeId(0), MergeId(99)), Err(BpeError::InvalidHandle(99))));
    }

    #[test]
    fn lifting() {
        let t = MergeTable::from_text("picked pickled pickles");
        assert_eq!(t.lift("abc").unwrap_err().to_string(), "symbol 'a' is not in the alphabet");
        assert_eq!(t.lift("picked pickled pickles").unwrap().len(), 22);
        let empty = t.lift("").unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.utility(), 0);
        let abc_table = abc();
        let s = abc_table.lift("abc").unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.tokens().iter().all(|&tok| abc_table.is_trivial(tok)));
    }

    #[test]
    fn apply_does_not_overlap() {
        let mut t = abc();
        let a = id(&t, 'a');
        let aa = t.intern(a, a).unwrap();
        let (s, n) = apply_merge(&t, &t.lift("aaa").unwrap(), aa).unwrap();
        assert_eq!((s.tokens(), n), (&[aa, a][..], 1));
        let (s, n) = apply_merge(&t, &t.lift("aaaa").unwrap(), aa).unwrap();
        assert_eq!((s.tokens(), n), (&[aa, aa][..], 2));
        let input = t.lift("bcd").unwrap();
        let (s, n) = apply_merge(&t, &input, aa).unwrap();
        assert_eq!((s, n), (input, 0));
    }

    #[test]
    fn apply_rejects_trivial_merge() {
        let t = abc();
        let s = t.lift("ab").unwrap();
        assert!(matches!(apply_merge(&t, &s, MergeId(0)), Err(BpeError::NotComposite(0))));
    }

    #[test]
    fn apply_sequence_forest() {
        let mut t = abc();
        let (a, b, c) = (id(&t, 'a'), id(&t, 'b'), id(&t, 'c'));
        let ab = t.intern(a, b).unwrap();
        let cb = t.intern(c, b).unwrap();
        let aba = t.intern(ab, a).unwrap();
        let abacb = t.intern(aba, cb).unwrap();
        let seq = MergeSequence::from(vec![ab, cb, aba, abacb]);
        let out = apply_sequence(&t, &t.lift("abaabacbcb").unwrap(), &seq).unwrap();
        assert_eq!(out.yields(&t), vec!["aba", "abacb", "cb"]);
        assert_eq!(out.text(&t), "abaabacbcb");

        let empty = apply_sequence(&t, &t.lift("abc").unwrap(), &MergeSequence::new()).unwrap();
        assert_eq!(empty, t.lift("abc").unwrap());
    }

    #[test]
    fn greedy_suboptimal_optimum_bracketing() {
        let mut t = abc();
        let (a, b) = (id(&t, 'a'), id(&t, 'b'));
        let ba = t.intern(b, a).unwrap();
        let baa = t.intern(ba, a).unwrap();
        let seq = MergeSequence::from(vec![ba, baa]);
        let out = apply_sequence(&t, &t.lift("abaabbaa").unwrap(), &seq).unwrap();
        assert_eq!(out.yields(&t), vec!["a", "baa", "b", "baa"]);
        assert_eq!(compression_utility(&t, "abaabbaa", &seq).unwrap(), 4);

        let ab = t.intern(a, b).unwrap();
        let aba = t.intern(ab, a).unwrap();
        let greedy = MergeSequence::from(vec![ab, aba]);
        assert_eq!(compression_utility(&t, "abaabbaa", &greedy).unwrap(), 3);
    }

    #[test]
    fn validity() {
        let mut t = abc();
        let (a, b, c) = (id(&t, 'a'), id(&t, 'b'), id(&t, 'c'));
        let ab = t.intern(a, b).unwrap();
        let a_ab = t.intern(a, ab).unwrap();
        let ac = t.intern(a, c).unwrap();
        let ab_ac = t.intern(ab, ac).unwrap();
        assert!(!MergeSequence::from(vec![ab, a_ab, ab_ac]).is_valid(&t));
        assert!(MergeSequence::from(vec![ab]).is_valid(&t));
        assert!(MergeSequence::from(vec![ab, ac, ab_ac]).is_valid(&t));
        assert!(!MergeSequence::from(vec![a]).is_valid(&t));
        assert!(!MergeSequence::from(vec![MergeId(500)]).is_valid(&t));
        let err = apply_sequence(&t, &t.lift("ab").unwrap(), &MergeSequence::from(vec![ab_ac])).unwrap_err();
        assert!(matches!(err, BpeError::InvalidSequence { position: 0 }));
    }

    #[test]
    fn gain_requires_validity_of_concatenation() {
        let mut t = abc();
        let [a, b, c, d, e] = ['a', 'b', 'c', 'd', 'e'].map(|ch| id(&t, ch));
        let aa = t.intern(a, a).unwrap();
        let cd = t.intern(c, d).unwrap();
        let bcd = t.intern(b, cd).unwrap();
        let bcde = t.intern(bcd, e).unwrap();
        let nu = MergeSequence::from(vec![bcd, bcde]);
        let base_short = MergeSequence::from(vec![aa]);
        let base_long = MergeSequence::from(vec![aa, cd]);
        assert_eq!(compression_utility(&t, "aabcde", &base_short).unwrap(), 1);
        assert_eq!(compression_utility(&t, "aabcde", &base_long).unwrap(), 2);
        assert!(compression_gain(&t, "aabcde", &nu, &base_short).is_err());
        assert_eq!(compression_gain(&t, "aabcde", &nu, &base_long).unwrap(), 2);
        assert_eq!(compression_gain(&t, "aabcde", &MergeSequence::new(), &base_long).unwrap(), 0);
    }

    #[test]
    fn repeated_merge_is_a_no_op() {
        let mut t = abc();
        let (a, b) = (id(&t, 'a'), id(&t, 'b'));
        let ab = t.intern(a, b).unwrap();
        let once = MergeSequence::from(vec![ab]);
        let twice = MergeSequence::from(vec![ab, ab]);
        assert!(twice.is_valid(&t));
        assert_eq!(
            compression_utility(&t, "ababab", &once).unwrap(),
            compression_utility(&t, "ababab", &twice).unwrap()
        );
    }

    #[test]
    fn import_and_render() {
        let mut t = abc();
        let (a, b) = (id(&t, 'a'), id(&t, 'b'));
        let ab = t.intern(a, b).unwrap();
        let aba = t.intern(ab, a).unwrap();
        assert_eq!(t.render(aba), "[['a' 'b'] 'a']");
        let mut other = MergeTable::new("ba".chars());
        let copied = other.import(&t, aba).unwrap();
        assert_eq!(other.render(copied), t.render(aba));
        assert!(other.is_submerge(other.lookup(MergeId(0), MergeId(1)).unwrap(), copied));
    }
}
