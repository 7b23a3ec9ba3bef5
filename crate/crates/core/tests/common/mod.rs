//! Oracles for the property tests, written without the crate. A token is
//! its rendered tree: `'a'` for a symbol, `[l r]` for a merge, which is also
//! how `MergeTable::render` prints.
#![allow(dead_code)]

use proptest::prelude::*;

pub type Tok = String;

pub fn leaf(c: char) -> Tok {
    format!("'{c}'")
}

pub fn node(l: &str, r: &str) -> Tok {
    format!("[{l} {r}]")
}

pub fn lift(x: &str) -> Vec<Tok> {
    x.chars().map(leaf).collect()
}

/// Flat string of a rendered tree. Symbols must not be quotes.
pub fn yield_of(tok: &str) -> String {
    let mut out = String::new();
    let mut chars = tok.chars();
    while let Some(c) = chars.next() {
        if c == '\'' {
            out.push(chars.next().unwrap());
            chars.next();
        }
    }
    out
}

/// Left-to-right non-overlapping replacement; returns the count.
pub fn apply(stream: &[Tok], l: &str, r: &str) -> (Vec<Tok>, usize) {
    let mut out = Vec::with_capacity(stream.len());
    let mut count = 0;
    let mut i = 0;
    while i < stream.len() {
        if i + 1 < stream.len() && stream[i] == l && stream[i + 1] == r {
            out.push(node(l, r));
            count += 1;
            i += 2;
        } else {
            out.push(stream[i].clone());
            i += 1;
        }
    }
    (out, count)
}

/// Distinct adjacent pairs in order of first occurrence.
pub fn pairs(stream: &[Tok]) -> Vec<(Tok, Tok)> {
    let mut out: Vec<(Tok, Tok)> = Vec::new();
    for w in stream.windows(2) {
        let p = (w[0].clone(), w[1].clone());
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Non-overlapping count and first counted position of a pair.
pub fn count(stream: &[Tok], l: &str, r: &str) -> (usize, Option<usize>) {
    let (mut n, mut first, mut i) = (0, None, 0);
    while i + 1 < stream.len() {
        if stream[i] == l && stream[i + 1] == r {
            n += 1;
            first.get_or_insert(i);
            i += 2;
        } else {
            i += 1;
        }
    }
    (n, first)
}

/// The greedy choice: most frequent pair, earliest first counted occurrence.
pub fn best_pair(stream: &[Tok]) -> Option<((Tok, Tok), usize)> {
    pairs(stream)
        .into_iter()
        .map(|(l, r)| {
            let (n, first) = count(stream, &l, &r);
            ((l, r), n, first.unwrap())
        })
        .min_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)))
        .map(|(p, n, _)| (p, n))
}

/// Best utility over every sequence of at most `m` merges of adjacent pairs.
pub fn exhaustive_best(x: &str, m: usize) -> usize {
    fn go(stream: &[Tok], depth: usize, n: usize) -> usize {
        let mut best = n - stream.len();
        if depth == 0 {
            return best;
        }
        for (l, r) in pairs(stream) {
            best = best.max(go(&apply(stream, &l, &r).0, depth - 1, n));
        }
        best
    }
    go(&lift(x), m, x.chars().count())
}

/// Strings over the first `k` letters.
pub fn text(k: u8, max_len: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(0..k, 0..=max_len).prop_map(|v| v.into_iter().map(|c| (b'a' + c) as char).collect())
}

/// Strings over an alphabet of 1 to `max_k` letters.
pub fn any_text(max_k: u8, max_len: usize) -> impl Strategy<Value = String> {
    (1..=max_k).prop_flat_map(move |k| text(k, max_len))
}

/// Space-separated words drawn from a small random pool, with irregular
/// whitespace.
pub fn words_text() -> impl Strategy<Value = String> {
    (
        proptest::collection::vec(text(4, 6).prop_filter("nonempty", |w| !w.is_empty()), 1..=8),
        proptest::collection::vec((any::<prop::sample::Index>(), 0..4usize), 1..=40),
    )
        .prop_map(|(pool, picks)| {
            let mut out = String::new();
            for (i, (pick, sep)) in picks.iter().enumerate() {
                if i > 0 {
                    out.push_str([" ", " ", "  ", "\n"][*sep]);
                }
                out.push_str(&pool[pick.index(pool.len())]);
            }
            out
        })
}
