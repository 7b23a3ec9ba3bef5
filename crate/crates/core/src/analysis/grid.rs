//! Instance grids for the audits.

use std::collections::BTreeSet;

use serde::Serialize;

/// Where the strings of a grid come from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSource {
    /// All strings over the first `n` letters, one per renaming class.
    Alphabet(usize),
    /// Distinct substrings of a text, one per renaming class.
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub source: GridSource,
    pub max_len: usize,
    /// Instances use every merge count `1..=max_merges`.
    pub max_merges: usize,
    /// Optimal sequences considered per instance.
    pub max_optima: usize,
    /// Stop after this many strings; the report is then a lower bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_strings: Option<usize>,
}

pub const DEFAULT_MAX_OPTIMA: usize = 8;

impl GridSpec {
    pub fn alphabet(alphabet_size: usize, max_len: usize, max_merges: usize) -> Self {
        GridSpec {
            source: GridSource::Alphabet(alphabet_size),
            max_len,
            max_merges,
            max_optima: DEFAULT_MAX_OPTIMA,
            max_strings: None,
        }
    }

    pub fn text(text: impl Into<String>, max_len: usize, max_merges: usize) -> Self {
        GridSpec {
            source: GridSource::Text(text.into()),
            max_len,
            max_merges,
            max_optima: DEFAULT_MAX_OPTIMA,
            max_strings: None,
        }
    }

    /// The grid's strings in a deterministic order (by length, then
    /// lexicographic), nonempty only.
    pub fn strings(&self) -> Vec<String> {
        match &self.source {
            GridSource::Alphabet(k) => canonical_strings(*k, self.max_len),
            GridSource::Text(text) => text_substrings(text, self.max_len),
        }
    }
}

/// Renames symbols to `a`, `b`, ... in order of first appearance.
pub fn canonical_form(x: &str) -> String {
    let mut seen: Vec<char> = Vec::new();
    x.chars()
        .map(|c| {
            let i = seen.iter().position(|&s| s == c).unwrap_or_else(|| {
                seen.push(c);
                seen.len() - 1
            });
            char::from_u32('a' as u32 + i as u32).expect("small alphabet")
        })
        .collect()
}

/// Nonempty canonical strings of length `<= max_len` over at most `k`
/// symbols.
pub fn canonical_strings(k: usize, max_len: usize) -> Vec<String> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        let mut buf = Vec::with_capacity(len);
        extend(k, len, 0, &mut buf, &mut out);
    }
    out
}

fn extend(k: usize, len: usize, used: usize, buf: &mut Vec<u8>, out: &mut Vec<String>) {
    if buf.len() == len {
        out.push(buf.iter().map(|&b| (b'a' + b) as char).collect());
        return;
    }
    for s in 0..k.min(used + 1) {
        buf.push(s as u8);
        extend(k, len, used.max(s + 1), buf, out);
        buf.pop();
    }
}

/// Canonical forms of the distinct substrings of `text` of length
/// `<= max_len`. Symbols beyond the 26th distinct one in a window are not
/// supported and such windows are skipped.
pub fn text_substrings(text: &str, max_len: usize) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut set = BTreeSet::new();
    for i in 0..chars.len() {
        for len in 1..=max_len.min(chars.len() - i) {
            let window: String = chars[i..i + len].iter().collect();
            let distinct: BTreeSet<char> = window.chars().collect();
            if distinct.len() <= 26 {
                set.insert((len, canonical_form(&window)));
            }
        }
    }
    set.into_iter().map(|(_, s)| s).collect()
}
