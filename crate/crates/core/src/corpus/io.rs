//! File formats.
//!
//! Merges file:
//!
//! ```text
//! bpe-merges v1
//! ["a","b","c"]
//! 0 1
//! 3 2
//! ```
//!
//! Line two is the alphabet as a JSON array; symbol `k` has id `k`. Every
//! further line defines the next id (`|alphabet|`, `|alphabet| + 1`, ...)
//! as the merge of two earlier ids, and lists the sequence in order.
//!
//! Yield-pair files hold one merge per line as two whitespace-separated
//! yields, each either bare or a JSON string. Each yield is resolved to the
//! latest earlier merge with that yield, or to a symbol.
//!
//! Corpus files hold `word<TAB>count` lines with `\\`, `\t`, `\n` and `\r`
//! escaped.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rustc_hash::FxHashMap;

use super::{Corpus, CorpusMode};
use crate::error::{BpeError, Result};
use crate::merge::{MergeId, MergeSequence, MergeTable, Symbol};

pub const MERGES_HEADER: &str = "bpe-merges v1";

fn parse_error(line: usize, message: impl Into<String>) -> BpeError {
    BpeError::Parse { line, message: message.into() }
}

pub fn write_merges(table: &MergeTable, seq: &MergeSequence, mut w: impl Write) -> Result<()> {
    if let Some(position) = seq.first_invalid(table) {
        return Err(BpeError::InvalidSequence { position });
    }
    let alphabet: Vec<String> = table.alphabet().iter().map(|c| c.to_string()).collect();
    writeln!(w, "{MERGES_HEADER}")?;
    writeln!(w, "{}", serde_json::to_string(&alphabet).expect("strings serialize"))?;
    let mut ids: FxHashMap<MergeId, usize> = table.alphabet().iter().enumerate().map(|(i, _)| (MergeId(i as u32), i)).collect();
    let mut next = table.alphabet().len();
    for m in seq.iter() {
        let (l, r) = table.parts(m).ok_or(BpeError::NotComposite(m.0))?;
        writeln!(w, "{} {}", ids[&l], ids[&r])?;
        ids.entry(m).or_insert(next);
        next += 1;
    }
    w.flush()?;
    Ok(())
}

pub fn save_merges(path: impl AsRef<Path>, table: &MergeTable, seq: &MergeSequence) -> Result<()> {
    write_merges(table, seq, BufWriter::new(File::create(path)?))
}

/// Reads a merges file into a fresh table and the listed sequence.
pub fn read_merges(r: impl BufRead) -> Result<(MergeTable, MergeSequence)> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, Ok(h))) if h.trim_end() == MERGES_HEADER => {}
        Some((n, Ok(h))) => return Err(parse_error(n, format!("expected {MERGES_HEADER:?}, found {h:?}"))),
        Some((_, Err(e))) => return Err(e.into()),
        None => return Err(parse_error(1, "empty file")),
    }
    let (n, alphabet_line) = lines.next().ok_or_else(|| parse_error(2, "missing alphabet"))?;
    let symbols: Vec<String> = serde_json::from_str(&alphabet_line?).map_err(|e| parse_error(n, e.to_string()))?;
    let mut alphabet = Vec::with_capacity(symbols.len());
    for s in symbols {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => alphabet.push(c),
            _ => return Err(parse_error(n, format!("alphabet entry {s:?} is not a single symbol"))),
        }
    }
    let mut table = MergeTable::with_alphabet_order(alphabet).map_err(|e| parse_error(n, e.to_string()))?;
    let mut defs: Vec<MergeId> = (0..table.alphabet().len() as u32).map(MergeId).collect();
    let mut seq = MergeSequence::new();
    for (n, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_error(n, format!("expected two ids, found {}", fields.len())));
        }
        let mut parts = [MergeId(0); 2];
        for (slot, field) in parts.iter_mut().zip(&fields) {
            let id: usize = field.parse().map_err(|_| parse_error(n, format!("{field:?} is not an id")))?;
            *slot = *defs.get(id).ok_or_else(|| parse_error(n, format!("id {id} is not defined yet")))?;
        }
        let m = table.intern(parts[0], parts[1])?;
        defs.push(m);
        seq.push(m);
    }
    Ok((table, seq))
}

pub fn load_merges(path: impl AsRef<Path>) -> Result<(MergeTable, MergeSequence)> {
    read_merges(BufReader::new(File::open(path)?))
}

/// Splits a yield-pair line into its two yields.
fn yield_fields(line: &str, n: usize) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut rest = line.trim_start();
    while !rest.is_empty() {
        if rest.starts_with('"') {
            let mut stream = serde_json::Deserializer::from_str(rest).into_iter::<String>();
            let value = stream
                .next()
                .ok_or_else(|| parse_error(n, "unterminated string"))?
                .map_err(|e| parse_error(n, e.to_string()))?;
            rest = rest[stream.byte_offset()..].trim_start();
            out.push(value);
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            out.push(rest[..end].to_string());
            rest = rest[end..].trim_start();
        }
    }
    if out.len() != 2 {
        return Err(parse_error(n, format!("expected two yields, found {}", out.len())));
    }
    Ok(out)
}

/// Reads yield pairs, resolving each yield to the latest earlier merge that
/// produces it.
pub fn read_yield_pairs(r: impl BufRead) -> Result<(MergeTable, MergeSequence)> {
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push((i + 1, yield_fields(&line, i + 1)?));
    }
    let mut alphabet: Vec<Symbol> = rows.iter().flat_map(|(_, f)| f.iter().flat_map(|y| y.chars())).collect();
    alphabet.sort_unstable();
    alphabet.dedup();
    let mut table = MergeTable::new(alphabet);
    let mut latest: FxHashMap<String, MergeId> = FxHashMap::default();
    let mut seq = MergeSequence::new();
    for (n, fields) in rows {
        let mut parts = [MergeId(0); 2];
        for (slot, y) in parts.iter_mut().zip(&fields) {
            let mut chars = y.chars();
            *slot = match (chars.next(), chars.next()) {
                (None, _) => return Err(parse_error(n, "empty yield")),
                (Some(c), None) => table.symbol_id(c).expect("alphabet covers the file"),
                _ => *latest.get(y).ok_or_else(|| BpeError::Ambiguity { line: n, yield_: y.clone() })?,
            };
        }
        let m = table.intern(parts[0], parts[1])?;
        latest.insert(table.yield_of(m).to_string(), m);
        seq.push(m);
    }
    Ok((table, seq))
}

pub fn load_yield_pairs(path: impl AsRef<Path>) -> Result<(MergeTable, MergeSequence)> {
    read_yield_pairs(BufReader::new(File::open(path)?))
}

/// One yield-pair line for `merge`, both yields as JSON strings.
pub fn yield_pair_line(table: &MergeTable, merge: MergeId) -> Result<String> {
    let (l, r) = table.parts(merge).ok_or(BpeError::NotComposite(merge.0))?;
    let q = |m| serde_json::to_string(table.yield_of(m)).expect("strings serialize");
    Ok(format!("{} {}", q(l), q(r)))
}

pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_field(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match chars.next()? {
            '\\' => '\\',
            't' => '\t',
            'n' => '\n',
            'r' => '\r',
            _ => return None,
        });
    }
    Some(out)
}

pub fn write_corpus_tsv(corpus: &Corpus, mut w: impl Write) -> Result<()> {
    for (word, count) in &corpus.words {
        writeln!(w, "{}\t{}", escape_field(word), count)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_corpus_tsv(r: impl BufRead, mode: CorpusMode, boundary: Symbol) -> Result<Corpus> {
    let mut corpus = Corpus::empty(mode, boundary);
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (word, count) = line.rsplit_once('\t').ok_or_else(|| parse_error(i + 1, "expected word<TAB>count"))?;
        let word = unescape_field(word).ok_or_else(|| parse_error(i + 1, "bad escape"))?;
        let count: u64 = count.trim().parse().map_err(|_| parse_error(i + 1, format!("{count:?} is not a count")))?;
        if mode == CorpusMode::WordBoundary && word.contains(boundary) {
            return Err(parse_error(i + 1, format!("word {word:?} contains the boundary")));
        }
        corpus.add(&word, count);
    }
    Ok(corpus)
}
