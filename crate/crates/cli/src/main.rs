use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use bpe_core::analysis::{audit_grid, property_audit, GridSpec};
use bpe_core::corpus::io::{escape_field, load_merges, save_merges};
use bpe_core::corpus::{
    ingest_with, normalize_boundaries, train_greedy_weighted, train_non_iterative, CorpusMode, DEFAULT_BOUNDARY,
};
use bpe_core::exact::{train_exact_with, ExactOptions};
use bpe_core::greedy::{train_greedy, Algorithm, TrainOptions};
use bpe_core::merge::{apply_sequence, MergeSequence, MergeTable};
use bpe_core::pair_stats::{overlapping_pair_frequencies, pair_frequencies};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bpe", version, about = "Greedy, exact and audited byte-pair encoding training")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Slow,
    Fast,
    Nonit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Raw,
    Words,
}

#[derive(Subcommand)]
enum Command {
    /// Train a merge sequence and write it as a merges file.
    Train {
        #[arg(long, value_enum, default_value = "fast")]
        algo: Algo,
        #[arg(long, value_enum, default_value = "raw")]
        mode: Mode,
        #[arg(long)]
        merges: usize,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Print step, merge yield, replacements and utility so far as TSV.
        #[arg(long)]
        stats: bool,
        /// Maximum yield width for the non-iterative trainer.
        #[arg(long, default_value_t = 5)]
        width: usize,
        /// Word boundary symbol in word mode.
        #[arg(long, default_value_t = DEFAULT_BOUNDARY)]
        boundary: char,
    },
    /// Apply a merges file to a text and print the token yields as JSON.
    Encode {
        #[arg(long)]
        merges: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Print adjacent pair counts as TSV, best first.
    Stats {
        input: PathBuf,
        /// Raw bigram counts that admit overlaps.
        #[arg(long)]
        overlapping: bool,
    },
    /// Search for an optimal merge sequence.
    Exact {
        #[arg(long)]
        merges: usize,
        #[arg(long)]
        input: PathBuf,
        /// Disable the ordering guard.
        #[arg(long)]
        brute: bool,
        /// Skip repeated states.
        #[arg(long)]
        memo: bool,
    },
    /// Exhaustive property, curvature and approximation audit; prints JSON.
    Audit {
        #[arg(long)]
        alphabet: usize,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        max_merges: usize,
        /// Use substrings of this text instead of all strings.
        #[arg(long)]
        english: Option<PathBuf>,
        #[arg(long, default_value_t = bpe_core::analysis::DEFAULT_MAX_OPTIMA)]
        max_optima: usize,
        /// Stop after this many strings.
        #[arg(long)]
        max_strings: Option<usize>,
    },
}

/// Reads a text file, dropping one trailing line break.
fn read_text(path: &Path) -> Result<String> {
    let mut text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.ends_with('\n') {
        text.pop();
        if text.ends_with('\r') {
            text.pop();
        }
    }
    Ok(text)
}

fn print_steps(out: &mut impl Write, table: &MergeTable, steps: impl Iterator<Item = (bpe_core::MergeId, usize)>) -> Result<()> {
    writeln!(out, "step\tmerge\treplacements\tutility")?;
    let mut total = 0;
    for (i, (m, r)) in steps.enumerate() {
        total += r;
        writeln!(out, "{}\t{}\t{}\t{}", i + 1, escape_field(table.yield_of(m)), r, total)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Train { algo, mode, merges, input, output, stats, width, boundary } => {
            let text = read_text(&input)?;
            let (table, sequence, steps): (MergeTable, MergeSequence, Vec<(bpe_core::MergeId, usize)>) = match (algo, mode) {
                (Algo::Slow | Algo::Fast, Mode::Raw) => {
                    let a = if matches!(algo, Algo::Slow) { Algorithm::Slow } else { Algorithm::Fast };
                    let r = train_greedy(&text, TrainOptions::new(merges), a)?;
                    let steps = r.steps.iter().map(|s| (s.merge, s.replacements)).collect();
                    (r.table, r.sequence, steps)
                }
                (Algo::Slow, Mode::Words) => {
                    let corpus = ingest_with(&text, CorpusMode::WordBoundary, boundary);
                    let r = train_greedy_weighted(&corpus, merges)?;
                    let steps = r.steps.iter().map(|s| (s.merge, s.replacements)).collect();
                    (r.table, r.sequence, steps)
                }
                (Algo::Fast, Mode::Words) => {
                    let normalized = normalize_boundaries(&text.replace(boundary, " "), boundary);
                    let r = train_greedy(&normalized, TrainOptions::new(merges).with_barrier(boundary), Algorithm::Fast)?;
                    let steps = r.steps.iter().map(|s| (s.merge, s.replacements)).collect();
                    (r.table, r.sequence, steps)
                }
                (Algo::Nonit, mode) => {
                    let mode = if matches!(mode, Mode::Raw) { CorpusMode::Raw } else { CorpusMode::WordBoundary };
                    let corpus = ingest_with(&text, mode, boundary);
                    let r = train_non_iterative(&corpus, merges, width)?;
                    let steps = r.sequence.iter().zip(r.frequencies.iter()).map(|(m, &f)| (m, f as usize)).collect();
                    (r.table, r.sequence, steps)
                }
            };
            save_merges(&output, &table, &sequence).with_context(|| format!("writing {}", output.display()))?;
            if stats && matches!(algo, Algo::Nonit) {
                writeln!(out, "rank\tmerge\tfrequency")?;
                for (i, (m, f)) in steps.into_iter().enumerate() {
                    writeln!(out, "{}\t{}\t{}", i + 1, escape_field(&table.render(m)), f)?;
                }
            } else if stats {
                print_steps(&mut out, &table, steps.into_iter())?;
            }
        }
        Command::Encode { merges, input } => {
            let (table, sequence) = load_merges(&merges).with_context(|| format!("reading {}", merges.display()))?;
            let text = read_text(&input)?;
            let stream = apply_sequence(&table, &table.lift(&text)?, &sequence)?;
            writeln!(out, "{}", serde_json::to_string(&stream.yields(&table))?)?;
        }
        Command::Stats { input, overlapping } => {
            let text = read_text(&input)?;
            let table = MergeTable::from_text(&text);
            let stream = table.lift(&text)?;
            let freqs = if overlapping {
                overlapping_pair_frequencies(stream.tokens())
            } else {
                pair_frequencies(stream.tokens())
            };
            writeln!(out, "left\tright\tcount")?;
            for ((l, r), stat) in freqs.ranked(&table) {
                writeln!(out, "{}\t{}\t{}", escape_field(table.yield_of(l)), escape_field(table.yield_of(r)), stat.count)?;
            }
        }
        Command::Exact { merges, input, brute, memo } => {
            let text = read_text(&input)?;
            let mut opts = ExactOptions::new(merges).memo(memo);
            if brute {
                opts = opts.brute();
            }
            let start = Instant::now();
            let r = train_exact_with(&text, opts)?;
            let elapsed = start.elapsed();
            let pairs: Vec<[&str; 2]> = r
                .best_sequence
                .iter()
                .filter_map(|m| r.table.parts(m))
                .map(|(a, b)| [r.table.yield_of(a), r.table.yield_of(b)])
                .collect();
            let report = json!({
                "best_utility": r.best_utility,
                "best_sequence": pairs,
                "states_visited": r.states_visited,
                "pruned": r.pruned,
                "memo_hits": r.memo_hits,
                "seconds": elapsed.as_secs_f64(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Audit { alphabet, max_len, max_merges, english, max_optima, max_strings } => {
            let mut grid = match english {
                Some(path) => GridSpec::text(read_text(&path)?, max_len, max_merges),
                None => {
                    if alphabet == 0 || alphabet > 26 {
                        bail!("alphabet size must be between 1 and 26");
                    }
                    GridSpec::alphabet(alphabet, max_len, max_merges)
                }
            };
            grid.max_optima = max_optima;
            grid.max_strings = max_strings;
            let properties = property_audit(&grid)?;
            let audit = audit_grid(&grid)?;
            let report = json!({
                "properties": properties,
                "curvature": audit.curvature,
                "ratio_instances": audit.ratios.len(),
                "ratio_failures": audit.failures().collect::<Vec<_>>(),
                "worst_ratio": audit.min_ratio(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
