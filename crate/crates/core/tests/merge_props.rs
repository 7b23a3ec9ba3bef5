mod common;

use bpe_core::merge::{apply_sequence, compression_utility, MergeId, MergeSequence, MergeTable};
use proptest::prelude::*;

/// Builds a valid sequence from raw choices: an effective choice merges an
/// adjacent pair of the current stream, any other merges two random members
/// of the vocabulary so far (often a no-op on `x`).
fn build(x: &str, choices: &[(bool, usize, usize)]) -> (MergeTable, MergeSequence) {
    let mut table = MergeTable::from_text(x);
    let mut stream = table.lift(x).unwrap();
    let mut pool: Vec<MergeId> = table.alphabet().iter().map(|&c| table.symbol_id(c).unwrap()).collect();
    let mut seq = MergeSequence::new();
    if pool.is_empty() {
        return (table, seq);
    }
    for &(effective, a, b) in choices {
        let (l, r) = if effective && stream.len() >= 2 {
            let i = a % (stream.len() - 1);
            (stream.tokens()[i], stream.tokens()[i + 1])
        } else {
            (pool[a % pool.len()], pool[b % pool.len()])
        };
        let m = table.intern(l, r).unwrap();
        if !pool.contains(&m) {
            pool.push(m);
        }
        stream.apply_in_place(&table, m).unwrap();
        seq.push(m);
    }
    (table, seq)
}

fn choices() -> impl Strategy<Value = Vec<(bool, usize, usize)>> {
    proptest::collection::vec((any::<bool>(), any::<usize>(), any::<usize>()), 0..12)
}

proptest! {
    #[test]
    fn yield_round_trip(x in common::any_text(4, 40), c in choices()) {
        let (table, seq) = build(&x, &c);
        prop_assert!(seq.is_valid(&table));
        let stream = apply_sequence(&table, &table.lift(&x).unwrap(), &seq).unwrap();
        prop_assert_eq!(stream.text(&table), x.clone());
        prop_assert_eq!(stream.yields(&table).concat(), x);
    }

    #[test]
    fn utility_is_length_delta(x in common::any_text(4, 40), c in choices()) {
        let (table, seq) = build(&x, &c);
        let stream = apply_sequence(&table, &table.lift(&x).unwrap(), &seq).unwrap();
        let kappa = compression_utility(&table, &x, &seq).unwrap();
        prop_assert_eq!(kappa + stream.len(), x.chars().count());
        prop_assert_eq!(kappa, stream.utility());
    }

    #[test]
    fn application_is_deterministic(x in common::any_text(4, 40), c in choices()) {
        let (table, seq) = build(&x, &c);
        let root = table.lift(&x).unwrap();
        prop_assert_eq!(apply_sequence(&table, &root, &seq).unwrap(), apply_sequence(&table, &root, &seq).unwrap());
    }

    #[test]
    fn utility_upper_bound(x in common::any_text(4, 40), c in choices()) {
        let (table, seq) = build(&x, &c);
        let kappa = compression_utility(&table, &x, &seq).unwrap();
        prop_assert!(kappa <= x.chars().count().saturating_sub(1));
    }

    #[test]
    fn utility_is_monotone_in_prefixes(x in common::any_text(4, 40), c in choices()) {
        let (table, seq) = build(&x, &c);
        let curve: Vec<usize> = (0..=seq.len()).map(|n| compression_utility(&table, &x, &seq.prefix(n)).unwrap()).collect();
        prop_assert!(curve.windows(2).all(|w| w[0] <= w[1]), "{:?}", curve);
    }

    #[test]
    fn apply_matches_tree_oracle(x in common::any_text(4, 40), c in choices()) {
        let (table, seq) = build(&x, &c);
        let stream = apply_sequence(&table, &table.lift(&x).unwrap(), &seq).unwrap();
        let mut oracle = common::lift(&x);
        for m in seq.iter() {
            let (l, r) = table.parts(m).unwrap();
            oracle = common::apply(&oracle, &table.render(l), &table.render(r)).0;
        }
        let got: Vec<String> = stream.tokens().iter().map(|&t| table.render(t)).collect();
        prop_assert_eq!(got, oracle);
    }

    #[test]
    fn reversed_composites_are_invalid(x in common::any_text(3, 20), c in choices()) {
        let (table, seq) = build(&x, &c);
        let mut items = seq.items().to_vec();
        items.reverse();
        let reversed = MergeSequence::from(items);
        // valid iff every merge's composite parts still come earlier
        let expected = reversed.items().iter().enumerate().all(|(i, &m)| {
            let (l, r) = table.parts(m).unwrap();
            [l, r].iter().all(|&p| table.is_trivial(p) || reversed.items()[..i].contains(&p))
        });
        prop_assert_eq!(reversed.is_valid(&table), expected);
    }
}
