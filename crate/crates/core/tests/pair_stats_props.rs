mod common;

use bpe_core::merge::{replace_pair, MergeTable};
use bpe_core::pair_stats::{overlapping_pair_frequencies, pair_frequencies};
use proptest::prelude::*;

#[test]
fn runs_count_half_their_length() {
    for n in 0..=64 {
        let x = "a".repeat(n);
        let table = MergeTable::from_text(&x);
        let stream = table.lift(&x).unwrap();
        let freqs = pair_frequencies(stream.tokens());
        if n < 2 {
            assert!(freqs.is_empty());
            continue;
        }
        let a = table.symbol_id('a').unwrap();
        assert_eq!(freqs.count((a, a)), n / 2, "n = {n}");
        assert_eq!(overlapping_pair_frequencies(stream.tokens()).count((a, a)), n - 1);
    }
}

proptest! {
    #[test]
    fn counts_agree_with_replacements(x in common::any_text(4, 60)) {
        let mut table = MergeTable::from_text(&x);
        let stream = table.lift(&x).unwrap();
        let oracle = common::lift(&x);
        for (pair, stat) in pair_frequencies(stream.tokens()).iter() {
            let merged = table.intern(pair.0, pair.1).unwrap();
            let mut tokens = stream.tokens().to_vec();
            prop_assert_eq!(replace_pair(&mut tokens, pair.0, pair.1, merged), stat.count);
            let (n, first) = common::count(&oracle, &table.render(pair.0), &table.render(pair.1));
            prop_assert_eq!((n, first), (stat.count, Some(stat.first_pos)));
        }
        let distinct = common::pairs(&oracle).len();
        prop_assert_eq!(pair_frequencies(stream.tokens()).len(), distinct);
    }

    #[test]
    fn overlapping_counts_dominate(x in common::any_text(3, 60)) {
        let table = MergeTable::from_text(&x);
        let stream = table.lift(&x).unwrap();
        let strict = pair_frequencies(stream.tokens());
        let loose = overlapping_pair_frequencies(stream.tokens());
        for (pair, stat) in strict.iter() {
            prop_assert!(loose.count(pair) >= stat.count);
        }
    }

    #[test]
    fn top_pair_ignores_handle_order(x in common::any_text(5, 60), seed in any::<u64>()) {
        let table = MergeTable::from_text(&x);
        let mut order = table.alphabet().to_vec();
        // a seeded rotation and reversal permutes handles without a new dependency
        if !order.is_empty() {
            let k = (seed % order.len() as u64) as usize;
            order.rotate_left(k);
            if seed & 1 == 1 {
                order.reverse();
            }
        }
        let shuffled = MergeTable::with_alphabet_order(order).unwrap();
        let a = pair_frequencies(table.lift(&x).unwrap().tokens());
        let b = pair_frequencies(shuffled.lift(&x).unwrap().tokens());
        prop_assert_eq!(a.is_empty(), b.is_empty());
        if !a.is_empty() {
            let (l1, r1) = a.top_pair(&table).unwrap();
            let (l2, r2) = b.top_pair(&shuffled).unwrap();
            prop_assert_eq!(table.yield_of(l1), shuffled.yield_of(l2));
            prop_assert_eq!(table.yield_of(r1), shuffled.yield_of(r2));
            let ((ol, or), n) = common::best_pair(&common::lift(&x)).unwrap();
            prop_assert_eq!((table.render(l1), table.render(r1)), (ol, or));
            prop_assert_eq!(a.count((l1, r1)), n);
        }
    }
}
