mod common;

use bpe_core::exact::{conflicts, is_safe_permutation, sequences_equivalent};
use bpe_core::exact::{train_exact, train_exact_with, ExactOptions};
use bpe_core::greedy::{train_greedy, Algorithm, TrainOptions};
use bpe_core::merge::{apply_sequence, MergeSequence, MergeTable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pruned_search_matches_exhaustive_oracle(x in common::any_text(3, 10), m in 0..=3usize) {
        let pruned = train_exact(&x, m, true).unwrap();
        prop_assert_eq!(pruned.best_utility, common::exhaustive_best(&x, m));
        prop_assert_eq!(apply_sequence(&pruned.table, &pruned.table.lift(&x).unwrap(), &pruned.best_sequence).unwrap().utility(), pruned.best_utility);
    }

    #[test]
    fn pruning_is_sound(x in common::any_text(3, 10), m in 0..=3usize) {
        let brute = train_exact(&x, m, false).unwrap();
        let pruned = train_exact(&x, m, true).unwrap();
        let memo = train_exact_with(&x, ExactOptions::new(m).memo(true)).unwrap();
        prop_assert_eq!(brute.best_utility, pruned.best_utility);
        prop_assert_eq!(brute.best_utility, memo.best_utility);
        prop_assert!(pruned.states_visited <= brute.states_visited);
    }

    #[test]
    fn optimum_dominates_greedy(x in common::any_text(4, 12), m in 0..=3usize) {
        let exact = train_exact(&x, m, true).unwrap().best_utility;
        for algo in [Algorithm::Slow, Algorithm::Fast] {
            prop_assert!(exact >= train_greedy(&x, TrainOptions::new(m), algo).unwrap().utility());
        }
    }

    #[test]
    fn equivalence_implies_equal_application(
        x in common::any_text(3, 12),
        picks in proptest::collection::vec(any::<usize>(), 1..=4),
        perm_seed in any::<u64>(),
    ) {
        // an effective sequence read off x, and a random reordering of it
        let mut table = MergeTable::from_text(&x);
        let mut stream = table.lift(&x).unwrap();
        let mut a = MergeSequence::new();
        for p in picks {
            if stream.len() < 2 {
                break;
            }
            let i = p % (stream.len() - 1);
            let m = table.intern(stream.tokens()[i], stream.tokens()[i + 1]).unwrap();
            stream.apply_in_place(&table, m).unwrap();
            a.push(m);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
        let mut perm: Vec<usize> = (0..a.len()).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let b: MergeSequence = perm.iter().map(|&i| a.items()[i]).collect();
        let check = sequences_equivalent(&table, &a, &b, 8).unwrap();
        if let Some(found) = &check.safe_permutation {
            prop_assert!(is_safe_permutation(&table, &a, found).unwrap());
        }
        if check.equivalent() && !table.alphabet().is_empty() {
            let alphabet = table.alphabet().to_vec();
            for _ in 0..100 {
                let len = rng.gen_range(0..=16);
                let probe: String = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
                let root = table.lift(&probe).unwrap();
                prop_assert_eq!(apply_sequence(&table, &root, &a).unwrap(), apply_sequence(&table, &root, &b).unwrap(), "probe {:?}", probe);
            }
        }
    }

    #[test]
    fn conflict_is_last_meets_first(x in common::any_text(3, 12), i in any::<usize>(), j in any::<usize>()) {
        let r = train_greedy(&x, TrainOptions::new(6), Algorithm::Slow).unwrap();
        prop_assume!(!r.sequence.is_empty());
        let a = r.sequence.items()[i % r.sequence.len()];
        let b = r.sequence.items()[j % r.sequence.len()];
        let (ya, yb) = (r.table.yield_of(a), r.table.yield_of(b));
        prop_assert_eq!(conflicts(&r.table, a, b), ya.chars().last() == yb.chars().next());
    }
}

#[test]
fn conflict_is_directed() {
    let mut t = MergeTable::from_text("abc");
    let (a, b, c) = (t.symbol_id('a').unwrap(), t.symbol_id('b').unwrap(), t.symbol_id('c').unwrap());
    let ab = t.intern(a, b).unwrap();
    let bc = t.intern(b, c).unwrap();
    assert!(conflicts(&t, ab, bc));
    assert!(!conflicts(&t, bc, ab));
    // the direction matters for reordering: ⟨ab, bc⟩ and ⟨bc, ab⟩ differ on "abc"
    let root = t.lift("abc").unwrap();
    let one = apply_sequence(&t, &root, &MergeSequence::from(vec![ab, bc])).unwrap();
    let two = apply_sequence(&t, &root, &MergeSequence::from(vec![bc, ab])).unwrap();
    assert_ne!(one, two);
    assert!(!sequences_equivalent(&t, &MergeSequence::from(vec![ab, bc]), &MergeSequence::from(vec![bc, ab]), 8).unwrap().equivalent());
}
