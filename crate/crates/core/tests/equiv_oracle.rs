mod common;

use fsmsmith::golden::Verdict;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn checker_agrees_with_lockstep_oracle(seed in any::<u64>()) {
        let pair = common::random_pair(&mut ChaCha8Rng::seed_from_u64(seed), 6, 3);
        if let Err(e) = common::compare(&pair, 12) {
            prop_assert!(false, "{}", e);
        }
    }
}

#[test]
fn unmutated_pairs_are_equivalent() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let table = common::Table::random(&mut rng, 6, 3);
        let source = table.mutate(&mut rng, common::Mutation::SplitState).systemverilog(&mut rng);
        let pair = common::Pair {
            golden: table.model(),
            source,
            mutation: common::Mutation::SplitState,
        };
        assert_eq!(common::compare(&pair, 12), Ok(Verdict::Equivalent));
    }
}
