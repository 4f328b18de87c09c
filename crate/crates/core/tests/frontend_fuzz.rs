mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn arbitrary_bytes_give_diagnostics(bytes in prop::collection::vec(any::<u8>(), 0..4096)) {
        let source = String::from_utf8_lossy(&bytes);
        prop_assert!(common::front_end_survives(&source).is_ok());
    }

    #[test]
    fn edited_modules_give_diagnostics(seed in any::<u64>()) {
        let seeds: Vec<String> = common::sample_designs().into_iter().map(|(_, s)| s).collect();
        let source = common::fuzz_input(&mut ChaCha8Rng::seed_from_u64(seed), &seeds);
        if let Err(e) = common::front_end_survives(&source) {
            prop_assert!(false, "{}", e);
        }
    }
}
