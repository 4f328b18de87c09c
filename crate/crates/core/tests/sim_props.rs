mod common;

use fsmsmith::sim::ResetPin;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn extra_settle_changes_nothing(seed in any::<u64>(), which in any::<prop::sample::Index>()) {
        let designs = common::sample_designs();
        let (p, source) = &designs[which.index(designs.len())];
        let d = common::design(source);
        let pin = p.reset_port().map(|r| ResetPin { name: r.name.clone(), active_high: p.golden.reset_active_high });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let script = common::random_script(&mut rng, p);
        if let Err(e) = common::check_extra_settle(&mut rng, &d, &script, pin.as_ref()) {
            prop_assert!(false, "{}: {}", p.id, e);
        }
    }
}
