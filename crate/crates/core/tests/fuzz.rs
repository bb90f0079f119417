mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use slicesim_core::run_scenario;
use slicesim_core::sim::invariants::check_network;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn random_scenarios_keep_every_invariant(gen_seed in any::<u64>(), run_seed in any::<u64>()) {
        let sc = common::random_scenario(&mut ChaCha8Rng::seed_from_u64(gen_seed));
        prop_assert!(sc.validate().is_empty(), "{:?}", sc.validate());
        let mut sim = sc.build(run_seed).unwrap();
        sim.enable_invariant_checks();
        let r = sim.run_until_idle();
        prop_assert!(r.is_ok(), "{:?}", r);
        prop_assert!(check_network(sim.network()).is_ok());
        prop_assert!(sim.unfinished().is_empty(), "{:?}", sim.unfinished());
    }

    #[test]
    fn same_seed_same_bytes(gen_seed in any::<u64>(), run_seed in any::<u64>()) {
        let sc = common::random_scenario(&mut ChaCha8Rng::seed_from_u64(gen_seed));
        let a = run_scenario(&sc, run_seed, false).unwrap();
        let b = run_scenario(&sc, run_seed, false).unwrap();
        prop_assert_eq!(a.trace_text(), b.trace_text());
        prop_assert_eq!(a.metrics_csv(), b.metrics_csv());
    }
}
