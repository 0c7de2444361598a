use proptest::prelude::*;
use rematch::harness::{gen_random, Profile};
use rematch::model::{enumerate_samples, Instance};
use rematch::policies::{build_dp, build_dp_with, run_opt, DpConfig};

fn profile(i: usize) -> Profile {
    Profile::ALL[i % Profile::ALL.len()]
}

fn small(profile: Profile, seed: u64, max_edges: usize) -> Option<Instance> {
    let inst = gen_random(profile, seed);
    (inst.edge_count() <= max_edges).then_some(inst)
}

fn simulated_value(inst: &Instance, commit: bool) -> (f64, f64) {
    let table = build_dp(inst, commit).unwrap();
    let avg = enumerate_samples(inst, 16)
        .unwrap()
        .filter(|(_, p)| *p > 0.0)
        .map(|(g, p)| p * run_opt(inst, &g, &table).unwrap().total_weighted_reward)
        .sum();
    (table.root_value(), avg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn default_search_matches_exhaustive(
        seed in any::<u64>(),
        p in 0usize..4,
        commit in any::<bool>(),
        weights in prop::collection::vec(0u8..4, 4),
    ) {
        if let Some(mut inst) = small(profile(p), seed, 6) {
            inst.weights = weights[..inst.rounds].iter().map(|&w| w as f64 * 0.5).collect();
            let pruned = build_dp_with(&inst, DpConfig::new(commit)).unwrap().root_value();
            let full = build_dp_with(&inst, DpConfig { exhaustive: true, ..DpConfig::new(commit) }).unwrap().root_value();
            prop_assert!((pruned - full).abs() <= 1e-9, "commit={commit} pruned={pruned} full={full}");
        }
    }

    #[test]
    fn commitment_costs_at_most_half(seed in any::<u64>(), p in 0usize..4) {
        if let Some(inst) = small(profile(p), seed, 8) {
            let opt = build_dp(&inst, false).unwrap().root_value();
            let commit = build_dp(&inst, true).unwrap().root_value();
            prop_assert!(commit <= opt + 1e-9);
            prop_assert!(commit >= 0.5 * opt - 1e-9);
        }
    }

    #[test]
    fn table_value_matches_playing_it(seed in any::<u64>(), p in 0usize..4, commit in any::<bool>()) {
        if let Some(inst) = small(profile(p), seed, 7) {
            let (value, avg) = simulated_value(&inst, commit);
            prop_assert!((value - avg).abs() <= 1e-9);
        }
    }
}
