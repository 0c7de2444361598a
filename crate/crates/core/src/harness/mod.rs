//! Instance generators, the Monte Carlo engine and the experiment bundles
//! behind `rematch reproduce`.

mod experiments;
mod generators;
mod montecarlo;

pub use experiments::{
    brute_force_value, halving_check, reproduce, reproduce_all, suite_instances, Bundle, BundleResult,
    ReproduceConfig, DEFAULT_SEED,
};
pub use generators::{gen_gneps, gen_knn, gen_random, gen_separation, Profile};
pub use montecarlo::{monte_carlo, monte_carlo_with, Limits, RewardStats};
