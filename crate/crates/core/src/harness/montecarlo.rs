use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{DEFAULT_EXACT_LIMIT, MAX_EXACT_LIMIT};
use crate::model::{self, Instance, DEFAULT_ENUMERATION_LIMIT, MAX_ENUMERATION_LIMIT};
use crate::policies::{self, DpConfig, PolicyContext, PolicyId, DEFAULT_DP_LIMIT, MAX_DP_LIMIT};
use crate::rng::mix;

/// Size limits for the exponential parts of the library. Values above the
/// hard caps are rejected by [`Limits::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub enumeration: usize,
    pub dp: usize,
    pub exact: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { enumeration: DEFAULT_ENUMERATION_LIMIT, dp: DEFAULT_DP_LIMIT, exact: DEFAULT_EXACT_LIMIT }
    }
}

impl Limits {
    pub fn validate(&self) -> Result<()> {
        let check = |what: &'static str, actual: usize, limit: usize| {
            if actual > limit {
                Err(Error::LimitExceeded { what, actual, limit })
            } else {
                Ok(())
            }
        };
        check("enumeration cap", self.enumeration, MAX_ENUMERATION_LIMIT)?;
        check("dp cap", self.dp, MAX_DP_LIMIT)?;
        check("exact matching cap", self.exact, MAX_EXACT_LIMIT)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardStats {
    pub policy: PolicyId,
    pub trials: usize,
    pub seed: u64,
    /// Mean total weighted reward.
    pub mean: f64,
    /// Sample standard deviation over √trials.
    pub stderr: f64,
    /// Mean number of successful edges per round.
    pub per_round_mean: Vec<f64>,
    pub per_round_stderr: Vec<f64>,
}

impl RewardStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stats serialize")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,mean_successes,stderr\n");
        for (r, (m, s)) in self.per_round_mean.iter().zip(&self.per_round_stderr).enumerate() {
            out.push_str(&format!("{},{},{}\n", r + 1, m, s));
        }
        out
    }
}

/// Mean and standard error, accumulated in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn stderr(&self) -> f64 {
        if self.n < 2.0 {
            0.0
        } else {
            (self.m2 / (self.n - 1.0)).sqrt() / self.n.sqrt()
        }
    }
}

pub fn monte_carlo(instance: &Instance, policy: PolicyId, trials: usize, seed: u64) -> Result<RewardStats> {
    monte_carlo_with(instance, policy, trials, seed, &Limits::default())
}

/// Trial i samples with seed `mix(seed, i)`; results are reduced in trial
/// order so the output does not depend on the thread count.
pub fn monte_carlo_with(
    instance: &Instance,
    policy: PolicyId,
    trials: usize,
    seed: u64,
    limits: &Limits,
) -> Result<RewardStats> {
    limits.validate()?;
    if trials == 0 {
        return Err(Error::Domain("trials must be positive".into()));
    }
    let table = |commit| policies::build_dp_with(instance, DpConfig { limit: limits.dp, ..DpConfig::new(commit) });
    let opt = match policy {
        PolicyId::OptExact | PolicyId::AlgorithmA => Some(table(false)?),
        _ => None,
    };
    let opt_commit = match policy {
        PolicyId::OptCommitExact => Some(table(true)?),
        _ => None,
    };
    let ctx = PolicyContext { exact_limit: limits.exact, opt_table: opt.as_ref(), opt_commit_table: opt_commit.as_ref() };
    let runs: Vec<(f64, Vec<usize>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let g = model::sample(instance, mix(seed, i as u64));
            let trace = policies::run_policy(policy, instance, &g, &ctx)?;
            Ok((trace.total_weighted_reward, trace.round_rewards()))
        })
        .collect::<Result<_>>()?;
    let mut total = Moments::default();
    let mut per_round = vec![Moments::default(); instance.rounds];
    for (reward, rounds) in &runs {
        total.push(*reward);
        for (m, &k) in per_round.iter_mut().zip(rounds) {
            m.push(k as f64);
        }
    }
    Ok(RewardStats {
        policy,
        trials,
        seed,
        mean: total.mean,
        stderr: total.stderr(),
        per_round_mean: per_round.iter().map(|m| m.mean).collect(),
        per_round_stderr: per_round.iter().map(Moments::stderr).collect(),
    })
}
