//! Executable matching policies. Each one runs against a fixed sample graph
//! and returns the full per-round [`Trace`].

mod algorithm_a;
mod alternating;
mod dp;
mod offline;

pub use algorithm_a::run_algorithm_a;
pub use alternating::{run_lemma3_alternating, GnepsLayout};
pub use dp::{build_dp, build_dp_with, opt_value, run_opt, DpConfig, DpEntry, DpValueTable, DEFAULT_DP_LIMIT, MAX_DP_LIMIT};
pub use offline::{offline_max_matching, run_offline};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, WeightedSubproblem, DEFAULT_EXACT_LIMIT};
use crate::model::{Instance, SampleGraph, Trace, TraceBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyId {
    Sm,
    GreedyCommit,
    OptExact,
    OptCommitExact,
    AlgorithmA,
    Lemma3Alternating,
    OfflineMax,
}

impl PolicyId {
    pub const ALL: [PolicyId; 7] = [
        PolicyId::Sm,
        PolicyId::GreedyCommit,
        PolicyId::OptExact,
        PolicyId::OptCommitExact,
        PolicyId::AlgorithmA,
        PolicyId::Lemma3Alternating,
        PolicyId::OfflineMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyId::Sm => "sm",
            PolicyId::GreedyCommit => "greedy_commit",
            PolicyId::OptExact => "opt_exact",
            PolicyId::OptCommitExact => "opt_commit_exact",
            PolicyId::AlgorithmA => "algorithm_a",
            PolicyId::Lemma3Alternating => "lemma3_alternating",
            PolicyId::OfflineMax => "offline_max",
        }
    }

    /// Policies that replay every discovered success in all later rounds.
    pub fn commits(self) -> bool {
        matches!(
            self,
            PolicyId::Sm | PolicyId::GreedyCommit | PolicyId::OptCommitExact | PolicyId::AlgorithmA
        )
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_").to_ascii_lowercase();
        PolicyId::ALL
            .into_iter()
            .find(|p| p.name() == norm)
            .or(match norm.as_str() {
                "gc" => Some(PolicyId::GreedyCommit),
                "opt" => Some(PolicyId::OptExact),
                "opt_commit" => Some(PolicyId::OptCommitExact),
                "offline" => Some(PolicyId::OfflineMax),
                "alternating" => Some(PolicyId::Lemma3Alternating),
                _ => None,
            })
            .ok_or_else(|| Error::Domain(format!("unknown policy {s:?}")))
    }
}

/// Shared state for policies that run on committed successes plus a fresh
/// per-round matching: the current probability estimates and which edges
/// are locked in.
struct CommitState {
    p_hat: Vec<f64>,
    committed: Vec<bool>,
}

impl CommitState {
    fn new(instance: &Instance) -> Self {
        CommitState {
            p_hat: instance.probabilities(),
            committed: vec![false; instance.edge_count()],
        }
    }

    fn subproblem(&self, instance: &Instance) -> WeightedSubproblem {
        let mut residual = instance.capacities();
        for e in instance.edges.iter().filter(|e| self.committed[e.id]) {
            for &v in &e.endpoints {
                residual[v] -= 1;
            }
        }
        let blocked: Vec<bool> =
            (0..instance.edge_count()).map(|e| self.committed[e] || self.p_hat[e] <= 0.0).collect();
        WeightedSubproblem::new(instance, &self.p_hat, residual, &blocked)
    }

    fn play(&mut self, builder: &mut TraceBuilder<'_>, sample: &SampleGraph, fresh: &[usize]) {
        let mut selection: Vec<usize> =
            (0..self.committed.len()).filter(|&e| self.committed[e]).collect();
        selection.extend_from_slice(fresh);
        builder.push(selection);
        for &e in fresh {
            if sample.is_realized(e) {
                self.committed[e] = true;
            } else {
                self.p_hat[e] = 0.0;
            }
        }
    }
}

/// Decentralized stable matching: committed pairs stay together, everyone
/// else pairs up greedily by current compatibility probability; failed
/// pairs drop to probability 0.
pub fn run_sm(instance: &Instance, sample: &SampleGraph) -> Trace {
    let mut state = CommitState::new(instance);
    let mut builder = TraceBuilder::new(PolicyId::Sm, instance, sample);
    for _ in 0..instance.rounds {
        let sub = state.subproblem(instance);
        let fresh = if instance.is_hypergraph() {
            kernels::greedy_hypergraph_matching(&sub)
        } else {
            kernels::greedy_matching(&sub)
        };
        state.play(&mut builder, sample, &fresh.chosen);
    }
    builder.finish()
}

pub fn run_greedy_commit(instance: &Instance, sample: &SampleGraph) -> Result<Trace> {
    run_greedy_commit_with(instance, sample, DEFAULT_EXACT_LIMIT)
}

/// Greedy-Commit: committed successes plus a maximum expected-weight
/// matching on the remaining capacity each round.
pub fn run_greedy_commit_with(
    instance: &Instance,
    sample: &SampleGraph,
    exact_limit: usize,
) -> Result<Trace> {
    if instance.is_hypergraph() {
        return Err(Error::Unsupported("greedy-commit on hypergraph instances".into()));
    }
    let mut state = CommitState::new(instance);
    let mut builder = TraceBuilder::new(PolicyId::GreedyCommit, instance, sample);
    for _ in 0..instance.rounds {
        let sub = state.subproblem(instance);
        let fresh = kernels::max_weight_matching(&sub, exact_limit)?;
        state.play(&mut builder, sample, &fresh.chosen);
    }
    Ok(builder.finish())
}

/// Everything a policy run may need besides the instance and the sample.
#[derive(Debug, Clone, Copy)]
pub struct PolicyContext<'a> {
    pub exact_limit: usize,
    pub opt_table: Option<&'a DpValueTable>,
    pub opt_commit_table: Option<&'a DpValueTable>,
}

impl Default for PolicyContext<'_> {
    fn default() -> Self {
        PolicyContext { exact_limit: DEFAULT_EXACT_LIMIT, opt_table: None, opt_commit_table: None }
    }
}

/// Runs any policy by id. OPT-based policies need the matching table in `ctx`.
pub fn run_policy(
    policy: PolicyId,
    instance: &Instance,
    sample: &SampleGraph,
    ctx: &PolicyContext<'_>,
) -> Result<Trace> {
    fn table<'t>(t: Option<&'t DpValueTable>, name: &str) -> Result<&'t DpValueTable> {
        t.ok_or_else(|| Error::Domain(format!("{name} requires a value table")))
    }
    match policy {
        PolicyId::Sm => Ok(run_sm(instance, sample)),
        PolicyId::GreedyCommit => run_greedy_commit_with(instance, sample, ctx.exact_limit),
        PolicyId::OptExact => run_opt(instance, sample, table(ctx.opt_table, "opt_exact")?),
        PolicyId::OptCommitExact => {
            run_opt(instance, sample, table(ctx.opt_commit_table, "opt_commit_exact")?)
        }
        PolicyId::AlgorithmA => {
            let opt = run_opt(instance, sample, table(ctx.opt_table, "algorithm_a")?)?;
            run_algorithm_a(instance, sample, &opt)
        }
        PolicyId::Lemma3Alternating => run_lemma3_alternating(instance, sample),
        PolicyId::OfflineMax => run_offline(instance, sample, ctx.exact_limit),
    }
}
