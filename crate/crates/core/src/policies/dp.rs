//! Exact expectimax over knowledge states.

use std::collections::HashMap;

use super::PolicyId;
use crate::error::{Error, Result};
use crate::model::{EdgeId, EdgeStatus, Instance, KnowledgeState, SampleGraph, Trace, TraceBuilder};

pub const DEFAULT_DP_LIMIT: usize = 12;
pub const MAX_DP_LIMIT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpConfig {
    pub commit: bool,
    /// Search every feasible selection instead of only maximal ones. Pruning
    /// to maximal selections is exact without commitment; with it, an extra
    /// success can lock capacity away from a heavier later round.
    pub exhaustive: bool,
    pub limit: usize,
}

impl DpConfig {
    pub fn new(commit: bool) -> Self {
        DpConfig { commit, exhaustive: commit, limit: DEFAULT_DP_LIMIT }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpEntry {
    /// Optimal expected remaining weighted reward.
    pub value: f64,
    /// Lexicographically smallest optimal selection.
    pub action: Vec<EdgeId>,
}

/// Memoized values keyed by (knowledge-state code, 0-based round).
#[derive(Debug, Clone)]
pub struct DpValueTable {
    pub commit: bool,
    pub exhaustive: bool,
    edge_count: usize,
    rounds: usize,
    entries: HashMap<(u64, usize), DpEntry>,
}

impl DpValueTable {
    pub fn get(&self, state: &KnowledgeState, round: usize) -> Option<&DpEntry> {
        self.entries.get(&(state.encode(), round))
    }

    /// Value with nothing learned yet, before round 1.
    pub fn root_value(&self) -> f64 {
        if self.rounds == 0 {
            return 0.0;
        }
        self.get(&KnowledgeState::unknown(self.edge_count), 0).map_or(0.0, |e| e.value)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn policy(&self) -> PolicyId {
        if self.commit {
            PolicyId::OptCommitExact
        } else {
            PolicyId::OptExact
        }
    }
}

pub fn build_dp(instance: &Instance, commit: bool) -> Result<DpValueTable> {
    build_dp_with(instance, DpConfig::new(commit))
}

pub fn build_dp_with(instance: &Instance, config: DpConfig) -> Result<DpValueTable> {
    let limit = config.limit.min(MAX_DP_LIMIT);
    if instance.edge_count() > limit {
        return Err(Error::LimitExceeded { what: "dp", actual: instance.edge_count(), limit });
    }
    let mut solver = Solver {
        instance,
        config,
        capacity: instance.capacities(),
        memo: HashMap::new(),
    };
    if instance.rounds > 0 {
        solver.value(&KnowledgeState::unknown(instance.edge_count()), 0);
    }
    Ok(DpValueTable {
        commit: config.commit,
        exhaustive: config.exhaustive,
        edge_count: instance.edge_count(),
        rounds: instance.rounds,
        entries: solver.memo,
    })
}

pub fn opt_value(instance: &Instance, commit: bool) -> Result<f64> {
    Ok(build_dp(instance, commit)?.root_value())
}

/// Follows the table's argmax selections on one realization.
pub fn run_opt(instance: &Instance, sample: &SampleGraph, table: &DpValueTable) -> Result<Trace> {
    if table.edge_count != instance.edge_count() || table.rounds != instance.rounds {
        return Err(Error::MissingDpState);
    }
    let mut state = KnowledgeState::unknown(instance.edge_count());
    let mut builder = TraceBuilder::new(table.policy(), instance, sample);
    for t in 0..instance.rounds {
        let entry = table.get(&state, t).ok_or(Error::MissingDpState)?;
        builder.push(entry.action.clone());
        for &e in &entry.action {
            state.observe(e, sample.is_realized(e));
        }
    }
    Ok(builder.finish())
}

struct Solver<'a> {
    instance: &'a Instance,
    config: DpConfig,
    capacity: Vec<u32>,
    memo: HashMap<(u64, usize), DpEntry>,
}

impl Solver<'_> {
    fn value(&mut self, state: &KnowledgeState, t: usize) -> f64 {
        if t >= self.instance.rounds {
            return 0.0;
        }
        let key = (state.encode(), t);
        if let Some(entry) = self.memo.get(&key) {
            return entry.value;
        }
        let omega = self.instance.weights[t];
        let mut best: Option<DpEntry> = None;
        for action in self.actions(state) {
            let unknown: Vec<EdgeId> =
                action.iter().copied().filter(|&e| state.get(e) == EdgeStatus::Unknown).collect();
            let known = action.len() - unknown.len();
            let probs: Vec<f64> = unknown.iter().map(|&e| self.instance.edge(e).p).collect();
            let mut value = omega * (known as f64 + probs.iter().sum::<f64>());
            for mask in 0u64..(1u64 << unknown.len()) {
                let mut prob = 1.0;
                let mut next = state.clone();
                for (i, &e) in unknown.iter().enumerate() {
                    let ok = mask >> i & 1 == 1;
                    prob *= if ok { probs[i] } else { 1.0 - probs[i] };
                    next.observe(e, ok);
                }
                if prob > 0.0 {
                    value += prob * self.value(&next, t + 1);
                }
            }
            let better = match &best {
                None => true,
                Some(b) => value > b.value + 1e-12 * b.value.abs().max(1.0),
            };
            if better {
                best = Some(DpEntry { value, action });
            }
        }
        let entry = best.unwrap_or(DpEntry { value: 0.0, action: Vec::new() });
        let value = entry.value;
        self.memo.insert(key, entry);
        value
    }

    /// Candidate selections in lexicographic order. Known-failed and
    /// zero-probability edges are never useful.
    fn actions(&self, state: &KnowledgeState) -> Vec<Vec<EdgeId>> {
        let useful: Vec<EdgeId> = (0..self.instance.edge_count())
            .filter(|&e| match state.get(e) {
                EdgeStatus::Success => true,
                EdgeStatus::Unknown => self.instance.edge(e).p > 0.0,
                EdgeStatus::Fail => false,
            })
            .collect();
        let mut load = vec![0u32; self.capacity.len()];
        let mut required = Vec::new();
        if self.config.commit {
            for e in state.successes() {
                if self.fits(e, &load) {
                    self.add(e, &mut load, 1);
                    required.push(e);
                }
            }
        }
        let mut out = Vec::new();
        let mut current = required.clone();
        self.extend(&useful, 0, &mut current, &mut load, &required, &mut out);
        for a in &mut out {
            a.sort_unstable();
        }
        out.sort();
        out
    }

    fn extend(
        &self,
        useful: &[EdgeId],
        i: usize,
        current: &mut Vec<EdgeId>,
        load: &mut Vec<u32>,
        required: &[EdgeId],
        out: &mut Vec<Vec<EdgeId>>,
    ) {
        if i == useful.len() {
            let maximal = self.config.exhaustive
                || useful.iter().all(|&e| current.contains(&e) || !self.fits(e, load));
            if maximal {
                out.push(current.clone());
            }
            return;
        }
        let e = useful[i];
        if required.contains(&e) {
            self.extend(useful, i + 1, current, load, required, out);
            return;
        }
        if self.fits(e, load) {
            self.add(e, load, 1);
            current.push(e);
            self.extend(useful, i + 1, current, load, required, out);
            current.pop();
            self.add(e, load, -1);
        }
        self.extend(useful, i + 1, current, load, required, out);
    }

    fn fits(&self, e: EdgeId, load: &[u32]) -> bool {
        self.instance.edge(e).endpoints.iter().all(|&v| load[v] < self.capacity[v])
    }

    fn add(&self, e: EdgeId, load: &mut [u32], delta: i32) {
        for &v in &self.instance.edge(e).endpoints {
            load[v] = (load[v] as i32 + delta) as u32;
        }
    }
}
