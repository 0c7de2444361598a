//! Problem instances, sample graphs, knowledge states, and execution traces.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policies::PolicyId;
use crate::rng;

pub type VertexId = usize;
pub type EdgeId = usize;

/// Default cap on the number of edges for exhaustive sample enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 16;
/// Hard ceiling for the enumeration limit, whatever the caller asks for.
pub const MAX_ENUMERATION_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub endpoints: Vec<VertexId>,
    pub p: f64,
}

impl Edge {
    pub fn touches(&self, v: VertexId) -> bool {
        self.endpoints.contains(&v)
    }

    pub fn shares_vertex(&self, other: &Edge) -> bool {
        self.endpoints.iter().any(|v| other.endpoints.contains(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    /// Pairwise edges, arbitrary capacities.
    General,
    /// Bipartite; every left vertex has capacity 1, right vertices any capacity.
    ManyToOne { left: Vec<VertexId> },
    /// Teams: hyperedges of size 2..=k, every vertex in at most one chosen team.
    Hypergraph { k: usize },
}

/// A validated problem instance. Vertex and edge ids are dense and equal to
/// their position in `vertices` / `edges`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub rounds: usize,
    pub weights: Vec<f64>,
    pub structure: Structure,
    incident: Vec<Vec<EdgeId>>,
    is_left: Vec<bool>,
}

/// On-disk JSON layout of an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub rounds: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default = "default_structure")]
    pub structure: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<Vec<VertexId>>,
}

fn default_structure() -> String {
    "general".to_string()
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(raw: InstanceFile) -> Result<Self> {
        let structure = match raw.structure.as_str() {
            "general" => Structure::General,
            "many_to_one" => Structure::ManyToOne {
                left: raw.left.ok_or_else(|| {
                    Error::InvalidInstance("many_to_one requires a \"left\" list".into())
                })?,
            },
            "hypergraph" => Structure::Hypergraph {
                k: raw.k.ok_or_else(|| {
                    Error::InvalidInstance("hypergraph requires \"k\"".into())
                })?,
            },
            other => {
                return Err(Error::InvalidInstance(format!("unknown structure {other:?}")))
            }
        };
        let weights = raw.weights.unwrap_or_else(|| vec![1.0; raw.rounds]);
        Instance::new(raw.vertices, raw.edges, raw.rounds, weights, structure)
    }
}

impl From<Instance> for InstanceFile {
    fn from(inst: Instance) -> Self {
        let (structure, k, left) = match inst.structure {
            Structure::General => ("general", None, None),
            Structure::ManyToOne { left } => ("many_to_one", None, Some(left)),
            Structure::Hypergraph { k } => ("hypergraph", Some(k), None),
        };
        InstanceFile {
            vertices: inst.vertices,
            edges: inst.edges,
            rounds: inst.rounds,
            weights: Some(inst.weights),
            structure: structure.to_string(),
            k,
            left,
        }
    }
}

impl Instance {
    /// Validates and builds an instance. Vertices and edges may be given in
    /// any order; they are sorted by id and ids must then be dense.
    pub fn new(
        mut vertices: Vec<Vertex>,
        mut edges: Vec<Edge>,
        rounds: usize,
        weights: Vec<f64>,
        structure: Structure,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        vertices.sort_by_key(|v| v.id);
        edges.sort_by_key(|e| e.id);
        for (i, v) in vertices.iter().enumerate() {
            if v.id != i {
                return bad(format!("vertex ids must be dense 0..{}", vertices.len()));
            }
            if v.capacity == 0 {
                return bad(format!("vertex {} has capacity 0", v.id));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e.id != i {
                return bad(format!("edge ids must be unique and dense 0..{}", edges.len()));
            }
            if !(e.p.is_finite() && (0.0..=1.0).contains(&e.p)) {
                return bad(format!("edge {} has probability {} outside [0,1]", e.id, e.p));
            }
            let mut seen = BTreeSet::new();
            for &v in &e.endpoints {
                if v >= vertices.len() {
                    return bad(format!("edge {} references unknown vertex {v}", e.id));
                }
                if !seen.insert(v) {
                    return bad(format!("edge {} repeats vertex {v}", e.id));
                }
            }
        }
        if rounds == 0 {
            return bad("rounds must be positive".into());
        }
        if weights.len() != rounds {
            return bad(format!("{} weights for {rounds} rounds", weights.len()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("round weights must be finite and non-negative".into());
        }

        let mut is_left = vec![false; vertices.len()];
        match &structure {
            Structure::General => {
                if let Some(e) = edges.iter().find(|e| e.endpoints.len() != 2) {
                    return bad(format!("edge {} must have exactly 2 endpoints", e.id));
                }
            }
            Structure::ManyToOne { left } => {
                for &v in left {
                    if v >= vertices.len() {
                        return bad(format!("left vertex {v} is not declared"));
                    }
                    is_left[v] = true;
                    if vertices[v].capacity != 1 {
                        return bad(format!("left vertex {v} must have capacity 1"));
                    }
                }
                for e in &edges {
                    if e.endpoints.len() != 2
                        || is_left[e.endpoints[0]] == is_left[e.endpoints[1]]
                    {
                        return bad(format!("edge {} must join a left and a right vertex", e.id));
                    }
                }
            }
            Structure::Hypergraph { k } => {
                if *k < 2 {
                    return bad("hypergraph k must be at least 2".into());
                }
                if let Some(e) = edges
                    .iter()
                    .find(|e| e.endpoints.len() < 2 || e.endpoints.len() > *k)
                {
                    return bad(format!("hyperedge {} must have 2..={k} endpoints", e.id));
                }
            }
        }

        let mut incident = vec![Vec::new(); vertices.len()];
        for e in &edges {
            for &v in &e.endpoints {
                incident[v].push(e.id);
            }
        }
        Ok(Instance { vertices, edges, rounds, weights, structure, incident, is_left })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v]
    }

    pub fn is_left(&self, v: VertexId) -> bool {
        self.is_left[v]
    }

    /// Capacity as used by feasibility: teams are exclusive, so hypergraph
    /// vertices behave as capacity 1.
    pub fn capacity(&self, v: VertexId) -> u32 {
        match self.structure {
            Structure::Hypergraph { .. } => 1,
            _ => self.vertices[v].capacity,
        }
    }

    pub fn capacities(&self) -> Vec<u32> {
        (0..self.vertex_count()).map(|v| self.capacity(v)).collect()
    }

    pub fn is_unit_capacity(&self) -> bool {
        (0..self.vertex_count()).all(|v| self.capacity(v) == 1)
    }

    pub fn is_hypergraph(&self) -> bool {
        matches!(self.structure, Structure::Hypergraph { .. })
    }

    /// Largest hyperedge size; 2 for pairwise structures.
    pub fn max_edge_size(&self) -> usize {
        match self.structure {
            Structure::Hypergraph { k } => k,
            _ => 2,
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.p).collect()
    }
}

/// One realization of every edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleGraph {
    pub realized: Vec<bool>,
}

impl SampleGraph {
    pub fn new(realized: Vec<bool>) -> Self {
        SampleGraph { realized }
    }

    pub fn from_mask(mask: u64, m: usize) -> Self {
        SampleGraph { realized: (0..m).map(|e| mask >> e & 1 == 1).collect() }
    }

    pub fn is_realized(&self, e: EdgeId) -> bool {
        self.realized[e]
    }

    pub fn len(&self) -> usize {
        self.realized.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realized.is_empty()
    }

    /// FNV-1a over the realization bits; used to detect traces produced on
    /// different samples.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &b in &self.realized {
            h ^= b as u64 + 1;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^ self.realized.len() as u64
    }

    /// Probability of this realization under the instance.
    pub fn probability(&self, instance: &Instance) -> f64 {
        instance
            .edges
            .iter()
            .zip(&self.realized)
            .map(|(e, &x)| if x { e.p } else { 1.0 - e.p })
            .product()
    }
}

/// Draws every edge independently with its probability.
pub fn sample(instance: &Instance, seed: u64) -> SampleGraph {
    let mut rng = rng::rng_from_seed(seed);
    let realized = instance
        .edges
        .iter()
        .map(|e| rng::unit_f64(&mut rng) < e.p)
        .collect();
    SampleGraph { realized }
}

/// All `2^m` sample graphs with their probabilities, in mask order (bit `e`
/// of the mask is edge `e`). Zero-probability graphs are included.
pub fn enumerate_samples(
    instance: &Instance,
    limit: usize,
) -> Result<impl Iterator<Item = (SampleGraph, f64)> + '_> {
    let limit = limit.min(MAX_ENUMERATION_LIMIT);
    let m = instance.edge_count();
    if m > limit {
        return Err(Error::LimitExceeded { what: "enumeration", actual: m, limit });
    }
    Ok((0..1u64 << m).map(move |mask| {
        let g = SampleGraph::from_mask(mask, m);
        let p = g.probability(instance);
        (g, p)
    }))
}

/// True iff the chosen edges respect every vertex capacity (pairwise
/// structures) or are pairwise vertex-disjoint (hypergraphs). Repeated ids
/// make a selection infeasible.
pub fn feasible(instance: &Instance, selection: &[EdgeId]) -> Result<bool> {
    let mut load = vec![0u32; instance.vertex_count()];
    let mut seen = BTreeSet::new();
    for &e in selection {
        if e >= instance.edge_count() {
            return Err(Error::UnknownEdge(e));
        }
        if !seen.insert(e) {
            return Ok(false);
        }
        for &v in &instance.edges[e].endpoints {
            load[v] += 1;
        }
    }
    Ok(load.iter().enumerate().all(|(v, &l)| l <= instance.capacity(v)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeStatus {
    Unknown,
    Success,
    Fail,
}

impl EdgeStatus {
    fn digit(self) -> u64 {
        match self {
            EdgeStatus::Unknown => 0,
            EdgeStatus::Success => 1,
            EdgeStatus::Fail => 2,
        }
    }
}

/// What a policy has learned so far about each edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KnowledgeState {
    pub status: Vec<EdgeStatus>,
}

impl KnowledgeState {
    pub fn unknown(m: usize) -> Self {
        KnowledgeState { status: vec![EdgeStatus::Unknown; m] }
    }

    /// Base-3 code, digit `e` for edge `e`. Unique for up to 40 edges.
    pub fn encode(&self) -> u64 {
        self.status.iter().rev().fold(0u64, |acc, s| acc * 3 + s.digit())
    }

    pub fn decode(mut code: u64, m: usize) -> Self {
        let status = (0..m)
            .map(|_| {
                let d = code % 3;
                code /= 3;
                match d {
                    0 => EdgeStatus::Unknown,
                    1 => EdgeStatus::Success,
                    _ => EdgeStatus::Fail,
                }
            })
            .collect();
        KnowledgeState { status }
    }

    pub fn observe(&mut self, e: EdgeId, success: bool) {
        self.status[e] = if success { EdgeStatus::Success } else { EdgeStatus::Fail };
    }

    pub fn get(&self, e: EdgeId) -> EdgeStatus {
        self.status[e]
    }

    pub fn successes(&self) -> Vec<EdgeId> {
        self.edges_with(EdgeStatus::Success)
    }

    pub fn edges_with(&self, s: EdgeStatus) -> Vec<EdgeId> {
        (0..self.status.len()).filter(|&e| self.status[e] == s).collect()
    }

    /// True when every resolved edge agrees with `sample`.
    pub fn consistent_with(&self, sample: &SampleGraph) -> bool {
        self.status.iter().zip(&sample.realized).all(|(s, &x)| match s {
            EdgeStatus::Unknown => true,
            EdgeStatus::Success => x,
            EdgeStatus::Fail => !x,
        })
    }
}

/// One round of a policy execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// Edges played this round, sorted.
    pub selection: Vec<EdgeId>,
    /// Played edges that are realized (the round's successful set).
    pub successful: Vec<EdgeId>,
    /// Successful edges played for the first time this round.
    pub new_successes: Vec<EdgeId>,
    pub reward: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub policy: PolicyId,
    pub rounds: Vec<RoundRecord>,
    pub total_weighted_reward: f64,
    pub sample_fingerprint: u64,
}

impl Trace {
    /// Round index (0-based) in which each edge was first played.
    pub fn first_selection(&self, m: usize) -> Vec<Option<usize>> {
        let mut first = vec![None; m];
        for (r, rec) in self.rounds.iter().enumerate() {
            for &e in &rec.selection {
                first[e].get_or_insert(r);
            }
        }
        first
    }

    pub fn round_rewards(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.reward).collect()
    }
}

/// Accumulates a trace round by round against a fixed sample.
#[derive(Debug)]
pub struct TraceBuilder<'a> {
    instance: &'a Instance,
    sample: &'a SampleGraph,
    played: Vec<bool>,
    trace: Trace,
}

impl<'a> TraceBuilder<'a> {
    pub fn new(policy: PolicyId, instance: &'a Instance, sample: &'a SampleGraph) -> Self {
        TraceBuilder {
            instance,
            sample,
            played: vec![false; instance.edge_count()],
            trace: Trace {
                policy,
                rounds: Vec::with_capacity(instance.rounds),
                total_weighted_reward: 0.0,
                sample_fingerprint: sample.fingerprint(),
            },
        }
    }

    /// Records a round and returns the realized subset of the selection.
    pub fn push(&mut self, mut selection: Vec<EdgeId>) -> Vec<EdgeId> {
        selection.sort_unstable();
        selection.dedup();
        debug_assert!(feasible(self.instance, &selection).unwrap_or(false));
        let successful: Vec<EdgeId> =
            selection.iter().copied().filter(|&e| self.sample.realized[e]).collect();
        let new_successes =
            successful.iter().copied().filter(|&e| !self.played[e]).collect();
        for &e in &selection {
            self.played[e] = true;
        }
        let round = self.trace.rounds.len();
        let reward = successful.len();
        self.trace.total_weighted_reward += self.instance.weights[round] * reward as f64;
        self.trace.rounds.push(RoundRecord {
            selection,
            successful: successful.clone(),
            new_successes,
            reward,
        });
        successful
    }

    pub fn finish(self) -> Trace {
        self.trace
    }
}

/// Σ_t ω_t · (successful count in round t).
pub fn weighted_reward(trace: &Trace, weights: &[f64]) -> Result<f64> {
    if trace.rounds.len() != weights.len() {
        return Err(Error::LengthMismatch { trace: trace.rounds.len(), weights: weights.len() });
    }
    Ok(trace
        .rounds
        .iter()
        .zip(weights)
        .map(|(r, w)| w * r.reward as f64)
        .sum())
}
