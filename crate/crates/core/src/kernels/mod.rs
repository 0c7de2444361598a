//! Deterministic matching subroutines shared by the policies.
//!
//! Every kernel breaks ties the same way: larger weight first, then smaller
//! edge id. Exact solvers return the lexicographically smallest id set among
//! the optimal ones.

mod assignment;
mod exact;
mod halving;

pub use assignment::assignment_value;
pub use exact::branch_and_bound;
pub use halving::degree_halving_subgraph;

use crate::error::{Error, Result};
use crate::model::{EdgeId, Instance, VertexId};

/// Default cap on positive-weight candidates for exhaustive general matching.
pub const DEFAULT_EXACT_LIMIT: usize = 20;
/// Hard ceiling on the exact-search limit.
pub const MAX_EXACT_LIMIT: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: EdgeId,
    pub endpoints: Vec<VertexId>,
    pub weight: f64,
}

/// Edges available this round with their weights, plus the capacity each
/// vertex has left.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSubproblem {
    pub candidates: Vec<Candidate>,
    pub residual: Vec<u32>,
    pub blocked: Vec<EdgeId>,
}

impl WeightedSubproblem {
    /// `weights` is indexed by edge id; edges with `blocked[e]` are left out.
    pub fn new(instance: &Instance, weights: &[f64], residual: Vec<u32>, blocked: &[bool]) -> Self {
        let mut candidates = Vec::new();
        let mut blocked_ids = Vec::new();
        for e in &instance.edges {
            if blocked[e.id] {
                blocked_ids.push(e.id);
            } else {
                candidates.push(Candidate {
                    id: e.id,
                    endpoints: e.endpoints.clone(),
                    weight: weights[e.id],
                });
            }
        }
        WeightedSubproblem { candidates, residual, blocked: blocked_ids }
    }

    /// Candidates worth selecting: positive weight, every endpoint with room.
    pub fn usable(&self) -> Vec<&Candidate> {
        self.candidates
            .iter()
            .filter(|c| c.weight > 0.0 && c.endpoints.iter().all(|&v| self.residual[v] > 0))
            .collect()
    }

    fn total_weight(&self) -> f64 {
        self.usable().iter().map(|c| c.weight).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoundSelection {
    /// Sorted edge ids.
    pub chosen: Vec<EdgeId>,
    pub weight: f64,
}

impl RoundSelection {
    fn from_parts(mut chosen: Vec<EdgeId>, weight_of: impl Fn(EdgeId) -> f64) -> Self {
        chosen.sort_unstable();
        let weight = chosen.iter().map(|&e| weight_of(e)).sum();
        RoundSelection { chosen, weight }
    }
}

pub(crate) fn tie_tolerance(total: f64) -> f64 {
    1e-9 * total.max(1.0)
}

fn by_weight_then_id(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    b.weight.total_cmp(&a.weight).then(a.id.cmp(&b.id))
}

/// Repeatedly takes the heaviest positive-weight candidate whose endpoints
/// all have residual capacity.
pub fn greedy_matching(sub: &WeightedSubproblem) -> RoundSelection {
    let mut order: Vec<&Candidate> = sub.candidates.iter().filter(|c| c.weight > 0.0).collect();
    order.sort_by(|a, b| by_weight_then_id(a, b));
    let mut residual = sub.residual.clone();
    let mut chosen = Vec::new();
    let mut weight = 0.0;
    for c in order {
        if c.endpoints.iter().all(|&v| residual[v] > 0) {
            for &v in &c.endpoints {
                residual[v] -= 1;
            }
            chosen.push(c.id);
            weight += c.weight;
        }
    }
    chosen.sort_unstable();
    RoundSelection { chosen, weight }
}

/// Greedy over vertex-disjoint hyperedges. Residuals above 1 are treated as
/// 1, since a vertex joins at most one team.
pub fn greedy_hypergraph_matching(sub: &WeightedSubproblem) -> RoundSelection {
    let mut unit = sub.clone();
    for r in unit.residual.iter_mut() {
        *r = (*r).min(1);
    }
    greedy_matching(&unit)
}

/// Maximum-weight feasible selection. Bipartite subproblems where one side
/// has unit residuals go through the assignment solver; anything else is
/// searched exhaustively, which is limited to `exact_limit` usable edges.
pub fn max_weight_matching(sub: &WeightedSubproblem, exact_limit: usize) -> Result<RoundSelection> {
    let usable = sub.usable();
    if usable.is_empty() {
        return Ok(RoundSelection::default());
    }
    let weight_of = |id: EdgeId| {
        sub.candidates.iter().find(|c| c.id == id).map_or(0.0, |c| c.weight)
    };
    if let Some(unit_side) = unit_side_bipartition(&usable, &sub.residual) {
        let chosen = assignment::lex_smallest_optimum(&usable, &sub.residual, &unit_side);
        return Ok(RoundSelection::from_parts(chosen, weight_of));
    }
    let limit = exact_limit.min(MAX_EXACT_LIMIT);
    if usable.len() > limit {
        return Err(Error::LimitExceeded {
            what: "exact matching",
            actual: usable.len(),
            limit,
        });
    }
    let incumbent = greedy_matching(sub);
    let chosen = branch_and_bound(&usable, &sub.residual, incumbent.weight, sub.total_weight());
    Ok(RoundSelection::from_parts(chosen, weight_of))
}

/// Optimal weight only; skips the tie-breaking pass of [`max_weight_matching`].
pub fn max_weight_value(sub: &WeightedSubproblem, exact_limit: usize) -> Result<f64> {
    let usable = sub.usable();
    if usable.is_empty() {
        return Ok(0.0);
    }
    if let Some(unit_side) = unit_side_bipartition(&usable, &sub.residual) {
        return Ok(assignment_value(&usable, &sub.residual, &unit_side));
    }
    Ok(max_weight_matching(sub, exact_limit)?.weight)
}

/// Two-colours the candidate graph; per connected component picks a colour
/// class whose vertices all have residual 1. Returns the per-vertex flag
/// "on the unit side", or `None` if the graph is not bipartite or some
/// component has capacity above 1 on both sides.
fn unit_side_bipartition(usable: &[&Candidate], residual: &[u32]) -> Option<Vec<bool>> {
    if usable.iter().any(|c| c.endpoints.len() != 2) {
        return None;
    }
    let n = residual.len();
    let mut adj = vec![Vec::new(); n];
    for c in usable {
        adj[c.endpoints[0]].push(c.endpoints[1]);
        adj[c.endpoints[1]].push(c.endpoints[0]);
    }
    let mut colour: Vec<Option<bool>> = vec![None; n];
    let mut unit_side = vec![false; n];
    for start in 0..n {
        if colour[start].is_some() || adj[start].is_empty() {
            continue;
        }
        colour[start] = Some(false);
        let mut component = vec![start];
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            let cv = colour[v].unwrap();
            for &w in &adj[v] {
                match colour[w] {
                    None => {
                        colour[w] = Some(!cv);
                        component.push(w);
                        stack.push(w);
                    }
                    Some(cw) if cw == cv => return None,
                    Some(_) => {}
                }
            }
        }
        let side_is_unit =
            |side: bool| component.iter().filter(|&&v| colour[v] == Some(side)).all(|&v| residual[v] == 1);
        let side = if side_is_unit(false) {
            false
        } else if side_is_unit(true) {
            true
        } else {
            return None;
        };
        for &v in &component {
            unit_side[v] = colour[v] == Some(side);
        }
    }
    Some(unit_side)
}
