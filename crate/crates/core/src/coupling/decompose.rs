use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{EdgeId, Instance, Structure, Trace};

/// Split of OPT's round-t successes against an algorithm's committed
/// successes. Index `i` / `j` below are 0-based rounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    /// Horizon, 1-based.
    pub t: usize,
    /// Successful edges OPT selects in round t.
    pub opt_successful: Vec<EdgeId>,
    /// The algorithm's successful edges in round t.
    pub alg_successful: Vec<EdgeId>,
    /// `alg_new[j]`: successes the algorithm found for the first time in round j.
    pub alg_new: Vec<Vec<EdgeId>>,
    /// `aug[i]`: OPT edges vertex-disjoint from the algorithm, first selected in round i.
    pub aug: Vec<Vec<EdgeId>>,
    /// `adj[i][j]`: OPT edges first selected in round i touching `alg_new[j]`
    /// but no earlier `alg_new`.
    pub adj: Vec<Vec<Vec<EdgeId>>>,
}

impl Decomposition {
    pub fn aug_total(&self) -> usize {
        self.aug.iter().map(Vec::len).sum()
    }

    /// Σ_i |adj[i][j]|.
    pub fn adj_of(&self, j: usize) -> usize {
        self.adj.iter().map(|row| row[j].len()).sum()
    }

    pub fn adj_total(&self) -> usize {
        (0..self.t).map(|j| self.adj_of(j)).sum()
    }

    /// Every part, concatenated and sorted.
    pub fn union(&self) -> Vec<EdgeId> {
        let mut all: Vec<EdgeId> = self.aug.iter().flatten().copied().collect();
        all.extend(self.adj.iter().flatten().flatten().copied());
        all.sort_unstable();
        all
    }

    /// Parts are pairwise disjoint and cover `opt_successful` exactly.
    pub fn is_partition(&self) -> bool {
        let all = self.union();
        all.windows(2).all(|w| w[0] != w[1]) && all == self.opt_successful
    }
}

/// Capacitated split: O ∩ S, Occ (blocked by a heavily occupied endpoint),
/// and the remainder indexed by OPT's first selection round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacitatedDecomposition {
    pub t: usize,
    pub many_to_one: bool,
    pub opt_successful: Vec<EdgeId>,
    pub alg_successful: Vec<EdgeId>,
    pub alg_new: Vec<Vec<EdgeId>>,
    /// Always empty in the many-to-one split, where these edges sit in `occ`.
    pub both: Vec<EdgeId>,
    pub occ: Vec<EdgeId>,
    pub rem: Vec<Vec<EdgeId>>,
}

impl CapacitatedDecomposition {
    pub fn union(&self) -> Vec<EdgeId> {
        let mut all = self.both.clone();
        all.extend(&self.occ);
        all.extend(self.rem.iter().flatten());
        all.sort_unstable();
        all
    }

    pub fn is_partition(&self) -> bool {
        let all = self.union();
        all.windows(2).all(|w| w[0] != w[1]) && all == self.opt_successful
    }
}

struct Common {
    opt_successful: Vec<EdgeId>,
    alg_successful: Vec<EdgeId>,
    alg_new: Vec<Vec<EdgeId>>,
    first: Vec<Option<usize>>,
}

fn common(instance: &Instance, alg: &Trace, opt: &Trace, t: usize) -> Result<Common> {
    if alg.sample_fingerprint != opt.sample_fingerprint {
        return Err(Error::SampleMismatch);
    }
    if t == 0 || t > alg.rounds.len() || t > opt.rounds.len() {
        return Err(Error::Domain(format!("horizon {t} outside 1..={}", alg.rounds.len().min(opt.rounds.len()))));
    }
    let alg_new: Vec<Vec<EdgeId>> = alg.rounds[..t].iter().map(|r| r.new_successes.clone()).collect();
    let alg_successful = alg.rounds[t - 1].successful.clone();
    let mut union: Vec<EdgeId> = alg_new.iter().flatten().copied().collect();
    union.sort_unstable();
    if union != alg_successful {
        return Err(Error::Domain("algorithm trace does not keep its successes".into()));
    }
    Ok(Common {
        opt_successful: opt.rounds[t - 1].successful.clone(),
        alg_successful,
        alg_new,
        first: opt.first_selection(instance.edge_count()),
    })
}

fn touches_any(instance: &Instance, e: EdgeId, set: &[EdgeId]) -> bool {
    set.iter().any(|&f| instance.edge(e).shares_vertex(instance.edge(f)))
}

/// Unit-capacity split of OPT's round-t successes into Aug and Adj parts.
pub fn decompose(instance: &Instance, alg: &Trace, opt: &Trace, t: usize) -> Result<Decomposition> {
    if !instance.is_unit_capacity() {
        return Err(Error::Unsupported("decompose needs unit capacities".into()));
    }
    let c = common(instance, alg, opt, t)?;
    let mut aug = vec![Vec::new(); t];
    let mut adj = vec![vec![Vec::new(); t]; t];
    for &e in &c.opt_successful {
        let i = c.first[e].expect("successful OPT edge was selected");
        match (0..t).find(|&j| touches_any(instance, e, &c.alg_new[j])) {
            Some(j) => adj[i][j].push(e),
            None => aug[i].push(e),
        }
    }
    Ok(Decomposition {
        t,
        opt_successful: c.opt_successful,
        alg_successful: c.alg_successful,
        alg_new: c.alg_new,
        aug,
        adj,
    })
}

/// Occ/Rem split for capacitated graphs. Many-to-one instances use the
/// left-endpoint rule; everything else the half-capacity rule alone.
pub fn decompose_capacitated(
    instance: &Instance,
    alg: &Trace,
    opt: &Trace,
    t: usize,
) -> Result<CapacitatedDecomposition> {
    if instance.is_hypergraph() {
        return Err(Error::Unsupported("capacitated split on hypergraphs".into()));
    }
    let many_to_one = matches!(instance.structure, Structure::ManyToOne { .. });
    let c = common(instance, alg, opt, t)?;
    let mut degree = vec![0u32; instance.vertex_count()];
    for &e in &c.alg_successful {
        for &v in &instance.edge(e).endpoints {
            degree[v] += 1;
        }
    }
    let heavy = |v: usize| 2 * degree[v] >= instance.capacity(v);
    let mut both = Vec::new();
    let mut occ = Vec::new();
    let mut rem = vec![Vec::new(); t];
    for &e in &c.opt_successful {
        let ends = &instance.edge(e).endpoints;
        let in_alg = c.alg_successful.binary_search(&e).is_ok();
        let blocked = if many_to_one {
            ends.iter().any(|&v| if instance.is_left(v) { degree[v] > 0 } else { heavy(v) })
        } else {
            ends.iter().any(|&v| heavy(v))
        };
        if in_alg && !many_to_one {
            both.push(e);
        } else if blocked || in_alg {
            occ.push(e);
        } else {
            rem[c.first[e].expect("successful OPT edge was selected")].push(e);
        }
    }
    Ok(CapacitatedDecomposition {
        t,
        many_to_one,
        opt_successful: c.opt_successful,
        alg_successful: c.alg_successful,
        alg_new: c.alg_new,
        both,
        occ,
        rem,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, SampleGraph, TraceBuilder, Vertex};
    use crate::policies::PolicyId;

    fn graph(n: usize, caps: &[u32], edges: &[(usize, usize)], rounds: usize, structure: Structure) -> Instance {
        let vertices = (0..n).map(|id| Vertex { id, capacity: caps.get(id).copied().unwrap_or(1) }).collect();
        let edges = edges
            .iter()
            .enumerate()
            .map(|(id, &(a, b))| Edge { id, endpoints: vec![a, b], p: 0.5 })
            .collect();
        Instance::new(vertices, edges, rounds, vec![1.0; rounds], structure).unwrap()
    }

    fn trace(inst: &Instance, g: &SampleGraph, policy: PolicyId, rounds: &[&[usize]]) -> Trace {
        let mut b = TraceBuilder::new(policy, inst, g);
        for r in rounds {
            b.push(r.to_vec());
        }
        b.finish()
    }

    #[test]
    fn empty_opt_gives_empty_parts() {
        let inst = graph(2, &[], &[(0, 1)], 1, Structure::General);
        let g = SampleGraph::new(vec![false]);
        let opt = trace(&inst, &g, PolicyId::OptExact, &[&[0]]);
        let alg = trace(&inst, &g, PolicyId::Sm, &[&[0]]);
        let d = decompose(&inst, &alg, &opt, 1).unwrap();
        assert!(d.union().is_empty());
        assert!(d.is_partition());
    }

    #[test]
    fn no_alg_successes_puts_everything_in_aug() {
        // path a-b-c-d: edges ab=0, bc=1, cd=2
        let inst = graph(4, &[], &[(0, 1), (1, 2), (2, 3)], 2, Structure::General);
        let g = SampleGraph::new(vec![true, false, true]);
        let opt = trace(&inst, &g, PolicyId::OptExact, &[&[0], &[0, 2]]);
        let alg = trace(&inst, &g, PolicyId::Sm, &[&[1], &[]]);
        let d = decompose(&inst, &alg, &opt, 2).unwrap();
        assert_eq!(d.aug, vec![vec![0], vec![2]]);
        assert_eq!(d.adj_total(), 0);
        assert!(d.is_partition());
    }

    #[test]
    fn adjacent_edge_lands_in_adj() {
        // OPT holds ab (first selected round 1), alg finds bc in round 2
        let inst = graph(4, &[], &[(0, 1), (1, 2), (2, 3)], 2, Structure::General);
        let g = SampleGraph::new(vec![true, true, true]);
        let opt = trace(&inst, &g, PolicyId::OptExact, &[&[0, 2], &[0, 2]]);
        let alg = trace(&inst, &g, PolicyId::Sm, &[&[], &[1]]);
        let d = decompose(&inst, &alg, &opt, 2).unwrap();
        assert_eq!(d.adj[0][1], vec![0, 2]);
        assert_eq!(d.adj_of(1), 2);
        assert_eq!(d.aug_total(), 0);
        assert!(d.is_partition());
    }

    #[test]
    fn smallest_j_wins() {
        // star centre 0; alg gets 0-1 in round 1, opt plays 0-2
        let inst = graph(3, &[], &[(0, 1), (0, 2)], 2, Structure::General);
        let g = SampleGraph::new(vec![true, true]);
        let opt = trace(&inst, &g, PolicyId::OptExact, &[&[1], &[1]]);
        let alg = trace(&inst, &g, PolicyId::Sm, &[&[0], &[0]]);
        let d = decompose(&inst, &alg, &opt, 2).unwrap();
        assert_eq!(d.adj[0][0], vec![1]);
    }

    #[test]
    fn mismatched_samples_are_rejected() {
        let inst = graph(2, &[], &[(0, 1)], 1, Structure::General);
        let g1 = SampleGraph::new(vec![true]);
        let g2 = SampleGraph::new(vec![false]);
        let opt = trace(&inst, &g1, PolicyId::OptExact, &[&[0]]);
        let alg = trace(&inst, &g2, PolicyId::Sm, &[&[0]]);
        assert_eq!(decompose(&inst, &alg, &opt, 1), Err(Error::SampleMismatch));
    }

    #[test]
    fn half_full_vertex_occupies() {
        // vertex 0 has capacity 2; alg holds 0-1, opt holds 0-2
        let inst = graph(3, &[2, 1, 1], &[(0, 1), (0, 2)], 1, Structure::General);
        let g = SampleGraph::new(vec![true, true]);
        let opt = trace(&inst, &g, PolicyId::OptExact, &[&[1]]);
        let alg = trace(&inst, &g, PolicyId::Sm, &[&[0]]);
        let d = decompose_capacitated(&inst, &alg, &opt, 1).unwrap();
        assert_eq!(d.occ, vec![1]);
        assert!(d.is_partition());
    }

    #[test]
    fn unit_capacities_match_adjacency() {
        let inst = graph(4, &[], &[(0, 1), (1, 2), (2, 3)], 1, Structure::General);
        let g = SampleGraph::new(vec![true, true, true]);
        let opt = trace(&inst, &g, PolicyId::OptExact, &[&[0, 2]]);
        let alg = trace(&inst, &g, PolicyId::Sm, &[&[1]]);
        let cap = decompose_capacitated(&inst, &alg, &opt, 1).unwrap();
        let unit = decompose(&inst, &alg, &opt, 1).unwrap();
        assert_eq!(cap.occ.len(), unit.adj_total());
        assert_eq!(cap.rem.iter().map(Vec::len).sum::<usize>(), unit.aug_total());
    }

    #[test]
    fn many_to_one_keeps_shared_edges_in_occ() {
        // left {0,1}, right {2} with capacity 2
        let inst = graph(3, &[1, 1, 2], &[(0, 2), (1, 2)], 1, Structure::ManyToOne { left: vec![0, 1] });
        let g = SampleGraph::new(vec![true, true]);
        let opt = trace(&inst, &g, PolicyId::OptExact, &[&[0, 1]]);
        let alg = trace(&inst, &g, PolicyId::Sm, &[&[0]]);
        let d = decompose_capacitated(&inst, &alg, &opt, 1).unwrap();
        assert!(d.both.is_empty());
        assert_eq!(d.occ, vec![0, 1]);
        assert!(d.is_partition());
    }
}
