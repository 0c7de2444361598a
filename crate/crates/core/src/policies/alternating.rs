use super::PolicyId;
use crate::error::{Error, Result};
use crate::model::{EdgeId, Instance, SampleGraph, Trace, TraceBuilder, VertexId};

/// Shape of a G(n, ε) instance: a certain hub edge u1–v1 and n−1 leaves on
/// each side of it.
#[derive(Debug, Clone, PartialEq)]
pub struct GnepsLayout {
    pub n: usize,
    pub hub: EdgeId,
    pub u1: VertexId,
    pub v1: VertexId,
    /// (u1, v_{i+1}) for i = 1..n−1, in id order.
    pub u1_spokes: Vec<EdgeId>,
    /// (u_{i+1}, v1) for i = 1..n−1, in id order.
    pub v1_spokes: Vec<EdgeId>,
}

impl GnepsLayout {
    pub fn detect(instance: &Instance) -> Result<Self> {
        let reject = |why: &str| Err(Error::Unsupported(format!("not a G(n, eps) instance: {why}")));
        if instance.is_hypergraph() || !instance.is_unit_capacity() {
            return reject("needs a unit-capacity graph");
        }
        let hubs: Vec<&_> = instance.edges.iter().filter(|e| e.p == 1.0).collect();
        if hubs.len() != 1 {
            return reject("expected exactly one certain edge");
        }
        let hub = hubs[0];
        let (u1, v1) = (hub.endpoints[0], hub.endpoints[1]);
        let mut u1_spokes = Vec::new();
        let mut v1_spokes = Vec::new();
        let q = instance.edges.iter().find(|e| e.id != hub.id).map(|e| e.p);
        for e in instance.edges.iter().filter(|e| e.id != hub.id) {
            if Some(e.p) != q || e.p <= 0.0 || e.p >= 0.5 {
                return reject("spokes must share one probability in (0, 1/2)");
            }
            let (a, b) = (e.endpoints[0], e.endpoints[1]);
            let (centre, leaf) = match (a == u1 || a == v1, b == u1 || b == v1) {
                (true, false) => (a, b),
                (false, true) => (b, a),
                _ => return reject("each spoke touches exactly one hub endpoint"),
            };
            if instance.incident(leaf).len() != 1 {
                return reject("spoke leaves must have degree one");
            }
            if centre == u1 {
                u1_spokes.push(e.id);
            } else {
                v1_spokes.push(e.id);
            }
        }
        if u1_spokes.is_empty() || u1_spokes.len() != v1_spokes.len() {
            return reject("both hub endpoints need the same positive number of spokes");
        }
        Ok(GnepsLayout { n: u1_spokes.len() + 1, hub: hub.id, u1, v1, u1_spokes, v1_spokes })
    }

    fn scan_pair(&self, i: usize) -> Vec<EdgeId> {
        let i = i % (self.n - 1);
        vec![self.u1_spokes[i], self.v1_spokes[i]]
    }
}

/// Scans the cross pairs {(u1, v_{i+1}), (u_{i+1}, v1)} for the first n−1
/// rounds, then plays a discovered successful spoke on each side if it has
/// one, otherwise keeps scanning.
pub fn run_lemma3_alternating(instance: &Instance, sample: &SampleGraph) -> Result<Trace> {
    let layout = GnepsLayout::detect(instance)?;
    let mut seen = vec![false; instance.edge_count()];
    let mut builder = TraceBuilder::new(PolicyId::Lemma3Alternating, instance, sample);
    let found = |spokes: &[EdgeId], seen: &[bool]| {
        spokes.iter().copied().find(|&e| seen[e] && sample.is_realized(e))
    };
    for round in 0..instance.rounds {
        let selection = if round + 1 < layout.n {
            layout.scan_pair(round)
        } else {
            match (found(&layout.u1_spokes, &seen), found(&layout.v1_spokes, &seen)) {
                (Some(a), Some(b)) => vec![a, b],
                _ => layout.scan_pair(round),
            }
        };
        for &e in &selection {
            seen[e] = true;
        }
        builder.push(selection);
    }
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::tests::{expectation, general};

    fn gneps(n: usize, eps: f64) -> Instance {
        // u_i = i-1, v_i = n+i-1
        let mut edges = vec![(0, n, 1.0)];
        for i in 1..n {
            edges.push((0, n + i, 0.5 - eps));
            edges.push((i, n, 0.5 - eps));
        }
        general(2 * n, &edges, n * n)
    }

    #[test]
    fn detects_layout() {
        let l = GnepsLayout::detect(&gneps(4, 0.1)).unwrap();
        assert_eq!(l.n, 4);
        assert_eq!(l.u1_spokes, vec![1, 3, 5]);
        assert_eq!(l.v1_spokes, vec![2, 4, 6]);
    }

    #[test]
    fn rejects_other_graphs() {
        let inst = general(4, &[(0, 2, 0.7), (0, 3, 0.7), (1, 2, 0.7), (1, 3, 0.7)], 2);
        assert!(matches!(run_lemma3_alternating(&inst, &SampleGraph::new(vec![true; 4])), Err(Error::Unsupported(_))));
    }

    #[test]
    fn n2_cross_pair_probability() {
        let mut inst = gneps(2, 0.1);
        inst.rounds = 1;
        inst.weights = vec![1.0];
        let both = expectation(&inst, |g| {
            let t = run_lemma3_alternating(&inst, g).unwrap();
            if t.rounds[0].reward == 2 { 1.0 } else { 0.0 }
        });
        assert!((both - 0.4 * 0.4).abs() < 1e-12);
    }

    #[test]
    fn replays_discovered_pair() {
        let inst = gneps(3, 0.1);
        // spokes: 1=(u1,v2) 2=(u2,v1) 3=(u1,v3) 4=(u3,v1)
        let g = SampleGraph::new(vec![true, false, true, true, false]);
        let t = run_lemma3_alternating(&inst, &g).unwrap();
        assert_eq!(t.rounds[0].selection, vec![1, 2]);
        assert_eq!(t.rounds[1].selection, vec![3, 4]);
        assert_eq!(t.rounds[2].selection, vec![2, 3]);
        assert!(t.rounds[2..].iter().all(|r| r.reward == 2));
    }
}
