use crate::model::VertexId;

/// Picks a subgraph keeping at least a third of the total weight while every
/// vertex keeps at most ⌈d_v/2⌉ of its edges: repeatedly move the heaviest
/// remaining edge into the result, then drop one remaining edge at each of
/// its endpoints (the lowest-indexed one). Input is a multigraph given as
/// `(u, v, weight)` triples; the result lists indices into it, sorted.
pub fn degree_halving_subgraph(edges: &[(VertexId, VertexId, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&a, &b| edges[b].2.total_cmp(&edges[a].2).then(a.cmp(&b)));
    let mut alive = vec![true; edges.len()];
    let mut kept = Vec::new();
    for &e in &order {
        if !alive[e] {
            continue;
        }
        alive[e] = false;
        kept.push(e);
        let (u, v, _) = edges[e];
        for end in [u, v] {
            if let Some(drop) =
                (0..edges.len()).find(|&f| alive[f] && (edges[f].0 == end || edges[f].1 == end))
            {
                alive[drop] = false;
            }
        }
    }
    kept.sort_unstable();
    kept
}
