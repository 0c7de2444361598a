//! Maximum-weight bipartite b-matching where one side has unit capacity,
//! reduced to a square assignment problem by splitting the other side into
//! capacity slots.

use super::{tie_tolerance, Candidate};
use crate::model::{EdgeId, VertexId};

struct Layout {
    weight: Vec<Vec<f64>>,
    edge: Vec<Vec<Option<EdgeId>>>,
}

fn layout(usable: &[&Candidate], residual: &[u32], unit_side: &[bool]) -> Layout {
    let orient = |c: &Candidate| -> (VertexId, VertexId) {
        let (a, b) = (c.endpoints[0], c.endpoints[1]);
        if unit_side[a] {
            (a, b)
        } else {
            (b, a)
        }
    };
    let live: Vec<&Candidate> = usable
        .iter()
        .copied()
        .filter(|c| c.weight > 0.0 && c.endpoints.iter().all(|&v| residual[v] > 0))
        .collect();
    let mut rows: Vec<VertexId> = live.iter().map(|c| orient(c).0).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut cols: Vec<VertexId> = live.iter().map(|c| orient(c).1).collect();
    cols.sort_unstable();
    cols.dedup();
    let mut slot_start = Vec::with_capacity(cols.len());
    let mut n_slots = 0;
    for &v in &cols {
        slot_start.push(n_slots);
        n_slots += residual[v] as usize;
    }
    let n = rows.len().max(n_slots);
    let mut weight = vec![vec![0.0; n]; n];
    let mut edge = vec![vec![None; n]; n];
    for c in live {
        let (r, s) = orient(c);
        let ri = rows.binary_search(&r).unwrap();
        let ci = cols.binary_search(&s).unwrap();
        for slot in slot_start[ci]..slot_start[ci] + residual[s] as usize {
            let better = match edge[ri][slot] {
                None => true,
                Some(_) => c.weight > weight[ri][slot],
            };
            if better {
                weight[ri][slot] = c.weight;
                edge[ri][slot] = Some(c.id);
            }
        }
    }
    Layout { weight, edge }
}

/// Hungarian method (shortest augmenting paths with potentials) on a square
/// profit matrix. Returns the column assigned to each row.
fn hungarian_max(profit: &[Vec<f64>]) -> Vec<usize> {
    let n = profit.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    let cost = |i: usize, j: usize| -profit[i - 1][j - 1];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

fn solve(usable: &[&Candidate], residual: &[u32], unit_side: &[bool]) -> (f64, Vec<EdgeId>) {
    let lay = layout(usable, residual, unit_side);
    let assign = hungarian_max(&lay.weight);
    let mut value = 0.0;
    let mut chosen = Vec::new();
    for (r, &c) in assign.iter().enumerate() {
        if let Some(e) = lay.edge[r][c] {
            value += lay.weight[r][c];
            chosen.push(e);
        }
    }
    (value, chosen)
}

/// Optimal value of the bipartite subproblem.
pub fn assignment_value(usable: &[&Candidate], residual: &[u32], unit_side: &[bool]) -> f64 {
    solve(usable, residual, unit_side).0
}

/// Lexicographically smallest optimal id set: walk edges in id order and keep
/// an edge whenever some optimum extends the choices made so far with it.
pub(super) fn lex_smallest_optimum(
    usable: &[&Candidate],
    residual: &[u32],
    unit_side: &[bool],
) -> Vec<EdgeId> {
    let mut pool: Vec<&Candidate> = usable.to_vec();
    pool.sort_by_key(|c| c.id);
    let (optimum, _) = solve(&pool, residual, unit_side);
    let tol = tie_tolerance(pool.iter().map(|c| c.weight).sum());
    let mut res = residual.to_vec();
    let mut fixed = Vec::new();
    let mut fixed_weight = 0.0;
    for (idx, c) in pool.iter().enumerate() {
        if !c.endpoints.iter().all(|&v| res[v] > 0) {
            continue;
        }
        let mut after = res.clone();
        for &v in &c.endpoints {
            after[v] -= 1;
        }
        let rest = assignment_value(&pool[idx + 1..], &after, unit_side);
        if fixed_weight + c.weight + rest >= optimum - tol {
            fixed_weight += c.weight;
            fixed.push(c.id);
            res = after;
        }
    }
    fixed
}
