use super::{tie_tolerance, Candidate};
use crate::model::EdgeId;

/// Exhaustive include-first search over `usable` (in id order) with a
/// suffix-sum bound. Include-first visits lexicographically smaller id sets
/// first, so keeping only strict improvements yields the lexicographically
/// smallest optimum. `incumbent` is a known achievable weight (greedy).
pub fn branch_and_bound(
    usable: &[&Candidate],
    residual: &[u32],
    incumbent: f64,
    total: f64,
) -> Vec<EdgeId> {
    let mut order: Vec<&Candidate> = usable.to_vec();
    order.sort_by_key(|c| c.id);
    let mut suffix = vec![0.0; order.len() + 1];
    for i in (0..order.len()).rev() {
        suffix[i] = suffix[i + 1] + order[i].weight;
    }
    let tol = tie_tolerance(total);
    let mut search = Search {
        order: &order,
        suffix: &suffix,
        tol,
        best_weight: incumbent - 2.0 * tol,
        best: Vec::new(),
        residual: residual.to_vec(),
        chosen: Vec::new(),
    };
    search.dfs(0, 0.0);
    search.best
}

struct Search<'a> {
    order: &'a [&'a Candidate],
    suffix: &'a [f64],
    tol: f64,
    best_weight: f64,
    best: Vec<EdgeId>,
    residual: Vec<u32>,
    chosen: Vec<EdgeId>,
}

impl Search<'_> {
    fn dfs(&mut self, idx: usize, weight: f64) {
        if weight + self.suffix[idx] <= self.best_weight + self.tol {
            return;
        }
        if idx == self.order.len() {
            self.best_weight = weight;
            self.best = self.chosen.clone();
            return;
        }
        let c = self.order[idx];
        if c.endpoints.iter().all(|&v| self.residual[v] > 0) {
            for &v in &c.endpoints {
                self.residual[v] -= 1;
            }
            self.chosen.push(c.id);
            self.dfs(idx + 1, weight + c.weight);
            self.chosen.pop();
            for &v in &c.endpoints {
                self.residual[v] += 1;
            }
        }
        self.dfs(idx + 1, weight);
    }
}
