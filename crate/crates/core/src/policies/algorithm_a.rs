use super::PolicyId;
use crate::error::{Error, Result};
use crate::model::{Instance, SampleGraph, Trace, TraceBuilder};

/// In round i plays its own committed successes plus every edge OPT selects
/// for the first time in round i that is vertex-disjoint from them.
pub fn run_algorithm_a(instance: &Instance, sample: &SampleGraph, opt_trace: &Trace) -> Result<Trace> {
    if opt_trace.sample_fingerprint != sample.fingerprint() || opt_trace.rounds.len() != instance.rounds {
        return Err(Error::SampleMismatch);
    }
    if !instance.is_unit_capacity() {
        return Err(Error::Unsupported("algorithm A needs unit capacities".into()));
    }
    let first = opt_trace.first_selection(instance.edge_count());
    let mut used = vec![false; instance.vertex_count()];
    let mut committed: Vec<usize> = Vec::new();
    let mut builder = TraceBuilder::new(PolicyId::AlgorithmA, instance, sample);
    for (round, rec) in opt_trace.rounds.iter().enumerate() {
        let fresh: Vec<usize> = rec
            .selection
            .iter()
            .copied()
            .filter(|&e| first[e] == Some(round))
            .filter(|&e| instance.edge(e).endpoints.iter().all(|&v| !used[v]))
            .collect();
        let mut selection = committed.clone();
        selection.extend_from_slice(&fresh);
        builder.push(selection);
        for e in fresh.into_iter().filter(|&e| sample.is_realized(e)) {
            for &v in &instance.edge(e).endpoints {
                used[v] = true;
            }
            committed.push(e);
        }
    }
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::tests::{expectation, general};
    use crate::policies::{build_dp, run_opt};

    #[test]
    fn no_opt_successes_means_zero() {
        let inst = general(4, &[(0, 2, 0.7), (0, 3, 0.7), (1, 2, 0.7), (1, 3, 0.7)], 2);
        let table = build_dp(&inst, false).unwrap();
        let g = SampleGraph::new(vec![false; 4]);
        let opt = run_opt(&inst, &g, &table).unwrap();
        assert_eq!(run_algorithm_a(&inst, &g, &opt).unwrap().total_weighted_reward, 0.0);
    }

    #[test]
    fn single_edge_matches_opt() {
        let inst = general(2, &[(0, 1, 0.6)], 3);
        let table = build_dp(&inst, false).unwrap();
        for g in [SampleGraph::new(vec![true]), SampleGraph::new(vec![false])] {
            let opt = run_opt(&inst, &g, &table).unwrap();
            let a = run_algorithm_a(&inst, &g, &opt).unwrap();
            let sel = |t: &Trace| t.rounds.iter().map(|r| r.selection.clone()).collect::<Vec<_>>();
            assert_eq!(sel(&a)[0], sel(&opt)[0]);
            assert_eq!(a.total_weighted_reward, opt.total_weighted_reward);
        }
    }

    #[test]
    fn half_of_opt_on_separation_instance() {
        let inst = general(4, &[(0, 2, 0.7), (0, 3, 0.7), (1, 2, 0.7), (1, 3, 0.7)], 2);
        let table = build_dp(&inst, false).unwrap();
        let opt = expectation(&inst, |g| run_opt(&inst, g, &table).unwrap().total_weighted_reward);
        let a = expectation(&inst, |g| {
            let o = run_opt(&inst, g, &table).unwrap();
            run_algorithm_a(&inst, g, &o).unwrap().total_weighted_reward
        });
        assert!(opt <= 2.0 * a + 1e-9);
    }

    #[test]
    fn rejects_foreign_trace() {
        let inst = general(2, &[(0, 1, 0.6)], 1);
        let table = build_dp(&inst, false).unwrap();
        let opt = run_opt(&inst, &SampleGraph::new(vec![true]), &table).unwrap();
        let err = run_algorithm_a(&inst, &SampleGraph::new(vec![false]), &opt);
        assert_eq!(err, Err(Error::SampleMismatch));
    }
}
