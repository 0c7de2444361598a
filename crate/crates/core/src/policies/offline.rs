use super::PolicyId;
use crate::error::Result;
use crate::kernels::{self, WeightedSubproblem};
use crate::model::{Instance, SampleGraph, Trace, TraceBuilder};

fn realized_subproblem(instance: &Instance, sample: &SampleGraph) -> WeightedSubproblem {
    let weights: Vec<f64> =
        (0..instance.edge_count()).map(|e| if sample.is_realized(e) { 1.0 } else { 0.0 }).collect();
    let blocked: Vec<bool> = weights.iter().map(|&w| w == 0.0).collect();
    WeightedSubproblem::new(instance, &weights, instance.capacities(), &blocked)
}

/// Size of the largest feasible selection among realized edges.
pub fn offline_max_matching(instance: &Instance, sample: &SampleGraph, exact_limit: usize) -> Result<usize> {
    let value = kernels::max_weight_value(&realized_subproblem(instance, sample), exact_limit)?;
    Ok(value.round() as usize)
}

/// The clairvoyant benchmark: plays one maximum realized selection every round.
pub fn run_offline(instance: &Instance, sample: &SampleGraph, exact_limit: usize) -> Result<Trace> {
    let chosen = kernels::max_weight_matching(&realized_subproblem(instance, sample), exact_limit)?.chosen;
    let mut builder = TraceBuilder::new(PolicyId::OfflineMax, instance, sample);
    for _ in 0..instance.rounds {
        builder.push(chosen.clone());
    }
    Ok(builder.finish())
}
