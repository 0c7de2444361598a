use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decompose::{decompose, decompose_capacitated, CapacitatedDecomposition, Decomposition};
use crate::error::{Error, Result};
use crate::kernels::DEFAULT_EXACT_LIMIT;
use crate::lp::{u_closed_form, LpVariant};
use crate::model::{self, enumerate_samples, Instance, SampleGraph, Structure, Trace, DEFAULT_ENUMERATION_LIMIT};
use crate::policies::{self, build_dp_with, DpConfig, DpValueTable, PolicyId, DEFAULT_DP_LIMIT};
use crate::rng::mix;

/// Standard errors a Monte Carlo mean difference may exceed zero by before
/// it counts as a violation.
pub const CONFIDENCE_MULTIPLIER: f64 = 4.0;
/// Absolute slack for exact expectations.
pub const EXACT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    /// 2·E[S_i] ≥ E[Aug_i] for SM.
    Domination,
    /// E[Aug_i] + Σ_{q≥j} E[Adj_i(S_q)] ≤ 2·E[S_j] for SM.
    RefinedDomination,
    /// The same with factor 1 for Greedy-Commit.
    GreedyCommitDomination,
    /// E[Aug_i] ≤ E[A_i] for Greedy-Commit.
    WarmupDomination,
    /// Per sample: Σ_i |Adj_i(S_j)| ≤ 2|S_j| for SM.
    Charging,
    /// Per sample: Σ_i |Adj_i| ≤ 2|A_{≤t}| for Greedy-Commit.
    WarmupCharging,
    /// Per sample: the decomposition parts partition O_{≤t} exactly.
    Partition,
    /// Per sample: |Occ| ≤ 4|S_{≤t}|.
    CapacitatedCharging,
    /// E[Rem_i] ≤ 6·E[S_i].
    CapacitatedDomination,
    /// Per sample: |Occ| ≤ 3|S_{≤t}| with the left-endpoint rule.
    ManyToOneCharging,
    /// E[Rem_i] ≤ 4·E[S_i] with the left-endpoint rule.
    ManyToOneDomination,
    /// Per sample: Σ_i |Adj_i(S_j)| ≤ k|S_j|.
    HypergraphCharging,
    /// E[Aug_i] ≤ k·E[S_i].
    HypergraphDomination,
    /// E[O_{≤t}] ≤ 2·E[S^A_{≤t}] for the OPT-copying algorithm.
    AlgorithmACoupling,
    /// E[O_{≤t}] ≤ 3·E[A_{≤t}] for Greedy-Commit.
    WarmupBound,
    /// E[O_{≤t}] ≤ u_SM(t)·E[S_{≤t}].
    SmRoundBound,
    /// E[O_{≤t}] ≤ u_GC(t)·E[A_{≤t}].
    GreedyCommitRoundBound,
    /// E[O_{≤t}] ≤ 11·E[S_{≤t}] with capacities.
    CapacitatedRoundBound,
    /// E[O_{≤t}] ≤ 7·E[S_{≤t}] for many-to-one.
    ManyToOneRoundBound,
    /// E[O_{≤t}] ≤ 2k·E[S_{≤t}] on hypergraphs.
    HypergraphRoundBound,
}

impl LemmaId {
    pub const ALL: [LemmaId; 20] = [
        LemmaId::Domination,
        LemmaId::RefinedDomination,
        LemmaId::GreedyCommitDomination,
        LemmaId::WarmupDomination,
        LemmaId::Charging,
        LemmaId::WarmupCharging,
        LemmaId::Partition,
        LemmaId::CapacitatedCharging,
        LemmaId::CapacitatedDomination,
        LemmaId::ManyToOneCharging,
        LemmaId::ManyToOneDomination,
        LemmaId::HypergraphCharging,
        LemmaId::HypergraphDomination,
        LemmaId::AlgorithmACoupling,
        LemmaId::WarmupBound,
        LemmaId::SmRoundBound,
        LemmaId::GreedyCommitRoundBound,
        LemmaId::CapacitatedRoundBound,
        LemmaId::ManyToOneRoundBound,
        LemmaId::HypergraphRoundBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Domination => "domination",
            LemmaId::RefinedDomination => "refined_domination",
            LemmaId::GreedyCommitDomination => "greedy_commit_domination",
            LemmaId::WarmupDomination => "warmup_domination",
            LemmaId::Charging => "charging",
            LemmaId::WarmupCharging => "warmup_charging",
            LemmaId::Partition => "partition",
            LemmaId::CapacitatedCharging => "capacitated_charging",
            LemmaId::CapacitatedDomination => "capacitated_domination",
            LemmaId::ManyToOneCharging => "many_to_one_charging",
            LemmaId::ManyToOneDomination => "many_to_one_domination",
            LemmaId::HypergraphCharging => "hypergraph_charging",
            LemmaId::HypergraphDomination => "hypergraph_domination",
            LemmaId::AlgorithmACoupling => "algorithm_a_coupling",
            LemmaId::WarmupBound => "warmup_bound",
            LemmaId::SmRoundBound => "sm_round_bound",
            LemmaId::GreedyCommitRoundBound => "greedy_commit_round_bound",
            LemmaId::CapacitatedRoundBound => "capacitated_round_bound",
            LemmaId::ManyToOneRoundBound => "many_to_one_round_bound",
            LemmaId::HypergraphRoundBound => "hypergraph_round_bound",
        }
    }

    /// Combinatorial statements checked on every sample graph.
    pub fn per_sample(self) -> bool {
        matches!(
            self,
            LemmaId::Charging
                | LemmaId::WarmupCharging
                | LemmaId::Partition
                | LemmaId::CapacitatedCharging
                | LemmaId::ManyToOneCharging
                | LemmaId::HypergraphCharging
        )
    }

    /// Lemmas that make sense for this instance's structure.
    pub fn applicable(instance: &Instance) -> Vec<LemmaId> {
        LemmaId::ALL.into_iter().filter(|l| l.check_applicable(instance).is_ok()).collect()
    }

    fn check_applicable(self, instance: &Instance) -> Result<()> {
        let unit_graph = instance.is_unit_capacity() && !instance.is_hypergraph();
        let ok = match self {
            LemmaId::Domination
            | LemmaId::RefinedDomination
            | LemmaId::GreedyCommitDomination
            | LemmaId::WarmupDomination
            | LemmaId::Charging
            | LemmaId::WarmupCharging
            | LemmaId::WarmupBound
            | LemmaId::SmRoundBound
            | LemmaId::GreedyCommitRoundBound => unit_graph,
            LemmaId::Partition => true,
            LemmaId::AlgorithmACoupling => instance.is_unit_capacity(),
            LemmaId::CapacitatedCharging
            | LemmaId::CapacitatedDomination
            | LemmaId::CapacitatedRoundBound => matches!(instance.structure, Structure::General),
            LemmaId::ManyToOneCharging | LemmaId::ManyToOneDomination | LemmaId::ManyToOneRoundBound => {
                matches!(instance.structure, Structure::ManyToOne { .. })
            }
            LemmaId::HypergraphCharging | LemmaId::HypergraphDomination | LemmaId::HypergraphRoundBound => {
                instance.is_unit_capacity()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("{} does not apply to this instance", self.name())))
        }
    }

    fn needs(self) -> (bool, bool, bool) {
        use LemmaId::*;
        let gc = matches!(self, GreedyCommitDomination | WarmupDomination | WarmupCharging | WarmupBound | GreedyCommitRoundBound);
        let a = self == AlgorithmACoupling;
        (!gc && !a, gc, a)
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_").to_ascii_lowercase();
        LemmaId::ALL
            .into_iter()
            .find(|l| l.name() == norm)
            .ok_or_else(|| Error::Domain(format!("unknown lemma {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

impl Mode {
    fn label(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::MonteCarlo { .. } => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
}

/// Outcome of checking one lemma at one horizon. `rhs` already includes
/// the lemma's factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    pub mode: &'static str,
    pub t: usize,
    pub factor: f64,
    pub per_sample: bool,
    pub indices: Vec<Vec<usize>>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence_multiplier: Option<f64>,
    pub samples: usize,
    pub violations: usize,
    pub verdict: Verdict,
}

impl LemmaReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Policy playing OPT's role; any deterministic online policy works.
    pub reference: PolicyId,
    pub enumeration_limit: usize,
    pub dp_limit: usize,
    pub exact_limit: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            reference: PolicyId::OptExact,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
            dp_limit: DEFAULT_DP_LIMIT,
            exact_limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

/// Traces of every policy a lemma may need, on one sample graph.
struct Coupled {
    opt: Trace,
    sm: Option<Trace>,
    gc: Option<Trace>,
    a: Option<Trace>,
}

struct Row {
    indices: Vec<usize>,
    lhs: f64,
    rhs: f64,
}

fn rows(lemma: LemmaId, instance: &Instance, c: &Coupled, t: usize) -> Result<Vec<Row>> {
    let row = |indices: Vec<usize>, lhs: usize, rhs: usize| Row { indices, lhs: lhs as f64, rhs: rhs as f64 };
    let sm = || c.sm.as_ref().expect("sm trace");
    let gc = || c.gc.as_ref().expect("gc trace");
    let unit = |alg: &Trace| decompose(instance, alg, &c.opt, t);
    let cap = |alg: &Trace| decompose_capacitated(instance, alg, &c.opt, t);
    let aug_vs_new = |d: &Decomposition| -> Vec<Row> {
        (0..t).map(|i| row(vec![i + 1], d.aug[i].len(), d.alg_new[i].len())).collect()
    };
    let refined = |d: &Decomposition| -> Vec<Row> {
        let mut out = Vec::with_capacity(t * t);
        for i in 0..t {
            for j in 0..t {
                let lhs = d.aug[i].len() + (j..t).map(|q| d.adj[i][q].len()).sum::<usize>();
                out.push(row(vec![i + 1, j + 1], lhs, d.alg_new[j].len()));
            }
        }
        out
    };
    let charge = |d: &Decomposition| -> Vec<Row> {
        (0..t).map(|j| row(vec![j + 1], d.adj_of(j), d.alg_new[j].len())).collect()
    };
    let rem = |d: &CapacitatedDecomposition| -> Vec<Row> {
        (0..t).map(|i| row(vec![i + 1], d.rem[i].len(), d.alg_new[i].len())).collect()
    };
    let ratio = |alg: &Trace| vec![row(vec![t], c.opt.rounds[t - 1].reward, alg.rounds[t - 1].reward)];
    Ok(match lemma {
        LemmaId::Domination | LemmaId::HypergraphDomination => aug_vs_new(&unit(sm())?),
        LemmaId::WarmupDomination => aug_vs_new(&unit(gc())?),
        LemmaId::RefinedDomination => refined(&unit(sm())?),
        LemmaId::GreedyCommitDomination => refined(&unit(gc())?),
        LemmaId::Charging | LemmaId::HypergraphCharging => charge(&unit(sm())?),
        LemmaId::WarmupCharging => {
            let d = unit(gc())?;
            vec![row(vec![t], d.adj_total(), d.alg_successful.len())]
        }
        LemmaId::Partition => {
            // index 0: SM, 1: Greedy-Commit; second index 0: unit split, 1: capacitated split
            let mut out = Vec::new();
            for (k, alg) in [c.sm.as_ref(), c.gc.as_ref()].into_iter().enumerate() {
                let Some(alg) = alg else { continue };
                if instance.is_unit_capacity() {
                    out.push(row(vec![k, 0], usize::from(!unit(alg)?.is_partition()), 0));
                }
                if !instance.is_hypergraph() {
                    out.push(row(vec![k, 1], usize::from(!cap(alg)?.is_partition()), 0));
                }
            }
            out
        }
        LemmaId::CapacitatedCharging | LemmaId::ManyToOneCharging => {
            let d = cap(sm())?;
            vec![row(vec![t], d.occ.len(), d.alg_successful.len())]
        }
        LemmaId::CapacitatedDomination | LemmaId::ManyToOneDomination => rem(&cap(sm())?),
        LemmaId::AlgorithmACoupling => ratio(c.a.as_ref().expect("algorithm A trace")),
        LemmaId::WarmupBound | LemmaId::GreedyCommitRoundBound => ratio(gc()),
        LemmaId::SmRoundBound
        | LemmaId::CapacitatedRoundBound
        | LemmaId::ManyToOneRoundBound
        | LemmaId::HypergraphRoundBound => ratio(sm()),
    })
}

fn factor(lemma: LemmaId, instance: &Instance, t: usize) -> Result<f64> {
    let k = match instance.structure {
        Structure::Hypergraph { k } => k as f64,
        _ => 2.0,
    };
    Ok(match lemma {
        LemmaId::Domination | LemmaId::RefinedDomination | LemmaId::Charging => 2.0,
        LemmaId::WarmupCharging | LemmaId::AlgorithmACoupling => 2.0,
        LemmaId::GreedyCommitDomination | LemmaId::WarmupDomination => 1.0,
        LemmaId::Partition => 1.0,
        LemmaId::CapacitatedCharging => 4.0,
        LemmaId::CapacitatedDomination => 6.0,
        LemmaId::ManyToOneCharging => 3.0,
        LemmaId::ManyToOneDomination => 4.0,
        LemmaId::HypergraphCharging | LemmaId::HypergraphDomination => k,
        LemmaId::WarmupBound => 3.0,
        LemmaId::SmRoundBound => u_closed_form(t, LpVariant::SmVsOpt)?,
        LemmaId::GreedyCommitRoundBound => u_closed_form(t, LpVariant::GreedyCommitVsOpt)?,
        LemmaId::CapacitatedRoundBound => 11.0,
        LemmaId::ManyToOneRoundBound => 7.0,
        LemmaId::HypergraphRoundBound => 2.0 * k,
    })
}

/// Per (lemma, horizon) running sums over samples.
#[derive(Clone)]
struct Acc {
    indices: Vec<Vec<usize>>,
    weight: f64,
    lhs: Vec<f64>,
    rhs: Vec<f64>,
    d: Vec<f64>,
    d2: Vec<f64>,
    samples: usize,
    sample_violations: usize,
}

impl Acc {
    fn new() -> Self {
        Acc { indices: Vec::new(), weight: 0.0, lhs: Vec::new(), rhs: Vec::new(), d: Vec::new(), d2: Vec::new(), samples: 0, sample_violations: 0 }
    }

    fn add(&mut self, w: f64, rows: &[Row], factor: f64) {
        if self.indices.is_empty() {
            self.indices = rows.iter().map(|r| r.indices.clone()).collect();
            let n = rows.len();
            self.lhs = vec![0.0; n];
            self.rhs = vec![0.0; n];
            self.d = vec![0.0; n];
            self.d2 = vec![0.0; n];
        }
        self.weight += w;
        self.samples += 1;
        for (k, r) in rows.iter().enumerate() {
            let d = r.lhs - factor * r.rhs;
            self.lhs[k] += w * r.lhs;
            self.rhs[k] += w * r.rhs;
            self.d[k] += w * d;
            self.d2[k] += w * d * d;
            if d > 1e-12 {
                self.sample_violations += 1;
            }
        }
    }

    fn report(&self, lemma: LemmaId, mode: Mode, t: usize, factor: f64) -> LemmaReport {
        let per_sample = lemma.per_sample();
        let n = self.samples as f64;
        let (lhs, rhs): (Vec<f64>, Vec<f64>) = match mode {
            Mode::Exact => (self.lhs.clone(), self.rhs.iter().map(|r| factor * r).collect()),
            Mode::MonteCarlo { .. } => (
                self.lhs.iter().map(|x| x / n).collect(),
                self.rhs.iter().map(|x| factor * x / n).collect(),
            ),
        };
        let stderr: Option<Vec<f64>> = match mode {
            Mode::Exact => None,
            Mode::MonteCarlo { .. } => Some(
                (0..self.d.len())
                    .map(|k| {
                        if self.samples < 2 {
                            return 0.0;
                        }
                        let mean = self.d[k] / n;
                        let var = ((self.d2[k] - n * mean * mean) / (n - 1.0)).max(0.0);
                        (var / n).sqrt()
                    })
                    .collect(),
            ),
        };
        let violations = if per_sample {
            self.sample_violations
        } else {
            (0..lhs.len())
                .filter(|&k| match &stderr {
                    None => lhs[k] > rhs[k] + EXACT_TOLERANCE,
                    Some(se) => lhs[k] - rhs[k] > CONFIDENCE_MULTIPLIER * se[k] + 1e-12,
                })
                .count()
        };
        LemmaReport {
            lemma,
            mode: mode.label(),
            t,
            factor,
            per_sample,
            indices: self.indices.clone(),
            lhs,
            rhs,
            confidence_multiplier: stderr.as_ref().map(|_| CONFIDENCE_MULTIPLIER),
            stderr,
            samples: self.samples,
            violations,
            verdict: if violations == 0 { Verdict::Holds } else { Verdict::Violated },
        }
    }
}

/// Reference table for the policy standing in for OPT.
pub fn reference_table(instance: &Instance, options: &VerifyOptions) -> Result<DpValueTable> {
    let commit = match options.reference {
        PolicyId::OptExact => false,
        PolicyId::OptCommitExact => true,
        other => return Err(Error::Unsupported(format!("{other} cannot stand in for OPT"))),
    };
    build_dp_with(instance, DpConfig { limit: options.dp_limit, ..DpConfig::new(commit) })
}

/// Checks several lemmas at several horizons, running every policy once
/// per sample graph.
pub fn verify_many(
    instance: &Instance,
    lemmas: &[LemmaId],
    horizons: &[usize],
    mode: Mode,
    options: &VerifyOptions,
) -> Result<Vec<LemmaReport>> {
    for &l in lemmas {
        l.check_applicable(instance)?;
    }
    for &t in horizons {
        if t == 0 || t > instance.rounds {
            return Err(Error::Domain(format!("horizon {t} outside 1..={}", instance.rounds)));
        }
    }
    let factors: Vec<Vec<f64>> = lemmas
        .iter()
        .map(|&l| horizons.iter().map(|&t| factor(l, instance, t)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let table = reference_table(instance, options)?;
    let (need_sm, need_gc, need_a) = lemmas.iter().fold((false, false, false), |acc, l| {
        let n = l.needs();
        let partition = *l == LemmaId::Partition;
        (acc.0 || n.0 || partition, acc.1 || n.1 || (partition && !instance.is_hypergraph()), acc.2 || n.2)
    });
    let evaluate = |g: &SampleGraph| -> Result<Vec<Vec<Vec<Row>>>> {
        let opt = policies::run_opt(instance, g, &table)?;
        let coupled = Coupled {
            sm: need_sm.then(|| policies::run_sm(instance, g)),
            gc: if need_gc { Some(policies::run_greedy_commit_with(instance, g, options.exact_limit)?) } else { None },
            a: if need_a { Some(policies::run_algorithm_a(instance, g, &opt)?) } else { None },
            opt,
        };
        lemmas
            .iter()
            .map(|&l| horizons.iter().map(|&t| rows(l, instance, &coupled, t)).collect())
            .collect()
    };
    let samples: Vec<(SampleGraph, f64)> = match mode {
        Mode::Exact => enumerate_samples(instance, options.enumeration_limit)?
            .filter(|(_, p)| *p > 0.0)
            .collect(),
        Mode::MonteCarlo { trials, seed } => (0..trials)
            .into_par_iter()
            .map(|i| (model::sample(instance, mix(seed, i as u64)), 1.0))
            .collect(),
    };
    let evaluated: Vec<Vec<Vec<Vec<Row>>>> =
        samples.par_iter().map(|(g, _)| evaluate(g)).collect::<Result<_>>()?;
    let mut accs = vec![vec![Acc::new(); horizons.len()]; lemmas.len()];
    for ((_, w), per_lemma) in samples.iter().zip(&evaluated) {
        for (l, per_t) in per_lemma.iter().enumerate() {
            for (h, rows) in per_t.iter().enumerate() {
                accs[l][h].add(*w, rows, factors[l][h]);
            }
        }
    }
    let mut out = Vec::new();
    for (l, &lemma) in lemmas.iter().enumerate() {
        for (h, &t) in horizons.iter().enumerate() {
            out.push(accs[l][h].report(lemma, mode, t, factors[l][h]));
        }
    }
    Ok(out)
}

pub fn verify(instance: &Instance, lemma: LemmaId, t: usize, mode: Mode) -> Result<LemmaReport> {
    Ok(verify_many(instance, &[lemma], &[t], mode, &VerifyOptions::default())?.remove(0))
}

/// The charging statement that fits the instance's structure.
pub fn verify_charging(instance: &Instance, t: usize, mode: Mode) -> Result<LemmaReport> {
    let lemma = match instance.structure {
        Structure::Hypergraph { .. } => LemmaId::HypergraphCharging,
        Structure::ManyToOne { .. } => LemmaId::ManyToOneCharging,
        Structure::General if instance.is_unit_capacity() => LemmaId::Charging,
        Structure::General => LemmaId::CapacitatedCharging,
    };
    verify(instance, lemma, t, mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominationVariant {
    Basic,
    Refined,
    GreedyCommit,
    Warmup,
    Capacitated,
    ManyToOne,
    Hypergraph,
}

pub fn verify_domination(instance: &Instance, t: usize, variant: DominationVariant, mode: Mode) -> Result<LemmaReport> {
    let lemma = match variant {
        DominationVariant::Basic => LemmaId::Domination,
        DominationVariant::Refined => LemmaId::RefinedDomination,
        DominationVariant::GreedyCommit => LemmaId::GreedyCommitDomination,
        DominationVariant::Warmup => LemmaId::WarmupDomination,
        DominationVariant::Capacitated => LemmaId::CapacitatedDomination,
        DominationVariant::ManyToOne => LemmaId::ManyToOneDomination,
        DominationVariant::Hypergraph => LemmaId::HypergraphDomination,
    };
    verify(instance, lemma, t, mode)
}

/// Exact expectations feeding the factor-revealing LP: E[Aug_i],
/// E[Adj_i(S_j)], E[S_j] and E[O_{≤t}] for SM or Greedy-Commit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingProfile {
    pub t: usize,
    pub aug: Vec<f64>,
    pub adj: Vec<Vec<f64>>,
    pub new: Vec<f64>,
    pub opt: f64,
    pub alg: f64,
}

pub fn exact_profile(instance: &Instance, t: usize, alg: PolicyId, options: &VerifyOptions) -> Result<CouplingProfile> {
    if instance.is_hypergraph() || !instance.is_unit_capacity() {
        return Err(Error::Unsupported("profiles need a unit-capacity graph".into()));
    }
    if t == 0 || t > instance.rounds {
        return Err(Error::Domain(format!("horizon {t} outside 1..={}", instance.rounds)));
    }
    let table = reference_table(instance, options)?;
    let mut p = CouplingProfile { t, aug: vec![0.0; t], adj: vec![vec![0.0; t]; t], new: vec![0.0; t], opt: 0.0, alg: 0.0 };
    for (g, w) in enumerate_samples(instance, options.enumeration_limit)? {
        if w == 0.0 {
            continue;
        }
        let opt = policies::run_opt(instance, &g, &table)?;
        let trace = match alg {
            PolicyId::Sm => policies::run_sm(instance, &g),
            PolicyId::GreedyCommit => policies::run_greedy_commit_with(instance, &g, options.exact_limit)?,
            other => return Err(Error::Unsupported(format!("no profile for {other}"))),
        };
        let d = decompose(instance, &trace, &opt, t)?;
        for i in 0..t {
            p.aug[i] += w * d.aug[i].len() as f64;
            p.new[i] += w * d.alg_new[i].len() as f64;
            for j in 0..t {
                p.adj[i][j] += w * d.adj[i][j].len() as f64;
            }
        }
        p.opt += w * d.opt_successful.len() as f64;
        p.alg += w * d.alg_successful.len() as f64;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, Vertex};
    use crate::policies::tests::general;

    fn k22() -> Instance {
        general(4, &[(0, 2, 0.7), (0, 3, 0.7), (1, 2, 0.7), (1, 3, 0.7)], 2)
    }

    #[test]
    fn unit_lemmas_hold_on_separation_instance() {
        let inst = k22();
        let lemmas = LemmaId::applicable(&inst);
        assert!(lemmas.contains(&LemmaId::RefinedDomination));
        let reports = verify_many(&inst, &lemmas, &[1, 2], Mode::Exact, &VerifyOptions::default()).unwrap();
        for r in &reports {
            assert!(r.holds(), "{}", r.to_json());
            assert!(r.stderr.is_none());
        }
    }

    #[test]
    fn algorithm_a_coupling_exact() {
        let r = verify(&k22(), LemmaId::AlgorithmACoupling, 2, Mode::Exact).unwrap();
        assert!(r.holds());
        assert!(r.lhs[0] <= r.rhs[0] + 1e-9);
    }

    #[test]
    fn identical_policies_leave_slack() {
        // a single edge: SM and OPT coincide
        let inst = general(2, &[(0, 1, 0.4)], 2);
        let r = verify_charging(&inst, 2, Mode::Exact).unwrap();
        assert!(r.holds());
        // the shared edge touches itself, so it is charged once to itself
        assert!((r.lhs[0] - 0.4).abs() < 1e-12);
        assert!(r.lhs.iter().zip(&r.rhs).all(|(l, r)| l <= r));
    }

    #[test]
    fn charging_tight_on_star() {
        // SM grabs the certain middle edge 1-2, OPT plays 0-1 and 2-3; when
        // both outer edges realize, the one SM edge carries two charges
        let inst = general(4, &[(0, 1, 0.9), (1, 2, 1.0), (2, 3, 0.9)], 1);
        let opts = VerifyOptions::default();
        let r = verify_many(&inst, &[LemmaId::Charging], &[1], Mode::Exact, &opts).unwrap().remove(0);
        assert!((r.lhs[0] - 1.8).abs() < 1e-12);
        assert_eq!(r.rhs, vec![2.0]);
        assert!(r.holds());
        let all = SampleGraph::new(vec![true; 3]);
        let table = reference_table(&inst, &opts).unwrap();
        let opt = policies::run_opt(&inst, &all, &table).unwrap();
        let d = decompose(&inst, &policies::run_sm(&inst, &all), &opt, 1).unwrap();
        assert_eq!(d.adj_of(0), 2 * d.alg_new[0].len());
    }

    #[test]
    fn deterministic_world_domination() {
        let inst = general(4, &[(0, 1, 1.0), (1, 2, 0.0), (2, 3, 1.0)], 2);
        for v in [DominationVariant::Basic, DominationVariant::Refined, DominationVariant::GreedyCommit, DominationVariant::Warmup] {
            assert!(verify_domination(&inst, 2, v, Mode::Exact).unwrap().holds());
        }
    }

    #[test]
    fn first_round_greedy_commit_equality() {
        let inst = general(4, &[(0, 1, 0.6), (1, 2, 0.9), (2, 3, 0.6)], 1);
        // both play {0, 2}; every OPT success is shared, so it sits in Adj_1(S_1)
        let r = verify_domination(&inst, 1, DominationVariant::GreedyCommit, Mode::Exact).unwrap();
        assert_eq!(r.indices[0], vec![1, 1]);
        assert!((r.lhs[0] - 1.2).abs() < 1e-12);
        assert!((r.lhs[0] - r.rhs[0]).abs() < 1e-12);
        let w = verify_domination(&inst, 1, DominationVariant::Warmup, Mode::Exact).unwrap();
        assert_eq!(w.lhs[0], 0.0);
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let inst = k22();
        let opts = VerifyOptions::default();
        let exact = verify_many(&inst, &[LemmaId::Domination], &[2], Mode::Exact, &opts).unwrap().remove(0);
        let mc = verify_many(&inst, &[LemmaId::Domination], &[2], Mode::MonteCarlo { trials: 4000, seed: 7 }, &opts)
            .unwrap()
            .remove(0);
        assert!(mc.holds());
        let se = mc.stderr.as_ref().unwrap();
        assert_eq!(mc.confidence_multiplier, Some(CONFIDENCE_MULTIPLIER));
        for (k, se) in se.iter().enumerate() {
            let d_exact = exact.lhs[k] - exact.rhs[k];
            let d_mc = mc.lhs[k] - mc.rhs[k];
            assert!((d_exact - d_mc).abs() <= 4.0 * se + 1e-9);
        }
    }

    #[test]
    fn inapplicable_lemma_is_reported() {
        let vertices = (0..3).map(|id| Vertex { id, capacity: 2 }).collect();
        let edges = vec![Edge { id: 0, endpoints: vec![0, 1], p: 0.5 }, Edge { id: 1, endpoints: vec![1, 2], p: 0.5 }];
        let inst = Instance::new(vertices, edges, 1, vec![1.0], Structure::General).unwrap();
        assert!(matches!(verify(&inst, LemmaId::Domination, 1, Mode::Exact), Err(Error::Unsupported(_))));
        assert!(verify_charging(&inst, 1, Mode::Exact).unwrap().holds());
    }

    #[test]
    fn report_json_shape() {
        let r = verify(&k22(), LemmaId::Domination, 1, Mode::Exact).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["lemma", "mode", "indices", "lhs", "rhs", "verdict"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v.get("stderr").is_none());
        assert_eq!(v["lemma"], "domination");
    }

    #[test]
    fn lemma_names_parse() {
        for l in LemmaId::ALL {
            assert_eq!(l.name().parse::<LemmaId>().unwrap(), l);
        }
    }
}
