//! Named experiment bundles. Each produces JSON lines (keys sorted, so the
//! bytes depend only on the configuration) and a pass flag.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::generators::{gen_gneps, gen_knn, gen_random, gen_separation, Profile};
use super::montecarlo::{monte_carlo_with, Limits};
use crate::coupling::{verify_many, LemmaId, LemmaReport, Mode, VerifyOptions};
use crate::error::{Error, Result};
use crate::kernels::{self, Candidate, WeightedSubproblem};
use crate::lp::{
    approximation_factor, build_primal, dual_certificate, u_closed_form, u_limit, verify_dual_feasible,
    CertificateForm, LpVariant,
};
use crate::model::{Instance, KnowledgeState};
use crate::policies::{build_dp_with, DpConfig, PolicyId};
use crate::rng::{mix, rng_from_seed};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bundle {
    Lp,
    Lemmas,
    Generalized,
    Ratios,
    Separation,
    UpperBound,
    Offline,
    Kernels,
}

impl Bundle {
    pub const ALL: [Bundle; 8] = [
        Bundle::Lp,
        Bundle::Lemmas,
        Bundle::Generalized,
        Bundle::Ratios,
        Bundle::Separation,
        Bundle::UpperBound,
        Bundle::Offline,
        Bundle::Kernels,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Bundle::Lp => "lp",
            Bundle::Lemmas => "lemmas",
            Bundle::Generalized => "generalized",
            Bundle::Ratios => "ratios",
            Bundle::Separation => "separation",
            Bundle::UpperBound => "upper-bound",
            Bundle::Offline => "offline",
            Bundle::Kernels => "kernels",
        }
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Bundle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace('_', "-");
        Bundle::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown bundle {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReproduceConfig {
    pub seed: u64,
    pub limits: Limits,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        ReproduceConfig { seed: DEFAULT_SEED, limits: Limits::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleResult {
    pub bundle: Bundle,
    pub lines: Vec<String>,
    pub pass: bool,
}

impl BundleResult {
    /// The lines joined with trailing newlines.
    pub fn render(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

/// Accumulates check lines; `info` lines are reported but never fail the bundle.
struct Out {
    bundle: Bundle,
    lines: Vec<String>,
    pass: bool,
}

impl Out {
    fn new(bundle: Bundle) -> Self {
        Out { bundle, lines: Vec::new(), pass: true }
    }

    fn push(&mut self, check: &str, pass: bool, mut fields: Value) {
        self.pass &= pass;
        let obj = fields.as_object_mut().expect("object");
        obj.insert("bundle".into(), json!(self.bundle.name()));
        obj.insert("check".into(), json!(check));
        obj.insert("pass".into(), json!(pass));
        self.lines.push(fields.to_string());
    }

    fn info(&mut self, check: &str, mut fields: Value) {
        let obj = fields.as_object_mut().expect("object");
        obj.insert("bundle".into(), json!(self.bundle.name()));
        obj.insert("check".into(), json!(check));
        obj.insert("informational".into(), json!(true));
        self.lines.push(fields.to_string());
    }

    fn finish(mut self) -> BundleResult {
        self.lines.push(json!({"bundle": self.bundle.name(), "summary": true, "pass": self.pass}).to_string());
        BundleResult { bundle: self.bundle, lines: self.lines, pass: self.pass }
    }
}

pub fn reproduce(bundle: Bundle, config: &ReproduceConfig) -> Result<BundleResult> {
    config.limits.validate()?;
    match bundle {
        Bundle::Lp => lp_bundle(),
        Bundle::Lemmas => lemma_bundle(config),
        Bundle::Generalized => generalized_bundle(config),
        Bundle::Ratios => ratio_bundle(config),
        Bundle::Separation => separation_bundle(config),
        Bundle::UpperBound => upper_bound_bundle(config),
        Bundle::Offline => offline_bundle(config),
        Bundle::Kernels => kernel_bundle(config),
    }
}

pub fn reproduce_all(config: &ReproduceConfig) -> Result<Vec<BundleResult>> {
    Bundle::ALL.iter().map(|&b| reproduce(b, config)).collect()
}

// ---------------------------------------------------------------- lp

/// Horizons checked per variant and the smallest acceptable 1/u(t).
fn lp_plan() -> [(LpVariant, std::ops::RangeInclusive<usize>, f64); 2] {
    [(LpVariant::SmVsOpt, 2..=8, 0.316), (LpVariant::GreedyCommitVsOpt, 3..=8, 0.43)]
}

fn lp_bundle() -> Result<BundleResult> {
    let mut out = Out::new(Bundle::Lp);
    for (variant, range, min_factor) in lp_plan() {
        for t in range {
            let primal = build_primal(t, variant)?.solve()?.objective;
            let u = u_closed_form(t, variant)?;
            let factor = approximation_factor(t, variant)?;
            let cert = dual_certificate(t, variant, CertificateForm::FiniteHorizon)?;
            let check = verify_dual_feasible(&cert, t, variant);
            let pass = (primal - u).abs() <= 1e-6 && check.feasible && factor >= min_factor;
            out.push(
                "certificate",
                pass,
                json!({"variant": variant.name(), "t": t, "primal_opt": primal, "u": u,
                       "factor": factor, "dual_feasible": check.feasible}),
            );
            let printed = dual_certificate(t, variant, CertificateForm::Printed)?;
            let pc = verify_dual_feasible(&printed, t, variant);
            out.info(
                "printed_certificate",
                json!({"variant": variant.name(), "t": t, "dual_feasible": pc.feasible,
                       "violated": pc.violated, "excess": pc.excess}),
            );
        }
        let u200 = u_closed_form(200, variant)?;
        let limit = u_limit(variant);
        out.push(
            "limit",
            (u200 - limit).abs() <= 0.02 && 1.0 / limit >= min_factor,
            json!({"variant": variant.name(), "u_200": u200, "limit": limit, "gap": (u200 - limit).abs()}),
        );
    }
    Ok(out.finish())
}

// ---------------------------------------------------------- lemma suites

const UNIT_COUNT: usize = 200;
const GENERALIZED_COUNT: usize = 100;

/// The seeded instance families shared by the exact suites.
fn suite(config: &ReproduceConfig, profile: Profile) -> Vec<Instance> {
    let (count, salt) = match profile {
        Profile::UnitSmall => (UNIT_COUNT, 1),
        Profile::CapSmall => (GENERALIZED_COUNT, 2),
        Profile::M2oSmall => (GENERALIZED_COUNT, 3),
        Profile::Hyper3Small => (GENERALIZED_COUNT, 4),
    };
    let base = mix(config.seed, salt);
    (0..count).map(|i| gen_random(profile, mix(base, i as u64))).collect()
}

fn options(config: &ReproduceConfig) -> VerifyOptions {
    VerifyOptions {
        reference: PolicyId::OptExact,
        enumeration_limit: config.limits.enumeration,
        dp_limit: config.limits.dp,
        exact_limit: config.limits.exact,
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    instances: usize,
    reports: usize,
    violations: usize,
    /// Largest lhs − factor·rhs seen.
    worst: f64,
}

impl Tally {
    fn add(&mut self, reports: &[LemmaReport]) {
        if reports.is_empty() {
            return;
        }
        self.instances += 1;
        for r in reports {
            self.reports += 1;
            self.violations += r.violations;
            for (l, rh) in r.lhs.iter().zip(&r.rhs) {
                self.worst = self.worst.max(l - rh);
            }
        }
    }
}

/// Runs `lemmas` exactly at every horizon on each instance where they apply,
/// then tallies per lemma in list order.
fn run_suite(
    instances: &[Instance],
    lemmas: &[LemmaId],
    config: &ReproduceConfig,
) -> Result<Vec<(LemmaId, Tally)>> {
    let opts = options(config);
    let per_instance: Vec<Vec<LemmaReport>> = instances
        .par_iter()
        .map(|inst| {
            let applicable = LemmaId::applicable(inst);
            let chosen: Vec<LemmaId> = lemmas.iter().copied().filter(|l| applicable.contains(l)).collect();
            if chosen.is_empty() {
                return Ok(Vec::new());
            }
            let horizons: Vec<usize> = (1..=inst.rounds).collect();
            verify_many(inst, &chosen, &horizons, Mode::Exact, &opts)
        })
        .collect::<Result<_>>()?;
    Ok(lemmas
        .iter()
        .map(|&l| {
            let mut tally = Tally::default();
            for reports in &per_instance {
                let mine: Vec<LemmaReport> = reports.iter().filter(|r| r.lemma == l).cloned().collect();
                tally.add(&mine);
            }
            (l, tally)
        })
        .collect())
}

fn push_tallies(out: &mut Out, family: &str, tallies: Vec<(LemmaId, Tally)>) {
    for (lemma, t) in tallies {
        out.push(
            "lemma",
            t.violations == 0,
            json!({"family": family, "lemma": lemma.name(), "instances": t.instances,
                   "reports": t.reports, "violations": t.violations, "max_excess": t.worst}),
        );
    }
}

fn lemma_bundle(config: &ReproduceConfig) -> Result<BundleResult> {
    let mut out = Out::new(Bundle::Lemmas);
    let lemmas = [
        LemmaId::Charging,
        LemmaId::Domination,
        LemmaId::RefinedDomination,
        LemmaId::GreedyCommitDomination,
        LemmaId::WarmupDomination,
        LemmaId::Partition,
    ];
    let tallies = run_suite(&suite(config, Profile::UnitSmall), &lemmas, config)?;
    push_tallies(&mut out, Profile::UnitSmall.name(), tallies);
    Ok(out.finish())
}

fn generalized_bundle(config: &ReproduceConfig) -> Result<BundleResult> {
    let mut out = Out::new(Bundle::Generalized);
    let plan = [
        (Profile::CapSmall, [LemmaId::CapacitatedCharging, LemmaId::CapacitatedDomination]),
        (Profile::M2oSmall, [LemmaId::ManyToOneCharging, LemmaId::ManyToOneDomination]),
        (Profile::Hyper3Small, [LemmaId::HypergraphCharging, LemmaId::HypergraphDomination]),
    ];
    for (profile, lemmas) in plan {
        let tallies = run_suite(&suite(config, profile), &lemmas, config)?;
        push_tallies(&mut out, profile.name(), tallies);
    }
    Ok(out.finish())
}

const BOUND_LEMMAS: [LemmaId; 6] = [
    LemmaId::WarmupBound,
    LemmaId::SmRoundBound,
    LemmaId::GreedyCommitRoundBound,
    LemmaId::CapacitatedRoundBound,
    LemmaId::ManyToOneRoundBound,
    LemmaId::HypergraphRoundBound,
];

fn ratio_bundle(config: &ReproduceConfig) -> Result<BundleResult> {
    let mut out = Out::new(Bundle::Ratios);
    for profile in Profile::ALL {
        let tallies = run_suite(&suite(config, profile), &BOUND_LEMMAS, config)?;
        let tallies = tallies.into_iter().filter(|(_, t)| t.instances > 0).collect();
        push_tallies(&mut out, profile.name(), tallies);
    }
    Ok(out.finish())
}

// ------------------------------------------------------------ separation

fn separation_bundle(config: &ReproduceConfig) -> Result<BundleResult> {
    let mut out = Out::new(Bundle::Separation);
    let dp = |inst: &Instance, commit: bool| {
        build_dp_with(inst, DpConfig { limit: config.limits.dp, ..DpConfig::new(commit) })
    };
    let inst = gen_separation();
    let opt = dp(&inst, false)?;
    let commit = dp(&inst, true)?;
    let (v, vc) = (opt.root_value(), commit.root_value());
    out.push("separation", v - vc > 0.0, json!({"opt": v, "opt_commit": vc, "gap": v - vc}));

    // round 2 after u1u3 succeeded and u2u4 failed in round 1
    let mut state = KnowledgeState::unknown(inst.edge_count());
    state.observe(0, true);
    state.observe(3, false);
    let r2 = opt.get(&state, 1).map(|e| e.value).ok_or(Error::MissingDpState)?;
    let r2c = commit.get(&state, 1).map(|e| e.value).ok_or(Error::MissingDpState)?;
    out.push(
        "round_two",
        (r2 - 1.4).abs() <= 1e-12 && (r2c - 1.0).abs() <= 1e-12,
        json!({"opt": r2, "opt_commit": r2c}),
    );

    // commitment costs at most half, on every suite instance
    let mut instances = Vec::new();
    for profile in Profile::ALL {
        instances.extend(suite(config, profile));
    }
    let ratios: Vec<(f64, f64)> = instances
        .par_iter()
        .map(|inst| Ok((dp(inst, false)?.root_value(), dp(inst, true)?.root_value())))
        .collect::<Result<_>>()?;
    let violations = ratios.iter().filter(|(o, c)| *c < 0.5 * o - 1e-12).count();
    let min_ratio = ratios.iter().filter(|(o, _)| *o > 0.0).map(|(o, c)| c / o).fold(f64::INFINITY, f64::min);
    out.push(
        "commit_half",
        violations == 0,
        json!({"instances": ratios.len(), "violations": violations, "min_ratio": min_ratio}),
    );

    let coupling = run_suite(&instances, &[LemmaId::AlgorithmACoupling], config)?;
    push_tallies(&mut out, "all", coupling);
    Ok(out.finish())
}

// ----------------------------------------------------------- monte carlo

const UPPER_BOUND_N: usize = 6;
const UPPER_BOUND_EPS: f64 = 0.1;
const UPPER_BOUND_TRIALS: usize = 100_000;
const OFFLINE_N: usize = 10;
const OFFLINE_P: f64 = 0.1;
const OFFLINE_TRIALS: usize = 20_000;

fn upper_bound_bundle(config: &ReproduceConfig) -> Result<BundleResult> {
    let mut out = Out::new(Bundle::UpperBound);
    let inst = gen_gneps(UPPER_BOUND_N, UPPER_BOUND_EPS)?;
    let rounds = inst.rounds as f64;
    let sm = monte_carlo_with(&inst, PolicyId::Sm, UPPER_BOUND_TRIALS, config.seed, &config.limits)?;
    out.push(
        "sm_deterministic",
        sm.mean == rounds && sm.stderr == 0.0,
        json!({"n": UPPER_BOUND_N, "eps": UPPER_BOUND_EPS, "rounds": inst.rounds, "trials": sm.trials,
               "mean": sm.mean, "stderr": sm.stderr}),
    );
    let alt = monte_carlo_with(&inst, PolicyId::Lemma3Alternating, UPPER_BOUND_TRIALS, config.seed, &config.limits)?;
    let threshold = 1.2 * rounds;
    out.push(
        "alternating_beats_sm",
        alt.mean > threshold,
        json!({"trials": alt.trials, "mean": alt.mean, "stderr": alt.stderr, "threshold": threshold,
               "ratio": alt.mean / rounds}),
    );
    Ok(out.finish())
}

fn offline_bundle(config: &ReproduceConfig) -> Result<BundleResult> {
    let mut out = Out::new(Bundle::Offline);
    let inst = gen_knn(OFFLINE_N, OFFLINE_P)?;
    let offline = monte_carlo_with(&inst, PolicyId::OfflineMax, OFFLINE_TRIALS, config.seed, &config.limits)?;
    let bound = OFFLINE_N as f64 / (std::f64::consts::E * std::f64::consts::E);
    out.push(
        "offline_mean",
        offline.mean >= 1.35,
        json!({"n": OFFLINE_N, "p": OFFLINE_P, "trials": offline.trials, "mean": offline.mean,
               "stderr": offline.stderr, "bound": bound}),
    );
    // one online round earns the expected weight of its selection; the best
    // selection's weight is a max-weight matching under p
    let probs = inst.probabilities();
    let sub = WeightedSubproblem::new(&inst, &probs, inst.capacities(), &vec![false; inst.edge_count()]);
    let online = kernels::max_weight_value(&sub, config.limits.exact)?;
    out.push("online_round", online <= 1.0 + 1e-12, json!({"max_expected": online, "analytic": OFFLINE_N as f64 * OFFLINE_P}));
    let sm = monte_carlo_with(&inst, PolicyId::Sm, OFFLINE_TRIALS, config.seed, &config.limits)?;
    out.info("sm_mean", json!({"trials": sm.trials, "mean": sm.mean, "stderr": sm.stderr}));
    Ok(out.finish())
}

// ---------------------------------------------------------------- kernels

const KERNEL_GRAPHS: usize = 1000;
const KERNEL_HYPERGRAPHS: usize = 500;
const KERNEL_MULTIGRAPHS: usize = 1000;
const KERNEL_TOLERANCE: f64 = 1e-9;

/// Best feasible weight by trying every subset.
pub fn brute_force_value(sub: &WeightedSubproblem) -> f64 {
    let c = &sub.candidates;
    assert!(c.len() <= 20, "brute force is for tiny inputs");
    let mut best = 0.0f64;
    for mask in 0u32..(1 << c.len()) {
        let mut load = vec![0u32; sub.residual.len()];
        let mut w = 0.0;
        let mut ok = true;
        for (i, cand) in c.iter().enumerate() {
            if mask >> i & 1 == 1 {
                w += cand.weight;
                for &v in &cand.endpoints {
                    load[v] += 1;
                    ok &= load[v] <= sub.residual[v];
                }
            }
        }
        if ok {
            best = best.max(w);
        }
    }
    best
}

fn random_subproblem(seed: u64, n_max: usize, m_max: usize, cap_max: u32, arity: usize) -> WeightedSubproblem {
    let mut rng = rng_from_seed(seed);
    let n = rng.gen_range(arity.max(2)..=n_max);
    let m = rng.gen_range(1..=m_max);
    let candidates = (0..m)
        .map(|id| {
            let size = if arity > 2 { rng.gen_range(2..=arity) } else { 2 };
            let mut ends: Vec<usize> = rand::seq::index::sample(&mut rng, n, size).into_vec();
            ends.sort_unstable();
            Candidate { id, endpoints: ends, weight: rng.gen_range(1..=100) as f64 / 10.0 }
        })
        .collect();
    let residual = (0..n).map(|_| rng.gen_range(1..=cap_max)).collect();
    WeightedSubproblem { candidates, residual, blocked: Vec::new() }
}

fn kernel_bundle(config: &ReproduceConfig) -> Result<BundleResult> {
    let mut out = Out::new(Bundle::Kernels);
    let base = mix(config.seed, 8);

    // half unit-capacity graphs with up to 10 edges, half capacitated with up to 8
    let graphs: Vec<(f64, f64, f64)> = (0..KERNEL_GRAPHS)
        .into_par_iter()
        .map(|i| {
            let s = mix(base, i as u64);
            let sub = if i % 2 == 0 { random_subproblem(s, 8, 10, 1, 2) } else { random_subproblem(s, 6, 8, 3, 2) };
            let exact = kernels::max_weight_matching(&sub, config.limits.exact)?.weight;
            Ok((kernels::greedy_matching(&sub).weight, exact, brute_force_value(&sub)))
        })
        .collect::<Result<_>>()?;
    let bad = graphs.iter().filter(|(g, e, _)| *g < 0.5 * e - KERNEL_TOLERANCE).count();
    let mismatched = graphs.iter().filter(|(_, e, b)| (e - b).abs() > KERNEL_TOLERANCE).count();
    let worst = graphs.iter().filter(|(_, e, _)| *e > 0.0).map(|(g, e, _)| g / e).fold(f64::INFINITY, f64::min);
    out.push(
        "greedy_half",
        bad == 0 && mismatched == 0,
        json!({"graphs": graphs.len(), "violations": bad, "exact_mismatches": mismatched, "min_ratio": worst}),
    );

    let hyper: Vec<(f64, f64)> = (0..KERNEL_HYPERGRAPHS)
        .into_par_iter()
        .map(|i| {
            let sub = random_subproblem(mix(base ^ 0x0048_5950_4552, i as u64), 8, 8, 1, 3);
            (kernels::greedy_hypergraph_matching(&sub).weight, brute_force_value(&sub))
        })
        .collect();
    let bad = hyper.iter().filter(|(g, e)| *g < e / 3.0 - KERNEL_TOLERANCE).count();
    let worst = hyper.iter().filter(|(_, e)| *e > 0.0).map(|(g, e)| g / e).fold(f64::INFINITY, f64::min);
    out.push("hypergraph_greedy", bad == 0, json!({"hypergraphs": hyper.len(), "k": 3, "violations": bad, "min_ratio": worst}));

    let halving: Vec<(bool, bool, f64)> = (0..KERNEL_MULTIGRAPHS)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(mix(base ^ 0x4841_4c56, i as u64));
            let n = rng.gen_range(2..=8);
            let m = rng.gen_range(1..=20);
            let edges: Vec<(usize, usize, f64)> = (0..m)
                .map(|_| {
                    let a = rng.gen_range(0..n);
                    let b = (a + rng.gen_range(1..n)) % n;
                    (a, b, rng.gen_range(1..=100) as f64 / 10.0)
                })
                .collect();
            halving_check(&edges)
        })
        .collect();
    let weight_bad = halving.iter().filter(|h| !h.0).count();
    let degree_bad = halving.iter().filter(|h| !h.1).count();
    let worst = halving.iter().map(|h| h.2).fold(f64::INFINITY, f64::min);
    out.push(
        "degree_halving",
        weight_bad == 0 && degree_bad == 0,
        json!({"multigraphs": halving.len(), "weight_violations": weight_bad, "degree_violations": degree_bad,
               "min_weight_fraction": worst}),
    );
    Ok(out.finish())
}

/// (weight ≥ total/3, every degree ≤ ⌈d_v/2⌉, kept fraction of the weight).
pub fn halving_check(edges: &[(usize, usize, f64)]) -> (bool, bool, f64) {
    let kept = kernels::degree_halving_subgraph(edges);
    let n = edges.iter().map(|&(a, b, _)| a.max(b) + 1).max().unwrap_or(0);
    let mut deg = vec![0usize; n];
    let mut kept_deg = vec![0usize; n];
    for &(a, b, _) in edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    for &i in &kept {
        kept_deg[edges[i].0] += 1;
        kept_deg[edges[i].1] += 1;
    }
    let total: f64 = edges.iter().map(|e| e.2).sum();
    let w: f64 = kept.iter().map(|&i| edges[i].2).sum();
    let degrees_ok = (0..n).all(|v| kept_deg[v] <= deg[v].div_ceil(2));
    let fraction = if total > 0.0 { w / total } else { 1.0 };
    (w >= total / 3.0 - KERNEL_TOLERANCE, degrees_ok, fraction)
}

/// Sample instances from a profile for external use.
pub fn suite_instances(config: &ReproduceConfig, profile: Profile) -> Vec<Instance> {
    suite(config, profile)
}
