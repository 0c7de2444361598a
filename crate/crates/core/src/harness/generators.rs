use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Edge, Instance, Structure, Vertex};
use crate::rng::rng_from_seed;

fn unit_vertices(n: usize) -> Vec<Vertex> {
    (0..n).map(|id| Vertex { id, capacity: 1 }).collect()
}

fn pair(id: usize, a: usize, b: usize, p: f64) -> Edge {
    Edge { id, endpoints: vec![a, b], p }
}

/// Double star: u_i = i−1, v_i = n+i−1. Edge 0 is the certain u1–v1 edge;
/// then (u1, v_i) and (u_i, v1) alternate for i = 2..n. T = n².
pub fn gen_gneps(n: usize, eps: f64) -> Result<Instance> {
    if n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {n}")));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!("eps must lie in (0, 0.5), got {eps}")));
    }
    let q = 0.5 - eps;
    let mut edges = vec![pair(0, 0, n, 1.0)];
    for i in 1..n {
        edges.push(pair(edges.len(), 0, n + i, q));
        edges.push(pair(edges.len(), i, n, q));
    }
    let rounds = n * n;
    let left = (0..n).collect();
    Instance::new(unit_vertices(2 * n), edges, rounds, vec![1.0; rounds], Structure::ManyToOne { left })
}

/// K_{2,2} with p = 0.7 over two rounds; edges u1u3, u1u4, u2u3, u2u4.
pub fn gen_separation() -> Instance {
    let edges = vec![pair(0, 0, 2, 0.7), pair(1, 0, 3, 0.7), pair(2, 1, 2, 0.7), pair(3, 1, 3, 0.7)];
    Instance::new(unit_vertices(4), edges, 2, vec![1.0; 2], Structure::ManyToOne { left: vec![0, 1] })
        .expect("fixed instance is valid")
}

/// K_{n,n}, every edge with probability p, one round.
pub fn gen_knn(n: usize, p: f64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    let mut edges = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            edges.push(pair(edges.len(), a, n + b, p));
        }
    }
    Instance::new(unit_vertices(2 * n), edges, 1, vec![1.0], Structure::ManyToOne { left: (0..n).collect() })
}

/// Named families of small random instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// 3..=8 vertices, 1..=8 edges, unit capacities, T in 1..=4.
    UnitSmall,
    /// 3..=6 vertices, capacities 1..=3, 1..=6 edges, T in 1..=3.
    CapSmall,
    /// 2..=4 left and 1..=3 right vertices, right capacities 1..=3, 1..=6 edges.
    M2oSmall,
    /// 4..=8 vertices, 1..=8 hyperedges of size 2..=3, k = 3.
    Hyper3Small,
}

impl Profile {
    pub const ALL: [Profile; 4] = [Profile::UnitSmall, Profile::CapSmall, Profile::M2oSmall, Profile::Hyper3Small];

    pub fn name(self) -> &'static str {
        match self {
            Profile::UnitSmall => "unit-small",
            Profile::CapSmall => "cap-small",
            Profile::M2oSmall => "m2o-small",
            Profile::Hyper3Small => "hyper3-small",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s.replace('_', "-"))
            .ok_or_else(|| Error::Domain(format!("unknown profile {s:?}")))
    }
}

/// Mostly interior probabilities, with occasional certain or impossible edges.
fn draw_p(rng: &mut impl Rng) -> f64 {
    match rng.gen_range(0..20) {
        0 => 1.0,
        1 => 0.0,
        _ => (rng.gen_range(5..=95) as f64) / 100.0,
    }
}

pub fn gen_random(profile: Profile, seed: u64) -> Instance {
    let mut rng = rng_from_seed(seed);
    let (vertices, edges, structure, rounds) = match profile {
        Profile::UnitSmall | Profile::CapSmall => {
            let (n_max, m_max, cap_max, t_max) =
                if profile == Profile::UnitSmall { (8, 8, 1, 4) } else { (6, 6, 3, 3) };
            let n = rng.gen_range(3..=n_max);
            let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            pairs.shuffle(&mut rng);
            let m = rng.gen_range(1..=m_max.min(pairs.len()));
            let vertices = (0..n).map(|id| Vertex { id, capacity: rng.gen_range(1..=cap_max) }).collect();
            let edges = pairs[..m].iter().enumerate().map(|(id, &(a, b))| pair(id, a, b, draw_p(&mut rng))).collect();
            (vertices, edges, Structure::General, rng.gen_range(1..=t_max))
        }
        Profile::M2oSmall => {
            let l = rng.gen_range(2..=4);
            let r = rng.gen_range(1..=3);
            let mut pairs: Vec<(usize, usize)> = (0..l).flat_map(|a| (0..r).map(move |b| (a, l + b))).collect();
            pairs.shuffle(&mut rng);
            let m = rng.gen_range(1..=6.min(pairs.len()));
            let vertices = (0..l + r)
                .map(|id| Vertex { id, capacity: if id < l { 1 } else { rng.gen_range(1..=3) } })
                .collect();
            let edges = pairs[..m].iter().enumerate().map(|(id, &(a, b))| pair(id, a, b, draw_p(&mut rng))).collect();
            (vertices, edges, Structure::ManyToOne { left: (0..l).collect() }, rng.gen_range(1..=3))
        }
        Profile::Hyper3Small => {
            let n = rng.gen_range(4..=8);
            let m = rng.gen_range(1..=8);
            let ids: Vec<usize> = (0..n).collect();
            let edges = (0..m)
                .map(|id| {
                    let size = rng.gen_range(2..=3);
                    let mut ends: Vec<usize> = ids.choose_multiple(&mut rng, size).copied().collect();
                    ends.sort_unstable();
                    Edge { id, endpoints: ends, p: draw_p(&mut rng) }
                })
                .collect();
            (unit_vertices(n), edges, Structure::Hypergraph { k: 3 }, rng.gen_range(1..=3))
        }
    };
    Instance::new(vertices, edges, rounds, vec![1.0; rounds], structure).expect("generated instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gneps_shape() {
        let g = gen_gneps(2, 0.1).unwrap();
        assert_eq!(g.probabilities(), vec![1.0, 0.4, 0.4]);
        let g = gen_gneps(6, 0.1).unwrap();
        assert_eq!(g.edge_count(), 11);
        assert_eq!(g.rounds, 36);
        assert_eq!(g.edge(0).p, 1.0);
        assert!(gen_gneps(1, 0.1).is_err());
        assert!(gen_gneps(3, 0.5).is_err());
        assert!(gen_gneps(3, 0.0).is_err());
    }

    #[test]
    fn separation_shape() {
        let g = gen_separation();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.rounds, 2);
        assert!(g.edges.iter().all(|e| e.p == 0.7));
    }

    #[test]
    fn knn_shape() {
        let g = gen_knn(10, 0.1).unwrap();
        assert_eq!(g.edge_count(), 100);
        assert_eq!(g.rounds, 1);
        assert!(gen_knn(3, 1.5).is_err());
    }

    #[test]
    fn profiles_respect_contracts() {
        for seed in 0..200 {
            let u = gen_random(Profile::UnitSmall, seed);
            assert!(u.vertex_count() <= 8 && u.edge_count() <= 8 && u.is_unit_capacity() && u.rounds <= 4);
            let c = gen_random(Profile::CapSmall, seed);
            assert!(c.edge_count() <= 6 && c.capacities().iter().all(|&k| (1..=3).contains(&k)));
            let m = gen_random(Profile::M2oSmall, seed);
            assert!(m.edge_count() <= 6);
            assert!(matches!(m.structure, Structure::ManyToOne { .. }));
            let h = gen_random(Profile::Hyper3Small, seed);
            assert!(h.edge_count() <= 8 && h.max_edge_size() <= 3);
        }
    }

    #[test]
    fn random_is_reproducible() {
        assert_eq!(gen_random(Profile::CapSmall, 9), gen_random(Profile::CapSmall, 9));
        assert_eq!("hyper3-small".parse::<Profile>().unwrap(), Profile::Hyper3Small);
    }
}
