//! Seeded instance generators for the instance classes the solvers target.
//! All generators are deterministic in the seed.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::model::Instance;
use crate::{Error, Result};

fn rng_for(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Dense instance: every value uniform in `0..max_value`.
pub fn dense(n: usize, m: usize, max_value: u64, seed: u64) -> Instance {
    let mut rng = rng_for(seed);
    let values = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(0..max_value)).collect())
        .collect();
    Instance::new(values).expect("generator emits valid instances")
}

/// Graph instance: every good is positively valued by one or two agents,
/// with positive values uniform in `1..max_value`.
pub fn graph(n: usize, m: usize, max_value: u64, seed: u64) -> Instance {
    let mut rng = rng_for(seed);
    let mut values = vec![vec![0u64; m]; n];
    for g in 0..m {
        let a = rng.gen_range(0..n);
        values[a][g] = rng.gen_range(1..max_value);
        if n > 1 && rng.gen_bool(0.7) {
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            values[b][g] = rng.gen_range(1..max_value);
        }
    }
    Instance::new(values).expect("generator emits valid instances")
}

/// Hypergraph instance with support sets of size at most `rank` and line
/// graph degree at most `max_edge_degree`. Goods sharing a support set
/// share a hyperedge, so extra goods are assigned to already-accepted
/// supports without raising the degree.
pub fn hypergraph(
    n: usize,
    m: usize,
    max_value: u64,
    rank: usize,
    max_edge_degree: usize,
    seed: u64,
) -> Result<Instance> {
    if rank == 0 || rank > n {
        return Err(Error::InfeasibleGen(format!(
            "rank {rank} outside 1..={n}"
        )));
    }
    let mut rng = rng_for(seed);
    let target_edges = m.div_ceil(2).max(1);
    let mut supports: Vec<Vec<usize>> = Vec::new();
    let mut degree: Vec<usize> = Vec::new();
    let mut attempts = 0usize;
    while supports.len() < target_edges {
        attempts += 1;
        if attempts > 200 * (target_edges + 1) {
            if supports.is_empty() {
                return Err(Error::InfeasibleGen(format!(
                    "cannot build any hyperedge with rank {rank} and edge degree {max_edge_degree}"
                )));
            }
            break; // keep what fits; remaining goods reuse existing supports
        }
        let size = rng.gen_range(1..=rank);
        let mut agents: Vec<usize> = (0..n).collect();
        agents.shuffle(&mut rng);
        let mut cand: Vec<usize> = agents[..size].to_vec();
        cand.sort_unstable();
        if supports.contains(&cand) {
            continue;
        }
        let touching: Vec<usize> = supports
            .iter()
            .enumerate()
            .filter(|(_, s)| s.iter().any(|a| cand.contains(a)))
            .map(|(i, _)| i)
            .collect();
        if touching.len() > max_edge_degree
            || touching.iter().any(|&i| degree[i] + 1 > max_edge_degree)
        {
            continue;
        }
        for &i in &touching {
            degree[i] += 1;
        }
        degree.push(touching.len());
        supports.push(cand);
    }

    let mut values = vec![vec![0u64; m]; n];
    for g in 0..m {
        let support = &supports[rng.gen_range(0..supports.len())];
        for &a in support {
            values[a][g] = rng.gen_range(1..max_value);
        }
    }
    Ok(Instance::new(values).expect("generator emits valid instances"))
}

/// Sparse instance: each agent positively values at most `per_agent`
/// goods.
pub fn sparse(n: usize, m: usize, max_value: u64, per_agent: usize, seed: u64) -> Instance {
    let mut rng = rng_for(seed);
    let mut values = vec![vec![0u64; m]; n];
    for row in values.iter_mut() {
        let mut goods: Vec<usize> = (0..m).collect();
        goods.shuffle(&mut rng);
        for &g in goods.iter().take(per_agent.min(m)) {
            row[g] = rng.gen_range(1..max_value);
        }
    }
    Instance::new(values).expect("generator emits valid instances")
}
