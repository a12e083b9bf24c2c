//! EF1 for graph instances: each good is positively valued by at most two
//! agents, so the goods split into per-pair subinstances that the
//! two-agent solver handles independently in parallel.

use std::collections::BTreeMap;

use crate::model::{Agent, Allocation, Good, Instance};
use crate::parexec::{par_map, Ctx};
use crate::two_agent::solve_two_agent;
use crate::{Error, Result};

/// Goods grouped by their support set.
#[derive(Clone, Debug)]
pub struct SupportPartition {
    /// Goods valued by exactly the two agents of the key (key.0 < key.1).
    pub pairs: Vec<((Agent, Agent), Vec<Good>)>,
    /// Goods valued by exactly one agent.
    pub solo: Vec<(Agent, Vec<Good>)>,
    /// Goods valued by nobody.
    pub orphans: Vec<Good>,
}

/// Split the goods by support set. Errors if any good is positively
/// valued by three or more agents.
pub fn partition_by_support(inst: &Instance) -> Result<SupportPartition> {
    let mut pairs: BTreeMap<(Agent, Agent), Vec<Good>> = BTreeMap::new();
    let mut solo: BTreeMap<Agent, Vec<Good>> = BTreeMap::new();
    let mut orphans = Vec::new();
    for g in 0..inst.m() {
        let support = inst.support(g);
        match support.as_slice() {
            [] => orphans.push(g),
            [a] => solo.entry(*a).or_default().push(g),
            [a, b] => pairs.entry((*a, *b)).or_default().push(g),
            _ => {
                return Err(Error::NotGraphInstance {
                    good: g,
                    support: support.len(),
                })
            }
        }
    }
    Ok(SupportPartition {
        pairs: pairs.into_iter().collect(),
        solo: solo.into_iter().collect(),
        orphans,
    })
}

/// EF1 allocation for a graph instance: self-loop goods go to their only
/// fan, orphans to agent 0, and every parallel-edge class is solved by the
/// two-agent algorithm, all pairs in parallel.
pub fn solve_graph(ctx: &mut Ctx, inst: &Instance) -> Result<Allocation> {
    let partition = partition_by_support(inst)?;

    let pair_allocs: Vec<Result<Allocation>> = par_map(ctx, partition.pairs.len(), &|c, idx| {
        let ((a, b), goods) = &partition.pairs[idx];
        let sub = inst.restrict(&[*a, *b], goods);
        solve_two_agent(c, &sub)
    });

    let mut bundles = vec![Vec::new(); inst.n()];
    for (((a, b), goods), local) in partition.pairs.iter().zip(pair_allocs) {
        let local = local?;
        for (slot, &agent) in [*a, *b].iter().enumerate() {
            bundles[agent].extend(local.bundle(slot).iter().map(|&i| goods[i]));
        }
    }
    for (a, goods) in &partition.solo {
        bundles[*a].extend(goods);
    }
    bundles[0].extend(&partition.orphans);
    Allocation::from_bundles(inst.m(), bundles)
}
