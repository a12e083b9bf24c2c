//! EF1 for bounded-rank hypergraph instances.
//!
//! Goods with the same support set form one hyperedge over the agents.
//! The line graph of the hyperedges is properly colored with at most
//! Δ+1 colors by peeling maximal independent sets; color classes are
//! processed one after another, and within a class the hyperedges touch
//! pairwise disjoint agent sets, so they are allocated independently in
//! parallel: rotate away any envy cycles among the edge's agents, fix a
//! topological order of the resulting envy DAG, and hand the edge's goods
//! out with the constant-agent Round Robin simulation under that order.

use std::collections::BTreeMap;

use crate::const_agents::solve_const_agents;
use crate::model::{pad_instance, Agent, Allocation, Good, Instance};
use crate::model::{build_envy_graph, eliminate_envy_cycles};
use crate::parexec::{par_map, Ctx};
use crate::round_robin::AgentOrder;
use crate::{Error, Result};

/// Default bound on hyperedge rank; keeps the inner reachability graphs
/// of the per-edge constant-agent calls small.
pub const DEFAULT_MAX_RANK: usize = 4;

/// A distinct hyperedge: the agents that positively value its goods.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperEdge {
    pub agents: Vec<Agent>,
    pub goods: Vec<Good>,
}

/// The hypergraph induced by an instance, with its line graph.
#[derive(Clone, Debug)]
pub struct HypergraphView {
    pub edges: Vec<HyperEdge>,
    pub orphans: Vec<Good>,
    /// Max support size over the edges.
    pub rank: usize,
    /// Max number of other hyperedges any hyperedge intersects.
    pub max_degree: usize,
    adj: Vec<Vec<usize>>,
}

impl HypergraphView {
    pub fn intersecting(&self, edge: usize) -> &[usize] {
        &self.adj[edge]
    }
}

/// Group the goods by support set; goods valued by nobody are orphans.
pub fn induced_hypergraph(inst: &Instance) -> HypergraphView {
    let mut by_support: BTreeMap<Vec<Agent>, Vec<Good>> = BTreeMap::new();
    let mut orphans = Vec::new();
    for g in 0..inst.m() {
        let support = inst.support(g);
        if support.is_empty() {
            orphans.push(g);
        } else {
            by_support.entry(support).or_default().push(g);
        }
    }
    let edges: Vec<HyperEdge> = by_support
        .into_iter()
        .map(|(agents, goods)| HyperEdge { agents, goods })
        .collect();
    let adj: Vec<Vec<usize>> = edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            edges
                .iter()
                .enumerate()
                .filter(|&(j, f)| i != j && e.agents.iter().any(|a| f.agents.contains(a)))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let rank = edges.iter().map(|e| e.agents.len()).max().unwrap_or(0);
    let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
    HypergraphView {
        edges,
        orphans,
        rank,
        max_degree,
        adj,
    }
}

/// Proper coloring of the line graph with at most Δ+1 colors.
#[derive(Clone, Debug)]
pub struct EdgeColoring {
    /// Color per distinct hyperedge.
    pub colors: Vec<usize>,
    pub palette: usize,
}

// One maximal independent set over the vertices where `alive` holds, by
// synchronized rounds: a vertex joins when its id is the local minimum
// among still-undecided neighbors.
fn maximal_independent_set(ctx: &mut Ctx, adj: &[Vec<usize>], alive: &[bool]) -> Vec<bool> {
    let k = adj.len();
    let mut undecided: Vec<bool> = alive.to_vec();
    let mut in_mis = vec![false; k];
    while undecided.iter().any(|&u| u) {
        let joins: Vec<bool> = par_map(ctx, k, &|c, v| {
            if !undecided[v] {
                return false;
            }
            c.tick(adj[v].len().max(1) as u64);
            adj[v].iter().all(|&w| !undecided[w] || v < w)
        });
        for v in 0..k {
            if joins[v] {
                in_mis[v] = true;
                undecided[v] = false;
                for &w in &adj[v] {
                    undecided[w] = false;
                }
            }
        }
    }
    in_mis
}

/// Color the line graph by repeatedly peeling a maximal independent set
/// off the uncolored vertices; the k-th set becomes color k.
pub fn color_line_graph(ctx: &mut Ctx, h: &HypergraphView) -> EdgeColoring {
    let k = h.edges.len();
    let mut colors = vec![usize::MAX; k];
    let mut uncolored: Vec<bool> = vec![true; k];
    let mut palette = 0;
    while uncolored.iter().any(|&u| u) {
        let mis = maximal_independent_set(ctx, &h.adj, &uncolored);
        for v in 0..k {
            if mis[v] {
                colors[v] = palette;
                uncolored[v] = false;
            }
        }
        palette += 1;
    }
    EdgeColoring { colors, palette }
}

/// EF1 allocation for a hypergraph instance of rank at most `max_rank`.
pub fn solve_hypergraph(
    ctx: &mut Ctx,
    inst: &Instance,
    max_rank: usize,
    node_budget: usize,
) -> Result<Allocation> {
    let (alloc, _) = solve_hypergraph_traced(ctx, inst, max_rank, node_budget)?;
    Ok(alloc)
}

/// Like [`solve_hypergraph`], also returning the partial allocation after
/// each color class (used to check the per-class EF1 induction).
pub fn solve_hypergraph_traced(
    ctx: &mut Ctx,
    inst: &Instance,
    max_rank: usize,
    node_budget: usize,
) -> Result<(Allocation, Vec<Allocation>)> {
    let h = induced_hypergraph(inst);
    if h.rank > max_rank {
        return Err(Error::RankOverBound {
            rank: h.rank,
            bound: max_rank,
        });
    }
    let coloring = color_line_graph(ctx, &h);

    let mut alloc = Allocation::empty(inst.n(), inst.m());
    let mut class_snapshots = Vec::with_capacity(coloring.palette);
    for color in 0..coloring.palette {
        let class: Vec<usize> = (0..h.edges.len())
            .filter(|&e| coloring.colors[e] == color)
            .collect();
        // Edges of one class touch disjoint agent sets: solve in parallel
        // against a snapshot of the current allocation, then merge.
        let results: Vec<Result<Vec<(Agent, Vec<Good>)>>> =
            par_map(ctx, class.len(), &|c, idx| {
                allocate_edge(c, inst, &alloc, &h.edges[class[idx]], node_budget)
            });
        let mut bundles = alloc.bundles().to_vec();
        for result in results {
            for (agent, bundle) in result? {
                bundles[agent] = bundle;
            }
        }
        alloc = Allocation::from_bundles(inst.m(), bundles)?;
        class_snapshots.push(alloc.clone());
    }
    // Orphans are worthless to everyone; give them to agent 0.
    let mut bundles = alloc.bundles().to_vec();
    bundles[0].extend(&h.orphans);
    let alloc = Allocation::from_bundles(inst.m(), bundles)?;
    Ok((alloc, class_snapshots))
}

// Allocate one hyperedge's goods: rotate envy cycles among its agents,
// order them topologically, run the constant-agent solver on the edge's
// goods, and return the new bundles of the touched agents.
fn allocate_edge(
    ctx: &mut Ctx,
    inst: &Instance,
    snapshot: &Allocation,
    edge: &HyperEdge,
    node_budget: usize,
) -> Result<Vec<(Agent, Vec<Good>)>> {
    let rotated = eliminate_envy_cycles(inst, snapshot, &edge.agents);
    let envy = build_envy_graph(inst, &rotated, &edge.agents);
    let order_global = envy
        .topological_order()
        .expect("cycle elimination leaves a DAG");

    // The edge's goods as a subinstance over its agents (ascending), padded
    // so the good count divides the agent count.
    let sub = inst.restrict(&edge.agents, &edge.goods);
    let padded = pad_instance(&sub);
    let order_local: Vec<usize> = order_global
        .iter()
        .map(|a| edge.agents.iter().position(|x| x == a).expect("edge agent"))
        .collect();
    let order = AgentOrder::new(order_local)?;
    let local = solve_const_agents(ctx, &padded, &order, node_budget)?;

    let mut out = Vec::with_capacity(edge.agents.len());
    for (slot, &agent) in edge.agents.iter().enumerate() {
        let mut bundle = rotated.bundle(agent).to_vec();
        bundle.extend(
            local
                .bundle(slot)
                .iter()
                .filter(|&&idx| idx < edge.goods.len())
                .map(|&idx| edge.goods[idx]),
        );
        out.push((agent, bundle));
    }
    Ok(out)
}
