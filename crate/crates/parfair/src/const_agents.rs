//! Parallel simulation of Fixed-Order Round Robin for a small number of
//! agents.
//!
//! A configuration records, for each agent, its 1-based position in its
//! own preference list; every good before that position counts as already
//! allocated. The successor of a configuration is the state after one more
//! Round Robin round on the residual goods. Computing successors for all
//! `(m+1)^n` configurations in parallel yields a graph with out-degree at
//! most one, and the path from the all-ones source replays the entire
//! Round Robin run. The path is recovered by pointer jumping rather than
//! tree contraction: the same output in synchronized doubling rounds, each
//! reading the previous round's array and writing a fresh one.

use crate::model::{Allocation, Good, Instance, PreferenceList};
use crate::parexec::{par_fill, parallel_filter, Ctx};
use crate::round_robin::AgentOrder;
use crate::{Error, Result};

/// Default cap on reachability-graph nodes, guarding memory.
pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

const NO_SUCC: usize = usize::MAX;
const NO_GOOD: u32 = u32::MAX;

/// Per-agent 1-based cursor into its preference list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration(pub Vec<usize>);

impl Configuration {
    /// The initial state: nothing allocated.
    pub fn source(n: usize) -> Configuration {
        Configuration(vec![1; n])
    }

    /// Mixed-radix node id with radix m+1 per agent.
    pub fn node_id(&self, base: usize) -> usize {
        self.0
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * base + (c - 1))
    }

    pub fn from_node_id(mut id: usize, n: usize, base: usize) -> Configuration {
        let mut cursors = Vec::with_capacity(n);
        for _ in 0..n {
            cursors.push(id % base + 1);
            id /= base;
        }
        Configuration(cursors)
    }

    /// Goods strictly before each agent's cursor, i.e. the pre-allocated
    /// set of this configuration.
    pub fn preallocated(&self, prefs: &[PreferenceList], m: usize) -> Vec<bool> {
        let mut taken = vec![false; m];
        for (agent, &cursor) in self.0.iter().enumerate() {
            for &g in &prefs[agent].order[..cursor - 1] {
                taken[g] = true;
            }
        }
        taken
    }
}

/// All configurations with their one-round successors.
pub struct ReachabilityGraph {
    n: usize,
    m: usize,
    base: usize,
    /// Successor node id, `NO_SUCC` when some agent goes unserved.
    succ: Vec<usize>,
    /// For nodes with a successor: the good each agent takes this round,
    /// indexed `node * n + agent`.
    round_goods: Vec<u32>,
}

impl ReachabilityGraph {
    pub fn node_count(&self) -> usize {
        self.succ.len()
    }

    pub fn successor_of(&self, node: usize) -> Option<usize> {
        match self.succ[node] {
            NO_SUCC => None,
            s => Some(s),
        }
    }

    /// The goods allocated in the round starting at `node`, by agent id.
    pub fn round_allocation(&self, node: usize) -> Option<Vec<Good>> {
        if self.succ[node] == NO_SUCC {
            return None;
        }
        Some(
            self.round_goods[node * self.n..(node + 1) * self.n]
                .iter()
                .map(|&g| g as Good)
                .collect(),
        )
    }

    pub fn config_of(&self, node: usize) -> Configuration {
        Configuration::from_node_id(node, self.n, self.base)
    }

    pub fn source_id(&self) -> usize {
        Configuration::source(self.n).node_id(self.base)
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

// One round of Fixed-Order Round Robin on the residual instance of a
// configuration. Returns the successor cursors and the good taken by each
// agent, or None if some agent finds nothing left.
fn simulate_round(
    ctx: &mut Ctx,
    prefs: &[PreferenceList],
    order: &AgentOrder,
    m: usize,
    config: &Configuration,
) -> Option<(Configuration, Vec<Good>)> {
    let n = prefs.len();
    // Mark the pre-allocated goods; one parallel pass over the goods, each
    // checking all n cursors.
    let mut taken = vec![false; m];
    par_fill(ctx, 0, &mut taken, &|c, g| {
        c.tick(n as u64);
        (0..n).any(|a| prefs[a].rank[g] < config.0[a])
    });

    // Residual preference lists, keeping original positions for the
    // cursor update.
    let residual: Vec<Vec<(usize, Good)>> = {
        let mut out: Vec<Option<Vec<(usize, Good)>>> = (0..n).map(|_| None).collect();
        par_fill(ctx, 0, &mut out, &|c, a| {
            let indexed: Vec<(usize, Good)> = prefs[a]
                .order
                .iter()
                .enumerate()
                .map(|(pos, &g)| (pos + 1, g))
                .collect();
            Some(parallel_filter(c, &indexed, &|&(_, g)| !taken[g]))
        });
        out.into_iter().map(|x| x.expect("filled")).collect()
    };

    // The round itself is sequential in the agent order; each agent skips
    // at most n-1 goods grabbed earlier in the round.
    let mut grabbed = vec![false; m];
    let mut cursors = config.0.clone();
    let mut goods = vec![0 as Good; n];
    for &agent in order.agents() {
        let mut choice = None;
        for &(pos, g) in &residual[agent] {
            ctx.tick(1);
            if !grabbed[g] {
                choice = Some((pos, g));
                break;
            }
        }
        let (pos, g) = choice?;
        grabbed[g] = true;
        cursors[agent] = pos + 1;
        goods[agent] = g;
    }
    Some((Configuration(cursors), goods))
}

/// Successor of one configuration: the state after one round of
/// Fixed-Order Round Robin on the residual instance, plus the goods
/// allocated in that round (by agent id).
pub fn successor(
    ctx: &mut Ctx,
    inst: &Instance,
    order: &AgentOrder,
    config: &Configuration,
) -> Option<(Configuration, Vec<Good>)> {
    let prefs = inst.preference_lists();
    simulate_round(ctx, &prefs, order, inst.m(), config)
}

/// Compute successors for every configuration in `[1..m+1]^n`, in
/// parallel. Refuses when the node count exceeds `budget`.
pub fn build_reachability_graph(
    ctx: &mut Ctx,
    inst: &Instance,
    order: &AgentOrder,
    budget: usize,
) -> Result<ReachabilityGraph> {
    let n = inst.n();
    let m = inst.m();
    let base = m + 1;
    let nodes = (base as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if nodes > budget as u128 {
        return Err(Error::NodeBudgetExceeded { nodes, budget });
    }
    let nodes = nodes as usize;
    let prefs = inst.preference_lists();

    let mut succ = vec![NO_SUCC; nodes];
    let mut round_goods = vec![NO_GOOD; nodes * n];
    // Split the two output arrays in lockstep so each task owns the slots
    // of its node range.
    fn fill(
        ctx: &mut Ctx,
        lo: usize,
        succ: &mut [usize],
        goods: &mut [u32],
        prefs: &[PreferenceList],
        order: &AgentOrder,
        m: usize,
        base: usize,
    ) {
        let n = prefs.len();
        match succ.len() {
            0 => {}
            1 => {
                let config = Configuration::from_node_id(lo, n, base);
                if let Some((next, taken)) = simulate_round(ctx, prefs, order, m, &config) {
                    succ[0] = next.node_id(base);
                    for (a, &g) in taken.iter().enumerate() {
                        goods[a] = g as u32;
                    }
                }
            }
            len => {
                let mid = len / 2;
                let (sl, sr) = succ.split_at_mut(mid);
                let (gl, gr) = goods.split_at_mut(mid * n);
                ctx.join(
                    len,
                    |c| fill(c, lo, sl, gl, prefs, order, m, base),
                    |c| fill(c, lo + mid, sr, gr, prefs, order, m, base),
                );
            }
        }
    }
    fill(ctx, 0, &mut succ, &mut round_goods, &prefs, order, m, base);

    Ok(ReachabilityGraph {
        n,
        m,
        base,
        succ,
        round_goods,
    })
}

/// The maximal path from the source, recovered by pointer jumping: after
/// round k the jump table holds each node's 2^k-step successor (saturating
/// at chain ends) and the frontier holds every node within 2^k steps of
/// the source. Rounds stop as soon as the frontier is stable, which is at
/// most ceil(log2 |V|) rounds.
pub fn extract_path(ctx: &mut Ctx, graph: &ReachabilityGraph) -> Vec<Configuration> {
    let nodes = graph.node_count();
    let mut ptr: Vec<usize> = (0..nodes)
        .map(|v| match graph.succ[v] {
            NO_SUCC => v,
            s => s,
        })
        .collect();
    let mut step: Vec<u32> = (0..nodes)
        .map(|v| u32::from(graph.succ[v] != NO_SUCC))
        .collect();

    let source = graph.source_id();
    let mut dist = vec![u32::MAX; nodes];
    dist[source] = 0;
    let mut frontier: Vec<usize> = vec![source];

    loop {
        let mut grew = false;
        for idx in 0..frontier.len() {
            let v = frontier[idx];
            let w = ptr[v];
            let d = dist[v] + step[v];
            if step[v] > 0 && dist[w] == u32::MAX {
                dist[w] = d;
                frontier.push(w);
                grew = true;
            }
        }
        if !grew {
            break;
        }
        // Double the jump table: read the old arrays, write fresh ones.
        let mut next_ptr = vec![0usize; nodes];
        par_fill(ctx, 0, &mut next_ptr, &|c, v| {
            c.tick(1);
            ptr[ptr[v]]
        });
        let mut next_step = vec![0u32; nodes];
        par_fill(ctx, 0, &mut next_step, &|c, v| {
            c.tick(1);
            step[v] + step[ptr[v]]
        });
        ptr = next_ptr;
        step = next_step;
    }

    let mut on_path: Vec<(u32, usize)> = frontier
        .into_iter()
        .map(|v| (dist[v], v))
        .collect();
    on_path.sort_unstable();
    on_path
        .into_iter()
        .map(|(_, v)| graph.config_of(v))
        .collect()
}

/// Fixed-Order Round Robin computed through the reachability graph. The
/// result is bit-for-bit the sequential Round Robin allocation.
pub fn solve_const_agents(
    ctx: &mut Ctx,
    inst: &Instance,
    order: &AgentOrder,
    budget: usize,
) -> Result<Allocation> {
    if inst.m() % inst.n() != 0 {
        return Err(Error::NotDivisible {
            m: inst.m(),
            n: inst.n(),
        });
    }
    let graph = build_reachability_graph(ctx, inst, order, budget)?;
    let path = extract_path(ctx, &graph);
    let mut alloc = Allocation::empty(inst.n(), inst.m());
    for config in &path[..path.len() - 1] {
        let node = config.node_id(graph.base);
        let goods = graph
            .round_allocation(node)
            .expect("every non-terminal path node has a round");
        for (agent, &g) in goods.iter().enumerate() {
            alloc.assign(agent, g);
        }
    }
    debug_assert!(alloc.is_complete());
    Ok(alloc)
}
