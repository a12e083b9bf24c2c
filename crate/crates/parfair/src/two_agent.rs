//! EF1 for two agents in logarithmic depth and linear work.
//!
//! The goods become the leaves of a complete binary tree (padded with
//! zero-valued goods to a power of two). A bottom-up pass computes, for
//! every node `u` and every pair of agents `(i, j)`, the utility gap
//! `gap[i][j]`: how much agent i prefers its own haul to the opponent's in
//! the subgame rooted at `u` when agent j moves first. The first mover at
//! a node picks the child maximizing its own gap (ties go left) and plays
//! first there, leaving the other child to the opponent as first mover. A
//! top-down pass then reads the recorded picks to assign every leaf.

use crate::model::{Agent, Allocation, Good, Instance};
use crate::parexec::Ctx;
use crate::{Error, Result};

/// Per-node game state: `gap[i][j]` is agent i's utility gap when agent j
/// moves first; `pick[j]` is the child j takes when moving first (0 left,
/// 1 right).
#[derive(Clone, Copy, Debug, Default)]
pub struct GapNode {
    pub gap: [[i128; 2]; 2],
    pub pick: [u8; 2],
}

/// Gap values for the complete game tree, stored in in-order layout so
/// that every subtree occupies a contiguous slice.
#[derive(Clone, Debug)]
pub struct GapTable {
    m: usize,
    padded: usize,
    first: Agent,
    nodes: Vec<GapNode>,
}

impl GapTable {
    pub fn goods(&self) -> usize {
        self.m
    }

    /// Leaf count after padding to a power of two.
    pub fn padded_leaves(&self) -> usize {
        self.padded
    }

    pub fn first_mover(&self) -> Agent {
        self.first
    }

    pub fn nodes(&self) -> &[GapNode] {
        &self.nodes
    }

    pub fn root(&self) -> &GapNode {
        &self.nodes[root_slot(self.padded)]
    }

    /// The leaf reached from the root by always following `agent`'s first
    /// choice. When `agent` moves first at the root this is the single
    /// good whose removal eliminates the opponent's envy.
    pub fn first_choice_leaf(&self, agent: Agent) -> Good {
        let mut nodes = &self.nodes[..];
        let mut lo = 0;
        let mut span = self.padded;
        while span > 1 {
            let mid = span / 2;
            let node = nodes[root_slot(span)];
            if node.pick[agent] == 0 {
                nodes = &nodes[..tree_len(mid)];
                span = mid;
            } else {
                nodes = &nodes[tree_len(mid) + 1..];
                lo += mid;
                span -= mid;
            }
        }
        lo
    }
}

fn tree_len(leaves: usize) -> usize {
    2 * leaves - 1
}

fn root_slot(leaves: usize) -> usize {
    if leaves == 1 {
        0
    } else {
        2 * (leaves / 2) - 1
    }
}

// Leaf gaps: the first mover takes the good, the other gets nothing.
fn leaf_node(ctx: &mut Ctx, v0: i128, v1: i128) -> GapNode {
    ctx.tick(2);
    GapNode {
        gap: [[v0, -v0], [-v1, v1]],
        pick: [0, 0],
    }
}

fn combine(ctx: &mut Ctx, left: &GapNode, right: &GapNode) -> GapNode {
    let mut node = GapNode::default();
    // Choice comparison per first mover, then four gap additions.
    ctx.tick(6);
    for j in 0..2 {
        let (chosen, other, pick) = if left.gap[j][j] >= right.gap[j][j] {
            (left, right, 0)
        } else {
            (right, left, 1)
        };
        node.pick[j] = pick;
        for i in 0..2 {
            node.gap[i][j] = chosen.gap[i][j] + other.gap[i][1 - j];
        }
    }
    node
}

fn gaps_rec(ctx: &mut Ctx, values: &(impl Fn(Agent, Good) -> u64 + Sync), lo: usize, out: &mut [GapNode]) {
    let span = out.len().div_ceil(2);
    if span == 1 {
        out[0] = leaf_node(ctx, values(0, lo) as i128, values(1, lo) as i128);
        return;
    }
    let mid = span / 2;
    let (lnodes, rest) = out.split_at_mut(tree_len(mid));
    let (slot, rnodes) = rest.split_at_mut(1);
    ctx.join(
        span,
        |c| gaps_rec(c, values, lo, lnodes),
        |c| gaps_rec(c, values, lo + mid, rnodes),
    );
    slot[0] = combine(ctx, &lnodes[root_slot(mid)], &rnodes[root_slot(span - mid)]);
}

/// Bottom-up fork-join pass computing the full gap table.
pub fn compute_gaps(ctx: &mut Ctx, inst: &Instance, first: Agent) -> Result<GapTable> {
    if inst.n() != 2 {
        return Err(Error::NotTwoAgents { n: inst.n() });
    }
    let m = inst.m();
    let padded = m.next_power_of_two();
    let values = |a: Agent, g: Good| if g < m { inst.value(a, g) } else { 0 };
    let mut nodes = vec![GapNode::default(); tree_len(padded)];
    gaps_rec(ctx, &values, 0, &mut nodes);
    Ok(GapTable {
        m,
        padded,
        first,
        nodes,
    })
}

fn extract_rec(ctx: &mut Ctx, nodes: &[GapNode], mover: Agent, owners: &mut [u8]) {
    let span = owners.len();
    if span == 1 {
        ctx.tick(1);
        owners[0] = mover as u8;
        return;
    }
    let mid = span / 2;
    let node = &nodes[root_slot(span)];
    let (left_mover, right_mover) = if node.pick[mover] == 0 {
        (mover, 1 - mover)
    } else {
        (1 - mover, mover)
    };
    let lnodes = &nodes[..tree_len(mid)];
    let rnodes = &nodes[tree_len(mid) + 1..];
    let (lown, rown) = owners.split_at_mut(mid);
    ctx.join(
        span,
        |c| extract_rec(c, lnodes, left_mover, lown),
        |c| extract_rec(c, rnodes, right_mover, rown),
    );
}

/// Top-down fork-join pass turning a gap table into an allocation.
/// Padded goods are dropped from the returned bundles.
pub fn extract_allocation(ctx: &mut Ctx, table: &GapTable, first: Agent) -> Allocation {
    let mut owners = vec![0u8; table.padded];
    extract_rec(ctx, &table.nodes, first, &mut owners);
    let mut bundles = vec![Vec::new(); 2];
    for (g, &owner) in owners.iter().enumerate().take(table.m) {
        bundles[owner as usize].push(g);
    }
    Allocation::from_bundles(table.m, bundles).expect("owners partition the goods")
}

/// EF1 allocation for a two-agent instance, with agent 0 moving first at
/// the root. Agent 0 never envies the result.
pub fn solve_two_agent(ctx: &mut Ctx, inst: &Instance) -> Result<Allocation> {
    let table = compute_gaps(ctx, inst, 0)?;
    Ok(extract_allocation(ctx, &table, 0))
}
