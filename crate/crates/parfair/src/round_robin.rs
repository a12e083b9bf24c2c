//! Sequential Round Robin. This is the ground truth that the parallel
//! constant-agent simulation and the stable-matching reduction are checked
//! against, so it stays as plain as possible: every pick is a linear scan
//! for the best remaining good.

use crate::model::{Agent, Allocation, Good, Instance};
use crate::parexec::Ctx;
use crate::{Error, Result};

/// A permutation of the agent ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentOrder(Vec<Agent>);

impl AgentOrder {
    pub fn new(order: Vec<Agent>) -> Result<AgentOrder> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &a in &order {
            if a >= n || seen[a] {
                return Err(Error::BadOrder { n });
            }
            seen[a] = true;
        }
        Ok(AgentOrder(order))
    }

    pub fn identity(n: usize) -> AgentOrder {
        AgentOrder((0..n).collect())
    }

    pub fn agents(&self) -> &[Agent] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Best remaining good for an agent: highest value, then lowest id.
fn pick_best(ctx: &mut Ctx, inst: &Instance, agent: Agent, taken: &[bool]) -> Option<Good> {
    let mut best: Option<Good> = None;
    for g in 0..inst.m() {
        if taken[g] {
            continue;
        }
        ctx.tick(1);
        match best {
            Some(b) if inst.value(agent, g) <= inst.value(agent, b) => {}
            _ => best = Some(g),
        }
    }
    best
}

/// Round Robin with the same agent order every round. Requires m divisible
/// by n so every agent ends with exactly m/n goods.
pub fn fixed_order_round_robin(
    ctx: &mut Ctx,
    inst: &Instance,
    order: &AgentOrder,
) -> Result<Allocation> {
    if inst.m() % inst.n() != 0 {
        return Err(Error::NotDivisible {
            m: inst.m(),
            n: inst.n(),
        });
    }
    let rounds = inst.m() / inst.n();
    let perms = vec![order.clone(); rounds];
    round_robin_with_permutations(ctx, inst, &perms)
}

/// Round Robin with one agent order per round.
pub fn round_robin_with_permutations(
    ctx: &mut Ctx,
    inst: &Instance,
    perms: &[AgentOrder],
) -> Result<Allocation> {
    if inst.m() % inst.n() != 0 {
        return Err(Error::NotDivisible {
            m: inst.m(),
            n: inst.n(),
        });
    }
    let rounds = inst.m() / inst.n();
    if perms.len() != rounds {
        return Err(Error::WrongPermCount {
            expected: rounds,
            got: perms.len(),
        });
    }
    for order in perms {
        if order.len() != inst.n() {
            return Err(Error::BadOrder { n: inst.n() });
        }
    }

    let mut taken = vec![false; inst.m()];
    let mut alloc = Allocation::empty(inst.n(), inst.m());
    for order in perms {
        for &agent in order.agents() {
            let g = pick_best(ctx, inst, agent, &taken).expect("divisibility leaves a good");
            taken[g] = true;
            ctx.tick(1);
            alloc.assign(agent, g);
        }
    }
    Ok(alloc)
}
