//! Reduction from Fixed-Order Round Robin to stable matching.
//!
//! Side A holds m/n numbered copies of each agent, side B holds the goods.
//! Every copy of an agent keeps that agent's full preference list (the
//! canonical list already orders zero-valued goods by ascending id, which
//! is exactly the completion the Round Robin oracle uses). Every good
//! ranks the proposers as the agent order repeated round by round, the
//! i-th appearance naming the i-th copy. With identical B-side lists the
//! stable matching is unique and replays Round Robin, so
//! reduce -> solve -> convert reproduces the oracle bit for bit.

use std::fmt::Write as _;

use crate::model::{Allocation, Instance};
use crate::round_robin::AgentOrder;
use crate::{Error, Result};

/// A stable matching instance with complete strict preference lists on
/// both sides. For reduced instances, proposer `c * n_agents + a` is copy
/// c of agent a.
#[derive(Clone, Debug)]
pub struct StableMatchingInstance {
    pub m: usize,
    pub n_agents: usize,
    pub copies: usize,
    /// For each proposer, the goods in preference order.
    pub a_prefs: Vec<Vec<usize>>,
    /// For each good, the proposers in preference order.
    pub b_prefs: Vec<Vec<usize>>,
}

impl StableMatchingInstance {
    /// A hand-built instance; proposers are treated as single-copy agents.
    pub fn general(a_prefs: Vec<Vec<usize>>, b_prefs: Vec<Vec<usize>>) -> StableMatchingInstance {
        let m = a_prefs.len();
        assert_eq!(m, b_prefs.len());
        StableMatchingInstance {
            m,
            n_agents: m,
            copies: 1,
            a_prefs,
            b_prefs,
        }
    }

    pub fn proposer_id(&self, copy: usize, agent: usize) -> usize {
        copy * self.n_agents + agent
    }

    pub fn proposer_agent(&self, id: usize) -> usize {
        id % self.n_agents
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "SM v1");
        let _ = writeln!(s, "{}", self.m);
        for prefs in self.a_prefs.iter().chain(self.b_prefs.iter()) {
            let line: Vec<String> = prefs.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }
}

/// Build the stable matching instance whose unique solution is the
/// Fixed-Order Round Robin allocation.
pub fn reduce_to_stable_matching(
    inst: &Instance,
    order: &AgentOrder,
) -> Result<StableMatchingInstance> {
    let n = inst.n();
    let m = inst.m();
    if m % n != 0 {
        return Err(Error::NotDivisible { m, n });
    }
    if order.len() != n {
        return Err(Error::BadOrder { n });
    }
    let copies = m / n;
    let prefs = inst.preference_lists();
    let a_prefs: Vec<Vec<usize>> = (0..m)
        .map(|id| prefs[id % n].order.clone())
        .collect();
    let common: Vec<usize> = (0..copies)
        .flat_map(|c| order.agents().iter().map(move |&a| c * n + a))
        .collect();
    let b_prefs = vec![common; m];
    Ok(StableMatchingInstance {
        m,
        n_agents: n,
        copies,
        a_prefs,
        b_prefs,
    })
}

/// A perfect matching between proposers and goods.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub a_to_b: Vec<usize>,
    pub b_to_a: Vec<usize>,
}

/// Proposer-optimal stable matching by deferred acceptance. Proposers are
/// processed in ascending id; the outcome is the unique proposer-optimal
/// stable matching regardless of that order.
pub fn gale_shapley(smi: &StableMatchingInstance) -> Matching {
    let m = smi.m;
    let mut b_rank = vec![vec![0usize; m]; m];
    for (b, prefs) in smi.b_prefs.iter().enumerate() {
        for (pos, &a) in prefs.iter().enumerate() {
            b_rank[b][a] = pos;
        }
    }
    let mut a_to_b = vec![usize::MAX; m];
    let mut b_to_a = vec![usize::MAX; m];
    let mut next_choice = vec![0usize; m];
    let mut free: Vec<usize> = (0..m).rev().collect();
    while let Some(a) = free.pop() {
        let b = smi.a_prefs[a][next_choice[a]];
        next_choice[a] += 1;
        let holder = b_to_a[b];
        if holder == usize::MAX {
            b_to_a[b] = a;
            a_to_b[a] = b;
        } else if b_rank[b][a] < b_rank[b][holder] {
            b_to_a[b] = a;
            a_to_b[a] = b;
            a_to_b[holder] = usize::MAX;
            free.push(holder);
        } else {
            free.push(a);
        }
    }
    Matching { a_to_b, b_to_a }
}

/// All blocking pairs of a matching, by exhaustive scan. Empty iff stable.
pub fn blocking_pairs(smi: &StableMatchingInstance, matching: &Matching) -> Vec<(usize, usize)> {
    let m = smi.m;
    let mut a_rank = vec![vec![0usize; m]; m];
    for (a, prefs) in smi.a_prefs.iter().enumerate() {
        for (pos, &b) in prefs.iter().enumerate() {
            a_rank[a][b] = pos;
        }
    }
    let mut b_rank = vec![vec![0usize; m]; m];
    for (b, prefs) in smi.b_prefs.iter().enumerate() {
        for (pos, &a) in prefs.iter().enumerate() {
            b_rank[b][a] = pos;
        }
    }
    let mut out = Vec::new();
    for a in 0..m {
        for b in 0..m {
            if matching.a_to_b[a] == b {
                continue;
            }
            let a_prefers = a_rank[a][b] < a_rank[a][matching.a_to_b[a]];
            let b_prefers = b_rank[b][a] < b_rank[b][matching.b_to_a[b]];
            if a_prefers && b_prefers {
                out.push((a, b));
            }
        }
    }
    out
}

/// The serial-dictatorship matching: walk the common B-side list and give
/// each proposer its favorite unmatched good. Only valid when all B-side
/// lists are identical; it is then the unique stable matching.
pub fn serial_dictatorship(smi: &StableMatchingInstance) -> Matching {
    let m = smi.m;
    let common = &smi.b_prefs[0];
    let mut a_to_b = vec![usize::MAX; m];
    let mut b_to_a = vec![usize::MAX; m];
    for &a in common {
        let &b = smi.a_prefs[a]
            .iter()
            .find(|&&b| b_to_a[b] == usize::MAX)
            .expect("equal sides leave a good");
        a_to_b[a] = b;
        b_to_a[b] = a;
    }
    Matching { a_to_b, b_to_a }
}

/// Fold a matching of agent copies back into an allocation: good g
/// matched to any copy of agent a lands in a's bundle.
pub fn allocation_from_matching(
    smi: &StableMatchingInstance,
    matching: &Matching,
) -> Allocation {
    let mut bundles = vec![Vec::new(); smi.n_agents];
    for (b, &a) in matching.b_to_a.iter().enumerate() {
        bundles[smi.proposer_agent(a)].push(b);
    }
    Allocation::from_bundles(smi.m, bundles).expect("matching is a partition")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::parexec::Ctx;
    use crate::round_robin::fixed_order_round_robin;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn inst(values: &[&[u64]]) -> Instance {
        Instance::new(values.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn reduction_shapes_the_b_lists() {
        let a = inst(&[&[8, 5, 3, 2], &[5, 8, 2, 3]]);
        let smi = reduce_to_stable_matching(&a, &AgentOrder::identity(2)).unwrap();
        assert_eq!(smi.m, 4);
        assert_eq!(smi.copies, 2);
        // Every good's list: copy 0 of agents (0,1), then copy 1.
        for b in 0..4 {
            assert_eq!(smi.b_prefs[b], vec![0, 1, 2, 3]);
        }
        // Copies reuse the agent's preference list.
        assert_eq!(smi.a_prefs[0], vec![0, 1, 2, 3]);
        assert_eq!(smi.a_prefs[1], vec![1, 0, 3, 2]);
        assert_eq!(smi.a_prefs[2], smi.a_prefs[0]);
        assert_eq!(smi.a_prefs[3], smi.a_prefs[1]);
    }

    #[test]
    fn single_agent_b_lists_count_the_copies() {
        let a = inst(&[&[3, 1, 2]]);
        let smi = reduce_to_stable_matching(&a, &AgentOrder::identity(1)).unwrap();
        for b in 0..3 {
            assert_eq!(smi.b_prefs[b], vec![0, 1, 2]);
        }
    }

    #[test]
    fn zero_rows_complete_by_ascending_id() {
        let a = inst(&[&[0, 0, 0, 0], &[5, 8, 2, 3]]);
        let smi = reduce_to_stable_matching(&a, &AgentOrder::identity(2)).unwrap();
        assert_eq!(smi.a_prefs[0], vec![0, 1, 2, 3]);
    }

    #[test]
    fn identical_b_lists_yield_serial_dictatorship() {
        let a = inst(&[&[8, 5, 3, 2], &[5, 8, 2, 3]]);
        let smi = reduce_to_stable_matching(&a, &AgentOrder::identity(2)).unwrap();
        let gs = gale_shapley(&smi);
        assert_eq!(gs, serial_dictatorship(&smi));
        assert!(blocking_pairs(&smi, &gs).is_empty());
    }

    #[test]
    fn crossed_two_by_two_has_its_unique_matching() {
        // Proposers want different goods and each good wants its suitor
        // back: the matching of first choices is the only stable one.
        let smi = StableMatchingInstance::general(
            vec![vec![0, 1], vec![1, 0]],
            vec![vec![0, 1], vec![1, 0]],
        );
        let gs = gale_shapley(&smi);
        assert!(blocking_pairs(&smi, &gs).is_empty());
        assert_eq!(gs.a_to_b, vec![0, 1]);
        // The only other perfect matching is blocked.
        let other = Matching {
            a_to_b: vec![1, 0],
            b_to_a: vec![1, 0],
        };
        assert!(!blocking_pairs(&smi, &other).is_empty());
    }

    #[test]
    fn random_instances_have_no_blocking_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..500 {
            let m = 8;
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<usize>> {
                (0..m)
                    .map(|_| {
                        let mut p: Vec<usize> = (0..m).collect();
                        p.shuffle(rng);
                        p
                    })
                    .collect()
            };
            let smi = StableMatchingInstance::general(mk(&mut rng), mk(&mut rng));
            let gs = gale_shapley(&smi);
            assert!(gs.a_to_b.iter().all(|&b| b != usize::MAX));
            assert!(blocking_pairs(&smi, &gs).is_empty());
        }
    }

    #[test]
    fn end_to_end_equals_round_robin() {
        let a = inst(&[&[8, 5, 3, 2], &[5, 8, 2, 3]]);
        let order = AgentOrder::identity(2);
        let smi = reduce_to_stable_matching(&a, &order).unwrap();
        let alloc = allocation_from_matching(&smi, &gale_shapley(&smi));
        assert_eq!(alloc.bundle(0), &[0, 2]);
        assert_eq!(alloc.bundle(1), &[1, 3]);
        assert_eq!(
            alloc,
            fixed_order_round_robin(&mut Ctx::new(), &a, &order).unwrap()
        );
    }

    #[test]
    fn single_agent_gets_everything() {
        let a = inst(&[&[3, 1, 2]]);
        let smi = reduce_to_stable_matching(&a, &AgentOrder::identity(1)).unwrap();
        let alloc = allocation_from_matching(&smi, &gale_shapley(&smi));
        assert_eq!(alloc.bundle(0), &[0, 1, 2]);
    }

    #[test]
    fn end_to_end_oracle_sweep() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..100 {
            let n = 2 + (trial % 4);
            let rounds = 1 + (trial % 5);
            let m = n * rounds;
            let instance = generate::dense(n, m, 100, 1000 + trial as u64);
            let mut ids: Vec<usize> = (0..n).collect();
            ids.shuffle(&mut rng);
            let order = AgentOrder::new(ids).unwrap();
            let smi = reduce_to_stable_matching(&instance, &order).unwrap();
            let gs = gale_shapley(&smi);
            assert!(blocking_pairs(&smi, &gs).is_empty());
            assert_eq!(gs, serial_dictatorship(&smi));
            let alloc = allocation_from_matching(&smi, &gs);
            let oracle = fixed_order_round_robin(&mut Ctx::new(), &instance, &order).unwrap();
            assert_eq!(alloc, oracle, "trial {trial}");
        }
    }

    #[test]
    fn divisibility_checked() {
        let a = inst(&[&[1, 2, 3], &[3, 2, 1]]);
        assert!(matches!(
            reduce_to_stable_matching(&a, &AgentOrder::identity(2)),
            Err(Error::NotDivisible { m: 3, n: 2 })
        ));
    }

    #[test]
    fn text_emission_shape() {
        let a = inst(&[&[2, 1], &[1, 2]]);
        let smi = reduce_to_stable_matching(&a, &AgentOrder::identity(2)).unwrap();
        let text = smi.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "SM v1");
        assert_eq!(lines[1], "2");
        assert_eq!(lines.len(), 2 + 2 * 2);
    }
}
