//! Core data model: instances, preference lists, allocations, EF(k)
//! verification, envy graphs and envy-cycle elimination.
//!
//! Valuations are nonnegative integers so every comparison is exact, and
//! ties are broken by one global rule (higher value first, then lower good
//! id) that all algorithms in the crate share.

use std::fmt::Write as _;

use crate::{Error, Result};

pub type Agent = usize;
pub type Good = usize;

/// Largest admissible per-good value; keeps any signed 128-bit sum over
/// 2^20 goods far from overflow.
pub const MAX_VALUE: u64 = 1 << 40;

/// An allocation instance: `n` agents, `m` goods, and an n-by-m matrix of
/// nonnegative integer values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    m: usize,
    values: Vec<Vec<u64>>,
}

impl Instance {
    pub fn new(values: Vec<Vec<u64>>) -> Result<Instance> {
        let n = values.len();
        if n == 0 {
            return Err(Error::BadInstance("need at least one agent".into()));
        }
        let m = values[0].len();
        if m == 0 {
            return Err(Error::BadInstance("need at least one good".into()));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != m {
                return Err(Error::BadInstance(format!(
                    "agent {i} has {} values, expected {m}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|&&v| v > MAX_VALUE) {
                return Err(Error::BadInstance(format!(
                    "value {v} exceeds the 2^40 bound"
                )));
            }
        }
        Ok(Instance { n, m, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn value(&self, agent: Agent, good: Good) -> u64 {
        self.values[agent][good]
    }

    pub fn row(&self, agent: Agent) -> &[u64] {
        &self.values[agent]
    }

    /// Agents with positive value for `good`, ascending.
    pub fn support(&self, good: Good) -> Vec<Agent> {
        (0..self.n).filter(|&a| self.values[a][good] > 0).collect()
    }

    /// Restriction to a subset of agents and goods. Row `i` of the result
    /// is `agents[i]`, column `j` is `goods[j]`.
    pub fn restrict(&self, agents: &[Agent], goods: &[Good]) -> Instance {
        let values = agents
            .iter()
            .map(|&a| goods.iter().map(|&g| self.values[a][g]).collect())
            .collect();
        Instance {
            n: agents.len(),
            m: goods.len(),
            values,
        }
    }

    /// One preference list per agent.
    pub fn preference_lists(&self) -> Vec<PreferenceList> {
        (0..self.n).map(|a| PreferenceList::build(self, a)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "EF1-INSTANCE v1");
        let _ = writeln!(s, "{} {}", self.n, self.m);
        for row in &self.values {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Instance> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
        if header.trim() != "EF1-INSTANCE v1" {
            return Err(Error::Parse(format!("bad instance header: {header:?}")));
        }
        let (n, m) = parse_dims(lines.next())?;
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing value row for agent {i}")))?;
            let row = parse_row::<u64>(line)?;
            if row.len() != m {
                return Err(Error::Parse(format!(
                    "agent {i} has {} values, expected {m}",
                    row.len()
                )));
            }
            values.push(row);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Parse("trailing content after value rows".into()));
        }
        Instance::new(values)
    }
}

fn parse_dims(line: Option<&str>) -> Result<(usize, usize)> {
    let line = line.ok_or_else(|| Error::Parse("missing dimension line".into()))?;
    let dims = parse_row::<usize>(line)?;
    if dims.len() != 2 {
        return Err(Error::Parse(format!("expected `<n> <m>`, got {line:?}")));
    }
    Ok((dims[0], dims[1]))
}

fn parse_row<T: std::str::FromStr>(line: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| Error::Parse(format!("bad integer {tok:?}")))
        })
        .collect()
}

/// Pad with all-zero goods until the good count is a multiple of `n`.
/// Original good ids are preserved.
pub fn pad_instance(inst: &Instance) -> Instance {
    let n = inst.n;
    let m_padded = n * inst.m.div_ceil(n);
    if m_padded == inst.m {
        return inst.clone();
    }
    let values = inst
        .values
        .iter()
        .map(|row| {
            let mut row = row.clone();
            row.resize(m_padded, 0);
            row
        })
        .collect();
    Instance {
        n,
        m: m_padded,
        values,
    }
}

/// An agent's goods ordered by descending value, ties broken by ascending
/// good id; `rank` is the inverse map (1-based position of each good).
#[derive(Clone, Debug)]
pub struct PreferenceList {
    pub agent: Agent,
    pub order: Vec<Good>,
    pub rank: Vec<usize>,
}

impl PreferenceList {
    pub fn build(inst: &Instance, agent: Agent) -> PreferenceList {
        let mut order: Vec<Good> = (0..inst.m).collect();
        order.sort_by_key(|&g| (std::cmp::Reverse(inst.value(agent, g)), g));
        let mut rank = vec![0usize; inst.m];
        for (pos, &g) in order.iter().enumerate() {
            rank[g] = pos + 1;
        }
        PreferenceList { agent, order, rank }
    }
}

/// Exact value of a set of goods for one agent.
pub fn bundle_value(inst: &Instance, agent: Agent, goods: &[Good]) -> Result<u64> {
    let mut total = 0u64;
    for &g in goods {
        if g >= inst.m {
            return Err(Error::GoodOutOfRange { good: g, m: inst.m });
        }
        total += inst.value(agent, g);
    }
    Ok(total)
}

/// A partition of a subset of the goods into per-agent bundles, each kept
/// in ascending good-id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    m: usize,
    bundles: Vec<Vec<Good>>,
}

impl Allocation {
    pub fn empty(n: usize, m: usize) -> Allocation {
        Allocation {
            m,
            bundles: vec![Vec::new(); n],
        }
    }

    /// Validates range and disjointness; sorts each bundle.
    pub fn from_bundles(m: usize, mut bundles: Vec<Vec<Good>>) -> Result<Allocation> {
        let mut owner = vec![false; m];
        for bundle in &mut bundles {
            bundle.sort_unstable();
            for &g in bundle.iter() {
                if g >= m {
                    return Err(Error::GoodOutOfRange { good: g, m });
                }
                if owner[g] {
                    return Err(Error::OverlappingBundles { good: g });
                }
                owner[g] = true;
            }
        }
        Ok(Allocation { m, bundles })
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bundle(&self, agent: Agent) -> &[Good] {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[Vec<Good>] {
        &self.bundles
    }

    /// Insert one good, keeping the bundle sorted.
    pub fn assign(&mut self, agent: Agent, good: Good) {
        debug_assert!(good < self.m);
        let bundle = &mut self.bundles[agent];
        let pos = bundle.partition_point(|&g| g < good);
        bundle.insert(pos, good);
    }

    pub fn assigned_count(&self) -> usize {
        self.bundles.iter().map(Vec::len).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.assigned_count() == self.m
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "EF1-ALLOC v1");
        let _ = writeln!(s, "{} {}", self.bundles.len(), self.m);
        for bundle in &self.bundles {
            let line: Vec<String> = bundle.iter().map(|g| g.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Allocation> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
        if header.trim() != "EF1-ALLOC v1" {
            return Err(Error::Parse(format!("bad allocation header: {header:?}")));
        }
        let (n, m) = parse_dims(lines.next())?;
        let mut bundles = Vec::with_capacity(n);
        for _ in 0..n {
            // An empty line is a valid (empty) bundle.
            let line = lines.next().unwrap_or("");
            bundles.push(parse_row::<usize>(line)?);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Parse("trailing content after bundles".into()));
        }
        Allocation::from_bundles(m, bundles)
    }
}

/// Pairwise envy counts: `counts[i][j]` is the least number of goods that
/// must be removed from agent j's bundle before agent i stops envying it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvyReport {
    pub counts: Vec<Vec<usize>>,
    pub overall_k: usize,
}

impl EnvyReport {
    pub fn is_ef1(&self) -> bool {
        self.overall_k <= 1
    }

    pub fn is_efk(&self, k: usize) -> bool {
        self.overall_k <= k
    }
}

/// Compute the envy report of an allocation.
///
/// For each ordered pair the count removes goods of the envied bundle in
/// descending value (for the envious agent) until the envy disappears;
/// under additive valuations this greedy witness is optimal.
pub fn verify_efk(inst: &Instance, alloc: &Allocation) -> Result<EnvyReport> {
    if alloc.n() != inst.n || alloc.m() != inst.m {
        return Err(Error::ShapeMismatch {
            an: alloc.n(),
            am: alloc.m(),
            n: inst.n,
            m: inst.m,
        });
    }
    // Re-validate disjointness: allocations crossing a file boundary may
    // not have gone through from_bundles.
    let mut owner = vec![false; inst.m];
    for bundle in alloc.bundles() {
        for &g in bundle {
            if g >= inst.m {
                return Err(Error::GoodOutOfRange { good: g, m: inst.m });
            }
            if owner[g] {
                return Err(Error::OverlappingBundles { good: g });
            }
            owner[g] = true;
        }
    }

    let n = inst.n;
    let mut counts = vec![vec![0usize; n]; n];
    let mut overall_k = 0;
    for i in 0..n {
        let own: u64 = alloc.bundle(i).iter().map(|&g| inst.value(i, g)).sum();
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut others: Vec<u64> =
                alloc.bundle(j).iter().map(|&g| inst.value(i, g)).collect();
            others.sort_unstable_by(|a, b| b.cmp(a));
            let mut remaining: u64 = others.iter().sum();
            let mut k = 0;
            while own < remaining {
                remaining -= others[k];
                k += 1;
            }
            counts[i][j] = k;
            overall_k = overall_k.max(k);
        }
    }
    Ok(EnvyReport { counts, overall_k })
}

/// Directed envy relation over a subset of the agents: an edge (i, j)
/// means `v_i(A_i) < v_i(A_j)`.
#[derive(Clone, Debug)]
pub struct EnvyGraph {
    agents: Vec<Agent>,
    adj: Vec<Vec<usize>>,
}

impl EnvyGraph {
    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn edges(&self) -> Vec<(Agent, Agent)> {
        let mut out = Vec::new();
        for (i, targets) in self.adj.iter().enumerate() {
            for &j in targets {
                out.push((self.agents[i], self.agents[j]));
            }
        }
        out
    }

    pub fn has_edge(&self, from: Agent, to: Agent) -> bool {
        let Some(i) = self.agents.iter().position(|&a| a == from) else {
            return false;
        };
        let Some(j) = self.agents.iter().position(|&a| a == to) else {
            return false;
        };
        self.adj[i].contains(&j)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Kahn's algorithm, always picking the available vertex with the
    /// smallest agent id. `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<Agent>> {
        let k = self.agents.len();
        let mut indeg = vec![0usize; k];
        for targets in &self.adj {
            for &j in targets {
                indeg[j] += 1;
            }
        }
        let mut done = vec![false; k];
        let mut order = Vec::with_capacity(k);
        for _ in 0..k {
            let next = (0..k).find(|&i| !done[i] && indeg[i] == 0)?;
            done[next] = true;
            order.push(self.agents[next]);
            for &j in &self.adj[next] {
                indeg[j] -= 1;
            }
        }
        Some(order)
    }

    /// First cycle found by depth-first search, with roots and neighbors
    /// visited in ascending id order. `None` iff acyclic.
    fn find_cycle(&self) -> Option<Vec<usize>> {
        const UNSEEN: u8 = 0;
        const ACTIVE: u8 = 1;
        const DONE: u8 = 2;
        let k = self.agents.len();
        let mut state = vec![UNSEEN; k];
        let mut stack: Vec<usize> = Vec::new();

        fn dfs(
            v: usize,
            adj: &[Vec<usize>],
            state: &mut [u8],
            stack: &mut Vec<usize>,
        ) -> Option<Vec<usize>> {
            state[v] = ACTIVE;
            stack.push(v);
            for &w in &adj[v] {
                if state[w] == ACTIVE {
                    let pos = stack.iter().position(|&x| x == w).expect("on stack");
                    return Some(stack[pos..].to_vec());
                }
                if state[w] == UNSEEN {
                    if let Some(cycle) = dfs(w, adj, state, stack) {
                        return Some(cycle);
                    }
                }
            }
            stack.pop();
            state[v] = DONE;
            None
        }

        for root in 0..k {
            if state[root] == UNSEEN {
                if let Some(cycle) = dfs(root, &self.adj, &mut state, &mut stack) {
                    return Some(cycle);
                }
            }
        }
        None
    }
}

/// Envy graph of `alloc` restricted to `agents`.
pub fn build_envy_graph(inst: &Instance, alloc: &Allocation, agents: &[Agent]) -> EnvyGraph {
    let agents: Vec<Agent> = {
        let mut a = agents.to_vec();
        a.sort_unstable();
        a.dedup();
        a
    };
    let own: Vec<u64> = agents
        .iter()
        .map(|&a| alloc.bundle(a).iter().map(|&g| inst.value(a, g)).sum())
        .collect();
    let adj = agents
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            agents
                .iter()
                .enumerate()
                .filter(|&(j, &b)| {
                    i != j && {
                        let theirs: u64 =
                            alloc.bundle(b).iter().map(|&g| inst.value(a, g)).sum();
                        own[i] < theirs
                    }
                })
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    EnvyGraph { agents, adj }
}

/// Rotate bundles along envy cycles within `agents` until the induced envy
/// graph is acyclic. Bundles outside `agents` are untouched.
///
/// Each rotation hands every agent on the cycle a strictly preferred
/// bundle, so the total utility rises and the loop terminates.
pub fn eliminate_envy_cycles(
    inst: &Instance,
    alloc: &Allocation,
    agents: &[Agent],
) -> Allocation {
    let mut current = alloc.clone();
    loop {
        let graph = build_envy_graph(inst, &current, agents);
        let Some(cycle) = graph.find_cycle() else {
            return current;
        };
        // cycle[a] envies cycle[a+1]: give each member the next bundle.
        let members: Vec<Agent> = cycle.iter().map(|&i| graph.agents[i]).collect();
        let mut bundles = current.bundles().to_vec();
        for (idx, &a) in members.iter().enumerate() {
            let next = members[(idx + 1) % members.len()];
            bundles[a] = current.bundle(next).to_vec();
        }
        current = Allocation::from_bundles(current.m(), bundles).expect("rotation keeps disjointness");
    }
}
