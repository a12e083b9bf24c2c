//! EF1 in m/n rounds of maximum-weight perfect matching.
//!
//! Each round matches every agent to a distinct remaining good, maximizing
//! the total of `m - rank_a(g)` over the matched pairs, then removes the
//! matched goods. Every prefix of rounds is EF1.
//!
//! The matching oracle is a deterministic Hungarian solver (shortest
//! augmenting paths over potentials). Among maximum-weight matchings it
//! returns the lexicographically smallest good-id vector, fixed one agent
//! at a time. The randomized parallel matching subroutine this stands in
//! for is out of scope, so no sublinear depth is claimed here: rounds are
//! inherently sequential and the recorded depth tracks the work.

use crate::model::{Allocation, Good, Instance};
use crate::parexec::Ctx;
use crate::{Error, Result};

const INF: i64 = i64::MAX / 4;

/// Minimum-cost perfect assignment of all rows to distinct columns,
/// rows <= columns. Returns (total cost, column per row).
fn hungarian_min(ctx: &mut Ctx, cost: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let n = cost.len();
    let k = cost[0].len();
    debug_assert!(n <= k);
    // 1-based potentials and matching; p[j] is the row matched to column j.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; k + 1];
    let mut p = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                ctx.tick(1);
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    let mut total = 0;
    for j in 1..=k {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
            total += cost[p[j] - 1][j - 1];
        }
    }
    (total, assignment)
}

// Maximum total weight achievable with some agents already pinned to
// goods. Unpinned agents are matched to the remaining goods optimally.
fn best_total(ctx: &mut Ctx, weights: &[Vec<i64>], pinned: &[Option<usize>]) -> i64 {
    let free_rows: Vec<usize> = (0..weights.len()).filter(|&a| pinned[a].is_none()).collect();
    let pinned_weight: i64 = pinned
        .iter()
        .enumerate()
        .filter_map(|(a, g)| g.map(|g| weights[a][g]))
        .sum();
    if free_rows.is_empty() {
        return pinned_weight;
    }
    let used: Vec<usize> = pinned.iter().filter_map(|&g| g).collect();
    let free_cols: Vec<usize> = (0..weights[0].len())
        .filter(|c| !used.contains(c))
        .collect();
    let maxw = free_rows
        .iter()
        .flat_map(|&a| free_cols.iter().map(move |&c| weights[a][c]))
        .max()
        .unwrap_or(0);
    let cost: Vec<Vec<i64>> = free_rows
        .iter()
        .map(|&a| free_cols.iter().map(|&c| maxw - weights[a][c]).collect())
        .collect();
    let (min_cost, _) = hungarian_min(ctx, &cost);
    pinned_weight + free_rows.len() as i64 * maxw - min_cost
}

/// Maximum-weight perfect matching of n agents to k >= n goods.
///
/// Every agent is matched; the total weight is maximum; among maximum
/// matchings the good-id vector (good of agent 0, of agent 1, ...) is
/// lexicographically smallest.
pub fn max_weight_perfect_matching(ctx: &mut Ctx, weights: &[Vec<i64>]) -> Result<Vec<usize>> {
    let n = weights.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let k = weights[0].len();
    if k < n {
        return Err(Error::TooFewGoods { n, k });
    }
    debug_assert!(weights.iter().all(|row| row.len() == k));

    let target = best_total(ctx, weights, &vec![None; n]);
    let mut pinned: Vec<Option<usize>> = vec![None; n];
    for a in 0..n {
        for g in 0..k {
            if pinned.contains(&Some(g)) {
                continue;
            }
            pinned[a] = Some(g);
            if best_total(ctx, weights, &pinned) == target {
                break;
            }
            pinned[a] = None;
        }
        debug_assert!(pinned[a].is_some(), "some good always completes optimally");
    }
    Ok(pinned.into_iter().map(|g| g.expect("pinned")).collect())
}

/// EF1 by m/n rounds of maximum-weight matching between the agents and
/// the remaining goods.
pub fn solve_matching_rounds(ctx: &mut Ctx, inst: &Instance) -> Result<Allocation> {
    if inst.m() % inst.n() != 0 {
        return Err(Error::NotDivisible {
            m: inst.m(),
            n: inst.n(),
        });
    }
    let n = inst.n();
    let m = inst.m();
    let prefs = inst.preference_lists();
    let mut remaining: Vec<Good> = (0..m).collect();
    let mut alloc = Allocation::empty(n, m);
    for _round in 0..m / n {
        let weights: Vec<Vec<i64>> = (0..n)
            .map(|a| {
                remaining
                    .iter()
                    .map(|&g| {
                        ctx.tick(1);
                        (m - prefs[a].rank[g]) as i64
                    })
                    .collect()
            })
            .collect();
        let matched = max_weight_perfect_matching(ctx, &weights)?;
        let mut taken: Vec<Good> = Vec::with_capacity(n);
        for (a, &idx) in matched.iter().enumerate() {
            let g = remaining[idx];
            alloc.assign(a, g);
            taken.push(g);
        }
        remaining.retain(|g| !taken.contains(g));
    }
    Ok(alloc)
}
