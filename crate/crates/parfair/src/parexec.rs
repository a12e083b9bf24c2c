//! Fork-join execution substrate with work/depth accounting.
//!
//! Work is the total number of declared unit operations (value comparisons,
//! additions, and per-element writes inside parallel primitives); depth is
//! the length of the longest chain of sequential dependencies. Sequential
//! composition adds both counters; a fork-join contributes
//! `work_l + work_r + 1` and `max(depth_l, depth_r) + 1`.
//!
//! The counters are structural: they depend only on the computation tree,
//! never on scheduling, so results and metrics are identical across any
//! number of worker threads. Output assembly (collecting bundles, building
//! return values) is not ticked.

use once_cell::sync::Lazy;

/// Work/depth totals of a computation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    pub work: u64,
    pub depth: u64,
}

impl Metrics {
    /// Sequential composition: both fields add.
    pub fn then(self, next: Metrics) -> Metrics {
        Metrics {
            work: self.work + next.work,
            depth: self.depth + next.depth,
        }
    }

    /// Parallel composition: work adds, depth takes the max, plus one for
    /// the join itself.
    pub fn join(left: Metrics, right: Metrics) -> Metrics {
        Metrics {
            work: left.work + right.work + 1,
            depth: left.depth.max(right.depth) + 1,
        }
    }
}

/// Below this size hint a join runs its two branches on the current
/// thread. The metrics are combined identically on both paths.
const PAR_CUTOFF: usize = 2048;

/// Accounting context threaded through every parallel computation.
///
/// A `Ctx` accumulates the cost of one sequential strand. `join` runs two
/// subcomputations on fresh contexts and folds their cost back in.
#[derive(Debug)]
pub struct Ctx {
    work: u64,
    depth: u64,
    counting: bool,
    parallel: bool,
}

impl Ctx {
    /// Context that counts unit operations and may execute forks in parallel.
    pub fn new() -> Ctx {
        Ctx {
            work: 0,
            depth: 0,
            counting: true,
            parallel: true,
        }
    }

    /// Fast path: no accounting. Results must be identical to `new()`.
    pub fn fast() -> Ctx {
        Ctx {
            counting: false,
            ..Ctx::new()
        }
    }

    /// Counting context that never spawns parallel tasks. Used in tests to
    /// check schedule independence.
    pub fn serial() -> Ctx {
        Ctx {
            parallel: false,
            ..Ctx::new()
        }
    }

    fn fresh(&self) -> Ctx {
        Ctx {
            work: 0,
            depth: 0,
            counting: self.counting,
            parallel: self.parallel,
        }
    }

    /// Record `units` sequential unit operations.
    #[inline]
    pub fn tick(&mut self, units: u64) {
        if self.counting {
            self.work += units;
            self.depth += units;
        }
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            work: self.work,
            depth: self.depth,
        }
    }

    /// Fork-join of two subcomputations. `size_hint` is the approximate
    /// element count underneath; small forks run inline to keep scheduling
    /// overhead out of tight recursions.
    pub fn join<A, B, F, G>(&mut self, size_hint: usize, f: F, g: G) -> (A, B)
    where
        A: Send,
        B: Send,
        F: FnOnce(&mut Ctx) -> A + Send,
        G: FnOnce(&mut Ctx) -> B + Send,
    {
        let mut lc = self.fresh();
        let mut rc = self.fresh();
        let (a, b) = if self.parallel && size_hint >= PAR_CUTOFF {
            let ((a, lc2), (b, rc2)) = rayon::join(
                move || {
                    let r = f(&mut lc);
                    (r, lc)
                },
                move || {
                    let r = g(&mut rc);
                    (r, rc)
                },
            );
            lc = lc2;
            rc = rc2;
            (a, b)
        } else {
            (f(&mut lc), g(&mut rc))
        };
        if self.counting {
            self.work += lc.work + rc.work + 1;
            self.depth += lc.depth.max(rc.depth) + 1;
        }
        (a, b)
    }
}

impl Default for Ctx {
    fn default() -> Self {
        Ctx::new()
    }
}

/// Run two computations as a single fork-join and report the combined cost.
pub fn fork_join<A, B, F, G>(f: F, g: G) -> (A, B, Metrics)
where
    A: Send,
    B: Send,
    F: FnOnce(&mut Ctx) -> A + Send,
    G: FnOnce(&mut Ctx) -> B + Send,
{
    let mut ctx = Ctx::new();
    let (a, b) = ctx.join(usize::MAX, f, g);
    (a, b, ctx.metrics())
}

/// Fill `out[i] = f(offset + i)` with a balanced fork-join recursion.
pub fn par_fill<T, F>(ctx: &mut Ctx, offset: usize, out: &mut [T], f: &F)
where
    T: Send,
    F: Fn(&mut Ctx, usize) -> T + Sync,
{
    match out.len() {
        0 => {}
        1 => out[0] = f(ctx, offset),
        len => {
            let mid = len / 2;
            let (lo, hi) = out.split_at_mut(mid);
            ctx.join(
                len,
                |c| par_fill(c, offset, lo, f),
                |c| par_fill(c, offset + mid, hi, f),
            );
        }
    }
}

/// Balanced parallel map over `0..n`.
pub fn par_map<T, F>(ctx: &mut Ctx, n: usize, f: &F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Ctx, usize) -> T + Sync,
{
    let mut out: Vec<Option<T>> = (0..n).map(|_| None).collect();
    par_fill(ctx, 0, &mut out, &|c, i| Some(f(c, i)));
    out.into_iter().map(|x| x.expect("par_map slot filled")).collect()
}

// In-order layout of a complete recursion tree over k leaves: the subtree
// of any span is one contiguous slice of length 2k-1, with the span's own
// slot at index 2*(k/2)-1 (0 for a leaf).
fn tree_len(k: usize) -> usize {
    2 * k - 1
}

fn root_slot(k: usize) -> usize {
    if k == 1 {
        0
    } else {
        2 * (k / 2) - 1
    }
}

fn upsweep<T, P>(ctx: &mut Ctx, items: &[T], pred: &P, tree: &mut [usize])
where
    T: Sync,
    P: Fn(&T) -> bool + Sync,
{
    if items.len() == 1 {
        ctx.tick(1);
        tree[0] = pred(&items[0]) as usize;
        return;
    }
    let mid = items.len() / 2;
    let (ltree, rest) = tree.split_at_mut(tree_len(mid));
    let (slot, rtree) = rest.split_at_mut(1);
    let (a, b) = items.split_at(mid);
    ctx.join(
        items.len(),
        |c| upsweep(c, a, pred, ltree),
        |c| upsweep(c, b, pred, rtree),
    );
    ctx.tick(1);
    slot[0] = ltree[root_slot(mid)] + rtree[root_slot(items.len() - mid)];
}

fn scatter<T>(ctx: &mut Ctx, items: &[T], tree: &[usize], out: &mut [Option<T>])
where
    T: Clone + Send + Sync,
{
    if items.len() == 1 {
        if tree[0] == 1 {
            ctx.tick(1);
            out[0] = Some(items[0].clone());
        }
        return;
    }
    let mid = items.len() / 2;
    let ltree = &tree[..tree_len(mid)];
    let rtree = &tree[tree_len(mid) + 1..];
    let lcount = ltree[root_slot(mid)];
    let (lo, hi) = out.split_at_mut(lcount);
    let (a, b) = items.split_at(mid);
    ctx.join(
        items.len(),
        |c| scatter(c, a, ltree, lo),
        |c| scatter(c, b, rtree, hi),
    );
}

/// Stable parallel filter: the retained elements keep their relative order.
///
/// Runs an upsweep that counts matches per subtree and a downsweep that
/// scatters matches to their output offsets, so the recorded depth is
/// logarithmic and the work linear in `items.len()`.
pub fn parallel_filter<T, P>(ctx: &mut Ctx, items: &[T], pred: &P) -> Vec<T>
where
    T: Clone + Send + Sync,
    P: Fn(&T) -> bool + Sync,
{
    if items.is_empty() {
        return Vec::new();
    }
    let mut tree = vec![0usize; tree_len(items.len())];
    upsweep(ctx, items, pred, &mut tree);
    let total = tree[root_slot(items.len())];
    let mut out: Vec<Option<T>> = vec![None; total];
    scatter(ctx, items, &tree, &mut out);
    out.into_iter().map(|x| x.expect("scatter slot filled")).collect()
}

static POOL: Lazy<Option<rayon::ThreadPool>> = Lazy::new(|| {
    std::env::var("PARFAIR_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&k| k > 0)
        .map(|k| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .expect("building worker pool")
        })
});

/// Run `f` under the worker pool configured by `PARFAIR_THREADS`.
///
/// Results never depend on the pool size; the variable only caps physical
/// parallelism. Without it the default rayon pool is used.
pub fn install<R, F>(f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match &*POOL {
        Some(pool) => pool.install(f),
        None => f(),
    }
}
