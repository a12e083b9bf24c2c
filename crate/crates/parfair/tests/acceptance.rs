//! Acceptance suite: one test per shipping criterion, each ending in a
//! single PASS line with the measured numbers. Run with
//! `cargo test -p parfair --test acceptance -- --nocapture` to see them.

use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use parfair::cc_reduce::{
    allocation_from_matching, blocking_pairs, gale_shapley, reduce_to_stable_matching,
};
use parfair::const_agents::{solve_const_agents, DEFAULT_NODE_BUDGET};
use parfair::efk_alloc::{ef_sqrt_bound, solve_ef_eps, solve_ef_sqrt};
use parfair::generate;
use parfair::graph_alloc::solve_graph;
use parfair::hypergraph_alloc::{
    color_line_graph, induced_hypergraph, solve_hypergraph, solve_hypergraph_traced,
    DEFAULT_MAX_RANK,
};
use parfair::matching_alloc::{max_weight_perfect_matching, solve_matching_rounds};
use parfair::model::{verify_efk, Allocation, Good, Instance};
use parfair::parexec::Ctx;
use parfair::round_robin::{fixed_order_round_robin, AgentOrder};
use parfair::two_agent::{compute_gaps, extract_allocation, solve_two_agent};

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::MAX, f64::min);
    let hi = values.iter().cloned().fold(0.0f64, f64::max);
    hi / lo
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx: f64 = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my: f64 = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    cov / var
}

#[test]
fn criterion_01_two_agent_ef1_with_witness() {
    let started = Instant::now();
    for trial in 0..1000u64 {
        let m = 2 + (trial as usize * 7919) % 63; // 2..=64
        let inst = generate::dense(2, m, 100, trial);
        let table = compute_gaps(&mut Ctx::new(), &inst, 0).unwrap();
        let alloc = extract_allocation(&mut Ctx::new(), &table, 0);
        let report = verify_efk(&inst, &alloc).unwrap();
        assert!(report.is_ef1(), "trial {trial}: overall_k={}", report.overall_k);
        assert_eq!(report.counts[0][1], 0, "trial {trial}: root first mover envies");

        // One-good witness: dropping the first-choice leaf removes all of
        // agent 1's envy.
        let star = table.first_choice_leaf(0);
        assert!(alloc.bundle(0).contains(&star), "trial {trial}");
        let own: u64 = alloc.bundle(1).iter().map(|&g| inst.value(1, g)).sum();
        let reduced: u64 = alloc
            .bundle(0)
            .iter()
            .filter(|&&g| g != star)
            .map(|&g| inst.value(1, g))
            .sum();
        assert!(own >= reduced, "trial {trial}: witness fails");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 10, "took {elapsed:?}, budget 10s");
    println!("criterion 01 PASS: 1000/1000 two-agent runs EF1 with zero first-mover envy and a one-good witness ({elapsed:?})");
}

#[test]
fn criterion_02_two_agent_scaling() {
    let mut depth_ratios = Vec::new();
    let mut work_ratios = Vec::new();
    for exp in 4u32..=16 {
        let m = 1usize << exp;
        let values: Vec<Vec<u64>> = (0..2)
            .map(|a| (0..m).map(|g| ((g * 31 + a * 17 + 5) % 100) as u64).collect())
            .collect();
        let inst = Instance::new(values).unwrap();
        let mut ctx = Ctx::new();
        solve_two_agent(&mut ctx, &inst).unwrap();
        let metrics = ctx.metrics();
        depth_ratios.push(metrics.depth as f64 / exp as f64);
        work_ratios.push(metrics.work as f64 / m as f64);
    }
    let ds = spread(&depth_ratios);
    let ws = spread(&work_ratios);
    assert!(ds < 2.0, "depth/log2(m) spread {ds}");
    assert!(ws < 2.0, "work/m spread {ws}");
    println!("criterion 02 PASS: over m=2^4..2^16 depth/log2(m) spread {ds:.3}, work/m spread {ws:.3} (both < 2)");
}

#[test]
fn criterion_03_const_agents_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut checked = 0usize;
    for &(n, m_max) in &[(2usize, 24usize), (3, 15), (4, 12)] {
        for trial in 0..200u64 {
            let rounds_max = m_max / n;
            let rounds = 1 + (rng.next_u64() as usize) % rounds_max;
            let m = n * rounds;
            let inst = generate::dense(n, m, 100, rng.next_u64());
            let mut ids: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                ids.swap(i, (rng.next_u64() as usize) % (i + 1));
            }
            let order = AgentOrder::new(ids).unwrap();
            let fast =
                solve_const_agents(&mut Ctx::new(), &inst, &order, DEFAULT_NODE_BUDGET).unwrap();
            let slow = fixed_order_round_robin(&mut Ctx::new(), &inst, &order).unwrap();
            assert_eq!(fast, slow, "n={n} trial={trial}: outputs differ");
            assert_eq!(fast.to_text(), slow.to_text());
            checked += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget 60s");
    println!("criterion 03 PASS: {checked}/600 reachability-graph runs bitwise equal to sequential Round Robin ({elapsed:?})");
}

#[test]
fn criterion_04_const_agents_work_slope() {
    let mut points = Vec::new();
    for &m in &[8usize, 12, 16, 20] {
        let inst = generate::dense(2, m, 100, 404 + m as u64);
        let mut ctx = Ctx::new();
        solve_const_agents(&mut ctx, &inst, &AgentOrder::identity(2), DEFAULT_NODE_BUDGET)
            .unwrap();
        points.push(((m as f64).ln(), (ctx.metrics().work as f64).ln()));
    }
    let slope = least_squares_slope(&points);
    assert!(
        (slope - 3.0).abs() <= 0.3,
        "log-log slope {slope}, expected 3 +- 0.3"
    );
    println!("criterion 04 PASS: const-agents work vs m log-log slope {slope:.3} (3 +- 0.3 at n=2)");
}

#[test]
fn criterion_05_graph_instances() {
    // Part 1: 500 random graph instances are all EF1.
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for trial in 0..500u64 {
        let n = 2 + (rng.next_u64() as usize) % 9; // 2..=10
        let m = 1 + (rng.next_u64() as usize) % 200;
        let inst = generate::graph(n, m, 100, rng.next_u64());
        let alloc = solve_graph(&mut Ctx::new(), &inst).unwrap();
        assert!(alloc.is_complete());
        let report = verify_efk(&inst, &alloc).unwrap();
        assert!(report.is_ef1(), "trial {trial}: overall_k={}", report.overall_k);
    }

    // Part 2: depth stays flat as n doubles with fixed per-pair load.
    // Agents come in disjoint pairs (2i, 2i+1) sharing 64 goods each.
    let per_pair = 64usize;
    let mut depths = Vec::new();
    for &n in &[2usize, 4, 8] {
        let pairs = n / 2;
        let m = pairs * per_pair;
        let mut values = vec![vec![0u64; m]; n];
        for p in 0..pairs {
            for off in 0..per_pair {
                let g = p * per_pair + off;
                values[2 * p][g] = ((g * 13 + 7) % 100 + 1) as u64;
                values[2 * p + 1][g] = ((g * 29 + 3) % 100 + 1) as u64;
            }
        }
        let inst = Instance::new(values).unwrap();
        let mut ctx = Ctx::new();
        solve_graph(&mut ctx, &inst).unwrap();
        depths.push(ctx.metrics().depth as f64);
    }
    let s = spread(&depths);
    assert!(s < 2.0, "depth spread {s} across n=2,4,8: {depths:?}");
    println!("criterion 05 PASS: 500/500 graph instances EF1; depth spread {s:.3} across n=2,4,8 at fixed per-pair load");
}

#[test]
fn criterion_06_hypergraph_instances() {
    let mut solved = 0u32;
    let mut seed = 0u64;
    while solved < 300 {
        seed += 1;
        let Ok(inst) = generate::hypergraph(12, 60, 100, 3, 6, 606 + seed) else {
            continue;
        };
        let h = induced_hypergraph(&inst);
        assert!(h.rank <= 3);
        assert!(h.max_degree <= 6);

        let coloring = color_line_graph(&mut Ctx::new(), &h);
        assert!(
            coloring.palette <= h.max_degree + 1,
            "palette {} > degree {} + 1",
            coloring.palette,
            h.max_degree
        );
        for e in 0..h.edges.len() {
            for &f in h.intersecting(e) {
                assert_ne!(coloring.colors[e], coloring.colors[f], "improper coloring");
            }
        }

        let (alloc, snapshots) =
            solve_hypergraph_traced(&mut Ctx::new(), &inst, DEFAULT_MAX_RANK, DEFAULT_NODE_BUDGET)
                .unwrap();
        for (class, snapshot) in snapshots.iter().enumerate() {
            let report = verify_efk(&inst, snapshot).unwrap();
            assert!(
                report.is_ef1(),
                "seed {seed}: prefix after class {class} not EF1"
            );
        }
        assert!(alloc.is_complete());
        assert!(verify_efk(&inst, &alloc).unwrap().is_ef1(), "seed {seed}");
        solved += 1;
    }
    println!("criterion 06 PASS: 300/300 rank-3 hypergraph instances EF1 with EF1 per-class prefixes and proper <= deg+1 colorings");
}

#[test]
fn criterion_07_matching_rounds() {
    // Part 1: every prefix allocation is EF1 on 500 random instances.
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for trial in 0..500u64 {
        let n = 2 + (rng.next_u64() as usize) % 5; // 2..=6
        let rounds = 1 + (rng.next_u64() as usize) % (36 / n);
        let m = n * rounds;
        let inst = generate::dense(n, m, 100, rng.next_u64());
        let prefs = inst.preference_lists();
        let mut remaining: Vec<Good> = (0..m).collect();
        let mut alloc = Allocation::empty(n, m);
        for round in 0..rounds {
            let weights: Vec<Vec<i64>> = (0..n)
                .map(|a| {
                    remaining
                        .iter()
                        .map(|&g| (m - prefs[a].rank[g]) as i64)
                        .collect()
                })
                .collect();
            let matched = max_weight_perfect_matching(&mut Ctx::new(), &weights).unwrap();
            let taken: Vec<Good> = matched.iter().map(|&i| remaining[i]).collect();
            for (a, &g) in taken.iter().enumerate() {
                alloc.assign(a, g);
            }
            remaining.retain(|g| !taken.contains(g));
            let report = verify_efk(&inst, &alloc).unwrap();
            assert!(
                report.is_ef1(),
                "trial {trial} round {round}: prefix not EF1"
            );
        }
        assert_eq!(alloc, solve_matching_rounds(&mut Ctx::new(), &inst).unwrap());
    }

    // Part 2: the oracle equals brute force on 5x8 matrices.
    let mut rng = ChaCha8Rng::seed_from_u64(708);
    for trial in 0..500 {
        let weights: Vec<Vec<i64>> = (0..5)
            .map(|_| (0..8).map(|_| (rng.next_u64() % 40) as i64).collect())
            .collect();
        let got = max_weight_perfect_matching(&mut Ctx::new(), &weights).unwrap();
        let got_total: i64 = got.iter().enumerate().map(|(a, &g)| weights[a][g]).sum();
        let best = brute_force_max_weight(&weights);
        assert_eq!(got_total, best, "trial {trial}");
    }
    println!("criterion 07 PASS: 500/500 runs prefix-EF1 after every round; 500/500 5x8 matchings equal brute-force max weight");
}

fn brute_force_max_weight(weights: &[Vec<i64>]) -> i64 {
    fn rec(a: usize, weights: &[Vec<i64>], used: &mut [bool]) -> i64 {
        if a == weights.len() {
            return 0;
        }
        let mut best = i64::MIN;
        for g in 0..used.len() {
            if !used[g] {
                used[g] = true;
                best = best.max(weights[a][g] + rec(a + 1, weights, used));
                used[g] = false;
            }
        }
        best
    }
    rec(0, weights, &mut vec![false; weights[0].len()])
}

#[test]
fn criterion_08_ef_sqrt_statistical_bound() {
    let inst = generate::dense(16, 2048, 1000, 808);
    let bound = ef_sqrt_bound(2048, 16);
    let mut over = 0usize;
    for seed in 0..500u64 {
        let alloc = solve_ef_sqrt(&mut Ctx::new(), &inst, seed).unwrap();
        let report = verify_efk(&inst, &alloc).unwrap();
        if report.overall_k > bound {
            over += 1;
        }
    }
    let frac = over as f64 / 500.0;
    assert!(frac <= 0.02, "{over}/500 runs exceeded K={bound}");
    println!("criterion 08 PASS: {over}/500 runs exceeded K={bound} (threshold 2%)");
}

#[test]
fn criterion_09_ef_eps_deterministic_bound() {
    let mut checked = 0usize;
    for &n in &[2usize, 4] {
        for m in (n..=64).step_by(n) {
            let inst = generate::dense(n, m, 100, (909 + n * 1000 + m) as u64);
            for k in 1..=m / n {
                if m % (n * k) != 0 {
                    continue;
                }
                let alloc = solve_ef_eps(&mut Ctx::new(), &inst, k, 0).unwrap();
                let report = verify_efk(&inst, &alloc).unwrap();
                let parts = m / (n * k);
                assert!(
                    report.overall_k <= parts,
                    "n={n} m={m} k={k}: overall_k={} > {parts}",
                    report.overall_k
                );
                checked += 1;
            }
        }
    }
    println!("criterion 09 PASS: overall_k <= m/(nk) on {checked}/{checked} valid (n, m, k) configurations");
}

#[test]
fn criterion_10_cc_reduction_end_to_end() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for trial in 0..300u64 {
        let n = 1 + (rng.next_u64() as usize) % 5; // 1..=5
        let rounds = 1 + (rng.next_u64() as usize) % (30 / n);
        let m = n * rounds;
        let inst = generate::dense(n, m, 100, rng.next_u64());
        let mut ids: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            ids.swap(i, (rng.next_u64() as usize) % (i + 1));
        }
        let order = AgentOrder::new(ids).unwrap();

        let smi = reduce_to_stable_matching(&inst, &order).unwrap();
        let matching = gale_shapley(&smi);
        assert!(
            blocking_pairs(&smi, &matching).is_empty(),
            "trial {trial}: unstable"
        );
        let alloc = allocation_from_matching(&smi, &matching);
        let oracle = fixed_order_round_robin(&mut Ctx::new(), &inst, &order).unwrap();
        assert_eq!(alloc, oracle, "trial {trial}");
        assert_eq!(alloc.to_text(), oracle.to_text());
    }
    println!("criterion 10 PASS: 300/300 reduce -> Gale-Shapley -> convert runs bitwise equal to Round Robin, zero blocking pairs");
}

#[test]
fn criterion_11_random_walk_concentration() {
    // c=3, d=N: an N-step fair +-1 walk goes below -sqrt(3 N ln(N^2))
    // with probability at most N^-6; with 1e5 trials the tolerance
    // 10*(dN)^-3 allows zero observed violations.
    let trials = 100_000u64;
    for &n_steps in &[64usize, 256, 1024] {
        let threshold = {
            let nn = n_steps as f64;
            (3.0 * nn * (nn * nn).ln()).sqrt()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1111 + n_steps as u64);
        let mut violations = 0u64;
        for _ in 0..trials {
            let mut position = 0i64;
            let mut low = 0i64;
            let mut remaining = n_steps;
            while remaining > 0 {
                let mut bits = rng.next_u64();
                for _ in 0..remaining.min(64) {
                    position += if bits & 1 == 1 { 1 } else { -1 };
                    bits >>= 1;
                    if position < low {
                        low = position;
                    }
                }
                remaining -= remaining.min(64);
            }
            if (low as f64) < -threshold {
                violations += 1;
            }
        }
        let freq = violations as f64 / trials as f64;
        let allowed = 10.0 * ((n_steps as f64) * (n_steps as f64)).powi(-3);
        assert!(
            freq <= allowed,
            "N={n_steps}: {violations} violations, freq {freq} > {allowed}"
        );
    }
    println!("criterion 11 PASS: 0 of 3x100000 walks crossed -sqrt(3N ln(N^2)) at N=64,256,1024 (allowed freq 10*(dN)^-3)");
}

#[test]
fn criterion_12_determinism_across_worker_counts() {
    let pools: Vec<rayon::ThreadPool> = [1usize, 2, 8]
        .iter()
        .map(|&threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
        })
        .collect();

    let mut cases: Vec<(&str, Box<dyn Fn() -> String + Sync>)> = Vec::new();
    let dense2 = generate::dense(2, 512, 100, 1212);
    cases.push((
        "two-agent",
        Box::new(move || {
            solve_two_agent(&mut Ctx::new(), &dense2).unwrap().to_text()
        }),
    ));
    let graph_inst = generate::graph(8, 120, 100, 1213);
    cases.push((
        "graph",
        Box::new(move || solve_graph(&mut Ctx::new(), &graph_inst).unwrap().to_text()),
    ));
    let rr_inst = generate::dense(4, 32, 100, 1214);
    cases.push((
        "rr",
        Box::new(move || {
            fixed_order_round_robin(&mut Ctx::new(), &rr_inst, &AgentOrder::identity(4))
                .unwrap()
                .to_text()
        }),
    ));
    let ca_inst = generate::dense(3, 12, 100, 1215);
    cases.push((
        "const-agents",
        Box::new(move || {
            solve_const_agents(
                &mut Ctx::new(),
                &ca_inst,
                &AgentOrder::new(vec![2, 0, 1]).unwrap(),
                DEFAULT_NODE_BUDGET,
            )
            .unwrap()
            .to_text()
        }),
    ));
    let hyper_inst = generate::hypergraph(8, 24, 100, 3, 5, 1216).unwrap();
    cases.push((
        "hypergraph",
        Box::new(move || {
            solve_hypergraph(&mut Ctx::new(), &hyper_inst, DEFAULT_MAX_RANK, DEFAULT_NODE_BUDGET)
                .unwrap()
                .to_text()
        }),
    ));
    let match_inst = generate::dense(4, 24, 100, 1217);
    cases.push((
        "matching",
        Box::new(move || {
            solve_matching_rounds(&mut Ctx::new(), &match_inst)
                .unwrap()
                .to_text()
        }),
    ));
    let sqrt_inst = generate::dense(8, 64, 100, 1218);
    cases.push((
        "ef-sqrt",
        Box::new(move || solve_ef_sqrt(&mut Ctx::new(), &sqrt_inst, 7).unwrap().to_text()),
    ));
    let eps_inst = generate::dense(4, 32, 100, 1219);
    cases.push((
        "ef-eps",
        Box::new(move || solve_ef_eps(&mut Ctx::new(), &eps_inst, 2, 9).unwrap().to_text()),
    ));

    for (name, solve) in &cases {
        let outputs: Vec<String> = pools.iter().map(|pool| pool.install(solve)).collect();
        assert_eq!(outputs[0], outputs[1], "{name}: 1 vs 2 threads");
        assert_eq!(outputs[0], outputs[2], "{name}: 1 vs 8 threads");
    }
    println!("criterion 12 PASS: 8/8 solvers byte-identical across 1, 2 and 8 worker threads");
}
