//! Randomized property suites for the engine and both domains.

use proptest::prelude::*;
use rand::SeedableRng;
use swo::coloring::{
    colors_used, construct_coloring, is_proper, solve_coloring, try_grab, ColoringConfig, Graph,
    GrabOutcome,
};
use swo::sched::{
    analyze_schedule, construct_schedule, earliest_start_timing, generate_instance, line_cost,
    min_possible_cost, schedule_cost, GenParams, SchedDomain, SchedInstance,
};
use swo::{
    blame_sort, run, sticky_sort, BlameVector, EngineConfig, Prioritizer, PrioritySequence,
    Restart, SwoRng,
};

fn arb_perm(max_n: usize) -> impl Strategy<Value = Vec<usize>> {
    (1..=max_n).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())
}

proptest! {
    #[test]
    fn blame_sort_preserves_permutation(order in arb_perm(30)) {
        let n = order.len();
        let seq = PrioritySequence::new(order);
        let blame = BlameVector::new((0..n).map(|i| (i * 7 % 11) as f64).collect());
        let out = blame_sort(&seq, &blame);
        let mut sorted = out.order().to_vec();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn blame_sort_is_descending_in_blame(order in arb_perm(30), seed in any::<u64>()) {
        let n = order.len();
        let mut rng = SwoRng::seed_from_u64(seed);
        let blame: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut rng, 0.0..10.0)).collect();
        let seq = PrioritySequence::new(order);
        let out = blame_sort(&seq, &BlameVector::new(blame.clone()));
        for w in out.order().windows(2) {
            prop_assert!(blame[w[0]] >= blame[w[1]]);
        }
    }

    // With all-distinct blames the result is the unique descending order, so
    // the input sequence cannot matter.
    #[test]
    fn blame_sort_distinct_blames_ignore_input_order(
        a in arb_perm(20), seed in any::<u64>()
    ) {
        let n = a.len();
        let mut b = a.clone();
        b.reverse();
        let blame: Vec<f64> = (0..n).map(|i| i as f64 + (seed % 97) as f64).collect();
        let bv = BlameVector::new(blame);
        let out_a = blame_sort(&PrioritySequence::new(a), &bv);
        let out_b = blame_sort(&PrioritySequence::new(b), &bv);
        prop_assert_eq!(out_a.order(), out_b.order());
    }

    #[test]
    fn sticky_sort_preserves_permutation(order in arb_perm(30), seed in any::<u64>()) {
        let n = order.len();
        let seq = PrioritySequence::new(order);
        let blame = BlameVector::new((0..n).map(|i| (i % 5) as f64).collect());
        let mut rng = SwoRng::seed_from_u64(seed);
        let out = sticky_sort(&seq, &blame, n, 0.5, &mut rng);
        let mut sorted = out.order().to_vec();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
    }

    // Without noise an element never moves backward, and never moves forward
    // by more than the movement limit.
    #[test]
    fn sticky_sort_noiseless_moves_bounded(order in arb_perm(25), limit in 1usize..10) {
        let n = order.len();
        let seq = PrioritySequence::new(order);
        let blame = BlameVector::new((0..n).map(|i| (i * 13 % 7) as f64).collect());
        let mut rng = SwoRng::seed_from_u64(0);
        let out = sticky_sort(&seq, &blame, limit, 0.0, &mut rng);
        let before = seq.positions();
        let after = out.positions();
        for id in 0..n {
            prop_assert!(after[id] >= before[id].saturating_sub(limit));
            if blame.get(id) == 0.0 {
                // Zero-blame elements keep their key, so they can only be
                // overtaken, never advance past a same-key earlier element.
                prop_assert!(after[id] >= before[id].saturating_sub(limit));
            }
        }
    }

    #[test]
    fn sticky_sort_zero_blame_is_identity(order in arb_perm(25)) {
        let n = order.len();
        let seq = PrioritySequence::new(order);
        let mut rng = SwoRng::seed_from_u64(1);
        let out = sticky_sort(&seq, &BlameVector::zeros(n), n, 0.0, &mut rng);
        prop_assert_eq!(out.order(), seq.order());
    }
}

/// Recomputes the cost of a schedule from scratch, independently of the
/// incremental bookkeeping inside the constructor.
fn naive_cost(s: &swo::sched::Schedule, instance: &SchedInstance) -> f64 {
    let mut total = 0.0;
    for (line, order) in s.lines.iter().enumerate() {
        total += line_cost(order, line, instance);
    }
    total
}

fn small_instance(seed: u64, n: usize, lines: usize) -> SchedInstance {
    generate_instance(n, lines, &GenParams::default(), seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // The constructor must always emit a structurally valid schedule: every
    // task appears exactly once, on a compatible line, and the start times
    // obey the earliest-start law.
    #[test]
    fn constructed_schedule_is_valid(seed in any::<u64>(), n in 2usize..12, lines in 1usize..4) {
        let instance = small_instance(seed, n, lines);
        let seq = PrioritySequence::identity(n);
        let mut rng = SwoRng::seed_from_u64(seed ^ 0xabcd);
        let s = construct_schedule(&seq, &instance, &mut rng, 0);

        let mut seen = vec![false; n];
        for (line, order) in s.lines.iter().enumerate() {
            for &t in order {
                prop_assert!(!seen[t]);
                seen[t] = true;
                prop_assert_eq!(s.line_of[t], line);
                prop_assert!(instance.tasks[t].durations[line].is_some());
            }
            // Recomputing the timing must reproduce the stored starts when
            // the line has no infeasible adjacency.
            if let Ok(starts) = earliest_start_timing(order, line, &instance) {
                for (&t, &st) in order.iter().zip(starts.iter()) {
                    prop_assert_eq!(s.start[t], st);
                }
            }
        }
        prop_assert!(seen.iter().all(|&b| b));
    }

    // Splitting the total per line and recomputing from scratch must agree
    // with the aggregate breakdown.
    #[test]
    fn schedule_cost_matches_per_line_recompute(seed in any::<u64>(), n in 2usize..12) {
        let instance = small_instance(seed, n, 2);
        let seq = PrioritySequence::identity(n);
        let mut rng = SwoRng::seed_from_u64(seed);
        let s = construct_schedule(&seq, &instance, &mut rng, 0);
        let breakdown = schedule_cost(&s, &instance);
        prop_assert!((breakdown.total - naive_cost(&s, &instance)).abs() < 1e-6);
        prop_assert!(
            (breakdown.total
                - (breakdown.lateness_cost + breakdown.setup_cost + breakdown.infeasibility_penalty))
                .abs()
                < 1e-6
        );
    }

    // Every blame is non-negative and the blame total never exceeds the
    // actual cost (shares are clamped at the per-task floor).
    #[test]
    fn blame_is_clamped_excess(seed in any::<u64>(), n in 2usize..12) {
        let instance = small_instance(seed, n, 2);
        let seq = PrioritySequence::identity(n);
        let mut rng = SwoRng::seed_from_u64(seed);
        let s = construct_schedule(&seq, &instance, &mut rng, 0);
        let blame = analyze_schedule(&s, &instance);
        let total_cost = schedule_cost(&s, &instance).total;
        prop_assert!(blame.as_slice().iter().all(|&b| b >= 0.0));
        prop_assert!(blame.total() <= total_cost + 1e-6);
    }

    // The floor is a true lower bound: no placement of the task alone on its
    // best line can undercut it.
    #[test]
    fn min_possible_cost_is_lower_bound(seed in any::<u64>(), n in 1usize..8) {
        let instance = small_instance(seed, n, 2);
        for t in 0..n {
            let task = &instance.tasks[t];
            let floor = min_possible_cost(task, &instance);
            for line in task.compatible_lines() {
                let starts = earliest_start_timing(&[t], line, &instance).unwrap();
                let completion = starts[0] + task.durations[line].unwrap();
                let late = (completion - task.due).max(0) as f64 * instance.w_late;
                prop_assert!(floor <= late + 1e-9);
            }
        }
    }

    // The per-line inner pass may only improve: with inner iterations on,
    // the constructed schedule is never costlier than without them.
    #[test]
    fn inner_pass_never_worsens(seed in any::<u64>(), n in 3usize..10) {
        let instance = small_instance(seed, n, 2);
        let seq = PrioritySequence::identity(n);
        let mut r0 = SwoRng::seed_from_u64(seed);
        let mut r1 = SwoRng::seed_from_u64(seed);
        let plain = construct_schedule(&seq, &instance, &mut r0, 0);
        let improved = construct_schedule(&seq, &instance, &mut r1, 10);
        prop_assert!(
            schedule_cost(&improved, &instance).total
                <= schedule_cost(&plain, &instance).total + 1e-6
        );
    }
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        proptest::collection::vec(any::<bool>(), pairs.len()).prop_map(move |mask| {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .zip(mask.iter())
                .filter(|(_, &m)| m)
                .map(|(&e, _)| e)
                .collect();
            Graph::from_edges(n, &edges)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Every construction is a proper coloring, whatever the target set size.
    #[test]
    fn construction_is_always_proper(g in arb_graph(12), k in 0usize..6, seed in any::<u64>()) {
        let seq = PrioritySequence::identity(g.node_count());
        let mut rng = SwoRng::seed_from_u64(seed);
        let colors = construct_coloring(&seq, &g, None, k, &ColoringConfig::default(), &mut rng);
        prop_assert!(is_proper(&g, &colors));
        // Greedy with one-level grabbing never needs more than max degree + 1
        // colors.
        prop_assert!(colors_used(&colors) <= g.max_degree() + 1);
    }

    // A grab must leave the partial coloring proper and give the node its
    // reported color.
    #[test]
    fn grab_result_is_conflict_free(g in arb_graph(10), seed in any::<u64>()) {
        let n = g.node_count();
        let k = (g.max_degree() + 1).max(1);
        // Color a prefix greedily, then attempt a grab for the next node.
        let mut colors: Vec<Option<usize>> = vec![None; n];
        let mut rng = SwoRng::seed_from_u64(seed);
        let seq = PrioritySequence::identity(n);
        let full = construct_coloring(&seq, &g, None, k, &ColoringConfig::default(), &mut rng);
        let prefix = n / 2;
        for v in 0..prefix {
            colors[v] = Some(full[v]);
        }
        if prefix < n {
            if let GrabOutcome::Grabbed { color, reassignments } = try_grab(&g, &colors, prefix, k)
            {
                let mut after = colors.clone();
                after[prefix] = Some(color);
                for (w, c) in reassignments {
                    prop_assert!(c < k && c != color);
                    after[w] = Some(c);
                }
                for v in 0..n {
                    if let Some(cv) = after[v] {
                        for &w in g.neighbors(v) {
                            prop_assert!(after[w] != Some(cv));
                        }
                    }
                }
            }
        }
    }

    // Re-constructing with the previous solution as the reuse source and the
    // target set at the solution's own size is a fixed point.
    #[test]
    fn reuse_is_a_fixed_point(g in arb_graph(12), seed in any::<u64>()) {
        let n = g.node_count();
        let seq = PrioritySequence::identity(n);
        let mut rng = SwoRng::seed_from_u64(seed);
        let cfg = ColoringConfig::default();
        let first = construct_coloring(&seq, &g, None, 0, &cfg, &mut rng);
        let k = colors_used(&first);
        let second = construct_coloring(&seq, &g, Some(&first), k, &cfg, &mut rng);
        prop_assert_eq!(second, first);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // The reported best never worsens along a run and equals the minimum of
    // the trajectory.
    #[test]
    fn incumbent_is_trajectory_minimum(seed in any::<u64>()) {
        let instance = small_instance(seed, 8, 2);
        let mut domain = SchedDomain::new(&instance).with_inner_iters(0);
        let mut cfg = EngineConfig::new(seed);
        cfg.max_iterations = 30;
        cfg.trace = true;
        let result = run(&mut domain, &cfg).unwrap();
        let min = result
            .trajectory
            .iter()
            .map(|r| r.score)
            .fold(f64::INFINITY, f64::min);
        prop_assert_eq!(result.best_score, min);
        prop_assert_eq!(result.trajectory.len(), result.iterations_run);
    }

    // Identical seeds give identical runs, for both prioritizers and with
    // restarts on.
    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), sticky in any::<bool>()) {
        let instance = small_instance(seed, 8, 2);
        let mut cfg = EngineConfig::new(seed);
        cfg.max_iterations = 25;
        cfg.restart = Restart::Every(7);
        cfg.prioritizer = if sticky { Prioritizer::Sticky } else { Prioritizer::BlameSort };
        cfg.trace = true;
        let mut d1 = SchedDomain::new(&instance).with_inner_iters(2);
        let mut d2 = SchedDomain::new(&instance).with_inner_iters(2);
        let r1 = run(&mut d1, &cfg).unwrap();
        let r2 = run(&mut d2, &cfg).unwrap();
        prop_assert_eq!(r1.best_score, r2.best_score);
        prop_assert_eq!(r1.iteration_found, r2.iteration_found);
        prop_assert_eq!(r1.trajectory, r2.trajectory);
    }

    #[test]
    fn coloring_solver_output_is_proper(seed in any::<u64>()) {
        let g = Graph::from_edges(
            8,
            &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (4, 5), (5, 6), (6, 7), (7, 4), (2, 4)],
        );
        let mut cfg = EngineConfig::new(seed);
        cfg.max_iterations = 40;
        let result = solve_coloring(&g, &cfg, &ColoringConfig::default()).unwrap();
        prop_assert!(is_proper(&g, &result.best_solution.assignment));
        prop_assert_eq!(
            colors_used(&result.best_solution.assignment) as f64,
            result.best_score
        );
    }
}
