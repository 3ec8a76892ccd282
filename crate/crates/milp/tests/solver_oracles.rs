mod common;

use common::{dense_rows, exhaustive_optimum, min_costs, random_milp, vertex_min};
use monocert_milp::{
    presolve, solve, solve_lp, LpOutcome, MilpProblem, MilpStatus, PresolveResult, Relation,
    Sense, SolveBudget,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_lp(seed: u64, n: usize) -> MilpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = MilpProblem::new(Sense::Minimize);
    let vars: Vec<_> = (0..n)
        .map(|i| p.add_continuous(format!("x{i}"), -1.0, rng.random_range(0.5..2.0)))
        .collect();
    for r in 0..rng.random_range(2..6) {
        let coeffs = vars.iter().map(|&v| (v, rng.random_range(-2.0..2.0))).collect();
        let rel = if rng.random_bool(0.5) {
            Relation::Le
        } else {
            Relation::Ge
        };
        // The origin is interior to every row, so the LP is feasible.
        let rhs = match rel {
            Relation::Le => rng.random_range(0.1..1.5),
            _ => -rng.random_range(0.1..1.5),
        };
        p.add_constraint(format!("r{r}"), coeffs, rel, rhs);
    }
    let obj = vars.iter().map(|&v| (v, rng.random_range(-3.0..3.0))).collect();
    p.set_objective(Sense::Minimize, obj, 0.0);
    p
}

#[test]
fn three_variable_lp_matches_vertex_enumeration() {
    for seed in 0..60 {
        let p = random_lp(seed, 3);
        let (costs, _) = min_costs(&p);
        let (lo, hi) = p.relaxed_bounds();
        let oracle = vertex_min(&costs, &dense_rows(&p), &lo, &hi).expect("feasible by construction");
        let LpOutcome::Optimal(sol) = solve_lp(&p).unwrap() else {
            panic!("seed {seed}: expected optimal");
        };
        assert!(
            (sol.value - oracle).abs() <= 1e-9,
            "seed {seed}: simplex {} vs vertices {oracle}",
            sol.value
        );
        assert!(p.max_violation(&sol.x) <= 1e-9);
    }
}

/// Dual objective of `min c x, rows, lo <= x <= hi` at row duals `y`.
fn dual_objective(p: &MilpProblem, y: &[f64]) -> f64 {
    let (costs, _) = min_costs(p);
    let rows = dense_rows(p);
    let mut value: f64 = rows.iter().zip(y).map(|((_, _, b), yi)| b * yi).sum();
    for (j, v) in p.variables.iter().enumerate() {
        let (lo, hi) = v.kind.bounds();
        let reduced = costs[j] - rows.iter().zip(y).map(|((a, _, _), yi)| a[j] * yi).sum::<f64>();
        value += if reduced > 0.0 { reduced * lo } else { reduced * hi };
    }
    value
}

#[test]
fn simplex_value_equals_dual_objective() {
    for seed in 0..100 {
        let n = 2 + (seed as usize % 5);
        let p = random_lp(1000 + seed, n);
        let LpOutcome::Optimal(sol) = solve_lp(&p).unwrap() else {
            panic!("seed {seed}: expected optimal");
        };
        // Dual feasibility signs for a minimization: y <= 0 on <= rows,
        // y >= 0 on >= rows.
        for (c, y) in p.constraints.iter().zip(&sol.duals) {
            match c.relation {
                Relation::Le => assert!(*y <= 1e-9, "seed {seed}: dual {y} on <= row"),
                Relation::Ge => assert!(*y >= -1e-9, "seed {seed}: dual {y} on >= row"),
                Relation::Eq => {}
            }
        }
        let dual = dual_objective(&p, &sol.duals);
        assert!(
            (dual - sol.value).abs() <= 1e-8,
            "seed {seed}: primal {} dual {dual}",
            sol.value
        );
    }
}

#[test]
fn knapsack_matches_subset_enumeration() {
    let weights = [3.0, 4.0, 5.0];
    let values = [4.0, 5.0, 7.0];
    let capacity = 8.0;
    let mut best: f64 = 0.0;
    for mask in 0..8u32 {
        let (w, v) = (0..3)
            .filter(|i| mask >> i & 1 == 1)
            .fold((0.0, 0.0), |(w, v), i| (w + weights[i], v + values[i]));
        if w <= capacity {
            best = best.max(v);
        }
    }
    assert_eq!(best, 11.0);

    let mut p = MilpProblem::new(Sense::Maximize);
    let items: Vec<_> = (0..3).map(|i| p.add_binary(format!("take{i}"))).collect();
    p.add_constraint(
        "capacity",
        items.iter().zip(weights).map(|(&v, w)| (v, w)).collect(),
        Relation::Le,
        capacity,
    );
    p.set_objective(
        Sense::Maximize,
        items.iter().zip(values).map(|(&v, c)| (v, c)).collect(),
        0.0,
    );
    let out = solve(&p, &SolveBudget::default()).unwrap();
    assert_eq!(out.status, MilpStatus::Optimal);
    assert!((out.incumbent_value().unwrap() - best).abs() < 1e-9);
}

#[test]
fn random_milps_match_exhaustive_enumeration() {
    let mut feasible = 0;
    for seed in 0..200u64 {
        let nb = 1 + (seed as usize % 12);
        let p = random_milp(seed, nb);
        let oracle = exhaustive_optimum(&p);
        let out = solve(&p, &SolveBudget::unlimited()).unwrap();
        match oracle {
            None => assert_eq!(out.status, MilpStatus::Infeasible, "seed {seed}"),
            Some(opt) => {
                feasible += 1;
                assert_eq!(out.status, MilpStatus::Optimal, "seed {seed}");
                let v = out.incumbent_value().unwrap();
                assert!((v - opt).abs() <= 1e-6, "seed {seed}: solver {v} oracle {opt}");
                let (_, x) = out.incumbent.as_ref().unwrap();
                assert!(p.max_violation(x) <= 1e-7, "seed {seed}: infeasible incumbent");
            }
        }
    }
    assert!(feasible >= 60, "only {feasible} feasible instances");
}

#[test]
fn anytime_bounds_are_sound_and_monotone() {
    for seed in 0..200u64 {
        let nb = 4 + (seed as usize % 9);
        let p = random_milp(10_000 + seed, nb);
        let Some(opt) = exhaustive_optimum(&p) else {
            continue;
        };
        let to_min = |v: f64| if p.objective.sense == Sense::Minimize { v } else { -v };
        let mut previous = f64::NEG_INFINITY;
        for nodes in [1, 2, 3, 5, 8, 13, 21, 34, 55, 1_000_000] {
            let out = solve(&p, &SolveBudget::with_nodes(nodes)).unwrap();
            let bound = to_min(out.certified_bound);
            assert!(
                bound <= to_min(opt) + 1e-7,
                "seed {seed} nodes {nodes}: bound {} above optimum {opt}",
                out.certified_bound
            );
            assert!(
                bound >= previous - 1e-9,
                "seed {seed} nodes {nodes}: bound decreased {previous} -> {bound}"
            );
            previous = bound;
            if let Some(v) = out.incumbent_value() {
                assert!(to_min(v) >= bound - 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Presolve must keep exactly the same set of binary solutions.
    #[test]
    fn presolve_preserves_binary_solution_set(
        rows in prop::collection::vec(
            (prop::collection::vec(-3i32..=3, 5), 0usize..3, -6i32..=6),
            1..5,
        )
    ) {
        let mut p = MilpProblem::new(Sense::Minimize);
        let z: Vec<_> = (0..5).map(|i| p.add_binary(format!("z{i}"))).collect();
        for (r, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            let rel = [Relation::Le, Relation::Ge, Relation::Eq][*rel];
            let c = z.iter().zip(coeffs).map(|(&v, &a)| (v, a as f64)).collect();
            p.add_constraint(format!("r{r}"), c, rel, *rhs as f64);
        }
        let feasible_in = |q: &MilpProblem, mask: u32| {
            let x: Vec<f64> = (0..5).map(|i| ((mask >> i) & 1) as f64).collect();
            q.max_violation(&x) == 0.0
        };
        match presolve(&p).unwrap() {
            PresolveResult::Infeasible { .. } => {
                for mask in 0..32 {
                    prop_assert!(!feasible_in(&p, mask));
                }
            }
            PresolveResult::Reduced { problem, .. } => {
                for mask in 0..32 {
                    prop_assert_eq!(feasible_in(&p, mask), feasible_in(&problem, mask));
                }
            }
        }
    }
}
