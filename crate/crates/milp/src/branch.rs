//! Best-first branch-and-bound with anytime bounds.
//!
//! Internally every problem is minimized. A node carries the relaxation
//! value of its parent as its bound; because the queue is ordered by that
//! bound, the head of the queue is always a valid global lower bound. Nodes
//! are only discarded when their bound is at least the incumbent value, so
//! the reported bound never exceeds the true optimum.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::presolve::{presolve, PresolveResult};
use crate::problem::{MilpProblem, Sense};
use crate::simplex::{solve_lp_with_bounds, LpOutcome, SimplexOptions};
use crate::{MilpError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveBudget {
    pub max_nodes: usize,
    pub max_wall_time: Duration,
    pub gap_tolerance: f64,
    pub integrality_tolerance: f64,
}

impl Default for SolveBudget {
    fn default() -> Self {
        Self {
            max_nodes: 100_000,
            max_wall_time: Duration::from_secs(120),
            gap_tolerance: 1e-6,
            integrality_tolerance: 1e-6,
        }
    }
}

impl SolveBudget {
    pub fn with_nodes(max_nodes: usize) -> Self {
        Self {
            max_nodes,
            ..Self::default()
        }
    }

    pub fn unlimited() -> Self {
        Self {
            max_nodes: usize::MAX,
            max_wall_time: Duration::from_secs(u64::MAX / 4),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_nodes == 0 {
            return Err(MilpError::InvalidBudget("max_nodes must be positive".into()));
        }
        if self.max_wall_time.is_zero() {
            return Err(MilpError::InvalidBudget("max_wall_time must be positive".into()));
        }
        if !(self.gap_tolerance > 0.0) || !(self.integrality_tolerance > 0.0) {
            return Err(MilpError::InvalidBudget("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    /// Incumbent is optimal within the gap tolerance.
    Optimal,
    /// Stopped because the certified bound reached the caller's target.
    BoundOnly,
    Infeasible,
    BudgetExhausted,
}

impl std::fmt::Display for MilpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MilpStatus::Optimal => "optimal",
            MilpStatus::BoundOnly => "bound-only",
            MilpStatus::Infeasible => "infeasible",
            MilpStatus::BudgetExhausted => "budget-exhausted",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub nodes_explored: usize,
    pub lp_solves: usize,
    pub simplex_iterations: usize,
    pub fixed_by_presolve: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpOutcome {
    pub status: MilpStatus,
    /// Objective value (problem sense) and assignment of the best solution.
    pub incumbent: Option<(f64, Vec<f64>)>,
    /// Lower bound on the optimum for minimization, upper bound for
    /// maximization. `+inf`/`-inf` respectively when infeasible.
    pub certified_bound: f64,
    pub stats: SolveStats,
}

impl MilpOutcome {
    pub fn incumbent_value(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|(v, _)| *v)
    }
}

/// Solves `problem` to optimality or until `budget` runs out.
pub fn solve(problem: &MilpProblem, budget: &SolveBudget) -> Result<MilpOutcome> {
    solve_with_target(problem, budget, None)
}

/// Like [`solve`], but stops with [`MilpStatus::BoundOnly`] as soon as the
/// certified bound reaches `target` (at least `target` when minimizing, at
/// most `target` when maximizing).
pub fn solve_with_target(
    problem: &MilpProblem,
    budget: &SolveBudget,
    target: Option<f64>,
) -> Result<MilpOutcome> {
    problem.validate()?;
    budget.validate()?;
    let start = Instant::now();
    let sign = match problem.objective.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let constant = problem.objective.constant;
    // Minimization-form values: sign * (value - constant).
    let to_min = |v: f64| sign * (v - constant);
    let from_min = |v: f64| sign * v + constant;
    let min_target = target.map(to_min);

    let mut stats = SolveStats::default();
    let reduced = match presolve(problem)? {
        PresolveResult::Infeasible { .. } => {
            stats.wall_time = start.elapsed();
            return Ok(MilpOutcome {
                status: MilpStatus::Infeasible,
                incumbent: None,
                certified_bound: from_min(f64::INFINITY),
                stats,
            });
        }
        PresolveResult::Reduced {
            problem,
            fixed_binaries,
            ..
        } => {
            stats.fixed_by_presolve = fixed_binaries;
            problem
        }
    };

    let (base_lo, base_hi) = reduced.relaxed_bounds();
    let binaries: Vec<usize> = reduced.binary_ids().into_iter().map(|v| v.0).collect();
    let (costs, _) = reduced.min_form_costs();
    let opts = SimplexOptions::default();

    let mut queue = BinaryHeap::new();
    let mut seq = 0u64;
    queue.push(Node {
        bound: f64::NEG_INFINITY,
        seq,
        fixings: Vec::new(),
    });
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    // Bound of nodes whose relaxation could not be solved; they stay part
    // of the certificate and prevent an optimality claim.
    let mut unresolved = f64::INFINITY;

    let mut lo = base_lo.clone();
    let mut hi = base_hi.clone();
    let status = loop {
        let Some(node) = queue.pop() else {
            break if unresolved.is_finite() {
                MilpStatus::BudgetExhausted
            } else if incumbent.is_some() {
                MilpStatus::Optimal
            } else {
                MilpStatus::Infeasible
            };
        };
        let inc_value = incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v);
        let global = node.bound.min(unresolved);
        // With a target, a gap that straddles it is not closed: the caller
        // needs to know on which side of the target the optimum lies.
        let straddles = min_target.is_some_and(|t| inc_value >= t && global < t);
        if !unresolved.is_finite() && global >= inc_value - budget.gap_tolerance && !straddles {
            queue.push(node);
            break MilpStatus::Optimal;
        }
        if let Some(t) = min_target {
            if global.min(inc_value) >= t {
                queue.push(node);
                break MilpStatus::BoundOnly;
            }
        }
        if node.bound >= inc_value {
            continue;
        }
        if stats.nodes_explored >= budget.max_nodes || start.elapsed() >= budget.max_wall_time {
            queue.push(node);
            break MilpStatus::BudgetExhausted;
        }

        lo.copy_from_slice(&base_lo);
        hi.copy_from_slice(&base_hi);
        for &(k, v) in &node.fixings {
            lo[k] = v;
            hi[k] = v;
        }
        stats.nodes_explored += 1;
        stats.lp_solves += 1;
        let sol = match solve_lp_with_bounds(&reduced, &lo, &hi, &opts) {
            LpOutcome::Optimal(sol) => sol,
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded | LpOutcome::IterationLimit => {
                log::warn!("relaxation failed at node {}; keeping its bound", node.seq);
                unresolved = unresolved.min(node.bound);
                continue;
            }
        };
        stats.simplex_iterations += sol.iterations;
        let value = to_min(sol.value).max(node.bound);
        if value >= inc_value {
            continue;
        }

        match most_fractional(&sol.x, &binaries, budget.integrality_tolerance) {
            None => {
                let mut x = sol.x;
                for &k in &binaries {
                    x[k] = x[k].round();
                }
                let exact: f64 = costs.iter().zip(&x).map(|(c, v)| c * v).sum();
                if exact < inc_value {
                    incumbent = Some((exact, x));
                }
            }
            Some(k) => {
                for v in [0.0, 1.0] {
                    seq += 1;
                    let mut fixings = node.fixings.clone();
                    fixings.push((k, v));
                    queue.push(Node {
                        bound: value,
                        seq,
                        fixings,
                    });
                }
            }
        }
    };

    let inc_value = incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v);
    let open = queue.peek().map_or(f64::INFINITY, |n| n.bound);
    let certified = open.min(unresolved).min(inc_value);
    stats.wall_time = start.elapsed();
    Ok(MilpOutcome {
        status,
        incumbent: incumbent.map(|(v, x)| (from_min(v), x)),
        certified_bound: from_min(certified),
        stats,
    })
}

/// Binary with the largest distance to the nearest integer; ties go to the
/// lowest index.
fn most_fractional(x: &[f64], binaries: &[usize], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &k in binaries {
        let frac = (x[k] - x[k].round()).abs();
        if frac > tol && best.is_none_or(|(_, f)| frac > f) {
            best = Some((k, frac));
        }
    }
    best.map(|(k, _)| k)
}

#[derive(Debug)]
struct Node {
    bound: f64,
    seq: u64,
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Relation;

    #[test]
    fn at_most_one_of_two_binaries() {
        // min -(x + y) s.t. x + y <= 1.5, x, y binary
        let mut p = MilpProblem::new(Sense::Minimize);
        let x = p.add_binary("x");
        let y = p.add_binary("y");
        p.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.5);
        p.set_objective(Sense::Minimize, vec![(x, -1.0), (y, -1.0)], 0.0);
        let out = solve(&p, &SolveBudget::default()).unwrap();
        assert_eq!(out.status, MilpStatus::Optimal);
        assert!((out.incumbent_value().unwrap() + 1.0).abs() < 1e-9);
        assert!(out.certified_bound <= -1.0 + 1e-9);
        assert!(out.certified_bound >= -1.0 - 1e-6);
    }

    #[test]
    fn infeasible_after_branching() {
        // x + y = 1.5 has no binary solution although the relaxation does.
        let mut p = MilpProblem::new(Sense::Minimize);
        let x = p.add_binary("x");
        let y = p.add_binary("y");
        p.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 1.5);
        p.set_objective(Sense::Minimize, vec![(x, 1.0)], 0.0);
        let out = solve(&p, &SolveBudget::default()).unwrap();
        assert_eq!(out.status, MilpStatus::Infeasible);
        assert!(out.incumbent.is_none());
        assert_eq!(out.certified_bound, f64::INFINITY);
    }

    #[test]
    fn maximize_reports_upper_bound() {
        let mut p = MilpProblem::new(Sense::Maximize);
        let x = p.add_binary("x");
        let y = p.add_binary("y");
        let z = p.add_binary("z");
        p.add_constraint("w", vec![(x, 2.0), (y, 3.0), (z, 4.0)], Relation::Le, 5.0);
        p.set_objective(Sense::Maximize, vec![(x, 3.0), (y, 4.0), (z, 5.5)], 1.0);
        let out = solve(&p, &SolveBudget::default()).unwrap();
        assert_eq!(out.status, MilpStatus::Optimal);
        assert!((out.incumbent_value().unwrap() - 8.0).abs() < 1e-9);
        assert!(out.certified_bound >= 8.0 - 1e-9);
    }

    #[test]
    fn target_stops_early_with_bound_only() {
        let mut p = MilpProblem::new(Sense::Minimize);
        let bins: Vec<_> = (0..6).map(|i| p.add_binary(format!("z{i}"))).collect();
        let coeffs: Vec<_> = bins.iter().map(|&b| (b, 1.0)).collect();
        p.add_constraint("c", coeffs.clone(), Relation::Ge, 2.5);
        p.set_objective(Sense::Minimize, coeffs, 0.0);
        let out = solve_with_target(&p, &SolveBudget::default(), Some(2.0)).unwrap();
        assert_eq!(out.status, MilpStatus::BoundOnly);
        assert!(out.certified_bound >= 2.0);
    }

    #[test]
    fn target_inside_gap_is_resolved_by_branching() {
        // Optimum is exactly 0 and the relaxation is tight only at leaves.
        let mut p = MilpProblem::new(Sense::Minimize);
        let a = p.add_binary("a");
        let b = p.add_binary("b");
        p.add_constraint("c", vec![(a, 1.0), (b, 1.0)], Relation::Ge, 1.0);
        p.set_objective(Sense::Minimize, vec![(a, 1e-7), (b, 1e-7)], -1e-7);
        let out = solve_with_target(&p, &SolveBudget::default(), Some(0.0)).unwrap();
        assert!(out.certified_bound >= 0.0, "bound {}", out.certified_bound);
    }

    #[test]
    fn zero_node_budget_is_rejected() {
        let mut p = MilpProblem::new(Sense::Minimize);
        p.add_binary("x");
        assert!(solve(&p, &SolveBudget::with_nodes(0)).is_err());
    }

    #[test]
    fn most_fractional_prefers_lowest_index_on_ties() {
        assert_eq!(most_fractional(&[0.5, 0.5, 0.2], &[0, 1, 2], 1e-6), Some(0));
        assert_eq!(most_fractional(&[0.1, 0.4, 0.6], &[0, 1, 2], 1e-6), Some(1));
        assert_eq!(most_fractional(&[1.0, 0.0], &[0, 1], 1e-6), None);
    }
}
