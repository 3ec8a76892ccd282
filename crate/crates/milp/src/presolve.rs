//! Activity-based presolve: binaries whose value is forced by a single row
//! are fixed, rows that can never be violated are dropped. Variable ids are
//! preserved, so solutions of the reduced problem are solutions of the
//! original one and vice versa.

use crate::problem::{MilpProblem, Relation, VarKind};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum PresolveResult {
    Reduced {
        problem: MilpProblem,
        fixed_binaries: usize,
        removed_rows: usize,
    },
    Infeasible {
        constraint: usize,
    },
}

const MAX_PASSES: usize = 32;

pub fn presolve(problem: &MilpProblem) -> Result<PresolveResult> {
    problem.validate()?;
    let (mut lo, mut hi) = problem.relaxed_bounds();
    let is_binary: Vec<bool> = problem.variables.iter().map(|v| v.kind.is_binary()).collect();
    let mut active = vec![true; problem.constraints.len()];
    let mut fixed = 0;

    for _ in 0..MAX_PASSES {
        let mut changed = false;
        for (ci, c) in problem.constraints.iter().enumerate() {
            if !active[ci] {
                continue;
            }
            let (min_act, max_act) = activity_range(&c.coeffs, &lo, &hi);
            let tol = 1e-9 * (1.0 + c.rhs.abs());
            let (check_le, check_ge) = match c.relation {
                Relation::Le => (true, false),
                Relation::Ge => (false, true),
                Relation::Eq => (true, true),
            };
            if (check_le && min_act > c.rhs + tol) || (check_ge && max_act < c.rhs - tol) {
                return Ok(PresolveResult::Infeasible { constraint: ci });
            }
            let redundant = match c.relation {
                Relation::Le => max_act <= c.rhs,
                Relation::Ge => min_act >= c.rhs,
                Relation::Eq => false,
            };
            if redundant {
                active[ci] = false;
                changed = true;
                continue;
            }
            let mut row_fixed = false;
            for &(v, a) in &c.coeffs {
                let k = v.0;
                if !is_binary[k] || lo[k] == hi[k] || a == 0.0 {
                    continue;
                }
                // Activity of the rest of the row.
                let rest_min = min_act - (a * lo[k]).min(a * hi[k]);
                let rest_max = max_act - (a * lo[k]).max(a * hi[k]);
                let mut one_ok = true;
                let mut zero_ok = true;
                if check_le {
                    one_ok &= rest_min + a <= c.rhs + tol;
                    zero_ok &= rest_min <= c.rhs + tol;
                }
                if check_ge {
                    one_ok &= rest_max + a >= c.rhs - tol;
                    zero_ok &= rest_max >= c.rhs - tol;
                }
                match (zero_ok, one_ok) {
                    (false, false) => return Ok(PresolveResult::Infeasible { constraint: ci }),
                    (true, false) => {
                        hi[k] = 0.0;
                        row_fixed = true;
                    }
                    (false, true) => {
                        lo[k] = 1.0;
                        row_fixed = true;
                    }
                    (true, true) => {}
                }
                if row_fixed {
                    fixed += 1;
                    changed = true;
                    // Row activity is stale once a bound moved.
                    break;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut reduced = problem.clone();
    for (k, var) in reduced.variables.iter_mut().enumerate() {
        if is_binary[k] && lo[k] == hi[k] {
            var.kind = VarKind::Continuous {
                lo: lo[k],
                hi: hi[k],
            };
        }
    }
    let removed = active.iter().filter(|a| !**a).count();
    reduced.constraints = problem
        .constraints
        .iter()
        .zip(&active)
        .filter(|(_, a)| **a)
        .map(|(c, _)| c.clone())
        .collect();
    Ok(PresolveResult::Reduced {
        problem: reduced,
        fixed_binaries: fixed,
        removed_rows: removed,
    })
}

fn activity_range(coeffs: &[(crate::VarId, f64)], lo: &[f64], hi: &[f64]) -> (f64, f64) {
    let mut min = 0.0;
    let mut max = 0.0;
    for &(v, a) in coeffs {
        let p = a * lo[v.0];
        let q = a * hi[v.0];
        min += p.min(q);
        max += p.max(q);
    }
    (min, max)
}
