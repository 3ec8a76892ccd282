//! Dense bounded-variable primal simplex.
//!
//! Every row gets a slack (inequalities) and, when the slack cannot start
//! basic, an artificial. Phase 1 minimizes the artificials; phase 2 fixes
//! them at zero and optimizes the real objective. Nonbasic columns sit at
//! one of their bounds, so branching only ever edits `lo`/`hi`.

use crate::problem::{MilpProblem, Relation};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_limit: usize,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-8,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            degenerate_limit: 50,
            max_iterations: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Objective value in the problem's own sense, constant included.
    pub value: f64,
    pub x: Vec<f64>,
    /// Row duals of the minimization form of the problem.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

/// Solves the LP relaxation of `problem` (binaries relaxed to `[0, 1]`).
pub fn solve_lp(problem: &MilpProblem) -> Result<LpOutcome> {
    problem.validate()?;
    let (lo, hi) = problem.relaxed_bounds();
    Ok(solve_lp_with_bounds(
        problem,
        &lo,
        &hi,
        &SimplexOptions::default(),
    ))
}

/// Solves the LP over `problem`'s rows with the given variable bounds, which
/// replace the declared ones. The problem is assumed validated.
pub fn solve_lp_with_bounds(
    problem: &MilpProblem,
    lo: &[f64],
    hi: &[f64],
    opts: &SimplexOptions,
) -> LpOutcome {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return LpOutcome::Infeasible;
    }
    let (costs, sign) = problem.min_form_costs();
    let mut tab = Tableau::build(problem, lo, hi);
    let mut iterations = 0;

    if tab.num_artificial > 0 {
        let phase1: Vec<f64> = (0..tab.ncols)
            .map(|j| if tab.artificial[j] { 1.0 } else { 0.0 })
            .collect();
        tab.set_costs(phase1);
        match tab.run(opts, &mut iterations, true) {
            RunStatus::Optimal => {}
            RunStatus::Unbounded => return LpOutcome::Unbounded,
            RunStatus::IterationLimit => return LpOutcome::IterationLimit,
        }
        tab.refresh_basics();
        let infeasibility: f64 = (0..tab.ncols)
            .filter(|&j| tab.artificial[j])
            .map(|j| tab.x[j])
            .sum();
        let scale = 1.0 + tab.rhs_scale;
        if infeasibility > opts.feasibility_tol * 10.0 * scale {
            return LpOutcome::Infeasible;
        }
        tab.drive_out_artificials(opts);
    }

    let mut phase2 = vec![0.0; tab.ncols];
    phase2[..costs.len()].copy_from_slice(&costs);
    tab.set_costs(phase2);
    match tab.run(opts, &mut iterations, false) {
        RunStatus::Optimal => {}
        RunStatus::Unbounded => return LpOutcome::Unbounded,
        RunStatus::IterationLimit => return LpOutcome::IterationLimit,
    }
    tab.refresh_basics();

    let n = problem.num_vars();
    let x: Vec<f64> = (0..n).map(|j| tab.x[j].clamp(lo[j], hi[j])).collect();
    let min_value: f64 = costs.iter().zip(&x).map(|(c, v)| c * v).sum();
    let duals = (0..tab.m)
        .map(|i| -tab.row_sign[i] * tab.d[tab.initial_basic[i]])
        .collect();
    LpOutcome::Optimal(LpSolution {
        value: sign * min_value + problem.objective.constant,
        x,
        duals,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
}

enum RunStatus {
    Optimal,
    Unbounded,
    IterationLimit,
}

struct Tableau {
    m: usize,
    ncols: usize,
    width: usize,
    /// Row-major `m x (ncols + 1)`; the last column is the transformed rhs.
    t: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    status: Vec<Status>,
    basis: Vec<usize>,
    cost: Vec<f64>,
    d: Vec<f64>,
    artificial: Vec<bool>,
    num_artificial: usize,
    /// Column that was basic in each row initially; it is a unit column
    /// with zero phase-2 cost, so its reduced cost yields the row dual.
    initial_basic: Vec<usize>,
    /// Sign each row was multiplied by during setup.
    row_sign: Vec<f64>,
    rhs_scale: f64,
}

impl Tableau {
    fn build(problem: &MilpProblem, lo: &[f64], hi: &[f64]) -> Self {
        let n = problem.num_vars();
        let m = problem.constraints.len();

        // Residuals with every structural at its lower bound decide which
        // rows can start from their slack.
        let mut use_slack = vec![false; m];
        let mut num_slack = 0;
        let mut num_artificial = 0;
        let mut residual = vec![0.0; m];
        for (i, c) in problem.constraints.iter().enumerate() {
            let r = c.rhs - c.coeffs.iter().map(|&(v, a)| a * lo[v.0]).sum::<f64>();
            residual[i] = r;
            match c.relation {
                Relation::Le => {
                    num_slack += 1;
                    use_slack[i] = r >= 0.0;
                }
                Relation::Ge => {
                    num_slack += 1;
                    use_slack[i] = r <= 0.0;
                }
                Relation::Eq => {}
            }
            if !use_slack[i] {
                num_artificial += 1;
            }
        }

        let ncols = n + num_slack + num_artificial;
        let width = ncols + 1;
        let mut t = vec![0.0; m * width];
        let mut col_lo = vec![0.0; ncols];
        let mut col_hi = vec![f64::INFINITY; ncols];
        col_lo[..n].copy_from_slice(lo);
        col_hi[..n].copy_from_slice(hi);
        let mut x = vec![0.0; ncols];
        x[..n].copy_from_slice(lo);
        let mut status = vec![Status::Lower; ncols];
        let mut basis = vec![0; m];
        let mut artificial = vec![false; ncols];
        let mut row_sign = vec![1.0; m];
        let mut rhs_scale: f64 = 0.0;

        let mut next_slack = n;
        let mut next_art = n + num_slack;
        for (i, c) in problem.constraints.iter().enumerate() {
            let row = &mut t[i * width..(i + 1) * width];
            for &(v, a) in &c.coeffs {
                row[v.0] += a;
            }
            row[ncols] = c.rhs;
            rhs_scale = rhs_scale.max(c.rhs.abs());
            let slack = match c.relation {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    next_slack += 1;
                    Some(next_slack - 1)
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    Some(next_slack - 1)
                }
                Relation::Eq => None,
            };
            let (basic, sign) = if use_slack[i] {
                let s = slack.expect("slack exists for inequality rows");
                (s, row[s])
            } else {
                let a = next_art;
                next_art += 1;
                let sign = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
                row[a] = sign;
                artificial[a] = true;
                (a, sign)
            };
            if sign < 0.0 {
                for v in row.iter_mut() {
                    *v = -*v;
                }
            }
            row_sign[i] = sign;
            basis[i] = basic;
            status[basic] = Status::Basic;
            x[basic] = residual[i].abs();
        }

        Self {
            m,
            ncols,
            width,
            t,
            lo: col_lo,
            hi: col_hi,
            x,
            status,
            initial_basic: basis.clone(),
            basis,
            cost: vec![0.0; ncols],
            d: vec![0.0; ncols],
            artificial,
            num_artificial,
            row_sign,
            rhs_scale,
        }
    }

    fn set_costs(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.width..i * self.width + self.ncols];
                for (dj, &tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
    }

    /// Recomputes basic values from the transformed rhs column.
    fn refresh_basics(&mut self) {
        for i in 0..self.m {
            let row = &self.t[i * self.width..(i + 1) * self.width];
            let mut v = row[self.ncols];
            for j in 0..self.ncols {
                if self.status[j] != Status::Basic && row[j] != 0.0 {
                    v -= row[j] * self.x[j];
                }
            }
            self.x[self.basis[i]] = v;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let piv = self.t[r * w + q];
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for other in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = other[q];
            if f != 0.0 {
                for (o, &p) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * p;
                }
                other[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (dj, &p) in self.d.iter_mut().zip(prow.iter()) {
                *dj -= f * p;
            }
            self.d[q] = 0.0;
        }
    }

    fn run(&mut self, opts: &SimplexOptions, iterations: &mut usize, phase1: bool) -> RunStatus {
        let mut bland = false;
        let mut degenerate = 0usize;
        let mut since_refresh = 0usize;
        loop {
            if *iterations >= opts.max_iterations {
                return RunStatus::IterationLimit;
            }
            *iterations += 1;
            since_refresh += 1;
            if since_refresh >= 200 {
                self.refresh_basics();
                since_refresh = 0;
            }

            // Pricing.
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.ncols {
                if self.status[j] == Status::Basic || self.hi[j] - self.lo[j] <= 0.0 {
                    continue;
                }
                if !phase1 && self.artificial[j] {
                    continue;
                }
                let dj = self.d[j];
                let dir = match self.status[j] {
                    Status::Lower if dj < -opts.optimality_tol => 1.0,
                    Status::Upper if dj > opts.optimality_tol => -1.0,
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                return RunStatus::Optimal;
            };

            // Ratio test; `None` means the entering column flips bounds.
            let mut step = self.hi[q] - self.lo[q];
            let mut leave: Option<usize> = None;
            let mut leave_alpha = 0.0;
            for i in 0..self.m {
                let alpha = self.t[i * self.width + q] * dir;
                if alpha.abs() <= opts.pivot_tol {
                    continue;
                }
                let b = self.basis[i];
                let limit = if alpha > 0.0 {
                    (self.x[b] - self.lo[b]) / alpha
                } else if self.hi[b].is_finite() {
                    (self.hi[b] - self.x[b]) / -alpha
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                let better = if limit < step - 1e-12 {
                    true
                } else if limit <= step + 1e-12 {
                    match leave {
                        None => false,
                        Some(prev) => {
                            if bland {
                                b < self.basis[prev]
                            } else {
                                alpha.abs() > leave_alpha
                            }
                        }
                    }
                } else {
                    false
                };
                if better {
                    step = limit;
                    leave = Some(i);
                    leave_alpha = alpha.abs();
                }
            }
            if !step.is_finite() {
                return RunStatus::Unbounded;
            }

            if step <= 1e-12 {
                degenerate += 1;
                if degenerate > opts.degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }

            self.x[q] += dir * step;
            if step != 0.0 {
                for i in 0..self.m {
                    let a = self.t[i * self.width + q];
                    if a != 0.0 {
                        self.x[self.basis[i]] -= a * dir * step;
                    }
                }
            }
            match leave {
                None => {
                    if dir > 0.0 {
                        self.status[q] = Status::Upper;
                        self.x[q] = self.hi[q];
                    } else {
                        self.status[q] = Status::Lower;
                        self.x[q] = self.lo[q];
                    }
                }
                Some(r) => {
                    let p = self.basis[r];
                    let alpha = self.t[r * self.width + q] * dir;
                    if alpha > 0.0 {
                        self.status[p] = Status::Lower;
                        self.x[p] = self.lo[p];
                    } else {
                        self.status[p] = Status::Upper;
                        self.x[p] = self.hi[p];
                    }
                    self.pivot(r, q);
                    self.basis[r] = q;
                    self.status[q] = Status::Basic;
                }
            }
        }
    }

    /// After a feasible phase 1, pivots zero-valued artificials out of the
    /// basis where possible and pins every artificial at zero.
    fn drive_out_artificials(&mut self, opts: &SimplexOptions) {
        for r in 0..self.m {
            let b = self.basis[r];
            if !self.artificial[b] {
                continue;
            }
            let mut best: Option<usize> = None;
            let mut best_abs = 1e-7_f64.max(opts.pivot_tol);
            for j in 0..self.ncols {
                if self.artificial[j] || self.status[j] == Status::Basic {
                    continue;
                }
                let a = self.t[r * self.width + j].abs();
                if a > best_abs {
                    best_abs = a;
                    best = Some(j);
                }
            }
            if let Some(q) = best {
                self.status[b] = Status::Lower;
                self.x[b] = 0.0;
                self.pivot(r, q);
                self.basis[r] = q;
                self.status[q] = Status::Basic;
            }
        }
        for j in 0..self.ncols {
            if self.artificial[j] {
                self.lo[j] = 0.0;
                self.hi[j] = 0.0;
                if self.status[j] != Status::Basic {
                    self.x[j] = 0.0;
                }
            }
        }
        self.refresh_basics();
    }
}
