//! Brute-force oracles that share no code with the solver.

#![allow(dead_code, clippy::needless_range_loop)]

use monocert_milp::{MilpProblem, Relation, Sense, VarKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solves the dense system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` when (numerically) singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Minimum of the minimization-form objective over the polytope defined by
/// `rows` and the box `[lo, hi]`, by enumerating every vertex. Variables
/// with `lo == hi` are substituted out first. `None` means infeasible.
pub fn vertex_min(
    costs: &[f64],
    rows: &[(Vec<f64>, Relation, f64)],
    lo: &[f64],
    hi: &[f64],
) -> Option<f64> {
    let n = costs.len();
    let free: Vec<usize> = (0..n).filter(|&j| lo[j] < hi[j]).collect();
    let k = free.len();
    let base: Vec<f64> = (0..n).map(|j| if lo[j] == hi[j] { lo[j] } else { 0.0 }).collect();

    // Candidate hyperplanes over the free coordinates: (coeffs, rhs).
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for (a, _, b) in rows {
        let shift: f64 = (0..n).map(|j| a[j] * base[j]).sum();
        planes.push((free.iter().map(|&j| a[j]).collect(), b - shift));
    }
    for (pos, &j) in free.iter().enumerate() {
        let mut e = vec![0.0; k];
        e[pos] = 1.0;
        planes.push((e.clone(), lo[j]));
        planes.push((e, hi[j]));
    }

    let feasible = |x: &[f64]| -> bool {
        let tol = 1e-9;
        for (pos, &j) in free.iter().enumerate() {
            if x[pos] < lo[j] - tol || x[pos] > hi[j] + tol {
                return false;
            }
        }
        rows.iter().all(|(a, rel, b)| {
            let lhs: f64 = (0..n)
                .map(|j| {
                    let v = match free.iter().position(|&f| f == j) {
                        Some(p) => x[p],
                        None => base[j],
                    };
                    a[j] * v
                })
                .sum();
            let t = tol * (1.0 + b.abs());
            match rel {
                Relation::Le => lhs <= b + t,
                Relation::Ge => lhs >= b - t,
                Relation::Eq => (lhs - b).abs() <= t,
            }
        })
    };
    let value = |x: &[f64]| -> f64 {
        let mut v: f64 = (0..n).map(|j| costs[j] * base[j]).sum();
        for (pos, &j) in free.iter().enumerate() {
            v += costs[j] * x[pos];
        }
        v
    };

    if k == 0 {
        return feasible(&[]).then(|| value(&[]));
    }
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = gauss_solve(a, b) {
            if feasible(&x) {
                let v = value(&x);
                best = Some(best.map_or(v, |bv: f64| bv.min(v)));
            }
        }
        // Next k-combination of planes.
        let m = planes.len();
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - k + i {
                idx[i] += 1;
                for t in i + 1..k {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn dense_rows(p: &MilpProblem) -> Vec<(Vec<f64>, Relation, f64)> {
    p.constraints
        .iter()
        .map(|c| {
            let mut a = vec![0.0; p.num_vars()];
            for &(v, x) in &c.coeffs {
                a[v.0] += x;
            }
            (a, c.relation, c.rhs)
        })
        .collect()
}

pub fn min_costs(p: &MilpProblem) -> (Vec<f64>, f64) {
    let sign = if p.objective.sense == Sense::Minimize { 1.0 } else { -1.0 };
    let mut c = vec![0.0; p.num_vars()];
    for &(v, a) in &p.objective.coeffs {
        c[v.0] += sign * a;
    }
    (c, sign)
}

/// Exact optimum (problem sense) of a MILP by enumerating all binary
/// assignments and taking a vertex-enumeration LP for each.
pub fn exhaustive_optimum(p: &MilpProblem) -> Option<f64> {
    let (costs, sign) = min_costs(p);
    let rows = dense_rows(p);
    let bins: Vec<usize> = p
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind.is_binary())
        .map(|(i, _)| i)
        .collect();
    let (lo0, hi0): (Vec<f64>, Vec<f64>) = p.variables.iter().map(|v| v.kind.bounds()).unzip();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let mut lo = lo0.clone();
        let mut hi = hi0.clone();
        for (bit, &k) in bins.iter().enumerate() {
            let v = ((mask >> bit) & 1) as f64;
            lo[k] = v;
            hi[k] = v;
        }
        if let Some(v) = vertex_min(&costs, &rows, &lo, &hi) {
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best.map(|v| sign * v + p.objective.constant)
}

/// Random MILP with `nb` binaries, up to three continuous variables and a
/// handful of mixed rows. Roughly half are feasible.
pub fn random_milp(seed: u64, nb: usize) -> MilpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sense = if rng.random_bool(0.5) {
        Sense::Minimize
    } else {
        Sense::Maximize
    };
    let mut p = MilpProblem::new(sense);
    let nc = rng.random_range(0..=3usize);
    let mut vars = Vec::new();
    for i in 0..nb {
        vars.push(p.add_binary(format!("z{i}")));
    }
    for i in 0..nc {
        let lo = rng.random_range(-2.0..0.5);
        let hi = lo + rng.random_range(0.1..2.0);
        vars.push(p.add_continuous(format!("x{i}"), lo, hi));
    }
    let rows = rng.random_range(1..=5usize);
    for r in 0..rows {
        let mut coeffs = Vec::new();
        for &v in &vars {
            if rng.random_bool(0.6) {
                let a: f64 = rng.random_range(-3.0..3.0);
                coeffs.push((v, (a * 100.0).round() / 100.0));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((vars[0], 1.0));
        }
        let rel = match rng.random_range(0..10) {
            0 => Relation::Eq,
            1..=5 => Relation::Le,
            _ => Relation::Ge,
        };
        // Anchor the rhs near the activity of a random point so that many
        // instances stay feasible.
        let point: f64 = coeffs
            .iter()
            .map(|&(v, a)| {
                let (lo, hi) = p.variables[v.0].kind.bounds();
                let t = match p.variables[v.0].kind {
                    VarKind::Binary => rng.random_range(0..2) as f64,
                    _ => rng.random_range(lo..=hi),
                };
                a * t
            })
            .sum();
        let slack = match rel {
            Relation::Eq => 0.0,
            Relation::Le => rng.random_range(-0.5..1.0),
            Relation::Ge => -rng.random_range(-0.5..1.0),
        };
        p.add_constraint(format!("r{r}"), coeffs, rel, point + slack);
    }
    let obj = vars
        .iter()
        .map(|&v| (v, (rng.random_range(-4.0..4.0f64) * 100.0).round() / 100.0))
        .collect();
    p.set_objective(sense, obj, rng.random_range(-1.0..1.0));
    p
}
