//! Independent oracles shared by the integration tests. None of them use
//! the MILP solver.
#![allow(dead_code, clippy::needless_range_loop)]

use monocert::model::{Activation, InputBox, Layer, Matrix, MlpNetwork, TwoLayerBlock};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub const VERTEX_TOL: f64 = 1e-9;

pub fn normal_layer<R: Rng>(rng: &mut R, in_dim: usize, out_dim: usize, act: Activation) -> Layer {
    let data = (0..in_dim * out_dim).map(|_| StandardNormal.sample(rng)).collect();
    let biases = (0..out_dim).map(|_| StandardNormal.sample(rng)).collect();
    Layer::new(Matrix::from_vec(out_dim, in_dim, data).unwrap(), biases, act).unwrap()
}

/// Block with `N(0, 1)` weights and biases and a single output.
pub fn normal_block<R: Rng>(rng: &mut R, d: usize, n: usize, act: Activation) -> TwoLayerBlock {
    TwoLayerBlock {
        index: 0,
        first: normal_layer(rng, d, n, act),
        second: normal_layer(rng, n, 1, Activation::Identity),
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Vertices of the arrangement of the hyperplanes `w.x + b = 0` inside the
/// box: every point in the box where `dim` linearly independent
/// hyperplanes or box faces meet.
pub fn arrangement_vertices(planes: &[(Vec<f64>, f64)], bx: &InputBox) -> Vec<Vec<f64>> {
    let d = bx.dim();
    let mut all: Vec<(Vec<f64>, f64)> = planes.to_vec();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        all.push((e.clone(), -bx.lower[i]));
        all.push((e, -bx.upper[i]));
    }
    let mut out = Vec::new();
    for s in subsets(all.len(), d) {
        let a = s.iter().map(|&k| all[k].0.clone()).collect();
        let b = s.iter().map(|&k| -all[k].1).collect();
        if let Some(x) = gauss_solve(a, b) {
            let inside = (0..d).all(|i| x[i] >= bx.lower[i] - VERTEX_TOL && x[i] <= bx.upper[i] + VERTEX_TOL);
            if inside {
                out.push((0..d).map(|i| x[i].clamp(bx.lower[i], bx.upper[i])).collect());
            }
        }
    }
    out
}

/// Minimum of `d out / d x_feature` over the box by enumerating all `2^n`
/// activation patterns. A pattern is feasible when its closed region
/// (`pre_i >= 0` for active units, `<= 0` otherwise) meets the box; a
/// non-empty bounded polyhedron has a vertex, so feasibility is decided
/// exactly by the arrangement vertices.
pub fn pattern_oracle_min(block: &TwoLayerBlock, feature: usize, bx: &InputBox) -> f64 {
    let n = block.hidden_dim();
    assert!(n <= 20);
    let planes: Vec<(Vec<f64>, f64)> = (0..n)
        .map(|i| (block.first.weights.row(i).to_vec(), block.first.biases[i]))
        .collect();
    let full: u32 = (1u32 << n) - 1;
    let masks: Vec<(u32, u32)> = arrangement_vertices(&planes, bx)
        .iter()
        .map(|v| {
            let pre = block.first.preactivation(v);
            let (mut pos, mut neg) = (0u32, 0u32);
            for (i, z) in pre.iter().enumerate() {
                let tol = VERTEX_TOL * (1.0 + planes[i].0.iter().map(|w| w.abs()).sum::<f64>());
                if *z >= -tol {
                    pos |= 1 << i;
                }
                if *z <= tol {
                    neg |= 1 << i;
                }
            }
            (pos, neg)
        })
        .collect();
    let coeffs = block.path_coefficients(0, feature);
    let mut best = f64::INFINITY;
    for s in 0..=full {
        let feasible = masks.iter().any(|&(pos, neg)| s & !pos == 0 && (!s & full) & !neg == 0);
        if feasible {
            let value: f64 = (0..n).filter(|i| s >> i & 1 == 1).map(|i| coeffs[i]).sum();
            best = best.min(value);
        }
    }
    best
}

/// Smallest sampled `d out_j / d x_feature` over `n` uniform points.
pub fn sampled_min_gradient<R: Rng>(
    block: &TwoLayerBlock,
    output: usize,
    feature: usize,
    bx: &InputBox,
    n: usize,
    rng: &mut R,
) -> f64 {
    (0..n)
        .map(|_| block.gradient(&bx.sample(rng), output, feature))
        .fold(f64::INFINITY, f64::min)
}

/// Maximum of a two-layer network over the attack region of `x`, taken
/// over a `401 x 401` grid (or 401 points per monotone axis) together
/// with the vertices of the first layer's arrangement, where the maximum
/// of a piecewise-linear function is attained.
pub fn grid_attack_max(net: &MlpNetwork, x: &[f64], bx: &InputBox) -> f64 {
    assert_eq!(net.input_dim, 2);
    assert!(net.projection.is_none());
    let lower: Vec<f64> = (0..2)
        .map(|i| if net.monotone.contains(i) { bx.lower[i] } else { x[i] })
        .collect();
    let region = InputBox::new(lower, x.to_vec()).unwrap();
    let axis = |i: usize| -> Vec<f64> {
        if region.lower[i] == region.upper[i] {
            vec![region.lower[i]]
        } else {
            (0..=400)
                .map(|k| region.lower[i] + (region.upper[i] - region.lower[i]) * k as f64 / 400.0)
                .collect()
        }
    };
    let mut best = f64::NEG_INFINITY;
    for &a in &axis(0) {
        for &b in &axis(1) {
            best = best.max(net.forward(&[a, b]).unwrap());
        }
    }
    let first = &net.layers[0];
    let planes: Vec<(Vec<f64>, f64)> = (0..first.out_dim())
        .map(|i| (first.weights.row(i).to_vec(), first.biases[i]))
        .collect();
    for v in arrangement_vertices(&planes, &region) {
        best = best.max(net.forward(&v).unwrap());
    }
    best
}

/// Central difference of `f` at `x` along coordinate `k`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], k: usize, h: f64) -> f64 {
    let (mut up, mut dn) = (x.to_vec(), x.to_vec());
    up[k] += h;
    dn[k] -= h;
    (f(&up) - f(&dn)) / (2.0 * h)
}

/// `|a - b|` relative to the larger magnitude, floored at `floor`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
