//! Mixed-integer encodings of ReLU units and of the smallest input
//! derivative of a two-layer block.

use monocert_milp::{MilpProblem, Relation, Sense, VarId};

use crate::model::{Activation, InputBox, PreactivationBounds, TwoLayerBlock};
use crate::{Error, Result};

/// Affine expression `sum a_k v_k + c` over problem variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Affine {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        Self {
            terms: vec![(v, 1.0)],
            constant: 0.0,
        }
    }

    /// `w^T x + b`.
    pub fn dot(w: &[f64], x: &[Affine], b: f64) -> Self {
        let mut out = Affine::constant(b);
        for (wi, xi) in w.iter().zip(x) {
            if *wi == 0.0 {
                continue;
            }
            out.constant += wi * xi.constant;
            for &(v, a) in &xi.terms {
                match out.terms.iter_mut().find(|(u, _)| *u == v) {
                    Some(t) => t.1 += wi * a,
                    None => out.terms.push((v, wi * a)),
                }
            }
        }
        out
    }
}

fn check_bounds(u: f64, l: f64, name: &str) -> Result<()> {
    if !(l <= u) || !l.is_finite() || !u.is_finite() {
        return Err(Error::Encoding(format!("{name}: invalid bounds l={l} u={u}")));
    }
    Ok(())
}

fn with_extra(expr: &Affine, extra: &[(VarId, f64)]) -> Vec<(VarId, f64)> {
    let mut c = expr.terms.clone();
    c.extend_from_slice(extra);
    c
}

/// Adds `y = relu(pre)` with activation bit `z`:
/// `y >= 0, y <= u z, y >= pre, y <= pre - l (1 - z)`.
pub(crate) fn relu_on(
    p: &mut MilpProblem,
    pre: &Affine,
    u: f64,
    l: f64,
    name: &str,
) -> Result<(VarId, VarId)> {
    check_bounds(u, l, name)?;
    let y = p.add_continuous(format!("y_{name}"), 0.0, u.max(0.0));
    let z = p.add_binary(format!("z_{name}"));
    let b = pre.constant;
    let neg: Vec<(VarId, f64)> = pre.terms.iter().map(|&(v, a)| (v, -a)).collect();
    p.add_constraint(format!("ub_{name}"), vec![(y, 1.0), (z, -u)], Relation::Le, 0.0);
    let mut c = neg.clone();
    c.push((y, 1.0));
    p.add_constraint(format!("ge_{name}"), c, Relation::Ge, b);
    let mut c = neg;
    c.extend([(y, 1.0), (z, -l)]);
    p.add_constraint(format!("le_{name}"), c, Relation::Le, b - l);
    Ok((y, z))
}

/// Adds a binary `z` with `pre <= u z` and `pre >= l (1 - z)`.
pub(crate) fn indicator_on(
    p: &mut MilpProblem,
    pre: &Affine,
    u: f64,
    l: f64,
    name: &str,
) -> Result<VarId> {
    check_bounds(u, l, name)?;
    let z = p.add_binary(format!("z{name}"));
    let b = pre.constant;
    p.add_constraint(
        format!("up{name}"),
        with_extra(pre, &[(z, -u)]),
        Relation::Le,
        -b,
    );
    p.add_constraint(format!("dn{name}"), with_extra(pre, &[(z, l)]), Relation::Ge, l - b);
    Ok(z)
}

fn affine_inputs(x: &[VarId]) -> Vec<Affine> {
    x.iter().map(|&v| Affine::var(v)).collect()
}

/// ReLU constraints for one neuron `w^T x + b`; returns the fresh `(y, z)`.
pub fn relu_constraints(
    p: &mut MilpProblem,
    w: &[f64],
    b: f64,
    u: f64,
    l: f64,
    x: &[VarId],
) -> Result<(VarId, VarId)> {
    let name = p.num_vars().to_string();
    relu_on(p, &Affine::dot(w, &affine_inputs(x), b), u, l, &name)
}

/// Indicator constraints for one neuron `w^T x + b`; returns the fresh `z`.
pub fn indicator_constraints(
    p: &mut MilpProblem,
    w: &[f64],
    b: f64,
    u: f64,
    l: f64,
    x: &[VarId],
) -> Result<VarId> {
    let name = p.num_vars().to_string();
    indicator_on(p, &Affine::dot(w, &affine_inputs(x), b), u, l, &name)
}

pub(crate) fn input_vars(p: &mut MilpProblem, input_box: &InputBox) -> Vec<VarId> {
    (0..input_box.dim())
        .map(|c| p.add_continuous(format!("x{c}"), input_box.lower[c], input_box.upper[c]))
        .collect()
}

pub(crate) fn check_target(block: &TwoLayerBlock, output: usize, feature: usize) -> Result<()> {
    if feature >= block.input_dim() {
        return Err(Error::Input(format!(
            "feature {feature} out of range for block input dimension {}",
            block.input_dim()
        )));
    }
    if output >= block.output_dim() {
        return Err(Error::Input(format!(
            "output {output} out of range for block output dimension {}",
            block.output_dim()
        )));
    }
    Ok(())
}

/// `min sum_i a_{j,i} w_{i,l} z_i` over the box, with `z_i` the activation
/// indicator of hidden unit `i`. Units whose coefficient is zero are left
/// out; their indicators never constrain `x`.
pub fn encode_gradient_min(
    block: &TwoLayerBlock,
    output: usize,
    feature: usize,
    input_box: &InputBox,
    hidden: &PreactivationBounds,
) -> Result<MilpProblem> {
    check_target(block, output, feature)?;
    if input_box.dim() != block.input_dim() || hidden.len() != block.hidden_dim() {
        return Err(Error::Input("box or bounds do not match the block".into()));
    }
    let coeffs = block.path_coefficients(output, feature);
    let mut p = MilpProblem::new(Sense::Minimize);
    let x = input_vars(&mut p, input_box);
    let xa = affine_inputs(&x);
    let mut objective = Vec::new();
    let mut constant = 0.0;
    match block.first.activation {
        Activation::Identity => constant = coeffs.iter().sum(),
        Activation::Relu => {
            for (i, &c) in coeffs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let pre = Affine::dot(block.first.weights.row(i), &xa, block.first.biases[i]);
                let z = indicator_on(&mut p, &pre, hidden.upper[i], hidden.lower[i], &i.to_string())?;
                objective.push((z, c));
            }
        }
        Activation::Smooth(_) => {
            return Err(Error::Encoding(
                "smooth activations need the envelope encoding".into(),
            ))
        }
    }
    p.set_objective(Sense::Minimize, objective, constant);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{propagate_bounds, Layer};
    use monocert_milp::{solve, MilpStatus, SolveBudget};

    fn block(a: &[f64], w: &[f64], b: &[f64]) -> TwoLayerBlock {
        let rows: Vec<Vec<f64>> = w.iter().map(|&v| vec![v]).collect();
        TwoLayerBlock {
            index: 0,
            first: Layer::from_rows(&rows, b.to_vec(), Activation::Relu).unwrap(),
            second: Layer::from_rows(&[a.to_vec()], vec![0.0], Activation::Identity).unwrap(),
        }
    }

    fn optimum(block: &TwoLayerBlock, bx: &InputBox) -> f64 {
        let bounds = propagate_bounds(std::slice::from_ref(block), bx).unwrap();
        let p = encode_gradient_min(block, 0, 0, bx, &bounds[0].hidden).unwrap();
        let out = solve(&p, &SolveBudget::default()).unwrap();
        assert_eq!(out.status, MilpStatus::Optimal);
        out.incumbent_value().unwrap()
    }

    /// Feasibility of a full assignment, bounds included.
    fn feasible(p: &MilpProblem, x: &[f64]) -> bool {
        p.max_violation(x) <= 1e-12
    }

    #[test]
    fn relu_constraints_force_the_activation() {
        for (x, y_true, z_true) in [(0.5, 0.25, 1.0), (0.1, 0.0, 0.0)] {
            let mut p = MilpProblem::new(Sense::Minimize);
            let xv = p.add_continuous("x", x, x);
            let (y, z) = relu_constraints(&mut p, &[1.0], -0.25, 0.75, -0.25, &[xv]).unwrap();
            assert_eq!((y.0, z.0), (1, 2));
            for yi in 0..=100 {
                let yv = yi as f64 / 100.0;
                for zv in [0.0, 1.0] {
                    let ok = feasible(&p, &[x, yv, zv]);
                    let expect = (yv - y_true).abs() < 1e-12 && zv == z_true;
                    assert_eq!(ok, expect, "x={x} y={yv} z={zv}");
                }
            }
        }
    }

    #[test]
    fn relu_on_nonnegative_range_forces_y_equal_x() {
        let mut p = MilpProblem::new(Sense::Minimize);
        let xv = p.add_continuous("x", 0.0, 1.0);
        relu_constraints(&mut p, &[1.0], 0.0, 1.0, 0.0, &[xv]).unwrap();
        assert!(feasible(&p, &[0.3, 0.3, 1.0]));
        assert!(!feasible(&p, &[0.3, 0.3, 0.0]));
        assert!(!feasible(&p, &[0.3, 0.2, 1.0]));
    }

    #[test]
    fn indicator_constraints_track_sign() {
        for (pre, zs) in [(0.3, vec![1.0]), (-0.3, vec![0.0]), (0.0, vec![0.0, 1.0])] {
            let mut p = MilpProblem::new(Sense::Minimize);
            let xv = p.add_continuous("x", pre, pre);
            indicator_constraints(&mut p, &[1.0], 0.0, 1.0, -1.0, &[xv]).unwrap();
            for z in [0.0, 1.0] {
                assert_eq!(feasible(&p, &[pre, z]), zs.contains(&z), "pre={pre} z={z}");
            }
        }
    }

    #[test]
    fn inverted_bounds_are_rejected() {
        let mut p = MilpProblem::new(Sense::Minimize);
        let xv = p.add_continuous("x", 0.0, 1.0);
        assert!(matches!(
            indicator_constraints(&mut p, &[1.0], 0.0, -1.0, 1.0, &[xv]),
            Err(Error::Encoding(_))
        ));
    }

    #[test]
    fn small_blocks_match_hand_optimum() {
        assert_eq!(optimum(&block(&[1.0], &[1.0], &[0.0]), &InputBox::unit(1)), 0.0);
        let two = block(&[1.0, -0.5], &[1.0, 1.0], &[0.0, -0.5]);
        assert_eq!(optimum(&two, &InputBox::unit(1)), 0.0);
        let inner = InputBox::new(vec![0.1], vec![1.0]).unwrap();
        assert_eq!(optimum(&two, &inner), 0.5);
    }

    #[test]
    fn identity_hidden_layer_gives_constant() {
        let mut b = block(&[2.0, -0.5], &[1.0, 3.0], &[0.0, 0.0]);
        b.first.activation = Activation::Identity;
        let bounds = propagate_bounds(std::slice::from_ref(&b), &InputBox::unit(1)).unwrap();
        let p = encode_gradient_min(&b, 0, 0, &InputBox::unit(1), &bounds[0].hidden).unwrap();
        assert_eq!(p.num_binaries(), 0);
        assert_eq!(p.objective.constant, 0.5);
    }

    #[test]
    fn out_of_range_feature() {
        let b = block(&[1.0], &[1.0], &[0.0]);
        let bounds = propagate_bounds(std::slice::from_ref(&b), &InputBox::unit(1)).unwrap();
        assert!(encode_gradient_min(&b, 0, 1, &InputBox::unit(1), &bounds[0].hidden).is_err());
        assert!(encode_gradient_min(&b, 1, 0, &InputBox::unit(1), &bounds[0].hidden).is_err());
    }
}
