//! Search for individual monotonicity violations: a point below `x` in the
//! monotone coordinates, equal elsewhere, with a larger output.

use monocert_milp::{solve, MilpProblem, MilpStatus, Sense, SolveBudget};
use serde::{Deserialize, Serialize};

use super::deep::{encode_forward, layer_bounds};
use super::encode::Affine;
use crate::model::{InputBox, MlpNetwork};
use crate::{Error, Result};

/// An attack must beat `f(x)` by more than this.
pub const STRICTNESS_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub found: bool,
    pub x_adv: Option<Vec<f64>>,
    pub f_x: f64,
    pub f_adv: Option<f64>,
    /// `f_adv - f_x`.
    pub gap: Option<f64>,
    pub solver_status: String,
    /// `true` when the verdict is backed by the solver: either a witness
    /// was found or the maximum was proven.
    pub proven: bool,
}

/// The region searched from `x`: monotone coordinates in `[lower, x]`,
/// the rest fixed to `x`.
pub fn attack_region(net: &MlpNetwork, x: &[f64], input_box: &InputBox) -> Result<InputBox> {
    if x.len() != net.input_dim || input_box.dim() != net.input_dim {
        return Err(Error::Input(format!(
            "point and box must have dimension {}",
            net.input_dim
        )));
    }
    if !input_box.contains(x) {
        return Err(Error::Input("attack point lies outside the box".into()));
    }
    let lower = (0..x.len())
        .map(|i| if net.monotone.contains(i) { input_box.lower[i] } else { x[i] })
        .collect();
    InputBox::new(lower, x.to_vec())
}

/// Maximizes `f` over the attack region of `x`.
pub fn find_attack(
    net: &MlpNetwork,
    x: &[f64],
    input_box: &InputBox,
    budget: &SolveBudget,
) -> Result<AttackResult> {
    if net.monotone.is_empty() {
        return Err(Error::Input("no monotone features to attack".into()));
    }
    let region = attack_region(net, x, input_box)?;
    let f_x = net.forward(x)?;
    let bounds = layer_bounds(net, &region)?;

    let mut p = MilpProblem::new(Sense::Maximize);
    let mut vars = Vec::new();
    let mut inputs: Vec<Affine> = Vec::new();
    match &net.projection {
        None => {
            for i in 0..net.input_dim {
                if net.monotone.contains(i) {
                    let v = p.add_continuous(format!("x{i}"), region.lower[i], region.upper[i]);
                    vars.push((i, v));
                    inputs.push(Affine::var(v));
                } else {
                    inputs.push(Affine::constant(x[i]));
                }
            }
        }
        Some(proj) => {
            for &i in &proj.monotone {
                let v = p.add_continuous(format!("x{i}"), region.lower[i], region.upper[i]);
                vars.push((i, v));
                inputs.push(Affine::var(v));
            }
            let projected = proj.apply(x);
            inputs.extend(projected[proj.monotone.len()..].iter().map(|&c| Affine::constant(c)));
        }
    }
    let out = encode_forward(&mut p, net, inputs, &bounds)?;
    p.set_objective(Sense::Maximize, out.terms, out.constant);
    let outcome = solve(&p, budget)?;

    let mut result = AttackResult {
        found: false,
        x_adv: None,
        f_x,
        f_adv: None,
        gap: None,
        solver_status: outcome.status.to_string(),
        proven: outcome.status == MilpStatus::Optimal,
    };
    if let Some((_, sol)) = &outcome.incumbent {
        let mut x_adv = x.to_vec();
        for &(i, v) in &vars {
            x_adv[i] = sol[v.0].clamp(region.lower[i], region.upper[i]);
        }
        let f_adv = net.forward(&x_adv)?;
        if f_adv > f_x + STRICTNESS_MARGIN {
            result.found = true;
            result.proven = true;
            result.gap = Some(f_adv - f_x);
            result.f_adv = Some(f_adv);
            result.x_adv = Some(x_adv);
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Activation, Layer, MonotoneSpec};

    fn neg_relu() -> MlpNetwork {
        MlpNetwork::new(
            1,
            MonotoneSpec::increasing(vec![0]).unwrap(),
            vec![
                Layer::from_rows(&[vec![1.0]], vec![0.0], Activation::Relu).unwrap(),
                Layer::from_rows(&[vec![-1.0]], vec![0.0], Activation::Identity).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn decreasing_function_is_attacked_at_one() {
        let r = find_attack(&neg_relu(), &[1.0], &InputBox::unit(1), &SolveBudget::default())
            .unwrap();
        assert!(r.found);
        assert_eq!(r.x_adv, Some(vec![0.0]));
        assert_eq!(r.f_x, -1.0);
        assert_eq!(r.f_adv, Some(0.0));
        assert_eq!(r.gap, Some(1.0));
    }

    #[test]
    fn attack_at_the_lower_corner_is_impossible() {
        let r = find_attack(&neg_relu(), &[0.0], &InputBox::unit(1), &SolveBudget::default())
            .unwrap();
        assert!(!r.found && r.proven);
        assert_eq!(r.solver_status, "optimal");
    }

    #[test]
    fn non_monotone_features_stay_fixed() {
        // f = x0 - x1 with only x1 monotone: lowering x1 raises f.
        let net = MlpNetwork::new(
            2,
            MonotoneSpec::increasing(vec![1]).unwrap(),
            vec![
                Layer::from_rows(&[vec![1.0, -1.0]], vec![0.0], Activation::Identity).unwrap(),
                Layer::from_rows(&[vec![1.0]], vec![0.0], Activation::Identity).unwrap(),
            ],
        )
        .unwrap();
        let r = find_attack(&net, &[0.3, 0.8], &InputBox::unit(2), &SolveBudget::default()).unwrap();
        assert!(r.found);
        assert_eq!(r.x_adv, Some(vec![0.3, 0.0]));
    }

    #[test]
    fn point_outside_box_is_rejected() {
        assert!(find_attack(&neg_relu(), &[1.5], &InputBox::unit(1), &SolveBudget::default()).is_err());
    }
}
