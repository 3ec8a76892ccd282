//! Layer-wise verification of a whole network.

use std::fmt;
use std::time::Instant;

use monocert_milp::{solve, solve_with_target, MilpStatus, SolveBudget};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encode::encode_gradient_min;
use super::smooth::encode_general_activation_min;
use crate::model::{
    block_input_box, decompose_blocks, monotone_structure, propagate_bounds, Activation, BlockBounds,
    InputBox, MlpNetwork, TwoLayerBlock,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureStatus {
    /// The certified lower bound is non-negative.
    Certified,
    /// An optimal solution with negative derivative exists.
    Refuted,
    /// Negative bound without a proof of optimality.
    Undecided,
}

impl fmt::Display for FeatureStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureStatus::Certified => "certified",
            FeatureStatus::Refuted => "refuted",
            FeatureStatus::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureResult {
    /// Block output whose derivative is bounded.
    pub output: usize,
    /// Block input coordinate.
    pub feature: usize,
    #[serde(with = "super::report::float")]
    pub bound: f64,
    #[serde(default, with = "super::report::opt_float")]
    pub incumbent: Option<f64>,
    pub status: FeatureStatus,
    pub solver_status: String,
    pub nodes: usize,
    pub binaries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub block_index: usize,
    pub per_feature: Vec<FeatureResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub wall_time_secs: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub per_block: Vec<BlockReport>,
    /// Minimum of all per-feature bounds; `+inf` when nothing needs
    /// checking.
    #[serde(with = "super::report::float")]
    pub u_alpha: f64,
    pub certified: bool,
    pub status: FeatureStatus,
    pub metadata: ReportMetadata,
}

impl VerificationReport {
    pub fn features(&self) -> impl Iterator<Item = (usize, &FeatureResult)> {
        self.per_block
            .iter()
            .flat_map(|b| b.per_feature.iter().map(move |f| (b.block_index, f)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub budget: SolveBudget,
    /// Stop each program once its bound reaches zero instead of solving
    /// it to optimality.
    pub early_stop: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Intervals per unit for smooth activations.
    pub partition: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            budget: SolveBudget::default(),
            early_stop: true,
            threads: None,
            partition: 8,
        }
    }
}

/// Bounds `d (output) / d (feature)` for one block over `bounds.input`.
pub fn verify_block_feature(
    block: &TwoLayerBlock,
    bounds: &BlockBounds,
    output: usize,
    feature: usize,
    options: &VerifyOptions,
) -> Result<FeatureResult> {
    let exact = block.first.activation.is_piecewise_linear();
    let problem = if exact {
        encode_gradient_min(block, output, feature, &bounds.input, &bounds.hidden)?
    } else {
        encode_general_activation_min(
            block,
            output,
            feature,
            &bounds.input,
            &bounds.hidden,
            options.partition,
        )?
    };
    let out = if options.early_stop {
        solve_with_target(&problem, &options.budget, Some(0.0))?
    } else {
        solve(&problem, &options.budget)?
    };
    let incumbent = out.incumbent_value();
    let status = if out.certified_bound >= 0.0 {
        FeatureStatus::Certified
    } else if exact && out.status == MilpStatus::Optimal && incumbent.is_some_and(|v| v < 0.0) {
        FeatureStatus::Refuted
    } else {
        FeatureStatus::Undecided
    };
    Ok(FeatureResult {
        output,
        feature,
        bound: out.certified_bound,
        incumbent,
        status,
        solver_status: out.status.to_string(),
        nodes: out.stats.nodes_explored,
        binaries: problem.num_binaries(),
    })
}

/// Verifies every block in every coordinate that carries monotone signal.
pub fn verify_network(
    net: &MlpNetwork,
    input_box: &InputBox,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    if net.monotone.is_empty() {
        return Err(Error::Input("no monotone features to verify".into()));
    }
    net.validate()?;
    let start = Instant::now();
    let blocks = decompose_blocks(net)?;
    let bounds = propagate_bounds(&blocks, &block_input_box(net, input_box)?)?;
    let structure = monotone_structure(net);
    let tasks: Vec<(usize, usize, usize)> = structure
        .iter()
        .enumerate()
        .flat_map(|(k, s)| s.pairs().map(move |(j, l)| (k, j, l)))
        .collect();

    let run = || -> Result<Vec<FeatureResult>> {
        tasks
            .par_iter()
            .map(|&(k, j, l)| verify_block_feature(&blocks[k], &bounds[k], j, l, options))
            .collect()
    };
    let (results, threads) = match options.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            (pool.install(run)?, n)
        }
        None => (run()?, rayon::current_num_threads()),
    };

    let mut per_block: Vec<BlockReport> = (0..blocks.len())
        .map(|block_index| BlockReport {
            block_index,
            per_feature: Vec::new(),
        })
        .collect();
    for ((k, _, _), r) in tasks.iter().zip(results) {
        per_block[*k].per_feature.push(r);
    }
    Ok(summarize(per_block, start.elapsed().as_secs_f64(), threads))
}

pub(crate) fn summarize(per_block: Vec<BlockReport>, wall: f64, threads: usize) -> VerificationReport {
    let all = || per_block.iter().flat_map(|b| &b.per_feature);
    let u_alpha = all().map(|f| f.bound).fold(f64::INFINITY, f64::min);
    let status = if all().any(|f| f.status == FeatureStatus::Refuted) {
        FeatureStatus::Refuted
    } else if all().all(|f| f.status == FeatureStatus::Certified) {
        FeatureStatus::Certified
    } else {
        FeatureStatus::Undecided
    };
    VerificationReport {
        u_alpha,
        certified: u_alpha >= 0.0,
        status,
        metadata: ReportMetadata {
            wall_time_secs: wall,
            threads,
        },
        per_block,
    }
}

/// Whether any hidden layer uses an activation without an exact encoding.
pub fn uses_smooth_activation(net: &MlpNetwork) -> bool {
    net.layers
        .iter()
        .any(|l| matches!(l.activation, Activation::Smooth(_)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Layer, MonotoneSpec};

    fn net(a: &[f64], w: &[f64], b: &[f64]) -> MlpNetwork {
        let rows: Vec<Vec<f64>> = w.iter().map(|&v| vec![v]).collect();
        MlpNetwork::new(
            1,
            MonotoneSpec::increasing(vec![0]).unwrap(),
            vec![
                Layer::from_rows(&rows, b.to_vec(), Activation::Relu).unwrap(),
                Layer::from_rows(&[a.to_vec()], vec![0.0], Activation::Identity).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_neuron_net_is_certified_at_zero() {
        let r = verify_network(
            &net(&[1.0, -0.5], &[1.0, 1.0], &[0.0, -0.5]),
            &InputBox::unit(1),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(r.certified);
        assert_eq!(r.u_alpha, 0.0);
        assert_eq!(r.status, FeatureStatus::Certified);
    }

    #[test]
    fn lone_negative_path_is_refuted() {
        // Unit 1 is active alone for x < 0.5.
        let r = verify_network(
            &net(&[-1.0, 2.0], &[1.0, 1.0], &[0.0, -0.5]),
            &InputBox::unit(1),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(!r.certified);
        assert_eq!(r.u_alpha, -1.0);
        assert_eq!(r.status, FeatureStatus::Refuted);
    }

    #[test]
    fn tiny_budget_leaves_negative_bound_undecided() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        use rand::SeedableRng;
        let n = MlpNetwork::random(
            3,
            &[12],
            MonotoneSpec::increasing(vec![0, 1]).unwrap(),
            &mut rng,
        )
        .unwrap();
        let options = VerifyOptions {
            budget: SolveBudget::with_nodes(1),
            ..VerifyOptions::default()
        };
        let r = verify_network(&n, &InputBox::unit(3), &options).unwrap();
        for (_, f) in r.features() {
            if f.bound < 0.0 {
                assert_ne!(f.status, FeatureStatus::Certified);
            }
            if f.status == FeatureStatus::Refuted {
                assert_eq!(f.solver_status, "optimal");
            }
        }
    }
}
