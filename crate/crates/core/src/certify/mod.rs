//! Mixed-integer encodings, layer-wise verification and attack search.

mod attack;
mod deep;
mod encode;
mod report;
mod smooth;
mod verify;

pub use attack::{attack_region, find_attack, AttackResult, STRICTNESS_MARGIN};
pub use deep::{encode_deep_naive, layer_bounds, DEFAULT_PATH_CAP};
pub use encode::{encode_gradient_min, indicator_constraints, relu_constraints, Affine};
pub use smooth::{
    encode_general_activation_min, general_activation_bounds, uniform_partition,
    DerivativeEnvelope,
};
pub use verify::{
    uses_smooth_activation, verify_block_feature, verify_network, BlockReport, FeatureResult,
    FeatureStatus, ReportMetadata, VerificationReport, VerifyOptions,
};
pub(crate) use report::float as report_float;
