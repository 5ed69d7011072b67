//! Monte Carlo harness tying simulation to the limit theory: joint laws of
//! the normalised maxima, tail-probability ratios and the dense-grid study.
//!
//! Strong dependence (r > 0) is simulated with the finite-horizon mixture
//! field; results mark this as a mixture-model verification.

mod config;
mod dense;
mod joint;
mod sampling;
mod stats;
mod tail;

pub use config::{
    resolve_constants, stride, ConstantsSpec, ExperimentConfig, PickandsProtocol, ResolvedConstants,
    DEFAULT_EXPERIMENT_WORK_CAP, DEFAULT_PROXY_REFINEMENT,
};
pub use dense::{dense_difference_study, DenseRow, DenseStudy, DenseStudyConfig};
pub use joint::{run_horizon_ladder, run_joint_experiment, ExperimentResult, JointPoint};
pub use sampling::field_maxima;
pub use stats::{binomial_se, ks_statistic, wilson_interval};
pub use tail::{tail_ratio_check, TailCheckConfig, TailKind, TailRow, TailTable, MIN_HITS};
