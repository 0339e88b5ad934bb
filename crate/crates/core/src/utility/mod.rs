//! Utility of the released covariance: top-`k` subspace recovery, top
//! eigenvector closeness and sample complexity, and low-rank approximation
//! error.

mod complexity;
mod lowrank;
mod projector;
mod subspace;
mod synthetic;

pub use complexity::{
    close_approx_audit, close_approx_spectrum, sample_complexity_bound, CloseApproxParams,
    CloseApproxReport, SampleSize,
};
pub use lowrank::{
    low_rank_error_audit, low_rank_sweep, LowRankReport, LowRankSweep, LowRankTrial,
    LOW_RANK_TOLERANCE,
};
pub use projector::{
    projector_distance, top_k_subspace, Projector, ProjectorDistance, PROJECTOR_TOLERANCE,
};
pub use subspace::{
    subspace_closeness_audit, SubspaceClosenessResult, IDENTITY_TOLERANCE, SUBSPACE_TOLERANCE,
    WEYL_TOLERANCE,
};
pub use synthetic::{random_orthogonal, synthetic_dataset};
