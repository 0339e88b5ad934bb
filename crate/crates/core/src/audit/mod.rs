//! Monte Carlo checks of the privacy argument: adjacent datasets, the
//! nuclear-norm and ℓ₁ sensitivities, the Wishart density ratio and the
//! largest-eigenvalue tail bound.

mod adjacent;
mod privacy;
mod sensitivity;
mod tail;

pub use adjacent::{
    delta_matrix, random_ball_vector, random_unit_vector, sample_adjacent_pair,
    sample_differing_columns, AdjacentPair, PairRegime,
};
pub use privacy::{
    density_log_ratio, privacy_ratio_audit, OffendingTrial, PrivacyAuditReport, PRIVACY_TOLERANCE,
};
pub use sensitivity::{
    l1_objective, l1_sensitivity_bracket, nuclear_sensitivity_check, nuclear_sensitivity_grid,
    L1Bracket, NuclearGridReport, NuclearSensitivityReport, NUCLEAR_BOUND, NUCLEAR_TOLERANCE,
    RANK_TOLERANCE,
};
pub use tail::{
    tail_bound_audit, tail_bound_sweep, TailBoundParams, TailBoundReport, MIN_TAIL_TRIALS,
};
