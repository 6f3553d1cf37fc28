//! Numerical checks of the inequalities, scaling laws and decay estimates
//! satisfied by the extremals.

mod decay;
mod inequalities;

pub use decay::{
    decay_constants, directional_profile_check, tail_report, AxisRate, AxisVerdict, DecayConstants,
    DecayReport,
};
pub use inequalities::{
    confinement_upper_bound, equivalence_band, gns_check, inradius_bound_check, scaling_check,
    subadditivity_check, unit_ball_volume, EquivalenceBand, EquivalencePair, ScalingCheck,
};
