//! Besov and Triebel–Lizorkin quasi-norms built on the dyadic bank, and
//! experiments comparing them across systems and operators.

mod battery;
mod experiments;
mod norms;

pub use battery::{battery, battery_with_bound_states, TestFunction, BATTERY_VERSION};
pub use experiments::{
    besov_identification, equivalence_experiment, lp_identification, RatioRecord, RatioStats,
};
pub use norms::{
    besov_norm, maximal_norm, norm_from_magnitudes, tl_norm, Family, Flavor, NormContext, NormSpec,
};
