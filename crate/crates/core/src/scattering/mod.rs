//! Scattering theory of the well: potentials, distorted plane waves,
//! bound states and phase shifts.

mod bound;
mod continuous;
mod polynomial;
mod potential;
mod waves;

pub use bound::{bound_states, shooting_point_spectrum, BoundState, BoundStateForm};
pub use continuous::{
    continuous_scattering, distance_mod_pi, ode_phase_extraction, ode_phases, phase_gap_formula,
    reduce_mod_pi, ContinuousScattering, FIT_RESIDUAL_LIMIT,
};
pub use polynomial::{ScatteringPolynomial, TPolynomial};
pub use potential::{continuous_point_spectrum, point_spectrum, Potential, Strength};
pub use waves::{
    eigenfunction, orthogonality_integral, reflection, transmission, BoundWave, DistortedWaves,
    Side,
};
