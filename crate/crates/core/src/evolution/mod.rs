//! The Schrödinger propagator `e^{-itH}` and norm growth along the flow.

mod decay;
mod propagator;

pub use decay::{
    boundary_leakage, decay_exponent, decay_experiment, evolve, japanese_bracket, DecayReport,
    DecayRow, EvolutionResult, NormSeries, LEAKAGE_LIMIT,
};
pub use propagator::{
    check_phase_resolution, evolution_quadrature, evolve_coeffs, free_gaussian, propagate,
    propagate_with,
};
