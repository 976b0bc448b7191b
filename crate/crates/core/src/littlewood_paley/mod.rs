//! Dyadic window systems, band analysis and synthesis, and maximal functions.

mod bank;
mod maximal;
mod windows;

pub use bank::{
    analysis, analysis_from_coeffs, analysis_with, basis_for_bands, check_band_limit, homogeneous_analysis_with, homogeneous_from_coeffs,
    homogeneous_range_with, synthesis, synthesis_with, BandDecomposition,
};
pub use maximal::{
    fefferman_stein_ratio, hl_maximal, hl_maximal_power, hl_maximal_values, peetre_from_coeffs,
    peetre_maximal, peetre_sup, peetre_sup_at,
};
pub use windows::{DyadicSystem, Variant};
