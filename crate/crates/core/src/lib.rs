//! Spectral calculus of the Pöschl–Teller operator
//! `H = -d²/dx² - λ(λ-1) a² sech²(a(x-h))`.
//!
//! The crate covers closed-form distorted plane waves and bound states,
//! the generalized Fourier transform and spectral multipliers `φ(H)`,
//! dyadic Littlewood–Paley banks, Besov and Triebel–Lizorkin quasi-norms,
//! the propagator `e^{-itH}`, and a battery of numerical checks.

pub mod error;
pub mod numerics;
pub mod littlewood_paley;
pub mod scattering;
pub mod spectral;
pub mod spaces;
pub mod evolution;
pub mod verify;

pub use error::{Error, Result};
