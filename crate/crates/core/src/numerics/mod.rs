//! Grids, quadrature, discrete norms, complex log-gamma and an adaptive ODE
//! integrator.

mod fd;
mod gamma;
mod grid;
mod ode;

pub use fd::{second_derivative, FD_MARGIN};
pub use gamma::{gamma_complex, log_gamma_complex};
pub use grid::{lp_norm, lp_norm_real, Band, FunctionSample, Grid, KQuadrature};
pub use ode::{
    integrate_schrodinger, integrate_schrodinger_with, IntegratorOptions, SchrodingerIntegrator,
    State,
};
