//! Generalized Fourier transform, spectral multipliers `φ(H)` and the
//! kernels of dyadic band operators.

mod kernel;
mod transform;

pub use kernel::{
    band_quadrature, build_band_kernel, covariance_check, decay_profile, kernel_value,
    kernel_values, max_band, CovarianceReport, DecayProfile, MultiplierKernel,
};
pub use transform::{
    apply_multiplier, forward_transform, inverse_transform, SpectralBasis, TransformCoefficients,
};
