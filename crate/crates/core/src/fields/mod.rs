//! Periodic vector fields on the torus [0, 2 pi)^3: spectral and collocation
//! representations, transforms, Fourier norms and Galerkin truncations.

pub mod fft;
mod field;
mod grid;
mod norms;
pub mod reduce;

pub use field::{
    gradient, to_physical, to_spectral, truncate_ball, truncate_cube, GradientField,
    PhysicalField, SpectralField,
};
pub use grid::{Grid, DOMAIN_VOLUME};
pub use norms::{
    grad_l2, norm_hs, norm_l2, norm_lp, norm_lp_spectral, quadrature_samples, NormRecord,
};
