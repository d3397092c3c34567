//! Periodic-torus spectral fields and the differential calculus built on
//! them: Biot-Savart inversion, Leray projection, dealiased products and
//! norms.

mod field;
mod grid;
mod ops;
mod snapshot;
mod state;

pub use field::{RealField, SpectralField};
pub use grid::Grid2D;
pub(crate) use ops::advect_with_gradient;
pub use ops::{
    advect, apply_radial, biot_savart, coefficient, common_grid, curl, curl_of_vertical,
    derivative, divergence, fourier_multiplier, inhomogeneous_sobolev_norm, laplacian,
    leray_project, lp_norm, lp_norm_real, product, sharp_high_pass, sharp_high_pass_strict,
    sharp_low_pass, sobolev_norm, stream_function,
};
pub use snapshot::{Snapshot, MAGIC};
pub use state::FlowState;
