//! Two-dimensional Euler-Maxwell system in the normal structure
//! (`u`, `E` horizontal, `B = (0, 0, b)`) and its MHD limit.

mod em;
mod mhd;
mod propagator;
mod state;

pub(crate) use em::h1_pair;
pub use em::{
    ampere_field, ampere_residual, dissipation_rate, lorentz_forcing_diag, solve_em, solve_em_with,
    step_em, AmpereSeries, EmRow, EmSolver, EmTrajectory, LorentzDiag, PlasmaConfig,
};
pub use mhd::{solve_mhd, step_mhd, MhdSolver};
pub use propagator::{mode_propagator, phi, phi_matrix};
pub use state::{cross_vertical, curl_b, em_energy, ohm_current, EMState, MHDState};
