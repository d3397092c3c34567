//! Vorticity-form Euler and Navier-Stokes solvers on the torus.

mod diagnostics;
mod forcing;
mod initial;
mod solver;
pub(crate) mod stepper;

pub use diagnostics::{highfreq_energy_identity, transport_bound_check, EnergyBalance};
pub use forcing::{Forcing, Manufactured, SumForcing, VelocityForcing, VorticityForcing};
pub use initial::{describe_initial_data, make_initial_data, InitialData, InitialReport};
pub(crate) use solver::{cfl_advance, max_speed};
pub use solver::{solve, solve_with, step, FluidConfig, FluidSolver, NormRow, Trajectory};
