//! Pseudospectral laboratory for two-dimensional ideal flows on the
//! periodic torus.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] - fields, transforms, Biot-Savart, Leray, dealiased
//!   products and norms;
//! * [`lp`] - dyadic Littlewood-Paley frames, Besov norms and the
//!   frequency-localised energy diagnostics;
//! * [`fluid`] - Euler / Navier-Stokes vorticity solvers;
//! * [`plasma`] - the normal-structure Euler-Maxwell system and its MHD
//!   limit;
//! * [`harness`] - rate fitting and the three convergence studies;
//! * [`experiment`] - configuration files, reproducible runs and outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod fluid;
pub mod harness;
pub mod lp;
pub mod par;
pub mod plasma;
pub mod spectral;

pub use error::{LabError, Result};
