//! Littlewood-Paley analysis at a movable cutoff scale.

mod besov;
mod diagnostics;
mod frame;
pub mod profile;

pub use besov::{besov_norm, besov_norm_homogeneous, extrapolation_split, ExtrapolationSplit};
pub use diagnostics::{
    cumulative_trapezoid, iden1_residual, iden1_terms, j_decomposition, transfer_integrands,
    IdentityTerms, JSeries, TransferIntegrands,
};
pub use frame::{BlockDecomposition, DyadicFrame, LowPass};
